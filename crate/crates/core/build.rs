use std::process::Command;

fn main() {
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/index");
    let out = Command::new("git").args(["describe", "--tags", "--always", "--dirty"]).output();
    if let Ok(o) = out {
        if o.status.success() {
            let v = String::from_utf8_lossy(&o.stdout).trim().to_string();
            if !v.is_empty() {
                println!("cargo:rustc-env=HAM_CLT_GIT_DESCRIBE=v{}-{v}", env!("CARGO_PKG_VERSION"));
            }
        }
    }
}
