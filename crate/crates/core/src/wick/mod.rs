//! Finite Gaussian structure for simulation in d = 1: cell integrals of the
//! noise, symmetric coefficient tensors, Hermite/Wick evaluation of multiple
//! integrals and discrete Malliavin derivatives.

pub mod grid;
pub mod malliavin;
pub mod sampling;
pub mod tensor;

pub use grid::NoiseGrid;
pub use malliavin::{derivative, second_derivative, DominationReport};
pub use sampling::{project_sum, simulate, solution_sum, spatial_integral_sum, ChaosSum, SolutionSamples};
pub use tensor::{project_kernel, ProjectedKernel, SymTensor, WickForm};
