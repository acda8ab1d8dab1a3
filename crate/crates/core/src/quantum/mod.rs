//! Quantum references: split-step wave-function evolution, density matrices
//! in both frames, the Wigner transform and the density-matrix path integral.

pub mod density;
pub mod pathintegral;
pub mod splitstep;
pub mod wavefunction;
pub mod wigner;

pub use density::{to_relative_frame, DensityMatrix, DensityMatrixXY};
pub use pathintegral::{
    propagate_density_matrix_pathintegral, relative_frame_kernel, short_time_kernel, ComplexMatrix, KernelKind,
    PropagatedDensity,
};
pub use splitstep::{evolve_schrodinger, SplitStep};
pub use wavefunction::{make_gaussian_packet, probability_density, WaveFunction};
pub use wigner::{wigner_transform, WignerState};
