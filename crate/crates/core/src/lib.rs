//! Numerical path-integral laboratory.
//!
//! Side-by-side realizations of quantum evolution of `P(x,t) = |ψ(x,t)|²`
//! and of overdamped Brownian motion, each as a differential equation and as
//! a time-sliced path integral, plus the semiclassical quasi-Langevin
//! process whose auxiliary force is weighted by the (non-positive) Airy
//! functional and therefore has to be simulated with signed weights.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `f64` aliases at the crate root are what the command line tool uses.

pub mod brownian;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod potential;
pub mod quantum;
pub mod rng;
pub mod scalar;
pub mod semiclassical;
pub mod stats;

pub use error::{Error, Result};
pub use grid::{SpatialGrid, TimeGrid};
pub use potential::{Potential1D, PotentialKind};
pub use rng::RngStream;
pub use scalar::Real;

pub type Potential = Potential1D<f64>;
pub type Grid = SpatialGrid<f64>;
pub type Times = TimeGrid<f64>;
pub type WaveFunction = quantum::WaveFunction<f64>;
pub type DensityMatrix = quantum::DensityMatrix<f64>;
pub type DensityMatrixXY = quantum::DensityMatrixXY<f64>;
pub type WignerState = quantum::WignerState<f64>;
pub type BrownianParams = brownian::BrownianParams<f64>;
pub type TrajectoryEnsemble = brownian::TrajectoryEnsemble<f64>;
pub type SignedEnsemble = semiclassical::SignedEnsemble<f64>;
