//! Overdamped Brownian motion three ways: Euler–Maruyama trajectories of
//! `ẋ = −V'(x)/(mγ) + R(t)` with `⟨R(t)R(t')⟩ = 2D δ(t−t')`, the
//! drift-diffusion equation for `P(x,t)`, and the time-sliced path-integral
//! transfer matrix.
//!
//! Noise strength convention: every realization here uses the white-noise
//! intensity `2D`, so one slice of length `ε` has `Var R_k = 2D/ε` and the
//! short-time transition kernel has variance `2Dε`.

mod fokker_planck;
mod langevin;
mod params;
mod pathintegral;

pub use fokker_planck::{boltzmann_density, fokker_planck_evolve, FokkerPlanckScheme, STABILITY_TOLERANCE};
pub use langevin::{
    functional_form_simulate, langevin_noise, langevin_simulate, noise_moment_check, InitialSpec, NoiseMoments,
    Recording, TrajectoryEnsemble, STABILITY_LIMIT,
};
pub use params::BrownianParams;
pub use pathintegral::{brownian_pathintegral_propagator, DriftPoint, TransferMatrix, MIN_KERNEL_POINTS};
