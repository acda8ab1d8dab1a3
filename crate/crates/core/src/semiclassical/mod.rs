//! Classical-limit propagation and the signed quasi-Langevin process.
//!
//! Expanding the density-matrix exponent to fourth order in `ξ` and
//! integrating `ξ` slice by slice leaves Newton's equation with an extra
//! force `ħ φ(x) R(t)`, `φ = (V'''/8ħ)^{1/3}`, where each `R_k` is weighted
//! by `Ai(ε^{2/3} R_k)`. Because `Ai` changes sign, `R` cannot be sampled as
//! a random process; here it is drawn from `|Ai|` and the sign is carried
//! as a weight. Observables are ratio estimates, and the mean sign measures
//! how much signal survives the cancellation.

mod estimators;
mod evolve;
mod phi;
mod sampling;

pub use estimators::{
    ratio_density, ratio_estimate, ratio_estimate_values, sign_diagnostics, weight_diagnostics, Observable,
    SignDiagnostics,
};
pub use evolve::{
    classical_evolve, quasi_langevin_simulate, QuasiLangevinConfig, SignedEnsemble, DEGENERATE_THRESHOLD,
    ENERGY_DRIFT_LIMIT,
};
pub use phi::{phi, PhiField};
pub use sampling::{sample_initial_conditions, NEGATIVITY_TOLERANCE};
