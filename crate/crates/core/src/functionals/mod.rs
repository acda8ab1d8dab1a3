//! Discretized weight functionals: the Airy functional and the scalar Airy
//! function it rests on, the Gaussian (Onsager–Machlup) functional, and the
//! `|Ai|` proposal used to sample the auxiliary force.
//!
//! The Δ-functional is never evaluated as a number. Its role, selecting the
//! single path on which its argument vanishes, is played by the deterministic
//! update steps in [`crate::brownian`] and [`crate::semiclassical`].
//!
//! The measure factor `∏ 1/φ(x_k)` that appears before the auxiliary force is
//! introduced is, up to constants, the Jacobian of the Δ-functional's
//! rescaling `δ(g/c) = |c| δ(g)`. Which of the two bookkeepings to use is
//! exposed as a switch on the quasi-Langevin sampler rather than decided here.

pub mod airy;
pub mod proposal;
pub mod weights;

pub use airy::{airy_ai, airy_ai_and_derivative, airy_ai_prime};
pub use proposal::{airy_proposal_sample, AiryDraw, AiryProposal, DEFAULT_TRUNCATION};
pub use weights::{
    airy_slice_weight, gaussian_path_weight, log_gaussian_path_weight, LogWeight, Sign,
    SliceWeight,
};
