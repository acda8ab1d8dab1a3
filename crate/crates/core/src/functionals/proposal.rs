//! Sampling the auxiliary force against `|Ai|` with the sign carried as a
//! weight.
//!
//! `|Ai(u)| ~ |u|^{-1/4}` for `u → -∞` is not integrable, so the proposal
//! lives on a truncated support `[-L, L₊]`, with `L₊` the first point where
//! `Ai` drops below `1e-12`. The density is tabulated on a fine uniform
//! lattice and inverted cell by cell (piecewise-constant within a cell).

use rand::Rng;

use crate::error::{usage, Result};
use crate::functionals::airy::airy_ai;
use crate::functionals::weights::Sign;
use crate::scalar::Real;

/// Ai falls below this on the positive side at the upper support edge.
pub const UPPER_TAIL_LEVEL: f64 = 1e-12;
pub const DEFAULT_TRUNCATION: f64 = 20.0;
const CELL_WIDTH: f64 = 1e-3;

/// One draw: rescaled force value and the sign of `Ai` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryDraw<T> {
    pub value: T,
    pub sign: Sign,
}

/// Tabulated inverse-CDF sampler for `|Ai|` on `[-L, L₊]`.
#[derive(Debug, Clone)]
pub struct AiryProposal {
    lower: f64,
    upper: f64,
    // cdf[i] = mass of cells 0..i; cdf[0] = 0, cdf[n] = abs_mass.
    cdf: Vec<f64>,
    abs_mass: f64,
    signed_mass: f64,
}

impl AiryProposal {
    pub fn new(truncation: f64) -> Result<Self> {
        if !(truncation > 0.0 && truncation.is_finite()) {
            return usage(format!("truncation L must be positive, got {truncation}"));
        }
        let upper = upper_support_edge();
        let lower = -truncation;
        let n = ((upper - lower) / CELL_WIDTH).ceil() as usize;
        let h = (upper - lower) / n as f64;
        let mut cdf = Vec::with_capacity(n + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        let mut signed = 0.0;
        let mut prev = airy_ai(lower);
        for i in 1..=n {
            let u = lower + i as f64 * h;
            let cur = airy_ai(u);
            // Cell integral of |Ai| with a zero crossing handled piecewise.
            let cell_abs = if prev * cur < 0.0 {
                let frac = prev.abs() / (prev.abs() + cur.abs());
                0.5 * h * (frac * prev.abs() + (1.0 - frac) * cur.abs())
            } else {
                0.5 * h * (prev.abs() + cur.abs())
            };
            acc += cell_abs;
            signed += 0.5 * h * (prev + cur);
            cdf.push(acc);
            prev = cur;
        }
        Ok(Self {
            lower,
            upper,
            cdf,
            abs_mass: acc,
            signed_mass: signed,
        })
    }

    pub fn truncation(&self) -> f64 {
        -self.lower
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    /// `∫|Ai|` over the support: the importance-weight magnitude of one draw.
    pub fn abs_mass(&self) -> f64 {
        self.abs_mass
    }

    /// `∫Ai` over the support.
    pub fn signed_mass(&self) -> f64 {
        self.signed_mass
    }

    /// Expected sign of one draw, `∫Ai / ∫|Ai|`.
    pub fn expected_sign(&self) -> f64 {
        self.signed_mass / self.abs_mass
    }

    fn cell_width(&self) -> f64 {
        (self.upper - self.lower) / (self.cdf.len() - 1) as f64
    }

    pub fn sample<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> AiryDraw<T> {
        let target = rng.random::<f64>() * self.abs_mass;
        // First index with cdf[i] > target, minus one, is the cell.
        let i = self.cdf.partition_point(|&c| c <= target).clamp(1, self.cdf.len() - 1) - 1;
        let mass = self.cdf[i + 1] - self.cdf[i];
        let frac = if mass > 0.0 {
            ((target - self.cdf[i]) / mass).clamp(0.0, 1.0)
        } else {
            0.5
        };
        let u = self.lower + (i as f64 + frac) * self.cell_width();
        let u = u.clamp(self.lower, self.upper);
        AiryDraw {
            value: T::lit(u),
            sign: Sign::of(airy_ai(u)),
        }
    }
}

/// Smallest `x > 0` with `Ai(x) < 1e-12`, to 1e-6.
pub fn upper_support_edge() -> f64 {
    let (mut lo, mut hi) = (5.0, 20.0);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if airy_ai(mid) < UPPER_TAIL_LEVEL {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Convenience one-shot draw.
pub fn airy_proposal_sample<T: Real, R: Rng + ?Sized>(
    proposal: &AiryProposal,
    rng: &mut R,
) -> AiryDraw<T> {
    proposal.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn rejects_nonpositive_truncation() {
        assert!(AiryProposal::new(0.0).is_err());
        assert!(AiryProposal::new(-3.0).is_err());
    }

    #[test]
    fn upper_edge_is_where_tail_vanishes() {
        let e = upper_support_edge();
        assert!(airy_ai(e) < 1e-12 && airy_ai(e - 1e-3) >= 1e-12);
        assert!(e > 9.0 && e < 12.0, "{e}");
    }

    #[test]
    fn samples_stay_in_support() {
        let p = AiryProposal::new(20.0).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let (lo, hi) = p.support();
        for _ in 0..100_000 {
            let d: AiryDraw<f64> = p.sample(&mut rng);
            assert!(d.value >= lo && d.value <= hi);
        }
    }

    #[test]
    fn negative_draws_need_the_first_lobe() {
        let mut rng = RngStream::new(2, 0).rng();
        let shallow = AiryProposal::new(2.0).unwrap();
        let deep = AiryProposal::new(3.0).unwrap();
        let neg = |p: &AiryProposal, rng: &mut rand_chacha::ChaCha8Rng| {
            (0..50_000)
                .filter(|_| p.sample::<f64, _>(rng).sign == Sign::Minus)
                .count()
        };
        assert_eq!(neg(&shallow, &mut rng), 0);
        assert!(neg(&deep, &mut rng) > 0);
    }
}
