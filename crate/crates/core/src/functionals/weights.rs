//! Per-slice weights of the discretized Airy and Gaussian path functionals.

use crate::functionals::airy::airy_ai;
use crate::scalar::Real;

/// Sign of a weight factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of<T: Real>(v: T) -> Self {
        if v < T::zero() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// One factor of a signed path weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceWeight<T> {
    pub magnitude: T,
    pub sign: Sign,
}

impl<T: Real> SliceWeight<T> {
    pub fn new(value: T) -> Self {
        Self {
            magnitude: value.abs(),
            sign: Sign::of(value),
        }
    }

    pub fn value(&self) -> T {
        self.sign.value::<T>() * self.magnitude
    }
}

/// Running product of slice weights kept as `(ln|w|, sign)` so that long
/// products neither underflow nor overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWeight<T> {
    pub log_magnitude: T,
    pub sign: Sign,
}

impl<T: Real> Default for LogWeight<T> {
    fn default() -> Self {
        Self::one()
    }
}

impl<T: Real> LogWeight<T> {
    pub fn one() -> Self {
        Self {
            log_magnitude: T::zero(),
            sign: Sign::Plus,
        }
    }

    pub fn mul_slice(&mut self, w: SliceWeight<T>) {
        self.log_magnitude = self.log_magnitude + w.magnitude.ln();
        self.sign = self.sign * w.sign;
    }

    pub fn mul_log(&mut self, log_magnitude: T, sign: Sign) {
        self.log_magnitude = self.log_magnitude + log_magnitude;
        self.sign = self.sign * sign;
    }

    pub fn value(&self) -> T {
        self.sign.value::<T>() * self.log_magnitude.exp()
    }
}

/// Per-slice factor of the Airy functional for slice argument `f_k`.
///
/// Substituting `u = ε^{1/3} η` in `∫dη exp{iε[η f + η³/3]}` gives
/// `2π ε^{-1/3} Ai(ε^{2/3} f)`; the constant `2π ε^{-1/3}` is dropped because
/// every estimator built on these weights is ratio-normalized.
pub fn airy_slice_weight<T: Real>(f_k: T, epsilon: T) -> SliceWeight<T> {
    debug_assert!(epsilon > T::zero());
    SliceWeight::new(airy_ai(epsilon.powf(T::lit(2.0 / 3.0)) * f_k))
}

/// Natural log of the discretized Gaussian functional
/// `G_D[R] = exp{-(ε/2D) Σ_k R_k²}`.
pub fn log_gaussian_path_weight<T: Real>(noise: &[T], diffusion: T, epsilon: T) -> T {
    let ss: T = noise.iter().map(|&r| r * r).sum();
    -epsilon / (T::lit(2.0) * diffusion) * ss
}

pub fn gaussian_path_weight<T: Real>(noise: &[T], diffusion: T, epsilon: T) -> T {
    log_gaussian_path_weight(noise, diffusion, epsilon).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn airy_slice_at_zero_argument() {
        for eps in [1e-3, 0.02, 1.0, 7.5] {
            let w = airy_slice_weight(0.0f64, eps);
            assert!((w.magnitude - 0.35503).abs() < 1e-5);
            assert_eq!(w.sign, Sign::Plus);
        }
    }

    #[test]
    fn airy_slice_at_five() {
        let eps: f64 = 0.04;
        let f = 5.0 / eps.powf(2.0 / 3.0);
        let w = airy_slice_weight(f, eps);
        assert!((w.magnitude - 1.0834e-4).abs() < 1e-8);
        assert_eq!(w.sign, Sign::Plus);
    }

    #[test]
    fn airy_slice_negative_lobe() {
        assert_eq!(airy_slice_weight(-3.0f64, 1.0).sign, Sign::Minus);
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian_path_weight(&[0.0f64; 10], 0.7, 0.01), 1.0);
        let (d, eps) = (0.3f64, 0.05);
        let r = (2.0 * d / eps).sqrt();
        assert!((gaussian_path_weight(&[r], d, eps) - (-1.0f64).exp()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn airy_scaling_identity(f in -200.0f64..200.0, eps in 1e-3f64..2.0) {
            let a = airy_slice_weight(f, eps);
            let b = airy_slice_weight(eps.powf(2.0 / 3.0) * f, 1.0);
            prop_assert!((a.value() - b.value()).abs() < 1e-13);
        }

        #[test]
        fn gaussian_weight_decreases(
            r in proptest::collection::vec(-5.0f64..5.0, 1..20),
            idx in 0usize..20,
            bump in 1e-3f64..1.0,
        ) {
            let i = idx % r.len();
            let mut s = r.clone();
            s[i] = s[i].signum() * (s[i].abs() + bump);
            if s[i] == 0.0 { s[i] = bump; }
            prop_assert!(gaussian_path_weight(&s, 0.5, 0.1) < gaussian_path_weight(&r, 0.5, 0.1));
        }

        #[test]
        fn gaussian_product_of_slices(r in proptest::collection::vec(-3.0f64..3.0, 1..40)) {
            let (d, eps) = (0.8, 0.02);
            let mut acc = LogWeight::<f64>::one();
            for &x in &r {
                acc.mul_slice(SliceWeight::new(gaussian_path_weight(&[x], d, eps)));
            }
            let direct = log_gaussian_path_weight(&r, d, eps);
            prop_assert!((acc.log_magnitude - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }
}
