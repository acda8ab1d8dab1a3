//! One-dimensional external potentials with closed-form derivatives.
//!
//! Every potential is stored as a polynomial of degree at most four,
//! `V(x) = c0 + c1 x + c2 x^2 + c3 x^3 + c4 x^4`, so derivatives up to third
//! order are exact. The named kinds only decide how the coefficients are
//! built and how the potential is described in reports.

use crate::error::{usage, Result};
use crate::scalar::Real;

/// Which preset the coefficients were built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind<T> {
    /// `V = m ω² x² / 2`.
    Harmonic { omega: T },
    /// `V = λ x⁴ / 4`.
    Quartic { lambda: T },
    /// `V = m ω² x² / 2 + g x³`.
    CubicPerturbedHarmonic { omega: T, g: T },
    /// Arbitrary coefficients.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential1D<T> {
    kind: PotentialKind<T>,
    coeffs: [T; 5],
    mass: T,
}

impl<T: Real> Potential1D<T> {
    pub fn harmonic(mass: T, omega: T) -> Result<Self> {
        check_mass(mass)?;
        let c2 = T::lit(0.5) * mass * omega * omega;
        Ok(Self {
            kind: PotentialKind::Harmonic { omega },
            coeffs: [T::zero(), T::zero(), c2, T::zero(), T::zero()],
            mass,
        })
    }

    pub fn quartic(mass: T, lambda: T) -> Result<Self> {
        check_mass(mass)?;
        Ok(Self {
            kind: PotentialKind::Quartic { lambda },
            coeffs: [T::zero(), T::zero(), T::zero(), T::zero(), lambda / T::lit(4.0)],
            mass,
        })
    }

    pub fn cubic_perturbed_harmonic(mass: T, omega: T, g: T) -> Result<Self> {
        check_mass(mass)?;
        let c2 = T::lit(0.5) * mass * omega * omega;
        Ok(Self {
            kind: PotentialKind::CubicPerturbedHarmonic { omega, g },
            coeffs: [T::zero(), T::zero(), c2, g, T::zero()],
            mass,
        })
    }

    /// Polynomial with coefficients `c0, c1, ...` in increasing degree.
    pub fn polynomial(mass: T, coeffs: &[T]) -> Result<Self> {
        check_mass(mass)?;
        if coeffs.len() > 5 {
            return usage(format!(
                "polynomial potentials are limited to degree 4, got {} coefficients",
                coeffs.len()
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return usage("polynomial coefficients must be finite");
        }
        let mut c = [T::zero(); 5];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Self {
            kind: PotentialKind::Polynomial,
            coeffs: c,
            mass,
        })
    }

    /// Free particle, `V ≡ 0`.
    pub fn free(mass: T) -> Result<Self> {
        Self::polynomial(mass, &[])
    }

    pub fn kind(&self) -> PotentialKind<T> {
        self.kind
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn coefficients(&self) -> &[T; 5] {
        &self.coeffs
    }

    /// Derivative of order `order` at `x`; orders above three are rejected.
    pub fn eval(&self, x: T, order: u8) -> Result<T> {
        match order {
            0 => Ok(self.value(x)),
            1 => Ok(self.d1(x)),
            2 => Ok(self.d2(x)),
            3 => Ok(self.d3(x)),
            _ => usage(format!("unsupported derivative order {order} (0..=3)")),
        }
    }

    #[inline]
    pub fn value(&self, x: T) -> T {
        let c = &self.coeffs;
        (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0]
    }

    #[inline]
    pub fn d1(&self, x: T) -> T {
        let c = &self.coeffs;
        ((T::lit(4.0) * c[4] * x + T::lit(3.0) * c[3]) * x + T::lit(2.0) * c[2]) * x + c[1]
    }

    #[inline]
    pub fn d2(&self, x: T) -> T {
        let c = &self.coeffs;
        (T::lit(12.0) * c[4] * x + T::lit(6.0) * c[3]) * x + T::lit(2.0) * c[2]
    }

    #[inline]
    pub fn d3(&self, x: T) -> T {
        let c = &self.coeffs;
        T::lit(24.0) * c[4] * x + T::lit(6.0) * c[3]
    }

    /// True when the third derivative vanishes identically.
    pub fn is_quadratic(&self) -> bool {
        self.coeffs[3] == T::zero() && self.coeffs[4] == T::zero()
    }

    /// Largest `|V''|` over `[lo, hi]`. `V''` is at most quadratic, so the
    /// extremum sits at an endpoint or at the vertex.
    pub fn max_abs_d2(&self, lo: T, hi: T) -> T {
        let mut m = self.d2(lo).abs().max(self.d2(hi).abs());
        let a = T::lit(12.0) * self.coeffs[4];
        if a != T::zero() {
            let vertex = -T::lit(6.0) * self.coeffs[3] / (T::lit(2.0) * a);
            if vertex > lo && vertex < hi {
                m = m.max(self.d2(vertex).abs());
            }
        }
        m
    }

    pub fn describe(&self) -> String {
        match self.kind {
            PotentialKind::Harmonic { omega } => format!("harmonic (omega = {omega})"),
            PotentialKind::Quartic { lambda } => format!("quartic (lambda = {lambda})"),
            PotentialKind::CubicPerturbedHarmonic { omega, g } => {
                format!("cubic-perturbed harmonic (omega = {omega}, g = {g})")
            }
            PotentialKind::Polynomial => {
                let c = &self.coeffs;
                format!(
                    "polynomial (c0..c4 = {}, {}, {}, {}, {})",
                    c[0], c[1], c[2], c[3], c[4]
                )
            }
        }
    }
}

fn check_mass<T: Real>(mass: T) -> Result<()> {
    if !(mass > T::zero() && mass.is_finite()) {
        return usage(format!("mass must be positive and finite, got {mass}"));
    }
    Ok(())
}
