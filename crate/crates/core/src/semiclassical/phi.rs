use crate::error::{usage, Result};
use crate::potential::Potential1D;
use crate::scalar::Real;

/// Coupling of the auxiliary force, `φ(x) = (V'''(x)/8ħ)^{1/3}` with the
/// real cube root, so `φ` has the sign of `V'''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiField<T> {
    pot: Potential1D<T>,
    hbar: T,
}

impl<T: Real> PhiField<T> {
    pub fn new(pot: Potential1D<T>, hbar: T) -> Result<Self> {
        if !(hbar > T::zero() && hbar.is_finite()) {
            return usage(format!("hbar must be positive, got {hbar}"));
        }
        Ok(Self { pot, hbar })
    }

    pub fn potential(&self) -> &Potential1D<T> {
        &self.pot
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn eval(&self, x: T) -> T {
        (self.pot.d3(x) / (T::lit(8.0) * self.hbar)).cbrt()
    }
}

pub fn phi<T: Real>(field: &PhiField<T>, x: T) -> T {
    field.eval(x)
}
