use crate::error::{usage, Result};
use crate::scalar::Real;

/// Physical constants of an overdamped particle. `D` and `β` are derived on
/// every call, so `D = k_B T/(mγ)` holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianParams<T> {
    mass: T,
    gamma: T,
    temperature: T,
    k_b: T,
}

impl<T: Real> BrownianParams<T> {
    /// `temperature = 0` is accepted and gives noiseless gradient flow.
    pub fn new(mass: T, gamma: T, temperature: T, k_b: T) -> Result<Self> {
        for (name, v) in [("mass", mass), ("gamma", gamma), ("k_B", k_b)] {
            if !(v > T::zero() && v.is_finite()) {
                return usage(format!("{name} must be positive, got {v}"));
            }
        }
        if !(temperature >= T::zero() && temperature.is_finite()) {
            return usage(format!("temperature must be non-negative, got {temperature}"));
        }
        Ok(Self {
            mass,
            gamma,
            temperature,
            k_b,
        })
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn k_b(&self) -> T {
        self.k_b
    }

    /// `D = k_B T/(mγ)`.
    pub fn diffusion(&self) -> T {
        self.k_b * self.temperature / (self.mass * self.gamma)
    }

    /// `β = 1/(k_B T)`; infinite at zero temperature.
    pub fn beta(&self) -> T {
        T::one() / (self.k_b * self.temperature)
    }

    /// `1/(mγ)`, the drift per unit force.
    pub fn mobility(&self) -> T {
        T::one() / (self.mass * self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let p = BrownianParams::<f64>::new(2.0, 0.5, 3.0, 1.5).unwrap();
        assert_eq!(p.diffusion(), 4.5);
        assert!((p.beta() - 1.0 / 4.5).abs() < 1e-15);
        assert_eq!(p.mobility(), 1.0);
        assert!(BrownianParams::new(1.0, 1.0, -1.0, 1.0).is_err());
        assert!(BrownianParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(BrownianParams::<f64>::new(1.0, 1.0, 0.0, 1.0).unwrap().beta().is_infinite());
    }
}
