use num_complex::Complex;
use statrs::function::erf::erfc;

use crate::error::{usage, Error, Result};
use crate::grid::SpatialGrid;
use crate::scalar::Real;

/// Wave function sampled on a uniform grid.
///
/// The norm is the Riemann sum `Σ|ψ_i|² dx`, which the split-step evolution
/// conserves exactly up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction<T> {
    grid: SpatialGrid<T>,
    amplitudes: Vec<Complex<T>>,
    hbar: T,
}

/// Points on each side of the grid that count as the absorbing edge.
pub(crate) fn edge_width(n: usize) -> usize {
    (n / 32).max(2)
}

pub const EDGE_MASS_LIMIT: f64 = 1e-6;

impl<T: Real> WaveFunction<T> {
    /// Wraps raw amplitudes and normalizes them.
    pub fn from_amplitudes(
        grid: SpatialGrid<T>,
        amplitudes: Vec<Complex<T>>,
        hbar: T,
    ) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return usage(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.len()
            ));
        }
        if !(hbar > T::zero()) {
            return usage(format!("hbar must be positive, got {hbar}"));
        }
        let mut psi = Self {
            grid,
            amplitudes,
            hbar,
        };
        let n = psi.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return usage("wave function has zero or non-finite norm");
        }
        let s = T::one() / n.sqrt();
        for a in &mut psi.amplitudes {
            *a = *a * s;
        }
        Ok(psi)
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitudes
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>() * self.grid.dx()
    }

    /// Probability mass in the outer edge cells on both sides.
    pub fn edge_mass(&self) -> T {
        let w = edge_width(self.grid.len());
        let n = self.amplitudes.len();
        let s: T = self.amplitudes[..w]
            .iter()
            .chain(&self.amplitudes[n - w..])
            .map(|a| a.norm_sqr())
            .sum();
        s * self.grid.dx()
    }

    pub fn mean_x(&self) -> T {
        let p = probability_density(self);
        self.grid
            .points()
            .iter()
            .zip(&p)
            .map(|(&x, &w)| x * w)
            .sum::<T>()
            * self.grid.dx()
    }

    pub fn variance_x(&self) -> T {
        let m = self.mean_x();
        let p = probability_density(self);
        self.grid
            .points()
            .iter()
            .zip(&p)
            .map(|(&x, &w)| (x - m) * (x - m) * w)
            .sum::<T>()
            * self.grid.dx()
    }

    /// `⟨x^k⟩` for the position density.
    pub fn moment_x(&self, k: i32) -> T {
        let p = probability_density(self);
        self.grid
            .points()
            .iter()
            .zip(&p)
            .map(|(&x, &w)| x.powi(k) * w)
            .sum::<T>()
            * self.grid.dx()
    }

    /// Momentum amplitude `ψ̃(p) = (2πħ)^{-1/2} Σ ψ(x) e^{-ipx/ħ} dx` on
    /// the given momentum grid (direct sum).
    pub fn momentum_amplitude(&self, p_grid: &SpatialGrid<T>) -> Vec<Complex<T>> {
        let xs = self.grid.points();
        let pref = self.grid.dx() / (T::lit(2.0) * T::PI() * self.hbar).sqrt();
        p_grid
            .points()
            .iter()
            .map(|&p| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (&x, &a) in xs.iter().zip(&self.amplitudes) {
                    acc = acc + a * Complex::from_polar(T::one(), -p * x / self.hbar);
                }
                acc * pref
            })
            .collect()
    }
}

/// Minimum-uncertainty packet
/// `ψ(x) ∝ exp(−(x−x₀)²/(4σ²) + i p₀ (x−x₀)/ħ)`, so `Var(x) = σ²` and
/// `Var(p) = ħ²/(4σ²)`.
pub fn make_gaussian_packet<T: Real>(
    grid: &SpatialGrid<T>,
    x0: T,
    p0: T,
    sigma: T,
    hbar: T,
) -> Result<WaveFunction<T>> {
    if !(sigma > T::zero()) {
        return usage(format!("sigma must be positive, got {sigma}"));
    }
    let s = sigma.to_f64_lossy() * std::f64::consts::SQRT_2;
    let tail = 0.5 * erfc((x0 - grid.x_min()).to_f64_lossy() / s)
        + 0.5 * erfc((grid.x_max() - x0).to_f64_lossy() / s);
    if tail >= 1e-10 {
        return Err(Error::Usage(format!(
            "packet leaks beyond the grid (tail mass {tail:.2e} ≥ 1e-10)"
        )));
    }
    let amps = grid
        .points()
        .into_iter()
        .map(|x| {
            let d = x - x0;
            let re = -d * d / (T::lit(4.0) * sigma * sigma);
            Complex::from_polar(re.exp(), p0 * d / hbar)
        })
        .collect();
    WaveFunction::from_amplitudes(*grid, amps, hbar)
}

/// `P(x) = |ψ(x)|²` on the grid.
pub fn probability_density<T: Real>(psi: &WaveFunction<T>) -> Vec<T> {
    psi.amplitudes.iter().map(|a| a.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpatialGrid<f64> {
        SpatialGrid::new(-12.0, 12.0, 512).unwrap()
    }

    #[test]
    fn packet_moments() {
        let psi = make_gaussian_packet(&grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!(psi.mean_x().abs() < 1e-12);
        assert!((psi.variance_x() - 1.0).abs() < 1e-10);
        let psi = make_gaussian_packet(&grid(), 1.0, 2.0, 0.8, 1.0).unwrap();
        assert!((psi.mean_x() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn density_is_even_for_even_packet() {
        let g = SpatialGrid::<f64>::new(-10.0, 10.0, 401).unwrap();
        let psi = make_gaussian_packet(&g, 0.0, 0.0, 1.3, 1.0).unwrap();
        let p: Vec<f64> = probability_density(&psi);
        let n = p.len();
        for i in 0..n {
            assert!((p[i] - p[n - 1 - i]).abs() < 1e-14);
        }
        assert!((g.integrate(&p) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn density_matches_analytic_gaussian() {
        let psi = make_gaussian_packet(&grid(), 0.5, 1.0, 0.9, 1.0).unwrap();
        let p = probability_density(&psi);
        for (x, v) in grid().points().iter().zip(&p) {
            let expect = (-(x - 0.5) * (x - 0.5) / (2.0 * 0.81)).exp()
                / (2.0 * std::f64::consts::PI * 0.81).sqrt();
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn leaking_packet_is_rejected() {
        let g = SpatialGrid::new(-3.0, 3.0, 64).unwrap();
        assert!(matches!(
            make_gaussian_packet(&g, 0.0, 0.0, 1.0, 1.0),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn momentum_amplitude_normalized() {
        let psi = make_gaussian_packet(&grid(), 0.0, 1.5, 1.0, 1.0).unwrap();
        let pg = SpatialGrid::new(-6.0, 9.0, 301).unwrap();
        let phi = psi.momentum_amplitude(&pg);
        let dens: Vec<f64> = phi.iter().map(|a| a.norm_sqr()).collect();
        assert!((pg.integrate(&dens) - 1.0).abs() < 1e-9);
        let mean: f64 = pg.points().iter().zip(&dens).map(|(p, d)| p * d).sum::<f64>() * pg.dx();
        assert!((mean - 1.5).abs() < 1e-9);
    }
}
