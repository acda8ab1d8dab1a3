//! Strang split-step Fourier propagation of the Schrödinger equation,
//! used as the exact reference for `P(x,t)`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{usage, Error, Result};
use crate::grid::SpatialGrid;
use crate::potential::Potential1D;
use crate::quantum::wavefunction::{WaveFunction, EDGE_MASS_LIMIT};
use crate::scalar::Real;

/// Largest tolerated change of `Σ|ψ|²dx` in one step.
pub const NORM_DRIFT_LIMIT: f64 = 1e-10;

/// Angular wave numbers of the FFT modes in FFT order.
pub(crate) fn wave_numbers<T: Real>(grid: &SpatialGrid<T>) -> Vec<T> {
    let n = grid.len();
    let period = grid.dx() * T::from_usize_lossy(n);
    let two_pi = T::lit(2.0) * T::PI();
    (0..n)
        .map(|j| {
            let m = if j <= n / 2 {
                j as i64
            } else {
                j as i64 - n as i64
            };
            two_pi * T::lit(m as f64) / period
        })
        .collect()
}

/// Reusable propagator for a fixed grid, potential and time step.
pub struct SplitStep<T: Real> {
    half_potential: Vec<Complex<T>>,
    kinetic: Vec<Complex<T>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    grid: SpatialGrid<T>,
}

impl<T: Real> SplitStep<T> {
    pub fn new(grid: &SpatialGrid<T>, pot: &Potential1D<T>, hbar: T, dt: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return usage(format!("time step must be positive, got {dt}"));
        }
        let m = pot.mass();
        let half_potential = grid
            .points()
            .into_iter()
            .map(|x| Complex::from_polar(T::one(), -pot.value(x) * dt / (T::lit(2.0) * hbar)))
            .collect();
        let kinetic = wave_numbers(grid)
            .into_iter()
            .map(|k| Complex::from_polar(T::one(), -hbar * k * k * dt / (T::lit(2.0) * m)))
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.len());
        let inverse = planner.plan_fft_inverse(grid.len());
        let scratch = vec![Complex::new(T::zero(), T::zero()); forward.get_inplace_scratch_len()];
        Ok(Self {
            half_potential,
            kinetic,
            forward,
            inverse,
            scratch,
            grid: *grid,
        })
    }

    /// One Strang step, in place.
    pub fn step(&mut self, amps: &mut [Complex<T>]) {
        let inv_n = T::one() / T::from_usize_lossy(amps.len());
        for (a, v) in amps.iter_mut().zip(&self.half_potential) {
            *a = *a * v;
        }
        self.forward.process_with_scratch(amps, &mut self.scratch);
        for (a, k) in amps.iter_mut().zip(&self.kinetic) {
            *a = *a * k * inv_n;
        }
        self.inverse.process_with_scratch(amps, &mut self.scratch);
        for (a, v) in amps.iter_mut().zip(&self.half_potential) {
            *a = *a * v;
        }
    }

    /// Steps `psi` forward with norm-drift and edge-mass monitoring.
    pub fn advance(&mut self, psi: &mut WaveFunction<T>, steps: usize) -> Result<()> {
        if psi.grid() != &self.grid {
            return usage("wave function grid differs from propagator grid");
        }
        let mut norm = psi.norm();
        for s in 0..steps {
            self.step(psi.amplitudes_mut());
            let new_norm = psi.norm();
            let drift = (new_norm - norm).abs().to_f64_lossy();
            if drift > NORM_DRIFT_LIMIT || !new_norm.is_finite() {
                return Err(Error::NumericalStability(format!(
                    "norm drift {drift:.2e} at step {s} exceeds {NORM_DRIFT_LIMIT:.0e}"
                )));
            }
            let edge = psi.edge_mass().to_f64_lossy();
            if edge > EDGE_MASS_LIMIT {
                return Err(Error::NumericalStability(format!(
                    "edge mass {edge:.2e} at step {s} exceeds {EDGE_MASS_LIMIT:.0e}; widen the grid"
                )));
            }
            norm = new_norm;
        }
        Ok(())
    }
}

/// Unitary evolution under `H = p²/2m + V` for `steps` steps of size `dt`.
pub fn evolve_schrodinger<T: Real>(
    psi: &WaveFunction<T>,
    pot: &Potential1D<T>,
    dt: T,
    steps: usize,
) -> Result<WaveFunction<T>> {
    let mut out = psi.clone();
    if steps == 0 {
        return Ok(out);
    }
    let mut prop = SplitStep::new(psi.grid(), pot, psi.hbar(), dt)?;
    prop.advance(&mut out, steps)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::make_gaussian_packet;

    #[test]
    fn zero_steps_is_identity() {
        let g = SpatialGrid::new(-10.0, 10.0, 128).unwrap();
        let pot = Potential1D::quartic(1.0, 0.3).unwrap();
        let psi = make_gaussian_packet(&g, 0.3, 0.1, 1.0, 1.0).unwrap();
        assert_eq!(evolve_schrodinger(&psi, &pot, 0.01, 0).unwrap(), psi);
    }

    #[test]
    fn free_spreading_law() {
        let g = SpatialGrid::new(-25.0, 25.0, 1024).unwrap();
        let pot = Potential1D::free(1.0).unwrap();
        let (s0, hbar, m): (f64, f64, f64) = (1.0, 1.0, 1.0);
        let psi = make_gaussian_packet(&g, 0.0, 0.5, s0, hbar).unwrap();
        let t = 2.0 * m * s0 * s0 / hbar;
        let out = evolve_schrodinger(&psi, &pot, t / 200.0, 200).unwrap();
        let expect = s0 * s0 + (hbar * t / (2.0 * m * s0)).powi(2);
        assert!((out.variance_x() - expect).abs() / expect < 1e-3);
        assert!((out.mean_x() - 0.5 * t).abs() < 1e-8);
    }

    #[test]
    fn coherent_state_oscillates() {
        let g = SpatialGrid::new(-12.0, 12.0, 512).unwrap();
        let pot = Potential1D::harmonic(1.0, 1.0).unwrap();
        let (x0, p0) = (1.5, -0.5);
        let mut psi = make_gaussian_packet(&g, x0, p0, (0.5f64).sqrt(), 1.0).unwrap();
        let dt = 2.0 * std::f64::consts::PI / 1000.0;
        let mut prop = SplitStep::new(&g, &pot, 1.0, dt).unwrap();
        for k in 1..=1000 {
            prop.advance(&mut psi, 1).unwrap();
            let t = k as f64 * dt;
            let expect = x0 * t.cos() + p0 * t.sin();
            assert!((psi.mean_x() - expect).abs() < 1e-3 * x0.abs().max(p0.abs()));
        }
    }

    #[test]
    fn edge_mass_aborts() {
        let g = SpatialGrid::new(-6.0, 6.0, 128).unwrap();
        let pot = Potential1D::free(1.0).unwrap();
        let psi = make_gaussian_packet(&g, 0.0, 3.0, 0.7, 1.0).unwrap();
        assert!(matches!(
            evolve_schrodinger(&psi, &pot, 0.01, 400),
            Err(Error::NumericalStability(_))
        ));
    }
}
