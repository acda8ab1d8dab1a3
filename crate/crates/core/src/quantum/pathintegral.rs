//! Time-sliced path integral for the density matrix.
//!
//! One slice maps `ρ → K ρ K†`, i.e. it applies the density-matrix kernel
//! `J(b|a) = K(q_b|q_a) K*(q'_b|q'_a)`; in relative coordinates that kernel
//! carries the exponent `(i/ħ)∫[−m ẋ ξ̇ + V(x+ξ/2) − V(x−ξ/2)]dt`
//! (see [`relative_frame_kernel`]). Slices are chained by matrix products.
//!
//! Two short-time kernels are available:
//!
//! * [`KernelKind::Literal`] samples the closed form
//!   `sqrt(m/2πiħε) exp{(i/ħ)[m(q_b−q_a)²/2ε − ε(V_a+V_b)/2]} dq`. It is only
//!   usable when the grid resolves the kinetic phase, roughly
//!   `ε ≳ m·span·dq/ħ`.
//! * [`KernelKind::BandLimited`] (default) uses the free kernel restricted to
//!   the modes the grid can carry, `F† e^{−iħk²ε/2m} F`, with the same
//!   endpoint-trapezoid potential phases. It converges to the literal kernel
//!   as the grid is refined and stays well defined for short slices.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{usage, Error, Result};
use crate::grid::{SpatialGrid, TimeGrid};
use crate::potential::Potential1D;
use crate::quantum::density::DensityMatrix;
use crate::quantum::splitstep::wave_numbers;
use crate::quantum::wavefunction::{edge_width, EDGE_MASS_LIMIT};
use crate::scalar::Real;

/// Largest tolerated trace change within one slice before renormalization.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-3;
/// Per-axis grid size above which the O(n³)-per-slice propagation is refused.
pub const MAX_POINTS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelKind {
    #[default]
    BandLimited,
    Literal,
}

/// Dense complex `n × n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> Complex<T> {
        self.data[a * self.n + b]
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    /// `self · rhs`; rows are computed in parallel, each with a fixed
    /// summation order.
    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let r = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in row.iter_mut().zip(r) {
                    *o = *o + a * b;
                }
            }
        });
        Self { n, data }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                data.push(self.data[b * n + a].conj());
            }
        }
        Self { n, data }
    }

    fn from_data(n: usize, data: Vec<Complex<T>>) -> Self {
        Self { n, data }
    }
}

/// Short-time propagator `K_ε(q_b|q_a)` including the quadrature weight `dq`,
/// so that `ψ_b = K ψ_a` as a matrix-vector product.
pub fn short_time_kernel<T: Real>(
    grid: &SpatialGrid<T>,
    pot: &Potential1D<T>,
    hbar: T,
    epsilon: T,
    kind: KernelKind,
) -> ComplexMatrix<T> {
    let n = grid.len();
    let xs = grid.points();
    let m = pot.mass();
    let two = T::lit(2.0);
    let half_phase: Vec<Complex<T>> = xs
        .iter()
        .map(|&x| Complex::from_polar(T::one(), -epsilon * pot.value(x) / (two * hbar)))
        .collect();
    let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
    match kind {
        KernelKind::Literal => {
            // sqrt(m / (2π i ħ ε)) = sqrt(m/(2πħε)) e^{−iπ/4}
            let amp = (m / (two * T::PI() * hbar * epsilon)).sqrt() * grid.dx();
            let pref = Complex::from_polar(amp, -T::FRAC_PI_4());
            for a in 0..n {
                for b in 0..n {
                    let d = xs[a] - xs[b];
                    let kin = Complex::from_polar(T::one(), m * d * d / (two * hbar * epsilon));
                    data[a * n + b] = pref * kin * half_phase[a] * half_phase[b];
                }
            }
        }
        KernelKind::BandLimited => {
            // Circulant free kernel c[d] = (1/n) Σ_k e^{ik d dx} e^{−iħk²ε/2m}.
            let mut c: Vec<Complex<T>> = wave_numbers(grid)
                .into_iter()
                .map(|k| Complex::from_polar(T::one() / T::from_usize_lossy(n), -hbar * k * k * epsilon / (two * m)))
                .collect();
            FftPlanner::new().plan_fft_inverse(n).process(&mut c);
            for a in 0..n {
                for b in 0..n {
                    let d = (a + n - b) % n;
                    data[a * n + b] = c[d] * half_phase[a] * half_phase[b];
                }
            }
        }
    }
    ComplexMatrix::from_data(n, data)
}

/// Literal relative-frame kernel element
/// `|A|² dq² exp{(i/ħ) ε [−m (Δx/ε)(Δξ/ε) + ½Σ_{a,b}(V(x+ξ/2) − V(x−ξ/2))]}`
/// with `|A|² = m/(2πħε)`; equals `K(q_b|q_a) K*(q'_b|q'_a)` for the literal
/// kernel with `q = x − ξ/2`, `q' = x + ξ/2`.
pub fn relative_frame_kernel<T: Real>(
    pot: &Potential1D<T>,
    hbar: T,
    epsilon: T,
    dq: T,
    (x_b, xi_b): (T, T),
    (x_a, xi_a): (T, T),
) -> Complex<T> {
    let m = pot.mass();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let xdot = (x_b - x_a) / epsilon;
    let xidot = (xi_b - xi_a) / epsilon;
    let dv = |x: T, xi: T| pot.value(x + half * xi) - pot.value(x - half * xi);
    let action = epsilon * (-m * xdot * xidot + half * (dv(x_a, xi_a) + dv(x_b, xi_b)));
    let amp = m / (two * T::PI() * hbar * epsilon) * dq * dq;
    Complex::from_polar(amp, action / hbar)
}

/// Result of a path-integral propagation.
#[derive(Debug, Clone)]
pub struct PropagatedDensity<T> {
    pub rho: DensityMatrix<T>,
    /// `trace − 1` observed after each slice, before renormalization.
    pub trace_drift: Vec<T>,
}

/// Chains `N` slices of `ρ → K ρ K†` over `time`.
pub fn propagate_density_matrix_pathintegral<T: Real>(
    rho0: &DensityMatrix<T>,
    pot: &Potential1D<T>,
    time: &TimeGrid<T>,
    kind: KernelKind,
) -> Result<PropagatedDensity<T>> {
    let n = rho0.grid().len();
    if n > MAX_POINTS {
        return usage(format!(
            "path-integral propagation is limited to {MAX_POINTS} points per axis, got {n}"
        ));
    }
    let mut rho = rho0.clone();
    let mut drift = Vec::with_capacity(time.n_slices());
    if time.n_slices() == 0 {
        return Ok(PropagatedDensity {
            rho,
            trace_drift: drift,
        });
    }
    let k = short_time_kernel(rho0.grid(), pot, rho0.hbar(), time.epsilon(), kind);
    let kd = k.adjoint();
    let w = edge_width(n);
    for s in 0..time.n_slices() {
        let before = rho.trace();
        let cur = ComplexMatrix::from_data(n, std::mem::take(rho.values_mut()));
        let next = k.matmul(&cur).matmul(&kd);
        *rho.values_mut() = next.data;
        let after = rho.trace();
        let d = after / before - T::one();
        if !d.is_finite() || d.abs() > T::lit(TRACE_DRIFT_LIMIT) {
            return Err(Error::NumericalStability(format!(
                "kernel normalization diverged: trace drift {d:.3e} at slice {s}"
            )));
        }
        drift.push(d);
        let scale = T::one() / after;
        for v in rho.values_mut().iter_mut() {
            *v = *v * scale;
        }
        let diag = rho.diagonal();
        let edge: T = diag[..w].iter().chain(&diag[n - w..]).copied().sum::<T>() * rho.grid().dx();
        if edge > T::lit(EDGE_MASS_LIMIT) {
            return Err(Error::NumericalStability(format!(
                "edge mass {edge:.2e} at slice {s} exceeds {EDGE_MASS_LIMIT:.0e}; widen the grid"
            )));
        }
    }
    Ok(PropagatedDensity {
        rho,
        trace_drift: drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{evolve_schrodinger, make_gaussian_packet, WaveFunction};

    /// Analytic free Gaussian with the packet convention of
    /// `make_gaussian_packet`.
    fn free_packet(g: &SpatialGrid<f64>, x0: f64, p0: f64, s: f64, t: f64) -> Vec<Complex<f64>> {
        let alpha = Complex::new(1.0, t / (2.0 * s * s));
        let norm = (2.0 * std::f64::consts::PI * s * s).powf(-0.25);
        g.points()
            .into_iter()
            .map(|x| {
                let d = x - x0 - p0 * t;
                let e = -Complex::new(d * d, 0.0) / (alpha * 4.0 * s * s)
                    + Complex::new(0.0, p0 * (x - x0 - 0.5 * p0 * t));
                e.exp() * norm / alpha.sqrt()
            })
            .collect()
    }

    #[test]
    fn band_limited_free_slice_matches_analytic() {
        let g = SpatialGrid::new(-10.0, 10.0, 128).unwrap();
        let pot = Potential1D::free(1.0).unwrap();
        let psi = make_gaussian_packet(&g, -0.5, 0.8, 1.0, 1.0).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi);
        let t = TimeGrid::new(0.0, 0.7, 1).unwrap();
        let out = propagate_density_matrix_pathintegral(&rho0, &pot, &t, KernelKind::BandLimited).unwrap();
        let exact = free_packet(&g, -0.5, 0.8, 1.0, 0.7);
        let n = g.len();
        for a in 0..n {
            for b in 0..n {
                let e = exact[a] * exact[b].conj();
                assert!((out.rho.get(a, b) - e).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn literal_kernel_resolved_slice_matches_analytic() {
        let g = SpatialGrid::new(-16.0, 16.0, 513).unwrap();
        let pot = Potential1D::free(1.0).unwrap();
        let psi = make_gaussian_packet(&g, 0.0, 0.5, 1.0, 1.0).unwrap();
        let k = short_time_kernel(&g, &pot, 1.0, 1.0, KernelKind::Literal);
        let n = g.len();
        let exact = free_packet(&g, 0.0, 0.5, 1.0, 1.0);
        for a in (0..n).step_by(8) {
            let x = g.point(a);
            if x.abs() > 6.0 {
                continue;
            }
            let mut acc = Complex::new(0.0, 0.0);
            for b in 0..n {
                acc += k.get(a, b) * psi.amplitudes()[b];
            }
            assert!((acc - exact[a]).norm() < 1e-6, "{x}: {acc} vs {}", exact[a]);
        }
    }

    #[test]
    fn relative_kernel_is_product_of_literal_kernels() {
        let g = SpatialGrid::new(-3.0, 3.0, 25).unwrap();
        let pot = Potential1D::polynomial(1.3, &[0.0, 0.2, 0.5, -0.1, 0.05]).unwrap();
        let (hbar, eps) = (0.7, 0.3);
        let k = short_time_kernel(&g, &pot, hbar, eps, KernelKind::Literal);
        let xs = g.points();
        for &(a, ap, b, bp) in &[(3usize, 7usize, 10usize, 12usize), (20, 4, 1, 9), (12, 12, 5, 19)] {
            let direct: Complex<f64> = k.get(b, a) * k.get(bp, ap).conj();
            let (xa, xia) = (0.5 * (xs[a] + xs[ap]), xs[ap] - xs[a]);
            let (xb, xib) = (0.5 * (xs[b] + xs[bp]), xs[bp] - xs[b]);
            let rel = relative_frame_kernel(&pot, hbar, eps, g.dx(), (xb, xib), (xa, xia));
            assert!((direct - rel).norm() < 1e-12 * direct.norm().max(1e-300));
        }
    }

    #[test]
    fn zero_slices_is_identity() {
        let g = SpatialGrid::new(-6.0, 6.0, 32).unwrap();
        let pot = Potential1D::harmonic(1.0, 1.0).unwrap();
        let psi = make_gaussian_packet(&g, 0.0, 0.0, 0.7, 1.0).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi);
        let out = propagate_density_matrix_pathintegral(&rho0, &pot, &TimeGrid::empty(0.0), KernelKind::default()).unwrap();
        assert_eq!(out.rho, rho0);
    }

    #[test]
    fn composition_over_sub_intervals() {
        let g = SpatialGrid::new(-7.0, 7.0, 48).unwrap();
        let pot = Potential1D::polynomial(1.0, &[0.0, 0.0, 0.5, 0.0, 0.0125]).unwrap();
        let psi = make_gaussian_packet(&g, 0.8, 0.0, 0.7, 1.0).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi);
        let t = TimeGrid::new(0.0, 1.2, 12).unwrap();
        let (t1, t2) = t.split_at(5).unwrap();
        let whole = propagate_density_matrix_pathintegral(&rho0, &pot, &t, KernelKind::BandLimited).unwrap();
        let first = propagate_density_matrix_pathintegral(&rho0, &pot, &t1, KernelKind::BandLimited).unwrap();
        let second = propagate_density_matrix_pathintegral(&first.rho, &pot, &t2, KernelKind::BandLimited).unwrap();
        let l1: f64 = whole
            .rho
            .values()
            .iter()
            .zip(second.rho.values())
            .map(|(a, b)| (a - b).norm())
            .sum::<f64>()
            * g.dx()
            * g.dx();
        assert!(l1 < 1e-8, "{l1}");
    }

    #[test]
    fn diagonal_tracks_split_step() {
        let g = SpatialGrid::new(-8.0, 8.0, 64).unwrap();
        let pot = Potential1D::harmonic(1.0, 1.0).unwrap();
        let psi = make_gaussian_packet(&g, 1.5, 0.0, 0.8, 1.0).unwrap();
        let t_end = std::f64::consts::FRAC_PI_2;
        let t = TimeGrid::new(0.0, t_end, 40).unwrap();
        let out = propagate_density_matrix_pathintegral(&DensityMatrix::from_pure(&psi), &pot, &t, KernelKind::BandLimited).unwrap();
        let reference: WaveFunction<f64> = evolve_schrodinger(&psi, &pot, t_end / 400.0, 400).unwrap();
        let p_ref = crate::quantum::probability_density(&reference);
        let l1: f64 = out.rho.diagonal().iter().zip(&p_ref).map(|(a, b)| (a - b).abs()).sum::<f64>() * g.dx();
        assert!(l1 < 1e-2, "{l1}");
        assert!(out.trace_drift.iter().all(|d| d.abs() < 1e-3));
        assert!(out.rho.hermiticity_error() < 1e-10);
    }

    #[test]
    fn refuses_large_grids() {
        let g = SpatialGrid::new(-8.0, 8.0, 200).unwrap();
        let pot = Potential1D::free(1.0).unwrap();
        let psi = make_gaussian_packet(&g, 0.0, 0.0, 1.0, 1.0).unwrap();
        let t = TimeGrid::new(0.0, 0.1, 1).unwrap();
        assert!(propagate_density_matrix_pathintegral(&DensityMatrix::from_pure(&psi), &pot, &t, KernelKind::default()).is_err());
    }
}
