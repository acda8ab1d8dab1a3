//! Drift-diffusion equation `∂P/∂t = ∂ₓ[V'P/(mγ) + D ∂ₓP]` on a uniform grid.
//!
//! Spatial discretization: Scharfetter–Gummel fluxes between neighbours,
//! `F_{i+½} = (D/dx)[B(w)P_i − B(−w)P_{i+1}]`, `w = β(V_{i+1} − V_i)`,
//! `B(w) = w/(eᵂ − 1)`, with zero flux through both ends. The discrete
//! operator conserves `Σ P_i dx` exactly and annihilates `e^{−βV_i}`.
//!
//! Time stepping is the θ-scheme with a tridiagonal solve, unconditionally
//! stable for θ ≥ ½; the default θ = 1 also keeps `P` non-negative.

use crate::brownian::params::BrownianParams;
use crate::error::{usage, Error, Result};
use crate::grid::{SpatialGrid, TimeGrid};
use crate::potential::Potential1D;
use crate::scalar::Real;

/// `P` may dip this far below zero before the run is aborted.
pub const STABILITY_TOLERANCE: f64 = 1e-12;
const MASS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FokkerPlanckScheme {
    /// 1 = backward Euler, ½ = Crank–Nicolson.
    pub theta: f64,
    /// Sub-steps per time slice.
    pub substeps: usize,
}

impl Default for FokkerPlanckScheme {
    fn default() -> Self {
        Self {
            theta: 1.0,
            substeps: 8,
        }
    }
}

fn bernoulli<T: Real>(w: T) -> T {
    if w.abs() < T::lit(1e-4) {
        T::one() - w / T::lit(2.0) + w * w / T::lit(12.0)
    } else {
        w / w.exp_m1()
    }
}

/// Tridiagonal generator `L` with `dP/dt = L P`: `(lower, diag, upper)`,
/// where `lower[i]` couples row `i` to `i−1` and `upper[i]` row `i` to `i+1`.
fn generator<T: Real>(
    grid: &SpatialGrid<T>,
    pot: &Potential1D<T>,
    params: &BrownianParams<T>,
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let n = grid.len();
    let c = params.diffusion() / (grid.dx() * grid.dx());
    let beta = params.beta();
    let v: Vec<T> = grid.points().into_iter().map(|x| pot.value(x)).collect();
    let (mut lo, mut di, mut up) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    for i in 0..n - 1 {
        let w = beta * (v[i + 1] - v[i]);
        let (bp, bm) = (c * bernoulli(w), c * bernoulli(-w));
        // Flux i → i+1 is c·dx·[B(w)P_i − B(−w)P_{i+1}].
        di[i] = di[i] - bp;
        up[i] = up[i] + bm;
        lo[i + 1] = lo[i + 1] + bp;
        di[i + 1] = di[i + 1] - bm;
    }
    (lo, di, up)
}

/// Thomas algorithm; the matrices used here are diagonally dominant.
fn solve_tridiagonal<T: Real>(lo: &[T], di: &[T], up: &[T], rhs: &mut [T]) {
    let n = di.len();
    let mut c = vec![T::zero(); n];
    let mut beta = di[0];
    c[0] = up[0] / beta;
    rhs[0] = rhs[0] / beta;
    for i in 1..n {
        beta = di[i] - lo[i] * c[i - 1];
        c[i] = up[i] / beta;
        rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - c[i] * rhs[i + 1];
    }
}

/// Evolves `p0` (a density on `grid`) over `time`.
pub fn fokker_planck_evolve<T: Real>(
    p0: &[T],
    grid: &SpatialGrid<T>,
    pot: &Potential1D<T>,
    params: &BrownianParams<T>,
    time: &TimeGrid<T>,
    scheme: FokkerPlanckScheme,
) -> Result<Vec<T>> {
    if p0.len() != grid.len() {
        return usage(format!("density has {} values for a {}-point grid", p0.len(), grid.len()));
    }
    if !(scheme.theta >= 0.5 && scheme.theta <= 1.0) || scheme.substeps == 0 {
        return usage("θ must lie in [½, 1] with at least one sub-step");
    }
    let mut p = p0.to_vec();
    if time.n_slices() == 0 {
        return Ok(p);
    }
    if !(params.temperature() > T::zero()) {
        return Err(Error::Precondition("the drift-diffusion equation needs T > 0".into()));
    }
    let (lo, di, up) = generator(grid, pot, params);
    let h = time.epsilon() / T::from_usize_lossy(scheme.substeps);
    let theta = T::lit(scheme.theta);
    let n = grid.len();
    let a_lo: Vec<T> = lo.iter().map(|&v| -theta * h * v).collect();
    let a_up: Vec<T> = up.iter().map(|&v| -theta * h * v).collect();
    let a_di: Vec<T> = di.iter().map(|&v| T::one() - theta * h * v).collect();
    let explicit = T::one() - theta;
    let mass0: T = p.iter().copied().sum::<T>();
    let mut rhs = vec![T::zero(); n];
    for step in 0..time.n_slices() * scheme.substeps {
        for i in 0..n {
            let mut lp = di[i] * p[i];
            if i > 0 {
                lp = lp + lo[i] * p[i - 1];
            }
            if i + 1 < n {
                lp = lp + up[i] * p[i + 1];
            }
            rhs[i] = p[i] + explicit * h * lp;
        }
        solve_tridiagonal(&a_lo, &a_di, &a_up, &mut rhs);
        std::mem::swap(&mut p, &mut rhs);
        let min = p.iter().copied().fold(T::infinity(), T::min);
        if !(min >= -T::lit(STABILITY_TOLERANCE)) {
            return Err(Error::NumericalStability(format!(
                "density went negative ({min:.2e}) at sub-step {step}; use θ = 1 or smaller steps"
            )));
        }
    }
    let mass: T = p.iter().copied().sum::<T>();
    let drift = ((mass - mass0) / mass0).abs();
    if !(drift < T::lit(MASS_TOLERANCE)) {
        return Err(Error::NumericalStability(format!("mass drift {drift:.2e}")));
    }
    Ok(p)
}

/// `Z⁻¹ e^{−βV}` on `grid`, normalized so that `Σ P dx = 1`.
pub fn boltzmann_density<T: Real>(
    grid: &SpatialGrid<T>,
    pot: &Potential1D<T>,
    params: &BrownianParams<T>,
) -> Result<Vec<T>> {
    if !(params.temperature() > T::zero()) {
        return Err(Error::Precondition("the Boltzmann density needs T > 0".into()));
    }
    let beta = params.beta();
    let v: Vec<T> = grid.points().into_iter().map(|x| pot.value(x)).collect();
    let vmin = v.iter().copied().fold(T::infinity(), T::min);
    let w: Vec<T> = v.into_iter().map(|e| (-beta * (e - vmin)).exp()).collect();
    let z = w.iter().copied().sum::<T>() * grid.dx();
    Ok(w.into_iter().map(|e| e / z).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::l1_distance;

    fn gaussian(grid: &SpatialGrid<f64>, mu: f64, s: f64) -> Vec<f64> {
        let raw: Vec<f64> = grid.points().iter().map(|x| (-(x - mu).powi(2) / (2.0 * s * s)).exp()).collect();
        let z: f64 = raw.iter().sum::<f64>() * grid.dx();
        raw.into_iter().map(|v| v / z).collect()
    }

    fn moments(grid: &SpatialGrid<f64>, p: &[f64]) -> (f64, f64) {
        let xs = grid.points();
        let m: f64 = xs.iter().zip(p).map(|(x, w)| x * w).sum::<f64>() * grid.dx();
        let v: f64 = xs.iter().zip(p).map(|(x, w)| (x - m).powi(2) * w).sum::<f64>() * grid.dx();
        (m, v)
    }

    #[test]
    fn free_variance_grows_linearly() {
        let g = SpatialGrid::new(-20.0, 20.0, 801).unwrap();
        let params = BrownianParams::new(1.0, 1.0, 0.7, 1.0).unwrap();
        let pot = Potential1D::free(1.0).unwrap();
        let p0 = gaussian(&g, 0.0, 1.0);
        let (_, v0) = moments(&g, &p0);
        let t = TimeGrid::new(0.0, 2.0, 50).unwrap();
        for theta in [0.5, 1.0] {
            let p = fokker_planck_evolve(&p0, &g, &pot, &params, &t, FokkerPlanckScheme { theta, substeps: 4 }).unwrap();
            let (_, v) = moments(&g, &p);
            let expect = v0 + 2.0 * params.diffusion() * 2.0;
            assert!(((v - expect) / expect).abs() < 1e-3, "θ={theta}: {v} vs {expect}");
        }
    }

    #[test]
    fn relaxes_to_boltzmann() {
        let g = SpatialGrid::new(-5.0, 5.0, 201).unwrap();
        let params = BrownianParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        for pot in [Potential1D::harmonic(1.0, 1.0).unwrap(), Potential1D::quartic(1.0, 1.0).unwrap()] {
            let eq = boltzmann_density(&g, &pot, &params).unwrap();
            let t = TimeGrid::new(0.0, 40.0, 400).unwrap();
            let p = fokker_planck_evolve(&gaussian(&g, 1.5, 0.4), &g, &pot, &params, &t, FokkerPlanckScheme::default()).unwrap();
            assert!(l1_distance(&p, &eq, g.dx()).unwrap() < 1e-3);
        }
    }

    #[test]
    fn boltzmann_is_exact_fixed_point() {
        let g = SpatialGrid::new(-4.0, 4.0, 81).unwrap();
        let params = BrownianParams::new(1.0, 2.0, 0.5, 1.0).unwrap();
        let pot = Potential1D::polynomial(1.0, &[0.0, 0.3, -1.0, 0.0, 0.25]).unwrap();
        let eq = boltzmann_density(&g, &pot, &params).unwrap();
        let (lo, di, up) = generator(&g, &pot, &params);
        for i in 0..g.len() {
            let mut r: f64 = di[i] * eq[i];
            if i > 0 {
                r += lo[i] * eq[i - 1];
            }
            if i + 1 < g.len() {
                r += up[i] * eq[i + 1];
            }
            assert!(r.abs() < 1e-10 * eq.iter().cloned().fold(0.0, f64::max) / (g.dx() * g.dx()));
        }
    }

    #[test]
    fn conserves_mass_and_zero_steps() {
        let g = SpatialGrid::new(-5.0, 5.0, 128).unwrap();
        let params = BrownianParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let pot = Potential1D::quartic(1.0, 0.5).unwrap();
        let p0 = gaussian(&g, -1.0, 0.5);
        assert_eq!(fokker_planck_evolve(&p0, &g, &pot, &params, &TimeGrid::empty(0.0), FokkerPlanckScheme::default()).unwrap(), p0);
        let t = TimeGrid::new(0.0, 3.0, 30).unwrap();
        let p = fokker_planck_evolve(&p0, &g, &pot, &params, &t, FokkerPlanckScheme::default()).unwrap();
        let m0: f64 = p0.iter().sum();
        let m: f64 = p.iter().sum();
        assert!(((m - m0) / m0).abs() < 1e-12);
        assert!(p.iter().all(|&v| v >= -1e-12));
    }
}
