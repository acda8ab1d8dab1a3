//! Time-sliced path integral for the transition density `J(x_b|x_a)`.
//!
//! One slice carries `exp{−[x_b − x_a + ε V'(x̄)/(mγ)]²/(4Dε)}`, i.e. the
//! Onsager–Machlup weight of the Euler–Maruyama increment. Each column is
//! rescaled to unit mass on the grid, so the slice matrix is column
//! stochastic and so is every product of slices.

use rayon::prelude::*;

use crate::brownian::params::BrownianParams;
use crate::error::{usage, Error, Result};
use crate::grid::{SpatialGrid, TimeGrid};
use crate::potential::Potential1D;
use crate::scalar::Real;

/// Kernel standard deviation `sqrt(2Dε)` must span at least this many cells.
pub const MIN_KERNEL_POINTS: f64 = 4.0;

/// Where the drift is evaluated inside a slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftPoint {
    /// `x̄ = x_a`, matching the Euler–Maruyama integrator.
    #[default]
    PrePoint,
    /// `x̄ = (x_a + x_b)/2`.
    Midpoint,
}

/// Transition density `J(x_b|x_a)` on a grid, stored `[b·n + a]`.
/// `Σ_b J(b|a) dx = 1` for every column `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix<T> {
    grid: SpatialGrid<T>,
    data: Vec<T>,
}

impl<T: Real> TransferMatrix<T> {
    /// The zero-time kernel `δ(x_b − x_a)` on the grid.
    pub fn identity(grid: &SpatialGrid<T>) -> Self {
        let n = grid.len();
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one() / grid.dx();
        }
        Self { grid: *grid, data }
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn get(&self, b: usize, a: usize) -> T {
        self.data[b * self.grid.len() + a]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// `Σ_b J(b|a) dx`.
    pub fn column_mass(&self, a: usize) -> T {
        let n = self.grid.len();
        (0..n).map(|b| self.data[b * n + a]).sum::<T>() * self.grid.dx()
    }

    /// `P_b(x_b) = Σ_a J(b|a) P_a(x_a) dx`.
    pub fn apply(&self, p: &[T]) -> Result<Vec<T>> {
        let n = self.grid.len();
        if p.len() != n {
            return usage(format!("density has {} values for a {n}-point grid", p.len()));
        }
        let dx = self.grid.dx();
        Ok(self
            .data
            .par_chunks(n)
            .map(|row| row.iter().zip(p).map(|(&j, &v)| j * v).sum::<T>() * dx)
            .collect())
    }

    /// `self ∘ earlier`: first `earlier`, then `self`.
    pub fn compose(&self, earlier: &Self) -> Result<Self> {
        if self.grid != earlier.grid {
            return usage("transfer matrices live on different grids");
        }
        let n = self.grid.len();
        let dx = self.grid.dx();
        let mut data = vec![T::zero(); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(b, row)| {
            for m in 0..n {
                let l = self.data[b * n + m] * dx;
                if l == T::zero() {
                    continue;
                }
                for (o, &r) in row.iter_mut().zip(&earlier.data[m * n..(m + 1) * n]) {
                    *o = *o + l * r;
                }
            }
        });
        Ok(Self { grid: self.grid, data })
    }

    /// `N`-fold composition by repeated squaring.
    fn power(&self, mut n: usize) -> Result<Self> {
        let mut acc = Self::identity(&self.grid);
        let mut base = self.clone();
        let mut first = true;
        while n > 0 {
            if n & 1 == 1 {
                acc = if first { base.clone() } else { base.compose(&acc)? };
                first = false;
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base)?;
            }
        }
        Ok(acc)
    }
}

fn slice_kernel<T: Real>(
    params: &BrownianParams<T>,
    pot: &Potential1D<T>,
    grid: &SpatialGrid<T>,
    eps: T,
    drift: DriftPoint,
) -> Result<TransferMatrix<T>> {
    let n = grid.len();
    let xs = grid.points();
    let mob = params.mobility();
    let four_d_eps = T::lit(4.0) * params.diffusion() * eps;
    let half = T::lit(0.5);
    let mut data = vec![T::zero(); n * n];
    for a in 0..n {
        let mut mass = T::zero();
        for b in 0..n {
            let xbar = match drift {
                DriftPoint::PrePoint => xs[a],
                DriftPoint::Midpoint => half * (xs[a] + xs[b]),
            };
            let d = xs[b] - xs[a] + eps * mob * pot.d1(xbar);
            let w = (-d * d / four_d_eps).exp();
            data[b * n + a] = w;
            mass = mass + w;
        }
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::NumericalStability(format!(
                "slice kernel from x = {} carries no mass on the grid",
                xs[a]
            )));
        }
        let s = T::one() / (mass * grid.dx());
        for b in 0..n {
            data[b * n + a] = data[b * n + a] * s;
        }
    }
    Ok(TransferMatrix { grid: *grid, data })
}

/// `J(t_b ← t_a)` as the `N`-fold product of normalized slice kernels.
pub fn brownian_pathintegral_propagator<T: Real>(
    params: &BrownianParams<T>,
    pot: &Potential1D<T>,
    grid: &SpatialGrid<T>,
    time: &TimeGrid<T>,
    drift: DriftPoint,
) -> Result<TransferMatrix<T>> {
    if time.n_slices() == 0 {
        return Ok(TransferMatrix::identity(grid));
    }
    if !(params.temperature() > T::zero()) {
        return Err(Error::Precondition("the path-integral kernel needs T > 0".into()));
    }
    let width = (T::lit(2.0) * params.diffusion() * time.epsilon()).sqrt();
    let cells = width / grid.dx();
    if cells < T::lit(MIN_KERNEL_POINTS) {
        return Err(Error::Accuracy(format!(
            "slice kernel width sqrt(2Dε) = {width:.4} spans {cells:.2} cells, need ≥ {MIN_KERNEL_POINTS}; refine the grid or lengthen ε"
        )));
    }
    slice_kernel(params, pot, grid, time.epsilon(), drift)?.power(time.n_slices())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::{fokker_planck_evolve, FokkerPlanckScheme};

    fn unit() -> BrownianParams<f64> {
        BrownianParams::new(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn free_single_slice_is_heat_kernel() {
        let g = SpatialGrid::new(-3.0, 3.0, 121).unwrap();
        let t = TimeGrid::new(0.0, 0.05, 1).unwrap();
        let pot = Potential1D::free(1.0).unwrap();
        let j = brownian_pathintegral_propagator(&unit(), &pot, &g, &t, DriftPoint::PrePoint).unwrap();
        let var = 2.0 * 0.05;
        for a in [40, 60, 80] {
            for b in 0..g.len() {
                let d = g.point(b) - g.point(a);
                let e = (-d * d / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
                assert!((j.get(b, a) - e).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn composition_is_associative() {
        let g = SpatialGrid::new(-4.0, 4.0, 120).unwrap();
        let pot = Potential1D::quartic(1.0, 0.5).unwrap();
        let t = TimeGrid::new(0.0, 0.6, 12).unwrap();
        let (t1, t2) = t.split_at(5).unwrap();
        let whole = brownian_pathintegral_propagator(&unit(), &pot, &g, &t, DriftPoint::PrePoint).unwrap();
        let a = brownian_pathintegral_propagator(&unit(), &pot, &g, &t1, DriftPoint::PrePoint).unwrap();
        let b = brownian_pathintegral_propagator(&unit(), &pot, &g, &t2, DriftPoint::PrePoint).unwrap();
        let ab = b.compose(&a).unwrap();
        let l1: f64 = whole.data().iter().zip(ab.data()).map(|(x, y)| (x - y).abs()).sum::<f64>() * g.dx() * g.dx();
        assert!(l1 < 1e-8, "{l1}");
        for c in 0..g.len() {
            assert!((whole.column_mass(c) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_fokker_planck() {
        let g = SpatialGrid::new(-4.5, 4.5, 256).unwrap();
        let pot = Potential1D::harmonic(1.0, 1.0).unwrap();
        let t = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let p0: Vec<f64> = g.points().iter().map(|&x: &f64| (-(x - 1.0) * (x - 1.0) / 0.5).exp() / (0.5 * std::f64::consts::PI).sqrt()).collect();
        for drift in [DriftPoint::PrePoint, DriftPoint::Midpoint] {
            let j = brownian_pathintegral_propagator(&unit(), &pot, &g, &t, drift).unwrap();
            let p = j.apply(&p0).unwrap();
            let fp = fokker_planck_evolve(&p0, &g, &pot, &unit(), &t, FokkerPlanckScheme::default()).unwrap();
            let l1 = crate::stats::l1_distance(&p, &fp, g.dx()).unwrap();
            assert!(l1 < 1e-2, "{drift:?}: {l1}");
        }
    }

    #[test]
    fn under_resolved_kernel_is_rejected() {
        let g = SpatialGrid::new(-10.0, 10.0, 256).unwrap();
        let t = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let pot = Potential1D::free(1.0).unwrap();
        assert!(matches!(
            brownian_pathintegral_propagator(&unit(), &pot, &g, &t, DriftPoint::PrePoint),
            Err(Error::Accuracy(_))
        ));
        assert_eq!(
            brownian_pathintegral_propagator(&unit(), &pot, &g, &TimeGrid::empty(0.0), DriftPoint::PrePoint).unwrap(),
            TransferMatrix::identity(&g)
        );
    }
}
