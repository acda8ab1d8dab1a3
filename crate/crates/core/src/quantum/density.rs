//! Density matrices in the `(q, q')` frame and in the relative frame
//! `x = (q + q')/2`, `ξ = q' − q`.
//!
//! The relative lattice reuses the `q` grid for `x` and steps `ξ` by `2 dx`,
//! so `q = x − ξ/2` and `q' = x + ξ/2` are grid nodes and the frame change
//! is exact index arithmetic. Pairs `(q_a, q_b)` with `a + b` odd sit at
//! half-integer `x` and are not represented on that lattice.

use num_complex::Complex;

use crate::error::{usage, Result};
use crate::grid::SpatialGrid;
use crate::quantum::wavefunction::WaveFunction;
use crate::scalar::Real;

/// `ρ(q_a, q_b)` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    grid: SpatialGrid<T>,
    values: Vec<Complex<T>>,
    hbar: T,
}

impl<T: Real> DensityMatrix<T> {
    pub fn from_pure(psi: &WaveFunction<T>) -> Self {
        let a = psi.amplitudes();
        let n = a.len();
        let mut values = Vec::with_capacity(n * n);
        for qa in a {
            for qb in a {
                values.push(qa * qb.conj());
            }
        }
        Self {
            grid: *psi.grid(),
            values,
            hbar: psi.hbar(),
        }
    }

    pub fn from_values(grid: SpatialGrid<T>, values: Vec<Complex<T>>, hbar: T) -> Result<Self> {
        if values.len() != grid.len() * grid.len() {
            return usage("density matrix size does not match grid");
        }
        Ok(Self { grid, values, hbar })
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<Complex<T>> {
        &mut self.values
    }

    pub fn get(&self, a: usize, b: usize) -> Complex<T> {
        self.values[a * self.grid.len() + b]
    }

    /// Diagonal `ρ(q, q)`, real part.
    pub fn diagonal(&self) -> Vec<T> {
        let n = self.grid.len();
        (0..n).map(|i| self.values[i * n + i].re).collect()
    }

    /// `Σ ρ(q,q) dx`.
    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum::<T>() * self.grid.dx()
    }

    /// Largest `|ρ(q,q') − ρ*(q',q)|`.
    pub fn hermiticity_error(&self) -> T {
        let n = self.grid.len();
        let mut err = T::zero();
        for a in 0..n {
            for b in a..n {
                err = err.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        err
    }

    /// Exact change to the `(x, ξ)` lattice with `ξ_j = 2 (j − J) dx`,
    /// `j = 0..=2J`. The ξ span `4 J dx` may not exceed twice the x span.
    pub fn to_relative_frame(&self, xi_half_count: usize) -> Result<DensityMatrixXY<T>> {
        let n = self.grid.len();
        if xi_half_count == 0 {
            return usage("ξ half-count must be at least 1");
        }
        if 2 * xi_half_count > n - 1 {
            return usage(format!(
                "ξ half-count {xi_half_count} exceeds (n−1)/2 = {} for the frame geometry",
                (n - 1) / 2
            ));
        }
        let dx = self.grid.dx();
        let j_max = T::from_usize_lossy(xi_half_count);
        let xi_grid = SpatialGrid::new_unchecked_len(
            -T::lit(2.0) * j_max * dx,
            T::lit(2.0) * j_max * dx,
            2 * xi_half_count + 1,
        )?;
        let m = 2 * xi_half_count + 1;
        let zero = Complex::new(T::zero(), T::zero());
        let mut values = vec![zero; n * m];
        for i in 0..n {
            for j in 0..m {
                let s = j as i64 - xi_half_count as i64;
                let a = i as i64 - s;
                let b = i as i64 + s;
                if a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n {
                    values[i * m + j] = self.get(a as usize, b as usize);
                }
            }
        }
        Ok(DensityMatrixXY {
            x_grid: self.grid,
            xi_grid,
            xi_half_count,
            values,
            hbar: self.hbar,
        })
    }
}

/// `ρ(x, ξ)` on the relative lattice, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixXY<T> {
    x_grid: SpatialGrid<T>,
    xi_grid: SpatialGrid<T>,
    xi_half_count: usize,
    values: Vec<Complex<T>>,
    hbar: T,
}

impl<T: Real> DensityMatrixXY<T> {
    pub fn x_grid(&self) -> &SpatialGrid<T> {
        &self.x_grid
    }

    pub fn xi_grid(&self) -> &SpatialGrid<T> {
        &self.xi_grid
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.values[i * self.xi_grid.len() + j]
    }

    /// Index of `ξ = 0`.
    pub fn xi_zero_index(&self) -> usize {
        self.xi_half_count
    }

    /// `P(x) = ρ(x, ξ = 0)`.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.x_grid.len())
            .map(|i| self.get(i, self.xi_half_count).re)
            .collect()
    }

    /// Largest `|ρ(x,ξ) − ρ*(x,−ξ)|`.
    pub fn hermiticity_error(&self) -> T {
        let m = self.xi_grid.len();
        let mut err = T::zero();
        for i in 0..self.x_grid.len() {
            for j in 0..m {
                err = err.max((self.get(i, j) - self.get(i, m - 1 - j).conj()).norm());
            }
        }
        err
    }

    /// Largest `|ρ|` at the outermost represented ξ of each row. Near the
    /// x edges the q grid cuts ξ off before the outer columns.
    pub fn xi_edge_magnitude(&self) -> T {
        let n = self.x_grid.len();
        let j = self.xi_half_count;
        (0..n)
            .map(|i| {
                let s = j.min(i).min(n - 1 - i);
                self.get(i, j - s).norm().max(self.get(i, j + s).norm())
            })
            .fold(T::zero(), T::max)
    }

    /// Back to the `(q, q')` frame. Entries with `a + b` odd are not on the
    /// relative lattice and come back as zero.
    pub fn to_q_frame(&self) -> DensityMatrix<T> {
        let n = self.x_grid.len();
        let m = self.xi_grid.len();
        let zero = Complex::new(T::zero(), T::zero());
        let mut values = vec![zero; n * n];
        for i in 0..n {
            for j in 0..m {
                let s = j as i64 - self.xi_half_count as i64;
                let a = i as i64 - s;
                let b = i as i64 + s;
                if a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n {
                    values[a as usize * n + b as usize] = self.get(i, j);
                }
            }
        }
        DensityMatrix {
            grid: self.x_grid,
            values,
            hbar: self.hbar,
        }
    }
}

/// `ρ(x, ξ) = ψ(x − ξ/2) ψ*(x + ξ/2)` for a pure state.
pub fn to_relative_frame<T: Real>(
    psi: &WaveFunction<T>,
    xi_half_count: usize,
) -> Result<DensityMatrixXY<T>> {
    DensityMatrix::from_pure(psi).to_relative_frame(xi_half_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{make_gaussian_packet, probability_density};

    fn psi(x0: f64, p0: f64) -> WaveFunction<f64> {
        let g = SpatialGrid::new(-8.0, 8.0, 129).unwrap();
        make_gaussian_packet(&g, x0, p0, 0.9, 1.0).unwrap()
    }

    #[test]
    fn real_even_state_gives_real_even_rho() {
        let r = to_relative_frame(&psi(0.0, 0.0), 40).unwrap();
        let m = r.xi_grid().len();
        for i in 0..r.x_grid().len() {
            for j in 0..m {
                assert!(r.get(i, j).im.abs() < 1e-15);
                assert!((r.get(i, j).re - r.get(i, m - 1 - j).re).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gaussian_is_product_of_gaussians() {
        // |ρ(x,ξ)| = (2πσ²)^{-1/2} exp(−(x−x₀)²/(2σ²) − ξ²/(8σ²)).
        let (x0, s) = (0.4, 0.9);
        let r = to_relative_frame(&psi(x0, 1.1), 30).unwrap();
        let xs = r.x_grid().points();
        let xis = r.xi_grid().points();
        let g = r.x_grid();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &xi) in xis.iter().enumerate() {
                let (q, qp) = (x - 0.5 * xi, x + 0.5 * xi);
                if q < g.x_min() - 1e-9 || qp > g.x_max() + 1e-9 || qp < g.x_min() - 1e-9 || q > g.x_max() + 1e-9 {
                    assert_eq!(r.get(i, j).norm(), 0.0);
                    continue;
                }
                let expect = (-(x - x0).powi(2) / (2.0 * s * s) - xi * xi / (8.0 * s * s)).exp()
                    / (2.0 * std::f64::consts::PI * s * s).sqrt();
                let v = r.get(i, j).norm();
                assert!((v - expect).abs() < 1e-10, "{x} {xi}");
            }
        }
    }

    #[test]
    fn diagonal_is_probability_density() {
        let p = psi(-1.0, 0.7);
        let r = to_relative_frame(&p, 20).unwrap();
        let d = r.diagonal();
        for (a, b) in d.iter().zip(probability_density(&p)) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(r.hermiticity_error() < 1e-10);
    }

    #[test]
    fn frame_round_trip_on_aligned_nodes() {
        let rho = DensityMatrix::from_pure(&psi(0.3, -0.4));
        let back = rho.to_relative_frame(64).unwrap().to_q_frame();
        let n = rho.grid().len();
        for a in 0..n {
            for b in 0..n {
                if (a + b) % 2 == 0 {
                    assert_eq!(rho.get(a, b), back.get(a, b));
                }
            }
        }
    }

    #[test]
    fn oversized_xi_grid_is_rejected() {
        assert!(to_relative_frame(&psi(0.0, 0.0), 65).is_err());
    }
}
