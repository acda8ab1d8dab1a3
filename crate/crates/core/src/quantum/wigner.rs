//! Wigner function of a density matrix given in the relative frame.
//!
//! Normalization: `W(x,p) = (1/2πħ) ∫dξ e^{ipξ/ħ} ρ(x,ξ)`, so that
//! `∫∫W dx dp = 1` and `∫W dp = ρ(x, 0)`. The transform without the
//! `1/(2πħ)` prefactor is `2πħ W`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::quantum::density::DensityMatrixXY;
use crate::scalar::Real;

/// Tolerated `|Im W|` after the transform.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-9;
/// Tolerated `|ρ|` at the outermost represented ξ, relative to `max|ρ|`.
pub const XI_DECAY_LIMIT: f64 = 1e-10;

/// Real `W(x_i, p_l)` stored row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerState<T> {
    x_grid: SpatialGrid<T>,
    p_grid: SpatialGrid<T>,
    values: Vec<T>,
    imag_residue: T,
}

impl<T: Real> WignerState<T> {
    pub fn from_values(x_grid: SpatialGrid<T>, p_grid: SpatialGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != x_grid.len() * p_grid.len() {
            return Err(Error::Usage("Wigner values do not match the grids".into()));
        }
        Ok(Self {
            x_grid,
            p_grid,
            values,
            imag_residue: T::zero(),
        })
    }

    pub fn x_grid(&self) -> &SpatialGrid<T> {
        &self.x_grid
    }

    pub fn p_grid(&self) -> &SpatialGrid<T> {
        &self.p_grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, i: usize, l: usize) -> T {
        self.values[i * self.p_grid.len() + l]
    }

    /// Largest imaginary part discarded by the transform.
    pub fn imag_residue(&self) -> T {
        self.imag_residue
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.x_grid.dx() * self.p_grid.dx()
    }

    /// `∫W dp` on the x grid.
    pub fn position_marginal(&self) -> Vec<T> {
        let np = self.p_grid.len();
        self.values
            .chunks(np)
            .map(|row| row.iter().copied().sum::<T>() * self.p_grid.dx())
            .collect()
    }

    /// `∫W dx` on the p grid.
    pub fn momentum_marginal(&self) -> Vec<T> {
        let np = self.p_grid.len();
        let mut out = vec![T::zero(); np];
        for row in self.values.chunks(np) {
            for (o, &w) in out.iter_mut().zip(row) {
                *o = *o + w;
            }
        }
        out.into_iter().map(|v| v * self.x_grid.dx()).collect()
    }

    /// `(⟨x⟩, ⟨p⟩)` under `W`.
    pub fn means(&self) -> (T, T) {
        let xs = self.x_grid.points();
        let ps = self.p_grid.points();
        let np = ps.len();
        let (mut mx, mut mp, mut tot) = (T::zero(), T::zero(), T::zero());
        for (i, &x) in xs.iter().enumerate() {
            for (l, &p) in ps.iter().enumerate() {
                let w = self.values[i * np + l];
                mx = mx + x * w;
                mp = mp + p * w;
                tot = tot + w;
            }
        }
        (mx / tot, mp / tot)
    }
}

/// Fourier transform of `ρ(x, ξ)` in `ξ` onto the momentum grid `p_grid`.
pub fn wigner_transform<T: Real>(
    rho: &DensityMatrixXY<T>,
    p_grid: &SpatialGrid<T>,
) -> Result<WignerState<T>> {
    let peak = rho.values().iter().map(|v| v.norm()).fold(T::zero(), T::max);
    let edge = rho.xi_edge_magnitude();
    if edge > T::lit(XI_DECAY_LIMIT) * peak {
        return Err(Error::Accuracy(format!(
            "ρ has not decayed at the ξ-grid edges (|ρ| = {edge:.2e} vs peak {peak:.2e}); widen the ξ grid"
        )));
    }
    let hbar = rho.hbar();
    let xis = rho.xi_grid().points();
    let ps = p_grid.points();
    let (nx, nxi, np) = (rho.x_grid().len(), xis.len(), ps.len());
    let pref = rho.xi_grid().dx() / (T::lit(2.0) * T::PI() * hbar);
    let phases: Vec<Complex<T>> = ps
        .iter()
        .flat_map(|&p| xis.iter().map(move |&xi| Complex::from_polar(T::one(), p * xi / hbar)))
        .collect();

    let rows: Vec<(Vec<T>, T)> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let row = &rho.values()[i * nxi..(i + 1) * nxi];
            let mut out = Vec::with_capacity(np);
            let mut resid = T::zero();
            for l in 0..np {
                let ph = &phases[l * nxi..(l + 1) * nxi];
                let mut acc = Complex::new(T::zero(), T::zero());
                for (r, e) in row.iter().zip(ph) {
                    acc = acc + r * e;
                }
                out.push(acc.re * pref);
                resid = resid.max((acc.im * pref).abs());
            }
            (out, resid)
        })
        .collect();

    let mut values = Vec::with_capacity(nx * np);
    let mut imag_residue = T::zero();
    for (row, r) in rows {
        values.extend(row);
        imag_residue = imag_residue.max(r);
    }
    if imag_residue > T::lit(IMAG_RESIDUE_LIMIT) {
        return Err(Error::Accuracy(format!(
            "Wigner transform has imaginary residue {imag_residue:.2e}; input is not Hermitian"
        )));
    }
    Ok(WignerState {
        x_grid: *rho.x_grid(),
        p_grid: *p_grid,
        values,
        imag_residue,
    })
}
