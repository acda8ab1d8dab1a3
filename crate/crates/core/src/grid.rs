//! Uniform spatial grids and the polygonal time slicing.

use crate::error::{usage, Result};
use crate::scalar::Real;

/// Uniform grid `x_i = x_min + i dx`, `i = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid<T> {
    x_min: T,
    x_max: T,
    n_points: usize,
}

impl<T: Real> SpatialGrid<T> {
    pub const MIN_POINTS: usize = 8;

    pub fn new(x_min: T, x_max: T, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return usage("grid bounds must be finite");
        }
        if x_max <= x_min {
            return usage(format!("grid bounds inverted: x_min = {x_min}, x_max = {x_max}"));
        }
        if n_points < Self::MIN_POINTS {
            return usage(format!(
                "grid needs at least {} points, got {n_points}",
                Self::MIN_POINTS
            ));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Like [`SpatialGrid::new`] but without the minimum point count, for
    /// derived lattices such as the ξ axis.
    pub(crate) fn new_unchecked_len(x_min: T, x_max: T, n_points: usize) -> Result<Self> {
        if x_max <= x_min || n_points < 2 {
            return usage("degenerate auxiliary grid");
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::from_usize_lossy(self.n_points - 1)
    }

    pub fn span(&self) -> T {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn point(&self, i: usize) -> T {
        if i + 1 == self.n_points {
            return self.x_max;
        }
        self.x_min + T::from_usize_lossy(i) * self.dx()
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Nearest node index, or `None` outside the grid.
    pub fn index_of(&self, x: T) -> Option<usize> {
        let half = T::lit(0.5) * self.dx();
        if x < self.x_min - half || x > self.x_max + half {
            return None;
        }
        let f = ((x - self.x_min) / self.dx()).round();
        f.to_usize().map(|i| i.min(self.n_points - 1))
    }

    /// Trapezoidal quadrature of samples on this grid.
    pub fn integrate(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.n_points);
        let inner: T = values.iter().copied().sum();
        let ends = T::lit(0.5) * (values[0] + values[self.n_points - 1]);
        (inner - ends) * self.dx()
    }
}

/// Polygonal time slicing: `N` slices of width `ε = (t_b − t_a)/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t_a: T,
    t_b: T,
    n_slices: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_a: T, t_b: T, n_slices: usize) -> Result<Self> {
        if n_slices == 0 {
            return usage("time grid needs at least one slice");
        }
        if !(t_b > t_a) || !t_a.is_finite() || !t_b.is_finite() {
            return usage(format!("time interval must satisfy t_b > t_a, got [{t_a}, {t_b}]"));
        }
        Ok(Self { t_a, t_b, n_slices })
    }

    /// Zero-length interval with no slices; propagators treat it as identity.
    pub fn empty(t: T) -> Self {
        Self {
            t_a: t,
            t_b: t,
            n_slices: 0,
        }
    }

    pub fn t_a(&self) -> T {
        self.t_a
    }

    pub fn t_b(&self) -> T {
        self.t_b
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn duration(&self) -> T {
        self.t_b - self.t_a
    }

    pub fn epsilon(&self) -> T {
        if self.n_slices == 0 {
            return T::zero();
        }
        (self.t_b - self.t_a) / T::from_usize_lossy(self.n_slices)
    }

    pub fn t(&self, k: usize) -> T {
        if k == self.n_slices {
            return self.t_b;
        }
        self.t_a + T::from_usize_lossy(k) * self.epsilon()
    }

    /// Splits at slice `k` into `[t_a, t_k]` and `[t_k, t_b]`.
    pub fn split_at(&self, k: usize) -> Result<(Self, Self)> {
        if k == 0 || k >= self.n_slices {
            return usage(format!("split index {k} must lie strictly inside 0..{}", self.n_slices));
        }
        let tm = self.t(k);
        Ok((
            Self {
                t_a: self.t_a,
                t_b: tm,
                n_slices: k,
            },
            Self {
                t_a: tm,
                t_b: self.t_b,
                n_slices: self.n_slices - k,
            },
        ))
    }
}
