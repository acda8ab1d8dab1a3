//! Small statistics toolbox: moments, histograms, density distances and
//! goodness-of-fit p-values.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{usage, Result};
use crate::grid::SpatialGrid;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: T,
}

impl<T: Real> Estimate<T> {
    /// Number of standard errors separating the estimate from `target`.
    pub fn z_score(&self, target: T) -> T {
        (self.value - target).abs() / self.std_error
    }
}

/// Sample mean with its standard error.
pub fn mean<T: Real>(xs: &[T]) -> Estimate<T> {
    let n = T::from_usize_lossy(xs.len());
    let m = xs.iter().copied().sum::<T>() / n;
    let var = xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / (n - T::one());
    Estimate {
        value: m,
        std_error: (var / n).sqrt(),
    }
}

/// Unbiased sample variance with the large-sample standard error
/// `sqrt((μ₄ − σ⁴)/n)`.
pub fn variance<T: Real>(xs: &[T]) -> Estimate<T> {
    let n = T::from_usize_lossy(xs.len());
    let m = xs.iter().copied().sum::<T>() / n;
    let (mut s2, mut s4) = (T::zero(), T::zero());
    for &x in xs {
        let d = (x - m) * (x - m);
        s2 = s2 + d;
        s4 = s4 + d * d;
    }
    let var = s2 / (n - T::one());
    let mu4 = s4 / n;
    Estimate {
        value: var,
        std_error: ((mu4 - var * var).max(T::zero()) / n).sqrt(),
    }
}

/// Histogram normalized to a density on `grid`: bin `i` is centered on
/// node `i` with width `dx`. Samples outside the outer half-cells are
/// dropped (and still count toward the normalization).
pub fn histogram_density<T: Real>(samples: &[T], grid: &SpatialGrid<T>) -> Vec<T> {
    let mut counts = vec![0usize; grid.len()];
    for &x in samples {
        if let Some(i) = grid.index_of(x) {
            counts[i] += 1;
        }
    }
    let norm = T::from_usize_lossy(samples.len()) * grid.dx();
    counts
        .into_iter()
        .map(|c| T::from_usize_lossy(c) / norm)
        .collect()
}

/// `Σ|a − b| dx`.
pub fn l1_distance<T: Real>(a: &[T], b: &[T], dx: T) -> Result<T> {
    if a.len() != b.len() {
        return usage(format!("length mismatch {} vs {}", a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum::<T>() * dx)
}

pub fn linf_distance<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return usage(format!("length mismatch {} vs {}", a.len(), b.len()));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(T::zero(), T::max))
}

/// Kolmogorov–Smirnov statistic between two densities tabulated on the same
/// grid (cumulative sums, each normalized to its own total).
pub fn ks_statistic_densities<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return usage(format!("length mismatch {} vs {}", a.len(), b.len()));
    }
    let ta: T = a.iter().copied().sum();
    let tb: T = b.iter().copied().sum();
    let (mut ca, mut cb, mut d) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        ca = ca + x / ta;
        cb = cb + y / tb;
        d = d.max((ca - cb).abs());
    }
    Ok(d)
}

/// Two-sample Kolmogorov–Smirnov test: `(D, p-value)` with the asymptotic
/// Kolmogorov distribution and the Stephens small-sample correction.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.total_cmp(q));
    xb.sort_by(|p, q| p.total_cmp(q));
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < na && j < nb {
        let v = xa[i].min(xb[j]);
        while i < na && xa[i] <= v {
            i += 1;
        }
        while j < nb && xb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// Complementary Kolmogorov distribution `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson χ² goodness of fit of observed counts against expected counts.
/// Adjacent bins are merged until each expected count is at least 5.
/// Returns `(χ², degrees of freedom, p-value)`.
pub fn chi_square_test(observed: &[f64], expected: &[f64]) -> Result<(f64, usize, f64)> {
    if observed.len() != expected.len() {
        return usage("observed/expected length mismatch");
    }
    let mut merged = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &ex) in observed.iter().zip(expected) {
        o += ob;
        e += ex;
        if e >= 5.0 {
            merged.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => merged.push((o, e)),
        }
    }
    if merged.len() < 2 {
        return usage("too few populated bins for a chi-square test");
    }
    let chi2: f64 = merged.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = merged.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| crate::Error::Usage(e.to_string()))?;
    Ok((chi2, dof, 1.0 - dist.cdf(chi2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_variance() {
        let xs = [1.0f64, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs).value, 2.5);
        assert!((variance(&xs).value - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn distances() {
        let a = [0.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let b = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0];
        assert_eq!(l1_distance(&a, &b, 1.0).unwrap(), 4.0);
        assert_eq!(linf_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(ks_statistic_densities(&a, &b).unwrap(), 1.0);
        assert!(l1_distance(&a, &b[..3], 1.0).is_err());
    }

    #[test]
    fn kolmogorov_tail() {
        // Q(1.36) ≈ 0.05, Q(1.63) ≈ 0.01.
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn ks_identical_samples() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let (d, p) = ks_two_sample(&a, &a);
        assert_eq!(d, 0.0);
        assert!(p > 0.99);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let e = vec![100.0; 10];
        let (chi2, dof, p) = chi_square_test(&e, &e).unwrap();
        assert_eq!(chi2, 0.0);
        assert_eq!(dof, 9);
        assert!(p > 0.999);
    }
}
