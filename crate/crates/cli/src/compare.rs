//! Distances between two tabulated densities on the same grid.

use std::fmt::Write as _;

use pathlab_core::io::{read_density, write_table};
use pathlab_core::stats::{ks_statistic_densities, l1_distance, linf_distance};
use pathlab_core::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub l1: f64,
    pub linf: f64,
    /// KS statistic of the two cumulative distributions.
    pub ks: f64,
    /// `(x, a, b, a − b)` per grid node.
    pub rows: Vec<[f64; 4]>,
}

impl Comparison {
    pub fn dump(&self) -> String {
        let rows: Vec<Vec<f64>> = self.rows.iter().map(|r| r.to_vec()).collect();
        write_table(&[], &["x", "a", "b", "difference"], &rows)
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "l1: {:.6e}", self.l1);
        let _ = writeln!(s, "linf: {:.6e}", self.linf);
        let _ = writeln!(s, "ks: {:.6e}", self.ks);
        s
    }
}

/// Compares two `x,density` tables; the grids must coincide.
pub fn compare_densities(a_text: &str, b_text: &str) -> Result<Comparison> {
    let (ga, a) = read_density(a_text)?;
    let (gb, b) = read_density(b_text)?;
    let tol = 1e-9 * ga.dx();
    if ga.len() != gb.len() || (ga.x_min() - gb.x_min()).abs() > tol || (ga.x_max() - gb.x_max()).abs() > tol {
        return Err(Error::Usage(format!(
            "grid mismatch: [{}, {}] with {} points vs [{}, {}] with {} points",
            ga.x_min(),
            ga.x_max(),
            ga.len(),
            gb.x_min(),
            gb.x_max(),
            gb.len()
        )));
    }
    let rows = ga
        .points()
        .into_iter()
        .zip(a.iter().zip(&b))
        .map(|(x, (&p, &q))| [x, p, q, p - q])
        .collect();
    Ok(Comparison {
        l1: l1_distance(&a, &b, ga.dx())?,
        linf: linf_distance(&a, &b)?,
        ks: ks_statistic_densities(&a, &b)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pathlab_core::io::write_density;
    use pathlab_core::SpatialGrid;

    fn table(g: &SpatialGrid<f64>, f: impl Fn(f64) -> f64) -> String {
        let p: Vec<f64> = g.points().into_iter().map(f).collect();
        write_density(&[], g, &p)
    }

    #[test]
    fn identical_files_are_at_distance_zero() {
        let g = SpatialGrid::new(-3.0, 3.0, 61).unwrap();
        let t = table(&g, |x| (-x * x).exp());
        let c = compare_densities(&t, &t).unwrap();
        assert_eq!((c.l1, c.linf, c.ks), (0.0, 0.0, 0.0));
        assert!(c.dump().starts_with("x,a,b,difference\n"));
    }

    #[test]
    fn disjoint_unit_boxes_are_at_total_variation_bound() {
        // Ten nodes of height 1 at dx = 0.1: unit mass each.
        let g = SpatialGrid::new(-2.0, 2.0, 41).unwrap();
        let boxed = |lo: usize| {
            let p: Vec<f64> = (0..41).map(|i| if (lo..lo + 10).contains(&i) { 1.0 } else { 0.0 }).collect();
            write_density(&[], &g, &p)
        };
        let (a, b) = (boxed(5), boxed(25));
        let c = compare_densities(&a, &b).unwrap();
        assert!((c.l1 - 2.0).abs() < 1e-12, "{}", c.l1);
        assert!((c.ks - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_gaussian_matches_quadrature() {
        // ∫|g − g(· − 0.1)| = 4Φ(0.05) − 2 for unit σ.
        let g = SpatialGrid::new(-8.0, 8.0, 1601).unwrap();
        let gauss = |m: f64| move |x: f64| (-(x - m) * (x - m) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let c = compare_densities(&table(&g, gauss(0.0)), &table(&g, gauss(0.1))).unwrap();
        let oracle = 2.0 * series_erf(0.05 / std::f64::consts::SQRT_2);
        assert!((c.l1 - oracle).abs() < 1e-3, "{} vs {oracle}", c.l1);
    }

    /// `erf` by its Maclaurin series; plenty for small arguments.
    fn series_erf(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..30 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    }

    #[test]
    fn mismatched_grids_are_a_usage_error() {
        let a = table(&SpatialGrid::new(-1.0, 1.0, 21).unwrap(), |_| 1.0);
        let b = table(&SpatialGrid::new(-1.0, 1.0, 31).unwrap(), |_| 1.0);
        assert!(matches!(compare_densities(&a, &b), Err(Error::Usage(_))));
    }
}
