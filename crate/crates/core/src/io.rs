//! Delimited-text exchange formats.
//!
//! Every table is plain CSV: optional `#`-prefixed metadata lines, one
//! header line, then one row per record. Grids are implied by the first
//! column, which must be uniformly spaced.
//!
//! * density: `x,density`
//! * wave function: `x,re,im`
//! * signed ensemble: `id,terminal_x,sign,log_magnitude`
//! * trajectory ensemble: `id,t,x`

use std::fmt::Write as _;

use crate::error::{usage, Result};
use crate::grid::SpatialGrid;
use crate::quantum::WaveFunction;
use crate::scalar::Real;
use crate::semiclassical::SignedEnsemble;
use crate::brownian::TrajectoryEnsemble;

fn header(meta: &[(String, String)], columns: &str) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "# {k}: {v}");
    }
    s.push_str(columns);
    s.push('\n');
    s
}

/// Columns of a table keyed by name.
pub fn write_table<T: Real>(meta: &[(String, String)], columns: &[&str], rows: &[Vec<T>]) -> String {
    let mut s = header(meta, &columns.join(","));
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_density<T: Real>(meta: &[(String, String)], grid: &SpatialGrid<T>, p: &[T]) -> String {
    let rows: Vec<Vec<T>> = grid.points().into_iter().zip(p).map(|(x, &v)| vec![x, v]).collect();
    write_table(meta, &["x", "density"], &rows)
}

pub fn write_wavefunction<T: Real>(meta: &[(String, String)], psi: &WaveFunction<T>) -> String {
    let mut m = meta.to_vec();
    m.push(("hbar".into(), format!("{:e}", psi.hbar())));
    let rows: Vec<Vec<T>> = psi
        .grid()
        .points()
        .into_iter()
        .zip(psi.amplitudes())
        .map(|(x, a)| vec![x, a.re, a.im])
        .collect();
    write_table(&m, &["x", "re", "im"], &rows)
}

pub fn write_signed_ensemble<T: Real>(meta: &[(String, String)], ens: &SignedEnsemble<T>) -> String {
    let mut s = header(meta, "id,terminal_x,sign,log_magnitude");
    for (i, ((x, sg), l)) in ens.terminal().iter().zip(ens.signs()).zip(ens.log_magnitudes()).enumerate() {
        let _ = writeln!(s, "{i},{x:e},{},{l:e}", sg.as_i8());
    }
    s
}

pub fn write_trajectories<T: Real>(meta: &[(String, String)], ens: &TrajectoryEnsemble<T>) -> String {
    let mut s = header(meta, "id,t,x");
    for i in 0..ens.n_traj() {
        for (t, x) in ens.times().iter().zip(ens.path(i)) {
            let _ = writeln!(s, "{i},{t:e},{x:e}");
        }
    }
    s
}

/// Parsed table: metadata, column names and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table(text: &str) -> Result<Table> {
    let mut meta = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(|c| c.trim().to_string()).collect()),
            Some(cols) => {
                let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
                let vals = vals.map_err(|e| crate::Error::Usage(format!("line {}: {e}", ln + 1)))?;
                if vals.len() != cols.len() {
                    return usage(format!("line {}: {} fields, expected {}", ln + 1, vals.len(), cols.len()));
                }
                rows.push(vals);
            }
        }
    }
    let columns = columns.ok_or_else(|| crate::Error::Usage("table has no header".into()))?;
    Ok(Table { meta, columns, rows })
}

/// A `x,density` table as `(grid, values)`; the `x` column must be uniform.
pub fn read_density(text: &str) -> Result<(SpatialGrid<f64>, Vec<f64>)> {
    let t = read_table(text)?;
    if t.columns.len() < 2 || t.columns[0] != "x" {
        return usage("density table needs columns x,density");
    }
    let xs: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
    let n = xs.len();
    if n < SpatialGrid::<f64>::MIN_POINTS {
        return usage(format!("density table has {n} rows"));
    }
    let grid = SpatialGrid::new(xs[0], xs[n - 1], n)?;
    let tol = 1e-9 * grid.dx().abs().max(1e-300) + 1e-12 * xs[n - 1].abs().max(xs[0].abs());
    for (i, &x) in xs.iter().enumerate() {
        if (x - grid.point(i)).abs() > tol.max(1e-6 * grid.dx()) {
            return usage(format!("x column is not uniform at row {i}"));
        }
    }
    Ok((grid, t.rows.iter().map(|r| r[1]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_round_trip() {
        let g = SpatialGrid::new(-2.0, 3.0, 41).unwrap();
        let p: Vec<f64> = g.points().iter().map(|&x: &f64| (-x * x).exp()).collect();
        let text = write_density(&[("seed".into(), "7".into())], &g, &p);
        assert!(text.starts_with("# seed: 7\nx,density\n"));
        let (g2, p2) = read_density(&text).unwrap();
        assert_eq!(g2.len(), g.len());
        assert!((g2.dx() - g.dx()).abs() < 1e-15);
        for (a, b) in p.iter().zip(&p2) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(read_table("x,density\n1,2\n3\n").is_err());
        assert!(read_density("x,density\n0,1\n1,1\n5,1\n6,1\n7,1\n8,1\n9,1\n10,1\n").is_err());
    }
}
