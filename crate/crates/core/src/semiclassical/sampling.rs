use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantum::WignerState;
use crate::rng::RngStream;
use crate::scalar::Real;

/// `W₀` below `−NEGATIVITY_TOLERANCE` anywhere is not a probability density.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;

/// Tabulated CDF over the `(x, p)` lattice of a non-negative `W₀`.
pub(crate) struct PhaseSpaceSampler<T> {
    xs: Vec<T>,
    ps: Vec<T>,
    cdf: Vec<f64>,
}

impl<T: Real> PhaseSpaceSampler<T> {
    pub(crate) fn new(w0: &WignerState<T>) -> Result<Self> {
        let min = w0.min().to_f64_lossy();
        if min < -NEGATIVITY_TOLERANCE {
            return Err(Error::Precondition(format!(
                "initial Wigner function is negative (min {min:.3e}); trajectory sampling needs W₀ ≥ 0"
            )));
        }
        let mut cdf = Vec::with_capacity(w0.values().len());
        let mut acc = 0.0;
        for &w in w0.values() {
            acc += w.to_f64_lossy().max(0.0);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::Precondition("initial Wigner function has no mass".into()));
        }
        Ok(Self {
            xs: w0.x_grid().points(),
            ps: w0.p_grid().points(),
            cdf,
        })
    }

    /// Lattice node drawn with probability `W(x_i, p_l) / Σ W`.
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (T, T) {
        let total = *self.cdf.last().unwrap();
        let u = rng.random::<f64>() * total;
        let k = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        let np = self.ps.len();
        (self.xs[k / np], self.ps[k % np])
    }
}

/// `n_traj` phase-space points drawn from `W₀`; point `i` uses
/// `stream.substream(i)`.
///
/// Samples sit on lattice nodes; the discrete distribution reproduces the
/// grid quadrature of `W₀` exactly, so low moments inherit its spectral
/// accuracy.
pub fn sample_initial_conditions<T: Real>(
    w0: &WignerState<T>,
    n_traj: usize,
    stream: RngStream,
) -> Result<Vec<(T, T)>> {
    let sampler = PhaseSpaceSampler::new(w0)?;
    Ok((0..n_traj)
        .into_par_iter()
        .map(|i| sampler.sample(&mut stream.substream(i as u64).rng()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;
    use crate::quantum::{make_gaussian_packet, to_relative_frame, wigner_transform, WaveFunction};
    use crate::stats::mean;

    fn gaussian_w0(x0: f64, p0: f64) -> WignerState<f64> {
        let g = SpatialGrid::new(-10.0, 10.0, 201).unwrap();
        let psi = make_gaussian_packet(&g, x0, p0, 0.8, 1.0).unwrap();
        let rho = to_relative_frame(&psi, 100).unwrap();
        wigner_transform(&rho, &SpatialGrid::new(-6.0, 6.0, 121).unwrap()).unwrap()
    }

    #[test]
    fn gaussian_sample_means() {
        let w0 = gaussian_w0(0.7, -0.4);
        let s = sample_initial_conditions(&w0, 50_000, RngStream::new(3, 0)).unwrap();
        let xs: Vec<f64> = s.iter().map(|p| p.0).collect();
        let ps: Vec<f64> = s.iter().map(|p| p.1).collect();
        assert!(mean(&xs).z_score(0.7) < 3.0);
        assert!(mean(&ps).z_score(-0.4) < 3.0);
    }

    #[test]
    fn cat_state_is_refused() {
        let g = SpatialGrid::new(-10.0, 10.0, 201).unwrap();
        let a = make_gaussian_packet(&g, -3.0, 0.0, 0.7, 1.0).unwrap();
        let b = make_gaussian_packet(&g, 3.0, 0.0, 0.7, 1.0).unwrap();
        let amps = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x + y).collect();
        let cat = WaveFunction::from_amplitudes(g, amps, 1.0).unwrap();
        let w = wigner_transform(&to_relative_frame(&cat, 100).unwrap(), &SpatialGrid::new(-6.0, 6.0, 121).unwrap()).unwrap();
        assert!(matches!(sample_initial_conditions(&w, 10, RngStream::new(0, 0)), Err(Error::Precondition(_))));
    }

    #[test]
    fn empty_request() {
        assert!(sample_initial_conditions(&gaussian_w0(0.0, 0.0), 0, RngStream::new(0, 0)).unwrap().is_empty());
    }
}
