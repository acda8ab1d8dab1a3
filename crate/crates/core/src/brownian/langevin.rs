use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::brownian::params::BrownianParams;
use crate::error::{usage, Error, Result};
use crate::grid::TimeGrid;
use crate::potential::Potential1D;
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::stats::Estimate;

/// Largest allowed `ε |V''(x)|/(mγ)` at any visited point.
pub const STABILITY_LIMIT: f64 = 0.5;
const MIN_NOISE_SAMPLES: usize = 10_000;

/// Distribution of the starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpec<T> {
    Point(T),
    Gaussian { mean: T, std: T },
}

impl<T: Real> InitialSpec<T> {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match *self {
            InitialSpec::Point(x) => x,
            InitialSpec::Gaussian { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * T::lit(z)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            InitialSpec::Point(x) if !x.is_finite() => usage("initial point must be finite"),
            InitialSpec::Gaussian { std, .. } if !(std >= T::zero()) => {
                usage(format!("initial std must be non-negative, got {std}"))
            }
            _ => Ok(()),
        }
    }
}

/// Which slices of each path are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recording {
    /// Start and end points only.
    #[default]
    Terminal,
    /// Slices `0, k, 2k, …` and always the last one.
    Every(usize),
}

impl Recording {
    pub(crate) fn slices(self, n: usize) -> Vec<usize> {
        match self {
            Recording::Terminal => {
                if n == 0 {
                    vec![0]
                } else {
                    vec![0, n]
                }
            }
            Recording::Every(k) => {
                let k = k.max(1);
                let mut s: Vec<usize> = (0..=n).step_by(k).collect();
                if *s.last().unwrap() != n {
                    s.push(n);
                }
                s
            }
        }
    }
}

/// Positions of `n_traj` paths at the recorded slices, row-major by
/// trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble<T> {
    n_traj: usize,
    slices: Vec<usize>,
    times: Vec<T>,
    positions: Vec<T>,
    stream: Option<RngStream>,
}

impl<T: Real> TrajectoryEnsemble<T> {
    pub(crate) fn from_parts(
        slices: Vec<usize>,
        times: Vec<T>,
        paths: Vec<Vec<T>>,
        stream: Option<RngStream>,
    ) -> Self {
        let n_traj = paths.len();
        let positions = paths.into_iter().flatten().collect();
        Self {
            n_traj,
            slices,
            times,
            positions,
            stream,
        }
    }

    pub fn n_traj(&self) -> usize {
        self.n_traj
    }

    /// Slice indices that were recorded.
    pub fn slices(&self) -> &[usize] {
        &self.slices
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Seed provenance; `None` for deterministic ensembles.
    pub fn stream(&self) -> Option<RngStream> {
        self.stream
    }

    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    pub fn path(&self, i: usize) -> &[T] {
        let r = self.slices.len();
        &self.positions[i * r..(i + 1) * r]
    }

    /// All positions at recorded column `j`.
    pub fn at(&self, j: usize) -> Vec<T> {
        let r = self.slices.len();
        (0..self.n_traj).map(|i| self.positions[i * r + j]).collect()
    }

    pub fn terminal(&self) -> Vec<T> {
        self.at(self.slices.len() - 1)
    }
}

/// Integrates `x_{k+1} = x_k + ε(−V'(x_k)/(mγ) + R_k)` for one path with the
/// noise supplied by `noise(k)`.
fn integrate_path<T: Real>(
    params: &BrownianParams<T>,
    pot: &Potential1D<T>,
    x0: T,
    time: &TimeGrid<T>,
    slices: &[usize],
    mut noise: impl FnMut(usize) -> T,
) -> Result<Vec<T>> {
    let eps = time.epsilon();
    let mob = params.mobility();
    let limit = T::lit(STABILITY_LIMIT);
    let mut out = Vec::with_capacity(slices.len());
    let mut next = 0;
    let mut x = x0;
    for k in 0..=time.n_slices() {
        if next < slices.len() && slices[next] == k {
            out.push(x);
            next += 1;
        }
        if k == time.n_slices() {
            break;
        }
        let stiff = eps * pot.d2(x).abs() * mob;
        if !(stiff < limit) {
            return Err(Error::Configuration(format!(
                "ε|V''|/(mγ) = {stiff:.3} at x = {x:.3} (slice {k}) exceeds {STABILITY_LIMIT}; reduce ε"
            )));
        }
        x = x + eps * (-mob * pot.d1(x) + noise(k));
    }
    Ok(out)
}

fn collect_paths<T: Real>(
    n_traj: usize,
    f: impl Fn(usize) -> Result<Vec<T>> + Sync + Send,
) -> Result<Vec<Vec<T>>> {
    let results: Vec<Result<Vec<T>>> = (0..n_traj).into_par_iter().map(f).collect();
    results.into_iter().collect()
}

/// Euler–Maruyama ensemble with `R_k ~ N(0, 2D/ε)`. Trajectory `i` uses
/// `stream.substream(i)`, so the ensemble does not depend on thread count.
pub fn langevin_simulate<T: Real>(
    params: &BrownianParams<T>,
    pot: &Potential1D<T>,
    initial: &InitialSpec<T>,
    time: &TimeGrid<T>,
    n_traj: usize,
    recording: Recording,
    stream: RngStream,
) -> Result<TrajectoryEnsemble<T>> {
    initial.validate()?;
    let slices = recording.slices(time.n_slices());
    let sd = if time.n_slices() > 0 {
        (T::lit(2.0) * params.diffusion() / time.epsilon()).sqrt()
    } else {
        T::zero()
    };
    let noisy = sd > T::zero();
    let paths = collect_paths(n_traj, |i| {
        let mut rng = stream.substream(i as u64).rng();
        let x0 = initial.sample(&mut rng);
        integrate_path(params, pot, x0, time, &slices, |_| {
            if noisy {
                let z: f64 = rng.sample(StandardNormal);
                sd * T::lit(z)
            } else {
                T::zero()
            }
        })
    })?;
    let times = slices.iter().map(|&k| time.t(k)).collect();
    Ok(TrajectoryEnsemble::from_parts(slices, times, paths, Some(stream)))
}

/// The same process written as a path integral over the noise: a whole path
/// `R = (R_0, …, R_{N−1})` is drawn from the Gaussian functional
/// `exp{−(ε/2D′) Σ R_k²}` with `D′ = 2D`, then the Δ-functional picks the
/// unique trajectory with `ẋ + V'/(mγ) − R = 0` on every slice.
///
/// Normal deviates come from the Box–Muller transform, independently of the
/// sampler used by [`langevin_simulate`].
pub fn functional_form_simulate<T: Real>(
    params: &BrownianParams<T>,
    pot: &Potential1D<T>,
    initial: &InitialSpec<T>,
    time: &TimeGrid<T>,
    n_traj: usize,
    recording: Recording,
    stream: RngStream,
) -> Result<TrajectoryEnsemble<T>> {
    initial.validate()?;
    let n = time.n_slices();
    let slices = recording.slices(n);
    let d_prime = T::lit(2.0) * params.diffusion();
    let sd = if n > 0 { (d_prime / time.epsilon()).sqrt() } else { T::zero() };
    let paths = collect_paths(n_traj, |i| {
        let mut rng = stream.substream(i as u64).rng();
        let x0 = initial.sample(&mut rng);
        let mut r = Vec::with_capacity(n + 1);
        while r.len() < n {
            let (u1, u2): (f64, f64) = (1.0 - rng.random::<f64>(), rng.random::<f64>());
            let rad = (-2.0 * u1.ln()).sqrt();
            let ang = 2.0 * std::f64::consts::PI * u2;
            r.push(sd * T::lit(rad * ang.cos()));
            r.push(sd * T::lit(rad * ang.sin()));
        }
        integrate_path(params, pot, x0, time, &slices, |k| r[k])
    })?;
    let times = slices.iter().map(|&k| time.t(k)).collect();
    Ok(TrajectoryEnsemble::from_parts(slices, times, paths, Some(stream)))
}

/// `n` consecutive noise values `R_k ~ N(0, 2D/ε)` as the Euler–Maruyama
/// integrator draws them.
pub fn langevin_noise<T: Real>(params: &BrownianParams<T>, epsilon: T, n: usize, stream: RngStream) -> Vec<T> {
    let sd = (T::lit(2.0) * params.diffusion() / epsilon).sqrt();
    let mut rng = stream.rng();
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            sd * T::lit(z)
        })
        .collect()
}

/// Sample mean and autocovariance `C(ℓ) = ⟨(R_k − m)(R_{k+ℓ} − m)⟩` for
/// `ℓ = 0..=max_lag`, each with a standard error from the spread of the
/// lagged products.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMoments<T> {
    pub mean: Estimate<T>,
    pub autocovariance: Vec<Estimate<T>>,
}

pub fn noise_moment_check<T: Real>(noise: &[T], max_lag: usize) -> Result<NoiseMoments<T>> {
    if noise.len() < MIN_NOISE_SAMPLES {
        return usage(format!(
            "need at least {MIN_NOISE_SAMPLES} noise samples, got {}",
            noise.len()
        ));
    }
    if max_lag >= noise.len() / 2 {
        return usage("lag too large for the sample");
    }
    let mean = crate::stats::mean(noise);
    let m = mean.value;
    let autocovariance = (0..=max_lag)
        .map(|lag| {
            let prods: Vec<T> = noise
                .iter()
                .zip(&noise[lag..])
                .map(|(&a, &b)| (a - m) * (b - m))
                .collect();
            crate::stats::mean(&prods)
        })
        .collect();
    Ok(NoiseMoments {
        mean,
        autocovariance,
    })
}
