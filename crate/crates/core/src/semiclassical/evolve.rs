use rayon::prelude::*;

use crate::brownian::{Recording, TrajectoryEnsemble};
use crate::error::{usage, Error, Result};
use crate::functionals::{AiryProposal, Sign, DEFAULT_TRUNCATION};
use crate::grid::TimeGrid;
use crate::potential::Potential1D;
use crate::quantum::WignerState;
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::semiclassical::estimators::weight_diagnostics;
use crate::semiclassical::phi::PhiField;
use crate::semiclassical::sampling::PhaseSpaceSampler;

/// `|V'''| below this makes a slice classical.
pub const DEGENERATE_THRESHOLD: f64 = 1e-10;
/// Allowed `|E_b − E_a|` for noiseless trajectories, relative to
/// `|E_a| + max_k |V(x_k) − V(x_a)|`.
pub const ENERGY_DRIFT_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiLangevinConfig {
    /// Negative-side truncation `L` of the `|Ai|` proposal.
    pub truncation: f64,
    /// Multiply non-degenerate slice weights by `1/|φ(x_k)|`.
    pub measure_factor: bool,
    /// `|φ|` at or below this skips the measure factor.
    pub phi_min: f64,
    /// Mean sign below this is a sign collapse; `0` disables the check.
    pub sign_floor: f64,
    pub recording: Recording,
    /// Keep recorded positions for every trajectory.
    pub keep_paths: bool,
}

impl Default for QuasiLangevinConfig {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_TRUNCATION,
            measure_factor: false,
            phi_min: 1e-8,
            sign_floor: 0.01,
            recording: Recording::Terminal,
            keep_paths: false,
        }
    }
}

/// Quasi-Langevin ensemble with one signed weight per trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedEnsemble<T> {
    pub(crate) initials: Vec<(T, T)>,
    pub(crate) terminal: Vec<T>,
    pub(crate) slices: Vec<usize>,
    pub(crate) times: Vec<T>,
    pub(crate) paths: Option<Vec<T>>,
    pub(crate) log_magnitude: Vec<T>,
    pub(crate) sign: Vec<Sign>,
    pub(crate) slice_draws: Vec<u64>,
    pub(crate) slice_negative: Vec<u64>,
    pub(crate) degenerate_slices: u64,
    pub(crate) stream: RngStream,
    pub(crate) config: QuasiLangevinConfig,
}

impl<T: Real> SignedEnsemble<T> {
    pub fn n_traj(&self) -> usize {
        self.terminal.len()
    }

    pub fn initials(&self) -> &[(T, T)] {
        &self.initials
    }

    pub fn terminal(&self) -> &[T] {
        &self.terminal
    }

    pub fn slices(&self) -> &[usize] {
        &self.slices
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Recorded positions of trajectory `i`, if paths were kept.
    pub fn path(&self, i: usize) -> Option<&[T]> {
        let r = self.slices.len();
        self.paths.as_ref().map(|p| &p[i * r..(i + 1) * r])
    }

    pub fn log_magnitudes(&self) -> &[T] {
        &self.log_magnitude
    }

    pub fn signs(&self) -> &[Sign] {
        &self.sign
    }

    /// Signed weights rescaled by the largest magnitude.
    pub fn weights(&self) -> Vec<T> {
        let top = self
            .log_magnitude
            .iter()
            .copied()
            .fold(T::neg_infinity(), T::max);
        self.log_magnitude
            .iter()
            .zip(&self.sign)
            .map(|(&l, s)| s.value::<T>() * (l - top).exp())
            .collect()
    }

    /// Non-degenerate draws made on interior slice `k` (index `k − 1`).
    pub fn slice_draws(&self) -> &[u64] {
        &self.slice_draws
    }

    /// Draws with sign −1 on each interior slice.
    pub fn slice_negative(&self) -> &[u64] {
        &self.slice_negative
    }

    pub fn degenerate_slices(&self) -> u64 {
        self.degenerate_slices
    }

    /// Interior slices over all trajectories, degenerate or not.
    pub fn total_slices(&self) -> u64 {
        self.slice_draws.len() as u64 * self.n_traj() as u64
    }

    pub fn stream(&self) -> RngStream {
        self.stream
    }

    pub fn config(&self) -> &QuasiLangevinConfig {
        &self.config
    }
}

/// What the stepper reports back for one trajectory.
struct PathOutcome<T> {
    recorded: Vec<T>,
    last: T,
    velocity: T,
    /// `max_k |V(x_k) − V(x₀)|`, the energy exchanged along the path.
    swing: T,
}

/// Störmer–Verlet for `m ẍ = −V'(x) + ħφ(x)R`:
///
/// * `x₁ = x₀ + ε p₀/m + (ε²/2m) F(x₀)`
/// * `x_{k+1} = 2x_k − x_{k−1} + (ε²/m)[F(x_k) + kick_k(x_k)]`, `k = 1..N−1`
///
/// with `F = −V'`. `kick(k, x)` returns the extra force at interior slice `k`
/// and is never called at the endpoints. The returned velocity is the
/// velocity-Verlet value `(x_N − x_{N−1})/ε + (ε/2m)F(x_N)`.
fn verlet_path<T: Real>(
    pot: &Potential1D<T>,
    (x0, p0): (T, T),
    time: &TimeGrid<T>,
    slices: &[usize],
    mut kick: impl FnMut(usize, T) -> T,
) -> PathOutcome<T> {
    let n = time.n_slices();
    let m = pot.mass();
    let mut recorded = Vec::with_capacity(slices.len());
    let mut next = 0;
    let mut record = |k: usize, x: T, out: &mut Vec<T>| {
        if next < slices.len() && slices[next] == k {
            out.push(x);
            next += 1;
        }
    };
    record(0, x0, &mut recorded);
    if n == 0 {
        return PathOutcome {
            recorded,
            last: x0,
            velocity: p0 / m,
            swing: T::zero(),
        };
    }
    let eps = time.epsilon();
    let e2m = eps * eps / m;
    let half = T::lit(0.5);
    let mut prev = x0;
    let v0 = pot.value(x0);
    let mut cur = x0 + eps * p0 / m + half * e2m * (-pot.d1(x0));
    let mut swing = (pot.value(cur) - v0).abs();
    record(1, cur, &mut recorded);
    for k in 1..n {
        let force = -pot.d1(cur) + kick(k, cur);
        let new = T::lit(2.0) * cur - prev + e2m * force;
        prev = cur;
        cur = new;
        swing = swing.max((pot.value(cur) - v0).abs());
        record(k + 1, cur, &mut recorded);
    }
    let velocity = (cur - prev) / eps + half * eps / m * (-pot.d1(cur));
    PathOutcome {
        recorded,
        last: cur,
        velocity,
        swing,
    }
}

fn energy<T: Real>(pot: &Potential1D<T>, x: T, v: T) -> T {
    T::lit(0.5) * pot.mass() * v * v + pot.value(x)
}

/// Deterministic Newton trajectories `m ẍ = −V'(x)` from the given
/// `(x_a, p_a)` pairs. The initial slope is `p_a/m`.
pub fn classical_evolve<T: Real>(
    initials: &[(T, T)],
    pot: &Potential1D<T>,
    time: &TimeGrid<T>,
    recording: Recording,
) -> Result<TrajectoryEnsemble<T>> {
    let slices = recording.slices(time.n_slices());
    let results: Vec<Result<Vec<T>>> = initials
        .par_iter()
        .map(|&(x0, p0)| {
            let out = verlet_path(pot, (x0, p0), time, &slices, |_, _| T::zero());
            let e0 = energy(pot, x0, p0 / pot.mass());
            let e1 = energy(pot, out.last, out.velocity);
            // Relative to |E₀| plus the energy exchanged along the path, so
            // the check does not depend on where V has its zero.
            let scale = e0.abs() + out.swing;
            let tol = T::lit(ENERGY_DRIFT_LIMIT) * scale + T::lit(1e-12);
            if !((e1 - e0).abs() <= tol) {
                return Err(Error::Configuration(format!(
                    "energy drift {:.3e} from E = {e0:.6} exceeds {ENERGY_DRIFT_LIMIT:.0e} of the energy scale; reduce ε",
                    (e1 - e0).abs()
                )));
            }
            Ok(out.recorded)
        })
        .collect();
    let paths = results.into_iter().collect::<Result<Vec<_>>>()?;
    let times = slices.iter().map(|&k| time.t(k)).collect();
    Ok(TrajectoryEnsemble::from_parts(slices, times, paths, None))
}

struct QlTrajectory<T> {
    init: (T, T),
    recorded: Vec<T>,
    last: T,
    log_magnitude: T,
    sign: Sign,
    negative: Vec<bool>,
    drawn: Vec<bool>,
}

/// Signed-weight simulation of `m ẍ = −V'(x) + ħφ(x)R`.
///
/// Trajectory `i` draws `(x_a, p_a)` from `W₀` with `stream.substream(i)`
/// (the same points [`super::sample_initial_conditions`] returns) and its
/// auxiliary force from an independent stream. On interior slice `k`:
///
/// * if `|V'''(x_k)| < DEGENERATE_THRESHOLD` the update is classical and the
///   weight is unchanged;
/// * otherwise `u ~ |Ai(u)|/Z_L` on `[−L, L₊]`, `R_k = ε^{−2/3} u`, and the
///   weight picks up `sgn Ai(u) · Z_L` (optionally also `1/|φ(x_k)|`).
///
/// The weight `sgn·Z_L` is the ratio of the normalized slice density
/// `ε^{2/3}Ai(ε^{2/3}R)` to the proposal, so a classical slice and an Airy
/// slice are on the same footing.
pub fn quasi_langevin_simulate<T: Real>(
    w0: &WignerState<T>,
    pot: &Potential1D<T>,
    hbar: T,
    time: &TimeGrid<T>,
    n_traj: usize,
    config: &QuasiLangevinConfig,
    stream: RngStream,
) -> Result<SignedEnsemble<T>> {
    if !(config.phi_min >= 0.0) || !(config.sign_floor >= 0.0 && config.sign_floor < 1.0) {
        return usage("phi_min must be ≥ 0 and the sign floor in [0, 1)");
    }
    let field = PhiField::new(*pot, hbar)?;
    let proposal = AiryProposal::new(config.truncation)?;
    let sampler = PhaseSpaceSampler::new(w0)?;
    let n = time.n_slices();
    let interior = n.saturating_sub(1);
    let slices = config.recording.slices(n);
    let eps = if n > 0 { time.epsilon() } else { T::one() };
    let r_scale = eps.powf(T::lit(-2.0 / 3.0));
    let log_z = T::lit(proposal.abs_mass().ln());
    let threshold = T::lit(DEGENERATE_THRESHOLD);
    let phi_min = T::lit(config.phi_min);
    let noise_root = stream.substream(u64::MAX);

    let runs: Vec<QlTrajectory<T>> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let init = sampler.sample(&mut stream.substream(i as u64).rng());
            let mut rng = noise_root.substream(i as u64).rng();
            let mut log_magnitude = T::zero();
            let mut sign = Sign::Plus;
            let mut negative = vec![false; interior];
            let mut drawn = vec![false; interior];
            let out = verlet_path(pot, init, time, &slices, |k, x| {
                if pot.d3(x).abs() < threshold {
                    return T::zero();
                }
                let draw = proposal.sample::<T, _>(&mut rng);
                drawn[k - 1] = true;
                negative[k - 1] = draw.sign == Sign::Minus;
                sign = sign * draw.sign;
                log_magnitude = log_magnitude + log_z;
                let ph = field.eval(x);
                if config.measure_factor && ph.abs() > phi_min {
                    log_magnitude = log_magnitude - ph.abs().ln();
                }
                hbar * ph * draw.value * r_scale
            });
            QlTrajectory {
                init,
                recorded: out.recorded,
                last: out.last,
                log_magnitude,
                sign,
                negative,
                drawn,
            }
        })
        .collect();

    let mut ens = SignedEnsemble {
        initials: Vec::with_capacity(n_traj),
        terminal: Vec::with_capacity(n_traj),
        slices,
        times: Vec::new(),
        paths: config.keep_paths.then(Vec::new),
        log_magnitude: Vec::with_capacity(n_traj),
        sign: Vec::with_capacity(n_traj),
        slice_draws: vec![0; interior],
        slice_negative: vec![0; interior],
        degenerate_slices: 0,
        stream,
        config: *config,
    };
    ens.times = ens.slices.iter().map(|&k| time.t(k)).collect();
    for run in runs {
        ens.initials.push(run.init);
        ens.terminal.push(run.last);
        if let Some(p) = ens.paths.as_mut() {
            p.extend(run.recorded);
        }
        ens.log_magnitude.push(run.log_magnitude);
        ens.sign.push(run.sign);
        for k in 0..interior {
            if run.drawn[k] {
                ens.slice_draws[k] += 1;
                ens.slice_negative[k] += run.negative[k] as u64;
            } else {
                ens.degenerate_slices += 1;
            }
        }
    }
    if config.sign_floor > 0.0 && n_traj > 0 {
        let (mean_sign, ess) = weight_diagnostics(&ens.weights());
        let ms = mean_sign.to_f64_lossy();
        if !(ms >= config.sign_floor) {
            return Err(Error::SignCollapse {
                mean_sign: ms,
                floor: config.sign_floor,
                ess: ess.to_f64_lossy(),
                n: n_traj,
            });
        }
    }
    Ok(ens)
}
