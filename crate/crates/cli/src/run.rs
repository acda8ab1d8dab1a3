//! Experiment drivers.
//!
//! Each driver returns its tables, plots and report in memory; writing them
//! out is the caller's business. Nothing that depends on wall-clock time or
//! thread scheduling reaches the output, so a (config, seed) pair always
//! produces the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use pathlab_core::brownian::{
    boltzmann_density, brownian_pathintegral_propagator, fokker_planck_evolve, langevin_noise, langevin_simulate,
    noise_moment_check, FokkerPlanckScheme, InitialSpec, Recording,
};
use pathlab_core::functionals::{airy_ai, airy_ai_prime};
use pathlab_core::io::{write_signed_ensemble, write_table};
use pathlab_core::quantum::{
    make_gaussian_packet, probability_density, propagate_density_matrix_pathintegral, to_relative_frame,
    wigner_transform, SplitStep,
};
use pathlab_core::semiclassical::{
    classical_evolve, quasi_langevin_simulate, ratio_density, ratio_estimate, sample_initial_conditions,
    sign_diagnostics, Observable, QuasiLangevinConfig,
};
use pathlab_core::stats::{histogram_density, l1_distance, linf_distance, mean, variance};
use pathlab_core::{
    BrownianParams, DensityMatrix, Error, Potential, RngStream, SpatialGrid, TimeGrid, WaveFunction, WignerState,
};

use crate::config::{Experiment, RunConfig};
use crate::svg::{line_plot, Series};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    /// Plain-text `key: value` report.
    pub report: String,
    /// Every numeric report entry, keyed as in the report.
    pub metrics: BTreeMap<String, f64>,
}

/// A failed run still carries a report naming the condition.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub report: String,
}

/// Short name of the failure class, as printed in reports.
pub fn condition_name(e: &Error) -> &'static str {
    match e {
        Error::Usage(_) => "usage error",
        Error::Configuration(_) => "configuration error",
        Error::NumericalStability(_) => "numerical stability",
        Error::Accuracy(_) => "accuracy",
        Error::Precondition(_) => "precondition violated",
        Error::SignCollapse { .. } => "sign collapse",
    }
}

struct Run<'a> {
    cfg: &'a RunConfig,
    meta: Vec<(String, String)>,
    report: String,
    metrics: BTreeMap<String, f64>,
    artifacts: Vec<Artifact>,
}

impl<'a> Run<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        let meta = vec![
            ("experiment".to_string(), cfg.experiment.as_str().to_string()),
            ("config_sha256".to_string(), cfg.hash()),
            ("seed".to_string(), cfg.seed.to_string()),
        ];
        let mut report = String::new();
        for (k, v) in &meta {
            let _ = writeln!(report, "{k}: {v}");
        }
        Self {
            cfg,
            meta,
            report,
            metrics: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    fn section(&mut self, title: &str) {
        let _ = writeln!(self.report, "\n[{title}]");
    }

    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.report, "{key}: {value}");
    }

    fn text(&mut self, s: &str) {
        self.report.push_str(s);
        self.report.push('\n');
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.line(key, format!("{v:.6e}"));
        self.metrics.insert(key.to_string(), v);
    }

    fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<f64>]) {
        let contents = write_table(&self.meta, columns, rows);
        self.artifacts.push(Artifact {
            name: name.to_string(),
            contents,
        });
    }

    fn raw(&mut self, name: &str, contents: String) {
        self.artifacts.push(Artifact {
            name: name.to_string(),
            contents,
        });
    }

    fn finish(self) -> RunOutput {
        let mut artifacts = self.artifacts;
        artifacts.push(Artifact {
            name: "config.toml".into(),
            contents: self.cfg.to_toml(),
        });
        RunOutput {
            artifacts,
            report: self.report,
            metrics: self.metrics,
        }
    }

    fn fail(mut self, error: Error) -> RunFailure {
        self.section("failure");
        self.line("status", "failed");
        self.line("condition", condition_name(&error));
        self.line("detail", &error);
        if let Error::SignCollapse {
            mean_sign,
            floor,
            ess,
            n,
        } = error
        {
            self.line("mean_sign", format!("{mean_sign:.6e}"));
            self.line("sign_floor", format!("{floor:.6e}"));
            self.line("ess", format!("{ess:.6e}"));
            self.line("trajectories", n);
        }
        RunFailure {
            error,
            report: self.report,
        }
    }
}

/// Runs the configured experiment. `cfg` is assumed validated.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutput, RunFailure> {
    let mut run = Run::new(cfg);
    let result = match cfg.experiment {
        Experiment::BrownianTriple => brownian_triple(&mut run),
        Experiment::QuantumReference => quantum_reference(&mut run),
        Experiment::ClassicalLimit => classical_limit(&mut run),
        Experiment::QuasiLangevin => quasi_langevin(&mut run),
        Experiment::AiryFigure => airy_figure(&mut run),
    };
    match result {
        Ok(()) => Ok(run.finish()),
        Err(e) => Err(run.fail(e)),
    }
}

fn time_grid(cfg: &RunConfig) -> pathlab_core::Result<TimeGrid<f64>> {
    TimeGrid::new(0.0, cfg.time.t_end, cfg.time.slices)
}

fn recording(cfg: &RunConfig) -> Recording {
    match cfg.time.record_every {
        0 => Recording::Terminal,
        k => Recording::Every(k),
    }
}

/// Recorded slice indices, matching [`Recording`].
fn recorded_slices(cfg: &RunConfig) -> Vec<usize> {
    let n = cfg.time.slices;
    let k = match cfg.time.record_every {
        0 => n,
        k => k,
    };
    let mut s: Vec<usize> = (0..=n).step_by(k).collect();
    if *s.last().unwrap() != n {
        s.push(n);
    }
    s
}

fn potential(run: &mut Run) -> pathlab_core::Result<Potential> {
    let pot = run.cfg.potential.build(run.cfg.physics.mass)?;
    run.line("potential", pot.describe());
    Ok(pot)
}

fn initial_packet(run: &mut Run, grid: &SpatialGrid<f64>) -> pathlab_core::Result<WaveFunction> {
    let c = run.cfg;
    let width = c.packet_width();
    run.line(
        "initial_packet",
        format!("x0 = {}, p0 = {}, sigma = {width}, hbar = {}", c.initial.x0, c.initial.p0, c.physics.hbar),
    );
    make_gaussian_packet(grid, c.initial.x0, c.initial.p0, width, c.physics.hbar)
}

fn initial_wigner(run: &mut Run, psi: &WaveFunction) -> pathlab_core::Result<WignerState> {
    let c = run.cfg;
    let pg = SpatialGrid::new(c.wigner.p_min, c.wigner.p_max, c.wigner.p_points)?;
    let rho = to_relative_frame(psi, c.xi_half_count())?;
    wigner_transform(&rho, &pg)
}

/// Split-step reference: `|ψ|²` and `(⟨x⟩, Var x, ⟨x²⟩)` at the recorded slices.
struct Reference {
    slices: Vec<usize>,
    times: Vec<f64>,
    moments: Vec<[f64; 3]>,
    final_density: Vec<f64>,
}

fn split_step_reference(cfg: &RunConfig, psi0: &WaveFunction, pot: &Potential) -> pathlab_core::Result<Reference> {
    let time = time_grid(cfg)?;
    let sub = cfg.quantum.reference_substeps;
    let dt = time.epsilon() / sub as f64;
    let mut prop = SplitStep::new(psi0.grid(), pot, cfg.physics.hbar, dt)?;
    let mut psi = psi0.clone();
    let slices = recorded_slices(cfg);
    let mut moments = Vec::with_capacity(slices.len());
    let mut at = 0;
    for &k in &slices {
        prop.advance(&mut psi, (k - at) * sub)?;
        at = k;
        moments.push([psi.mean_x(), psi.variance_x(), psi.moment_x(2)]);
    }
    Ok(Reference {
        times: slices.iter().map(|&k| time.t(k)).collect(),
        slices,
        moments,
        final_density: probability_density(&psi),
    })
}

fn brownian_triple(run: &mut Run) -> pathlab_core::Result<()> {
    let c = run.cfg;
    let pot = potential(run)?;
    let grid = c.grid.build()?;
    let time = time_grid(c)?;
    let ph = &c.physics;
    let params = BrownianParams::new(ph.mass, ph.gamma, ph.temperature, ph.k_b)?;
    run.line("diffusion", format!("{:.6e}", params.diffusion()));

    let xs = grid.points();
    let (spec, p0) = match c.initial.width {
        Some(w) if w > 0.0 => {
            let raw: Vec<f64> = xs.iter().map(|x| (-(x - c.initial.x0).powi(2) / (2.0 * w * w)).exp()).collect();
            let z: f64 = raw.iter().sum::<f64>() * grid.dx();
            let p0 = raw.into_iter().map(|v| v / z).collect();
            (InitialSpec::Gaussian { mean: c.initial.x0, std: w }, p0)
        }
        _ => {
            let i = grid.index_of(c.initial.x0).ok_or_else(|| {
                Error::Usage(format!("initial point {} lies outside the grid", c.initial.x0))
            })?;
            let mut p0 = vec![0.0; grid.len()];
            p0[i] = 1.0 / grid.dx();
            (InitialSpec::Point(grid.point(i)), p0)
        }
    };

    let scheme = FokkerPlanckScheme {
        theta: c.brownian.fp_theta,
        substeps: c.brownian.fp_substeps,
    };
    let fp = fokker_planck_evolve(&p0, &grid, &pot, &params, &time, scheme)?;
    let transfer = brownian_pathintegral_propagator(&params, &pot, &grid, &time, c.brownian.drift_point.drift_point())?;
    let pi = transfer.apply(&p0)?;
    let ens = langevin_simulate(
        &params,
        &pot,
        &spec,
        &time,
        c.ensemble.trajectories,
        Recording::Terminal,
        RngStream::new(c.seed, 0),
    )?;
    let terminal = ens.terminal();
    let lv = histogram_density(&terminal, &grid);
    let boltz = boltzmann_density(&grid, &pot, &params)?;

    run.section("three-way agreement");
    run.line("trajectories", c.ensemble.trajectories);
    run.line("slices", c.time.slices);
    let dx = grid.dx();
    run.metric("l1_langevin_fokker_planck", l1_distance(&lv, &fp, dx)?);
    run.metric("l1_langevin_path_integral", l1_distance(&lv, &pi, dx)?);
    run.metric("l1_fokker_planck_path_integral", l1_distance(&fp, &pi, dx)?);
    run.metric("l1_fokker_planck_boltzmann", l1_distance(&fp, &boltz, dx)?);

    run.section("moments");
    let m = mean(&terminal);
    let v = variance(&terminal);
    run.metric("langevin_mean", m.value);
    run.metric("langevin_mean_se", m.std_error);
    run.metric("langevin_variance", v.value);
    run.metric("langevin_variance_se", v.std_error);
    for (name, p) in [("fokker_planck", &fp), ("path_integral", &pi)] {
        let mu: f64 = xs.iter().zip(p.iter()).map(|(x, p)| x * p).sum::<f64>() * dx;
        let var: f64 = xs.iter().zip(p.iter()).map(|(x, p)| (x - mu).powi(2) * p).sum::<f64>() * dx;
        run.metric(&format!("{name}_mean"), mu);
        run.metric(&format!("{name}_variance"), var);
    }

    if c.brownian.noise_draws > 0 {
        run.section("noise moments");
        let eps = time.epsilon();
        let noise = langevin_noise(&params, eps, c.brownian.noise_draws, RngStream::new(c.seed, 1));
        let nm = noise_moment_check(&noise, c.brownian.noise_max_lag)?;
        let expected = 2.0 * params.diffusion() / eps;
        run.line("draws", c.brownian.noise_draws);
        run.metric("noise_mean", nm.mean.value);
        run.metric("noise_mean_se", nm.mean.std_error);
        run.metric("noise_mean_z", nm.mean.z_score(0.0));
        run.metric("noise_lag0", nm.autocovariance[0].value);
        run.metric("noise_lag0_expected", expected);
        run.metric("noise_lag0_rel_error", (nm.autocovariance[0].value - expected).abs() / expected);
        let mut worst: f64 = 0.0;
        for (lag, a) in nm.autocovariance.iter().enumerate().skip(1) {
            let z = a.z_score(0.0);
            worst = worst.max(z);
            run.metric(&format!("noise_lag{lag}_z"), z);
        }
        run.metric("noise_max_lag_z", worst);
    }

    let rows: Vec<Vec<f64>> = (0..grid.len()).map(|i| vec![xs[i], p0[i], lv[i], fp[i], pi[i], boltz[i]]).collect();
    run.csv(
        "densities.csv",
        &["x", "initial", "langevin", "fokker_planck", "path_integral", "boltzmann"],
        &rows,
    );
    let svg = line_plot(
        "Brownian density at t_end",
        "x",
        "P(x)",
        &[
            Series { label: "Langevin", x: &xs, y: &lv },
            Series { label: "Fokker-Planck", x: &xs, y: &fp },
            Series { label: "path integral", x: &xs, y: &pi },
            Series { label: "initial", x: &xs, y: &p0 },
        ],
    );
    run.raw("densities.svg", svg);
    Ok(())
}

/// Closed-form `(⟨x⟩, Var x)` for free and purely harmonic motion of a
/// minimum-uncertainty packet.
fn analytic_moments(cfg: &RunConfig, pot: &Potential) -> Option<impl Fn(f64) -> (f64, f64)> {
    let c = *pot.coefficients();
    if c[1] != 0.0 || c[3] != 0.0 || c[4] != 0.0 {
        return None;
    }
    let m = cfg.physics.mass;
    let hbar = cfg.physics.hbar;
    let s = cfg.packet_width();
    let (x0, p0) = (cfg.initial.x0, cfg.initial.p0);
    let vp = hbar * hbar / (4.0 * s * s);
    let omega = (2.0 * c[2] / m).sqrt();
    Some(move |t: f64| {
        if omega == 0.0 {
            (x0 + p0 * t / m, s * s + vp * t * t / (m * m))
        } else {
            let (sn, cs) = (omega * t).sin_cos();
            let mw = m * omega;
            (x0 * cs + p0 / mw * sn, s * s * cs * cs + vp / (mw * mw) * sn * sn)
        }
    })
}

fn quantum_reference(run: &mut Run) -> pathlab_core::Result<()> {
    let c = run.cfg;
    let pot = potential(run)?;
    let grid = c.grid.build()?;
    let psi0 = initial_packet(run, &grid)?;
    let reference = split_step_reference(c, &psi0, &pot)?;
    let xs = grid.points();
    let dx = grid.dx();

    run.section("split-step reference");
    run.line("substeps_per_slice", c.quantum.reference_substeps);
    let oracle = analytic_moments(c, &pot);
    let mut rows = Vec::new();
    let (mut worst_mean, mut worst_var, mut scale): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (t, m) in reference.times.iter().zip(&reference.moments) {
        let mut row = vec![*t, m[0], m[1]];
        if let Some(f) = &oracle {
            let (om, ov) = f(*t);
            worst_mean = worst_mean.max((m[0] - om).abs());
            scale = scale.max(om.abs());
            worst_var = worst_var.max((m[1] - ov).abs() / ov);
            row.extend([om, ov]);
        }
        rows.push(row);
    }
    let final_m = reference.moments.last().copied().unwrap_or([0.0; 3]);
    run.metric("final_mean_x", final_m[0]);
    run.metric("final_variance_x", final_m[1]);
    if oracle.is_some() {
        run.line("oracle", "closed-form packet moments");
        run.metric("oracle_max_rel_mean_error", if scale > 0.0 { worst_mean / scale } else { worst_mean });
        run.metric("oracle_max_rel_variance_error", worst_var);
        run.csv("moments.csv", &["t", "mean_x", "variance_x", "oracle_mean_x", "oracle_variance_x"], &rows);
    } else {
        run.line("oracle", "none for this potential");
        run.csv("moments.csv", &["t", "mean_x", "variance_x"], &rows);
    }
    let ts: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let means: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let vars: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    run.raw(
        "moments.svg",
        line_plot(
            "Split-step moments",
            "t",
            "moment",
            &[
                Series { label: "<x>", x: &ts, y: &means },
                Series { label: "Var x", x: &ts, y: &vars },
            ],
        ),
    );

    let p_ref = &reference.final_density;
    let p0 = probability_density(&psi0);
    let mut columns = vec!["x", "initial", "split_step"];
    let mut cols: Vec<&[f64]> = vec![&xs, &p0, p_ref];
    let pi_diag;
    if c.quantum.path_integral {
        run.section("density-matrix path integral");
        let time = time_grid(c)?;
        let rho0 = DensityMatrix::from_pure(&psi0);
        let out = propagate_density_matrix_pathintegral(&rho0, &pot, &time, c.quantum.kernel.kernel())?;
        pi_diag = out.rho.diagonal();
        let drift = out.trace_drift.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        run.line("kernel", format!("{:?}", c.quantum.kernel.kernel()));
        run.metric("max_trace_drift", drift);
        run.metric("l1_path_integral_split_step", l1_distance(&pi_diag, p_ref, dx)?);
        run.metric("linf_path_integral_split_step", linf_distance(&pi_diag, p_ref)?);
        columns.push("path_integral");
        cols.push(&pi_diag);
    }
    let rows: Vec<Vec<f64>> = (0..xs.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    run.csv("density.csv", &columns, &rows);
    let labels = ["initial", "split-step", "path integral"];
    let series: Vec<Series> = cols[1..]
        .iter()
        .zip(labels)
        .map(|(y, label)| Series { label, x: &xs, y })
        .collect();
    run.raw("density.svg", line_plot("Position density at t_end", "x", "P(x)", &series));

    run.section("initial Wigner function");
    let w = initial_wigner(run, &psi0)?;
    let marginal_err = linf_distance(&w.position_marginal(), &p0)?;
    run.line("xi_half_count", c.xi_half_count());
    run.metric("wigner_min", w.min());
    run.metric("wigner_total", w.total());
    run.metric("wigner_marginal_linf_error", marginal_err);
    run.metric("wigner_imag_residue", w.imag_residue());
    wigner_artifacts(run, &w);
    Ok(())
}

fn wigner_artifacts(run: &mut Run, w: &WignerState) {
    let xs = w.x_grid().points();
    let ps = w.p_grid().points();
    let mut rows = Vec::with_capacity(xs.len() * ps.len());
    for (i, &x) in xs.iter().enumerate() {
        for (l, &p) in ps.iter().enumerate() {
            rows.push(vec![x, p, w.get(i, l)]);
        }
    }
    run.csv("wigner.csv", &["x", "p", "w"], &rows);
    let pm = w.position_marginal();
    let mm = w.momentum_marginal();
    run.csv(
        "wigner_marginals.csv",
        &["x", "position_marginal"],
        &xs.iter().zip(&pm).map(|(a, b)| vec![*a, *b]).collect::<Vec<_>>(),
    );
    run.csv(
        "wigner_momentum_marginal.csv",
        &["p", "momentum_marginal"],
        &ps.iter().zip(&mm).map(|(a, b)| vec![*a, *b]).collect::<Vec<_>>(),
    );
    run.raw(
        "wigner_marginals.svg",
        line_plot(
            "Wigner marginals",
            "x or p",
            "density",
            &[
                Series { label: "position", x: &xs, y: &pm },
                Series { label: "momentum", x: &ps, y: &mm },
            ],
        ),
    );
}

fn classical_limit(run: &mut Run) -> pathlab_core::Result<()> {
    let c = run.cfg;
    let pot = potential(run)?;
    let grid = c.grid.build()?;
    let psi0 = initial_packet(run, &grid)?;
    let w0 = initial_wigner(run, &psi0)?;
    let time = time_grid(c)?;
    let rec = recording(c);
    let stream = RngStream::new(c.seed, 0);
    let initials = sample_initial_conditions(&w0, c.ensemble.trajectories, stream)?;
    let cl = classical_evolve(&initials, &pot, &time, rec)?;
    let reference = split_step_reference(c, &psi0, &pot)?;
    debug_assert_eq!(cl.slices(), &reference.slices[..]);

    run.section("classical ensemble vs quantum reference");
    run.line("trajectories", c.ensemble.trajectories);
    let mut rows = Vec::new();
    let (mut zm, mut zv): (f64, f64) = (0.0, 0.0);
    for (j, (t, q)) in reference.times.iter().zip(&reference.moments).enumerate() {
        let xs = cl.at(j);
        let m = mean(&xs);
        let v = variance(&xs);
        let (a, b) = (m.z_score(q[0]), v.z_score(q[1]));
        zm = zm.max(a);
        zv = zv.max(b);
        rows.push(vec![*t, m.value, m.std_error, q[0], a, v.value, v.std_error, q[1], b]);
    }
    run.metric("max_z_mean", zm);
    run.metric("max_z_variance", zv);
    run.csv(
        "moments.csv",
        &[
            "t",
            "classical_mean",
            "classical_mean_se",
            "quantum_mean",
            "z_mean",
            "classical_variance",
            "classical_variance_se",
            "quantum_variance",
            "z_variance",
        ],
        &rows,
    );
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let (ts, cm, qm, cv, qv) = (col(0), col(1), col(3), col(5), col(7));
    run.raw(
        "moments.svg",
        line_plot(
            "Classical ensemble vs quantum moments",
            "t",
            "moment",
            &[
                Series { label: "classical <x>", x: &ts, y: &cm },
                Series { label: "quantum <x>", x: &ts, y: &qm },
                Series { label: "classical Var x", x: &ts, y: &cv },
                Series { label: "quantum Var x", x: &ts, y: &qv },
            ],
        ),
    );

    run.section("quasi-Langevin reduction");
    let coeffs = pot.coefficients();
    if coeffs[3] != 0.0 || coeffs[4] != 0.0 {
        run.line("bitwise_check", "not applicable: V''' is not identically zero");
        return Ok(());
    }
    let config = QuasiLangevinConfig {
        truncation: c.quasi_langevin.truncation,
        measure_factor: c.quasi_langevin.measure_factor,
        phi_min: c.quasi_langevin.phi_min,
        sign_floor: c.quasi_langevin.sign_floor,
        recording: rec,
        keep_paths: true,
    };
    let ql = quasi_langevin_simulate(&w0, &pot, c.physics.hbar, &time, c.ensemble.trajectories, &config, stream)?;
    let identical = (0..cl.n_traj()).all(|i| {
        let a = ql.path(i).unwrap_or(&[]);
        let b = cl.path(i);
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
    });
    let d = sign_diagnostics(&ql);
    let all_plus = ql.signs().iter().all(|s| s.as_i8() == 1);
    run.line("bitwise_identical", if identical { "yes" } else { "no" });
    run.line("all_signs_positive", if all_plus { "yes" } else { "no" });
    run.metrics.insert("bitwise_identical".into(), identical as u8 as f64);
    run.metric("degenerate_fraction", d.degenerate_fraction);
    run.text(&degenerate_phrase(d.degenerate_fraction));
    Ok(())
}

fn degenerate_phrase(fraction: f64) -> String {
    if fraction == 1.0 {
        "degenerate classical branch taken on 100% of slices".into()
    } else {
        format!("degenerate classical branch taken on {:.2}% of slices", 100.0 * fraction)
    }
}

fn quasi_langevin(run: &mut Run) -> pathlab_core::Result<()> {
    let c = run.cfg;
    let pot = potential(run)?;
    let grid = c.grid.build()?;
    let psi0 = initial_packet(run, &grid)?;
    let w0 = initial_wigner(run, &psi0)?;
    let time = time_grid(c)?;
    let q = &c.quasi_langevin;
    let config = QuasiLangevinConfig {
        truncation: q.truncation,
        measure_factor: q.measure_factor,
        phi_min: q.phi_min,
        sign_floor: q.sign_floor,
        recording: Recording::Terminal,
        keep_paths: false,
    };
    run.section("quasi-Langevin ensemble");
    run.line("trajectories", c.ensemble.trajectories);
    run.line("slices", c.time.slices);
    run.line("truncation", q.truncation);
    run.line("measure_factor", q.measure_factor);
    run.line("sign_floor", q.sign_floor);
    let ens = quasi_langevin_simulate(
        &w0,
        &pot,
        c.physics.hbar,
        &time,
        c.ensemble.trajectories,
        &config,
        RngStream::new(c.seed, 0),
    )?;
    let d = sign_diagnostics(&ens);

    run.section("sign diagnostics");
    run.metric("mean_sign", d.mean_sign);
    run.metric("ess", d.effective_sample_size);
    run.metric("negative_fraction", d.negative_fraction);
    run.metric("degenerate_fraction", d.degenerate_fraction);
    run.text(&degenerate_phrase(d.degenerate_fraction));
    let hist: Vec<String> = d.magnitude_histogram.iter().map(|v| v.to_string()).collect();
    run.line("weight_magnitude_decades", hist.join(" "));

    run.section("observables");
    let reference = split_step_reference(c, &psi0, &pot)?;
    let oracle = reference.moments.last().copied().unwrap_or([0.0; 3]);
    let cl = classical_evolve(ens.initials(), &pot, &time, Recording::Terminal)?;
    let cl_terminal = cl.terminal();
    for (name, k, target) in [("x", 1, oracle[0]), ("x2", 2, oracle[2])] {
        let e = ratio_estimate(&ens, &Observable::Moment(k))?;
        run.metric(&format!("{name}_estimate"), e.value);
        run.metric(&format!("{name}_se"), e.std_error);
        run.metric(&format!("{name}_oracle"), target);
        run.metric(&format!("{name}_z"), e.z_score(target));
        let cm: Vec<f64> = cl_terminal.iter().map(|x| x.powi(k)).collect();
        run.metric(&format!("{name}_classical"), mean(&cm).value);
    }

    let xs = grid.points();
    let rd = ratio_density(&ens, &grid)?;
    let dens: Vec<f64> = rd.iter().map(|e| e.value).collect();
    let se: Vec<f64> = rd.iter().map(|e| e.std_error).collect();
    let cl_hist = histogram_density(&cl_terminal, &grid);
    let p_ref = &reference.final_density;
    let rows: Vec<Vec<f64>> = (0..xs.len()).map(|i| vec![xs[i], dens[i], se[i], p_ref[i], cl_hist[i]]).collect();
    run.csv(
        "density.csv",
        &["x", "quasi_langevin", "quasi_langevin_se", "split_step", "classical"],
        &rows,
    );
    run.raw(
        "density.svg",
        line_plot(
            "Terminal position density",
            "x",
            "P(x)",
            &[
                Series { label: "quasi-Langevin", x: &xs, y: &dens },
                Series { label: "split-step", x: &xs, y: p_ref },
                Series { label: "classical", x: &xs, y: &cl_hist },
            ],
        ),
    );
    let slice_rows: Vec<Vec<f64>> = d
        .per_slice_negative_fraction
        .iter()
        .zip(ens.slice_draws())
        .enumerate()
        .map(|(k, (f, n))| vec![(k + 1) as f64, *n as f64, *f])
        .collect();
    run.csv("slices.csv", &["slice", "draws", "negative_fraction"], &slice_rows);
    if q.write_ensemble {
        let text = write_signed_ensemble(&run.meta, &ens);
        run.raw("signed_ensemble.csv", text);
    }
    Ok(())
}

/// Sign change of `Ai` inside `[lo, hi]` by bisection.
fn bisect_ai(mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (airy_ai(lo) > 0.0) == (airy_ai(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn airy_figure(run: &mut Run) -> pathlab_core::Result<()> {
    let c = run.cfg;
    let g = SpatialGrid::new(c.airy.x_min, c.airy.x_max, c.airy.points)?;
    let xs = g.points();
    let ai: Vec<f64> = xs.iter().map(|&x| airy_ai(x)).collect();
    let aip: Vec<f64> = xs.iter().map(|&x| airy_ai_prime(x)).collect();
    run.section("Airy function");
    run.metric("ai_0", airy_ai(0.0));
    run.metric("ai_prime_0", airy_ai_prime(0.0));
    run.metric("first_zero", bisect_ai(-2.5, -2.2));
    let negative = ai.iter().filter(|v| **v < 0.0).count();
    let negative_left = xs.iter().zip(&ai).filter(|(x, v)| **x < 0.0 && **v < 0.0).count();
    run.metric("plotted_points", xs.len() as f64);
    run.metric("negative_points", negative as f64);
    run.metric("negative_points_left_half", negative_left as f64);
    run.metric("min_value", ai.iter().copied().fold(f64::INFINITY, f64::min));
    let rows: Vec<Vec<f64>> = (0..xs.len()).map(|i| vec![xs[i], ai[i], aip[i]]).collect();
    run.csv("airy.csv", &["x", "ai", "ai_prime"], &rows);
    run.raw(
        "airy.svg",
        line_plot("Airy function Ai(x)", "x", "Ai(x)", &[Series { label: "Ai", x: &xs, y: &ai }]),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: Experiment) -> RunConfig {
        let mut c = RunConfig::defaults(kind);
        c.ensemble.trajectories = 2000;
        c.brownian.noise_draws = 20_000;
        c
    }

    #[test]
    fn recorded_slices_match_recording() {
        let mut c = RunConfig::defaults(Experiment::ClassicalLimit);
        c.time.slices = 10;
        c.time.record_every = 4;
        assert_eq!(recorded_slices(&c), vec![0, 4, 8, 10]);
        c.time.record_every = 0;
        assert_eq!(recorded_slices(&c), vec![0, 10]);
    }

    #[test]
    fn airy_figure_dips_below_zero() {
        let out = run_experiment(&RunConfig::defaults(Experiment::AiryFigure)).unwrap();
        assert!(out.metrics["negative_points_left_half"] > 0.0);
        assert!((out.metrics["first_zero"] + 2.338107410459767).abs() < 1e-9);
        let svg = &out.artifacts.iter().find(|a| a.name == "airy.svg").unwrap().contents;
        assert!(svg.contains("<polyline"));
        assert!(out.artifacts.iter().any(|a| a.name == "airy.csv"));
    }

    #[test]
    fn csv_metadata_carries_hash_and_seed() {
        let c = RunConfig::defaults(Experiment::AiryFigure);
        let out = run_experiment(&c).unwrap();
        let csv = &out.artifacts.iter().find(|a| a.name == "airy.csv").unwrap().contents;
        assert!(csv.starts_with(&format!("# experiment: airy-figure\n# config_sha256: {}\n# seed: 1\nx,ai,ai_prime\n", c.hash())));
    }

    #[test]
    fn harmonic_quasi_langevin_is_fully_degenerate() {
        let mut c = small(Experiment::QuasiLangevin);
        c.potential = RunConfig::defaults(Experiment::ClassicalLimit).potential;
        c.quasi_langevin.write_ensemble = false;
        let out = run_experiment(&c).unwrap();
        assert!(out.report.contains("degenerate classical branch taken on 100% of slices"));
        assert_eq!(out.metrics["mean_sign"], 1.0);
    }

    #[test]
    fn sign_collapse_report_names_the_condition() {
        let mut c = small(Experiment::QuasiLangevin);
        c.quasi_langevin.sign_floor = 0.5;
        let f = run_experiment(&c).unwrap_err();
        assert!(matches!(f.error, Error::SignCollapse { .. }));
        assert!(f.report.contains("condition: sign collapse"));
    }

    #[test]
    fn brownian_report_has_three_distances() {
        let out = run_experiment(&small(Experiment::BrownianTriple)).unwrap();
        for k in ["l1_langevin_fokker_planck", "l1_langevin_path_integral", "l1_fokker_planck_path_integral"] {
            assert!(out.report.contains(&format!("{k}: ")), "{k}");
        }
        assert!(out.metrics["l1_fokker_planck_path_integral"] < 0.05);
    }
}
