//! Run configuration: TOML schema, per-experiment defaults and validation.
//!
//! Parsing never stops at the first problem. Unknown keys, type mismatches
//! and out-of-range values are all collected, each tagged with its dotted
//! key path, before any computation starts.

use std::collections::BTreeSet;
use std::fmt;

use pathlab_core::brownian::DriftPoint;
use pathlab_core::functionals::AiryProposal;
use pathlab_core::quantum::KernelKind;
use pathlab_core::{Potential, SpatialGrid};
use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Named choices that appear as strings in the config.
trait Named: Sized + Copy + 'static {
    const ALL: &'static [Self];
    fn name(self) -> &'static str;

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|v| v.name() == s)
    }

    fn choices() -> String {
        Self::ALL.iter().map(|v| v.name()).collect::<Vec<_>>().join(" | ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BrownianTriple,
    QuantumReference,
    ClassicalLimit,
    QuasiLangevin,
    AiryFigure,
}

impl Named for Experiment {
    const ALL: &'static [Self] = &[
        Self::BrownianTriple,
        Self::QuantumReference,
        Self::ClassicalLimit,
        Self::QuasiLangevin,
        Self::AiryFigure,
    ];

    fn name(self) -> &'static str {
        match self {
            Self::BrownianTriple => "brownian-triple",
            Self::QuantumReference => "quantum-reference",
            Self::ClassicalLimit => "classical-limit",
            Self::QuasiLangevin => "quasi-langevin",
            Self::AiryFigure => "airy-figure",
        }
    }
}

impl Experiment {
    pub fn all() -> &'static [Experiment] {
        Self::ALL
    }

    pub fn as_str(self) -> &'static str {
        self.name()
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::from_name(s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKindName {
    Harmonic,
    Quartic,
    CubicPerturbedHarmonic,
    Polynomial,
}

impl Named for PotentialKindName {
    const ALL: &'static [Self] = &[Self::Harmonic, Self::Quartic, Self::CubicPerturbedHarmonic, Self::Polynomial];

    fn name(self) -> &'static str {
        match self {
            Self::Harmonic => "harmonic",
            Self::Quartic => "quartic",
            Self::CubicPerturbedHarmonic => "cubic-perturbed-harmonic",
            Self::Polynomial => "polynomial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftPointName {
    PrePoint,
    Midpoint,
}

impl Named for DriftPointName {
    const ALL: &'static [Self] = &[Self::PrePoint, Self::Midpoint];

    fn name(self) -> &'static str {
        match self {
            Self::PrePoint => "pre-point",
            Self::Midpoint => "midpoint",
        }
    }
}

impl DriftPointName {
    pub fn drift_point(self) -> DriftPoint {
        match self {
            Self::PrePoint => DriftPoint::PrePoint,
            Self::Midpoint => DriftPoint::Midpoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    BandLimited,
    Literal,
}

impl Named for KernelName {
    const ALL: &'static [Self] = &[Self::BandLimited, Self::Literal];

    fn name(self) -> &'static str {
        match self {
            Self::BandLimited => "band-limited",
            Self::Literal => "literal",
        }
    }
}

impl KernelName {
    pub fn kernel(self) -> KernelKind {
        match self {
            Self::BandLimited => KernelKind::BandLimited,
            Self::Literal => KernelKind::Literal,
        }
    }
}

/// `V(x)`; parameters not used by `kind` are ignored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub kind: PotentialKindName,
    /// `½mω²x²` term of `harmonic` and `cubic-perturbed-harmonic`.
    pub omega: f64,
    /// `λx⁴/4` of `quartic`.
    pub lambda: f64,
    /// `g x³` of `cubic-perturbed-harmonic`.
    pub g: f64,
    /// `c0, c1, …, c4` of `polynomial`.
    pub coefficients: Vec<f64>,
}

impl PotentialSpec {
    pub fn build(&self, mass: f64) -> pathlab_core::Result<Potential> {
        match self.kind {
            PotentialKindName::Harmonic => Potential::harmonic(mass, self.omega),
            PotentialKindName::Quartic => Potential::quartic(mass, self.lambda),
            PotentialKindName::CubicPerturbedHarmonic => Potential::cubic_perturbed_harmonic(mass, self.omega, self.g),
            PotentialKindName::Polynomial => Potential::polynomial(mass, &self.coefficients),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Physics {
    pub hbar: f64,
    pub mass: f64,
    pub gamma: f64,
    pub temperature: f64,
    pub k_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self) -> pathlab_core::Result<SpatialGrid<f64>> {
        SpatialGrid::new(self.x_min, self.x_max, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSpec {
    pub t_end: f64,
    pub slices: usize,
    /// Record every this many slices; 0 keeps the end points only.
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialSpec {
    pub x0: f64,
    pub p0: f64,
    /// Packet σ (quantum experiments) or standard deviation of `P0`
    /// (brownian-triple). Omitted: the coherent width `sqrt(ħ/2mω)`, or a
    /// point mass for brownian-triple.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub trajectories: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrownianSpec {
    pub drift_point: DriftPointName,
    pub fp_theta: f64,
    pub fp_substeps: usize,
    /// Noise draws for the moment check; 0 skips it.
    pub noise_draws: usize,
    pub noise_max_lag: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumSpec {
    pub kernel: KernelName,
    /// Also propagate the density matrix by the path integral.
    pub path_integral: bool,
    /// Split-step steps per path-integral slice.
    pub reference_substeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub p_points: usize,
    /// Half-width of the ξ lattice in units of `2dx`; omitted uses the
    /// largest the grid allows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_half_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiLangevinSpec {
    pub truncation: f64,
    pub measure_factor: bool,
    pub phi_min: f64,
    pub sign_floor: f64,
    pub write_ensemble: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AirySpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: String,
    pub potential: PotentialSpec,
    pub physics: Physics,
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub initial: InitialSpec,
    pub ensemble: EnsembleSpec,
    pub brownian: BrownianSpec,
    pub quantum: QuantumSpec,
    pub wigner: WignerSpec,
    pub quasi_langevin: QuasiLangevinSpec,
    pub airy: AirySpec,
}

impl RunConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            seed: 1,
            output_dir: format!("out/{}", experiment.name()),
            potential: PotentialSpec {
                kind: PotentialKindName::Harmonic,
                omega: 1.0,
                lambda: 0.0,
                g: 0.0,
                coefficients: Vec::new(),
            },
            physics: Physics {
                hbar: 1.0,
                mass: 1.0,
                gamma: 1.0,
                temperature: 1.0,
                k_b: 1.0,
            },
            grid: GridSpec {
                x_min: -12.0,
                x_max: 12.0,
                points: 385,
            },
            time: TimeSpec {
                t_end: 1.0,
                slices: 100,
                record_every: 0,
            },
            initial: InitialSpec {
                x0: 1.0,
                p0: 0.0,
                width: None,
            },
            ensemble: EnsembleSpec { trajectories: 100_000 },
            brownian: BrownianSpec {
                drift_point: DriftPointName::PrePoint,
                fp_theta: 1.0,
                fp_substeps: 8,
                noise_draws: 1_000_000,
                noise_max_lag: 5,
            },
            quantum: QuantumSpec {
                kernel: KernelName::BandLimited,
                path_integral: true,
                reference_substeps: 10,
            },
            wigner: WignerSpec {
                p_min: -8.0,
                p_max: 8.0,
                p_points: 201,
                xi_half_count: None,
            },
            quasi_langevin: QuasiLangevinSpec {
                truncation: pathlab_core::functionals::DEFAULT_TRUNCATION,
                measure_factor: false,
                phi_min: 1e-8,
                sign_floor: 0.01,
                write_ensemble: true,
            },
            airy: AirySpec {
                x_min: -12.0,
                x_max: 4.0,
                points: 1601,
            },
        };
        match experiment {
            Experiment::BrownianTriple => {
                c.grid = GridSpec {
                    x_min: -4.5,
                    x_max: 4.5,
                    points: 256,
                };
                c.initial.width = Some(0.5);
            }
            Experiment::QuantumReference => {
                c.grid = GridSpec {
                    x_min: -10.0,
                    x_max: 10.0,
                    points: 64,
                };
                c.time = TimeSpec {
                    t_end: std::f64::consts::FRAC_PI_2,
                    slices: 40,
                    record_every: 4,
                };
                c.initial = InitialSpec {
                    x0: 1.5,
                    p0: 0.0,
                    width: Some(0.8),
                };
                c.wigner = WignerSpec {
                    p_min: -6.0,
                    p_max: 6.0,
                    p_points: 121,
                    xi_half_count: None,
                };
            }
            Experiment::ClassicalLimit => {
                c.time = TimeSpec {
                    t_end: 2.0 * std::f64::consts::PI,
                    slices: 400,
                    record_every: 50,
                };
                c.initial.p0 = 0.5;
                c.ensemble.trajectories = 20_000;
            }
            Experiment::QuasiLangevin => {
                c.potential = PotentialSpec {
                    kind: PotentialKindName::Polynomial,
                    omega: 1.0,
                    lambda: 0.05,
                    g: 0.0,
                    coefficients: vec![0.0, 0.0, 0.5, 0.0, 0.0125],
                };
                c.time = TimeSpec {
                    t_end: 0.5,
                    slices: 25,
                    record_every: 0,
                };
                c.ensemble.trajectories = 1_000_000;
            }
            Experiment::AiryFigure => {}
        }
        c
    }

    /// Canonical TOML text; parses back to an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 of the canonical text, in hex. The output directory does not
    /// change results and is left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir.clear();
        format!("{:x}", Sha256::digest(c.to_toml().as_bytes()))
    }

    /// Initial packet width, falling back to the coherent width of the
    /// quadratic part of `V` (or of a unit frequency when there is none).
    pub fn packet_width(&self) -> f64 {
        self.initial.width.unwrap_or_else(|| {
            let m = self.physics.mass;
            let c2 = self.potential.build(m).map(|p| p.coefficients()[2]).unwrap_or(0.0);
            let omega = if c2 > 0.0 { (2.0 * c2 / m).sqrt() } else { 1.0 };
            (self.physics.hbar / (2.0 * m * omega)).sqrt()
        })
    }

    /// ξ half-count actually used for the Wigner transform.
    pub fn xi_half_count(&self) -> usize {
        self.wigner.xi_half_count.unwrap_or(self.grid.points.saturating_sub(1) / 2)
    }

    /// Every value-level problem, in key order.
    pub fn validate(&self) -> Vec<ConfigError> {
        let mut e = Vec::new();
        let mut positive = |path: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                e.push(ConfigError::new(path, format!("must be a positive number, got {v}")));
            }
        };
        positive("physics.hbar", self.physics.hbar);
        positive("physics.mass", self.physics.mass);
        positive("physics.gamma", self.physics.gamma);
        positive("physics.k_b", self.physics.k_b);
        positive("time.t_end", self.time.t_end);
        let needs_heat = self.experiment == Experiment::BrownianTriple;
        let t = self.physics.temperature;
        if !(t >= 0.0 && t.is_finite()) || (needs_heat && t == 0.0) {
            let bound = if needs_heat { "> 0" } else { "≥ 0" };
            e.push(ConfigError::new("physics.temperature", format!("must be {bound}, got {t}")));
        }
        if let Err(err) = self.potential.build(self.physics.mass.max(f64::MIN_POSITIVE)) {
            e.push(ConfigError::new("potential", err.to_string()));
        }
        if self.potential.kind == PotentialKindName::Polynomial && self.potential.coefficients.len() > 5 {
            e.push(ConfigError::new("potential.coefficients", "at most 5 coefficients (degree 4)"));
        }
        grid_errors("grid", self.grid.x_min, self.grid.x_max, self.grid.points, &mut e);
        if self.time.slices == 0 {
            e.push(ConfigError::new("time.slices", "must be at least 1"));
        }
        if let Some(w) = self.initial.width {
            let ok = if needs_heat { w >= 0.0 } else { w > 0.0 };
            if !ok || !w.is_finite() {
                e.push(ConfigError::new("initial.width", format!("invalid width {w}")));
            }
        }
        for (path, v) in [("initial.x0", self.initial.x0), ("initial.p0", self.initial.p0)] {
            if !v.is_finite() {
                e.push(ConfigError::new(path, "must be finite"));
            }
        }
        let uses_ensemble = matches!(
            self.experiment,
            Experiment::BrownianTriple | Experiment::ClassicalLimit | Experiment::QuasiLangevin
        );
        if uses_ensemble && self.ensemble.trajectories < 2 {
            e.push(ConfigError::new("ensemble.trajectories", "must be at least 2"));
        }
        if !(self.brownian.fp_theta >= 0.5 && self.brownian.fp_theta <= 1.0) {
            e.push(ConfigError::new("brownian.fp_theta", "must lie in [0.5, 1]"));
        }
        if self.brownian.fp_substeps == 0 {
            e.push(ConfigError::new("brownian.fp_substeps", "must be at least 1"));
        }
        if self.brownian.noise_draws > 0 && self.brownian.noise_draws < 10_000 {
            e.push(ConfigError::new("brownian.noise_draws", "must be 0 or at least 10000"));
        }
        let draws = self.brownian.noise_draws;
        if draws > 0 && (self.brownian.noise_max_lag == 0 || 2 * self.brownian.noise_max_lag >= draws) {
            e.push(ConfigError::new("brownian.noise_max_lag", "must be at least 1 and below half the draws"));
        }
        if self.quantum.reference_substeps == 0 {
            e.push(ConfigError::new("quantum.reference_substeps", "must be at least 1"));
        }
        if self.experiment == Experiment::QuantumReference
            && self.quantum.path_integral
            && self.grid.points > pathlab_core::quantum::pathintegral::MAX_POINTS
        {
            e.push(ConfigError::new(
                "grid.points",
                format!(
                    "path-integral propagation allows at most {} points",
                    pathlab_core::quantum::pathintegral::MAX_POINTS
                ),
            ));
        }
        grid_errors("wigner", self.wigner.p_min, self.wigner.p_max, self.wigner.p_points, &mut e);
        let xi = self.xi_half_count();
        if xi == 0 || 2 * xi > self.grid.points.saturating_sub(1) {
            e.push(ConfigError::new(
                "wigner.xi_half_count",
                format!("must lie in 1..={}", self.grid.points.saturating_sub(1) / 2),
            ));
        }
        if let Err(err) = AiryProposal::new(self.quasi_langevin.truncation) {
            e.push(ConfigError::new("quasi_langevin.truncation", err.to_string()));
        }
        if !(self.quasi_langevin.phi_min >= 0.0) {
            e.push(ConfigError::new("quasi_langevin.phi_min", "must be ≥ 0"));
        }
        let f = self.quasi_langevin.sign_floor;
        if !(f >= 0.0 && f < 1.0) {
            e.push(ConfigError::new("quasi_langevin.sign_floor", format!("must lie in [0, 1), got {f}")));
        }
        grid_errors("airy", self.airy.x_min, self.airy.x_max, self.airy.points, &mut e);
        e
    }
}

fn grid_errors(section: &str, lo: f64, hi: f64, n: usize, e: &mut Vec<ConfigError>) {
    let (points, max) = if section == "wigner" {
        ("wigner.p_points", "wigner.p_max")
    } else if section == "airy" {
        ("airy.points", "airy.x_max")
    } else {
        ("grid.points", "grid.x_max")
    };
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        e.push(ConfigError::new(max, format!("upper bound {hi} must exceed lower bound {lo}")));
    }
    if n < SpatialGrid::<f64>::MIN_POINTS {
        e.push(ConfigError::new(
            points,
            format!("need at least {} points, got {n}", SpatialGrid::<f64>::MIN_POINTS),
        ));
    }
}

/// Conversion from one TOML value with a readable mismatch message.
trait FromValue: Sized {
    fn from_value(v: &Value) -> Result<Self, String>;
}

impl FromValue for f64 {
    fn from_value(v: &Value) -> Result<Self, String> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            other => Err(format!("expected a number, got {}", other.type_str())),
        }
    }
}

impl FromValue for u64 {
    fn from_value(v: &Value) -> Result<Self, String> {
        match v {
            Value::Integer(i) if *i >= 0 => Ok(*i as u64),
            Value::Integer(i) => Err(format!("expected a non-negative integer, got {i}")),
            other => Err(format!("expected an integer, got {}", other.type_str())),
        }
    }
}

impl FromValue for usize {
    fn from_value(v: &Value) -> Result<Self, String> {
        u64::from_value(v).map(|u| u as usize)
    }
}

impl FromValue for bool {
    fn from_value(v: &Value) -> Result<Self, String> {
        v.as_bool().ok_or_else(|| format!("expected a boolean, got {}", v.type_str()))
    }
}

impl FromValue for String {
    fn from_value(v: &Value) -> Result<Self, String> {
        v.as_str()
            .map(str::to_owned)
            .ok_or_else(|| format!("expected a string, got {}", v.type_str()))
    }
}

impl FromValue for Vec<f64> {
    fn from_value(v: &Value) -> Result<Self, String> {
        let arr = v.as_array().ok_or_else(|| format!("expected an array, got {}", v.type_str()))?;
        arr.iter()
            .enumerate()
            .map(|(i, x)| f64::from_value(x).map_err(|m| format!("element {i}: {m}")))
            .collect()
    }
}

macro_rules! named_from_value {
    ($($t:ty),*) => {$(
        impl FromValue for $t {
            fn from_value(v: &Value) -> Result<Self, String> {
                let s = v.as_str().ok_or_else(|| format!("expected a string, got {}", v.type_str()))?;
                <$t as Named>::from_name(s).ok_or_else(|| format!("unknown value {s:?}; expected {}", <$t>::choices()))
            }
        }
    )*};
}

named_from_value!(Experiment, PotentialKindName, DriftPointName, KernelName);

/// One table being read; remembers which keys were consumed.
struct Section<'a> {
    path: String,
    table: Option<&'a Table>,
    seen: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn root(table: &'a Table) -> Self {
        Self {
            path: String::new(),
            table: Some(table),
            seen: BTreeSet::new(),
        }
    }

    fn key_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn sub(&mut self, key: &str, errs: &mut Vec<ConfigError>) -> Section<'a> {
        self.seen.insert(key.to_string());
        let path = self.key_path(key);
        let table = match self.table.and_then(|t| t.get(key)) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(other) => {
                errs.push(ConfigError::new(&path, format!("expected a table, got {}", other.type_str())));
                None
            }
        };
        Section {
            path,
            table,
            seen: BTreeSet::new(),
        }
    }

    fn read<T: FromValue>(&mut self, key: &str, slot: &mut T, errs: &mut Vec<ConfigError>) {
        self.seen.insert(key.to_string());
        if let Some(v) = self.table.and_then(|t| t.get(key)) {
            match T::from_value(v) {
                Ok(x) => *slot = x,
                Err(m) => errs.push(ConfigError::new(self.key_path(key), m)),
            }
        }
    }

    fn read_opt<T: FromValue>(&mut self, key: &str, slot: &mut Option<T>, errs: &mut Vec<ConfigError>) {
        self.seen.insert(key.to_string());
        if let Some(v) = self.table.and_then(|t| t.get(key)) {
            match T::from_value(v) {
                Ok(x) => *slot = Some(x),
                Err(m) => errs.push(ConfigError::new(self.key_path(key), m)),
            }
        }
    }

    /// Reports every key of the table that was never read.
    fn finish(self, errs: &mut Vec<ConfigError>) {
        if let Some(t) = self.table {
            for k in t.keys() {
                if !self.seen.contains(k) {
                    errs.push(ConfigError::new(self.key_path(k), "unknown key"));
                }
            }
        }
    }
}

/// Parses a config whose `experiment` key is required.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    parse(text, None)
}

/// Parses a config for a known experiment; an `experiment` key, if present,
/// must agree.
pub fn parse_config_for(experiment: Experiment, text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    parse(text, Some(experiment))
}

fn parse(text: &str, expected: Option<Experiment>) -> Result<RunConfig, Vec<ConfigError>> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| vec![ConfigError::new("<document>", e.message().to_string())])?;
    let mut errs = Vec::new();
    let mut root = Section::root(&table);

    let mut named: Option<Experiment> = None;
    root.read_opt("experiment", &mut named, &mut errs);
    let experiment = match (named, expected) {
        (Some(a), Some(b)) if a != b => {
            errs.push(ConfigError::new(
                "experiment",
                format!("config is for {a} but {b} was requested"),
            ));
            b
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => {
            if !table.contains_key("experiment") {
                errs.push(ConfigError::new(
                    "experiment",
                    format!("missing required key; expected {}", Experiment::choices()),
                ));
            }
            Experiment::BrownianTriple
        }
    };

    let mut c = RunConfig::defaults(experiment);
    root.read("seed", &mut c.seed, &mut errs);
    root.read("output_dir", &mut c.output_dir, &mut errs);

    let mut s = root.sub("potential", &mut errs);
    s.read("kind", &mut c.potential.kind, &mut errs);
    s.read("omega", &mut c.potential.omega, &mut errs);
    s.read("lambda", &mut c.potential.lambda, &mut errs);
    s.read("g", &mut c.potential.g, &mut errs);
    s.read("coefficients", &mut c.potential.coefficients, &mut errs);
    s.finish(&mut errs);

    let mut s = root.sub("physics", &mut errs);
    s.read("hbar", &mut c.physics.hbar, &mut errs);
    s.read("mass", &mut c.physics.mass, &mut errs);
    s.read("gamma", &mut c.physics.gamma, &mut errs);
    s.read("temperature", &mut c.physics.temperature, &mut errs);
    s.read("k_b", &mut c.physics.k_b, &mut errs);
    s.finish(&mut errs);

    let mut s = root.sub("grid", &mut errs);
    s.read("x_min", &mut c.grid.x_min, &mut errs);
    s.read("x_max", &mut c.grid.x_max, &mut errs);
    s.read("points", &mut c.grid.points, &mut errs);
    s.finish(&mut errs);

    let mut s = root.sub("time", &mut errs);
    s.read("t_end", &mut c.time.t_end, &mut errs);
    s.read("slices", &mut c.time.slices, &mut errs);
    s.read("record_every", &mut c.time.record_every, &mut errs);
    s.finish(&mut errs);

    let mut s = root.sub("initial", &mut errs);
    s.read("x0", &mut c.initial.x0, &mut errs);
    s.read("p0", &mut c.initial.p0, &mut errs);
    s.read_opt("width", &mut c.initial.width, &mut errs);
    s.finish(&mut errs);

    let mut s = root.sub("ensemble", &mut errs);
    s.read("trajectories", &mut c.ensemble.trajectories, &mut errs);
    s.finish(&mut errs);

    let mut s = root.sub("brownian", &mut errs);
    s.read("drift_point", &mut c.brownian.drift_point, &mut errs);
    s.read("fp_theta", &mut c.brownian.fp_theta, &mut errs);
    s.read("fp_substeps", &mut c.brownian.fp_substeps, &mut errs);
    s.read("noise_draws", &mut c.brownian.noise_draws, &mut errs);
    s.read("noise_max_lag", &mut c.brownian.noise_max_lag, &mut errs);
    s.finish(&mut errs);

    let mut s = root.sub("quantum", &mut errs);
    s.read("kernel", &mut c.quantum.kernel, &mut errs);
    s.read("path_integral", &mut c.quantum.path_integral, &mut errs);
    s.read("reference_substeps", &mut c.quantum.reference_substeps, &mut errs);
    s.finish(&mut errs);

    let mut s = root.sub("wigner", &mut errs);
    s.read("p_min", &mut c.wigner.p_min, &mut errs);
    s.read("p_max", &mut c.wigner.p_max, &mut errs);
    s.read("p_points", &mut c.wigner.p_points, &mut errs);
    s.read_opt("xi_half_count", &mut c.wigner.xi_half_count, &mut errs);
    s.finish(&mut errs);

    let mut s = root.sub("quasi_langevin", &mut errs);
    s.read("truncation", &mut c.quasi_langevin.truncation, &mut errs);
    s.read("measure_factor", &mut c.quasi_langevin.measure_factor, &mut errs);
    s.read("phi_min", &mut c.quasi_langevin.phi_min, &mut errs);
    s.read("sign_floor", &mut c.quasi_langevin.sign_floor, &mut errs);
    s.read("write_ensemble", &mut c.quasi_langevin.write_ensemble, &mut errs);
    s.finish(&mut errs);

    let mut s = root.sub("airy", &mut errs);
    s.read("x_min", &mut c.airy.x_min, &mut errs);
    s.read("x_max", &mut c.airy.x_max, &mut errs);
    s.read("points", &mut c.airy.points, &mut errs);
    s.finish(&mut errs);

    root.finish(&mut errs);
    // Fields that failed to read keep their defaults, so value checks on the
    // rest are still meaningful.
    errs.extend(c.validate());
    if errs.is_empty() {
        Ok(c)
    } else {
        Err(errs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse_config("experiment = \"brownian-triple\"\n").unwrap();
        assert_eq!(c, RunConfig::defaults(Experiment::BrownianTriple));
        assert_eq!(c.grid.points, 256);
        assert_eq!(c.ensemble.trajectories, 100_000);
    }

    #[test]
    fn negative_temperature_names_the_key() {
        let errs = parse_config("experiment = \"brownian-triple\"\n[physics]\ntemperature = -1.0\n").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].path, "physics.temperature");
    }

    #[test]
    fn round_trip_through_text() {
        for &e in Experiment::all() {
            let mut c = RunConfig::defaults(e);
            c.seed = 99;
            c.initial.width = Some(0.3);
            let back = parse_config(&c.to_toml()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.hash(), c.hash());
        }
    }

    #[test]
    fn every_problem_is_reported() {
        let text = r#"
            experiment = "quasi-langevin"
            colour = "red"
            [physics]
            hbar = "one"
            mass = -2.0
            [grid]
            points = 4
            spacing = 0.1
            [quasi_langevin]
            sign_floor = 1.5
        "#;
        let errs = parse_config(text).unwrap_err();
        let paths: Vec<&str> = errs.iter().map(|e| e.path.as_str()).collect();
        assert!(paths.contains(&"colour"));
        assert!(paths.contains(&"physics.hbar"));
        assert!(paths.contains(&"grid.spacing"));
        assert!(paths.contains(&"physics.mass"));
        assert!(paths.contains(&"grid.points"));
        assert!(paths.contains(&"quasi_langevin.sign_floor"));
    }

    #[test]
    fn experiment_is_required_and_checked() {
        let errs = parse_config("seed = 3\n").unwrap_err();
        assert_eq!(errs[0].path, "experiment");
        let errs = parse_config("experiment = \"nope\"\n").unwrap_err();
        assert!(errs[0].message.contains("brownian-triple"));
        assert!(parse_config_for(Experiment::AiryFigure, "experiment = \"quasi-langevin\"\n").is_err());
        assert_eq!(parse_config_for(Experiment::AiryFigure, "").unwrap().experiment, Experiment::AiryFigure);
    }

    #[test]
    fn coherent_width_follows_hbar() {
        let mut c = RunConfig::defaults(Experiment::QuasiLangevin);
        assert!((c.packet_width() - 0.5f64.sqrt()).abs() < 1e-15);
        c.physics.hbar = 0.5;
        assert!((c.packet_width() - 0.5).abs() < 1e-15);
    }
}
