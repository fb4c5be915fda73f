//! Run configuration, the JSON and CSV documents, and the comparison report.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::{json, Map, Number, Value};
use thiserror::Error;

use crate::expr::ExprError;
use crate::numerics::{NumericsError, Tolerances};
use crate::potential::{Domain, PotentialError, PotentialSpec, UnitSystem};
use crate::reference::{self, NumerovConfig, ReferenceError, ReferenceLevel};
use crate::scattering::{self, Regime, ScatteringError};
use crate::solver::{self, EnergyLevel, GroundState, LevelSpec, SolverError, Variant};

/// Environment variable read for the default energy tolerance.
pub const TOL_ENERGY_ENV: &str = "TURNPOINT_TOL_ENERGY";

pub const DEFAULT_N_MAX: u32 = 3;
pub const DEFAULT_SAMPLES: usize = 201;

/// Floor of the denominator in relative differences.
const REL_DIFF_FLOOR: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error("refusing to emit {label}: residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualRefused { label: String, residual: f64, tolerance: f64 },
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ReportError {
    /// 2 for parse and usage errors, 3 for convergence failures, 4 for
    /// invalid physical input.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Usage(_) | ReportError::Io { .. } => 2,
            ReportError::Potential(e) => potential_code(e),
            ReportError::Solver(e) => solver_code(e),
            ReportError::Reference(e) => match e {
                ReferenceError::InvalidConfig(_) => 2,
                ReferenceError::ConvergenceFailure { .. } => 3,
                ReferenceError::Potential(e) => potential_code(e),
                ReferenceError::Solver(e) => solver_code(e),
            },
            ReportError::Scattering(_) => 4,
            ReportError::ResidualRefused { .. } => 3,
        }
    }
}

fn potential_code(e: &PotentialError) -> i32 {
    match e {
        PotentialError::SpecParse { .. } => 2,
        PotentialError::Expr(ExprError::Syntax { .. } | ExprError::UnknownIdentifier { .. }) => 2,
        _ => 4,
    }
}

fn solver_code(e: &SolverError) -> i32 {
    match e {
        SolverError::NotAWell { .. } | SolverError::AmbiguousWells { .. } => 4,
        SolverError::InvalidLevel { .. } => 2,
        SolverError::NoBoundRegion { .. } | SolverError::DegenerateNorm { .. } => 3,
        SolverError::Potential(e) => potential_code(e),
        SolverError::Numerics(NumericsError::InvalidTolerances(_)) => 2,
        SolverError::Numerics(_) => 3,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantSelector {
    One(Variant),
    All,
}

impl VariantSelector {
    pub fn variants(self) -> Vec<Variant> {
        match self {
            VariantSelector::One(v) => vec![v],
            VariantSelector::All => Variant::ALL.to_vec(),
        }
    }
}

impl FromStr for VariantSelector {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(VariantSelector::All);
        }
        s.parse()
            .map(VariantSelector::One)
            .map_err(|_| ReportError::Usage(format!("unknown variant `{s}`; expected symmetric, antisymmetric, general or all")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(ReportError::Usage(format!("unknown format `{s}`; expected json or csv"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Wavefunction,
    Scatter,
    Compare,
}

/// One source of settings. Layers are stacked with [`ConfigLayer::over`]:
/// flags over the config file over the environment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub potential: Option<String>,
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
    pub n_max: Option<u32>,
    pub variant: Option<String>,
    pub tol_energy: Option<f64>,
    pub tol_quad: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub n: Option<i64>,
    pub samples: Option<usize>,
    pub u0: Option<f64>,
    pub energies: Option<String>,
    pub x: Option<f64>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ReportError> {
    value.parse().map_err(|_| ReportError::Usage(format!("invalid value `{value}` for {key}")))
}

impl ConfigLayer {
    /// Reads a flat `key = value` file. Keys are the long flag names, with
    /// `_` accepted for `-`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ReportError> {
        let mut layer = ConfigLayer::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ReportError::Usage(format!("config line {}: expected `key = value`", lineno + 1)));
            };
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            match key.as_str() {
                "potential" => layer.potential = Some(value.to_string()),
                "hbar" => layer.hbar = Some(parse_value(&key, value)?),
                "mass" => layer.mass = Some(parse_value(&key, value)?),
                "n-max" => layer.n_max = Some(parse_value(&key, value)?),
                "variant" => layer.variant = Some(value.to_string()),
                "tol-energy" => layer.tol_energy = Some(parse_value(&key, value)?),
                "tol-quad" => layer.tol_quad = Some(parse_value(&key, value)?),
                "out" => layer.out = Some(PathBuf::from(value)),
                "format" => layer.format = Some(value.to_string()),
                "n" => layer.n = Some(parse_value(&key, value)?),
                "samples" => layer.samples = Some(parse_value(&key, value)?),
                "u0" => layer.u0 = Some(parse_value(&key, value)?),
                "energies" => layer.energies = Some(value.to_string()),
                "x" => layer.x = Some(parse_value(&key, value)?),
                _ => return Err(ReportError::Usage(format!("config line {}: unknown key `{key}`", lineno + 1))),
            }
        }
        Ok(layer)
    }

    pub fn from_env() -> Result<Self, ReportError> {
        let tol_energy = match std::env::var(TOL_ENERGY_ENV) {
            Ok(v) => Some(parse_value(TOL_ENERGY_ENV, v.trim())?),
            Err(_) => None,
        };
        Ok(ConfigLayer { tol_energy, ..Default::default() })
    }

    /// Fields set in `self` win over `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            potential: self.potential.or(lower.potential),
            hbar: self.hbar.or(lower.hbar),
            mass: self.mass.or(lower.mass),
            n_max: self.n_max.or(lower.n_max),
            variant: self.variant.or(lower.variant),
            tol_energy: self.tol_energy.or(lower.tol_energy),
            tol_quad: self.tol_quad.or(lower.tol_quad),
            out: self.out.or(lower.out),
            format: self.format.or(lower.format),
            n: self.n.or(lower.n),
            samples: self.samples.or(lower.samples),
            u0: self.u0.or(lower.u0),
            energies: self.energies.or(lower.energies),
            x: self.x.or(lower.x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Optional only for `scatter`, which can take `--u0` instead.
    pub potential: Option<PotentialSpec>,
    pub units: UnitSystem,
    pub tolerances: Tolerances,
    pub n_max: u32,
    pub variant: VariantSelector,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_layer(layer: &ConfigLayer, command: Command) -> Result<Self, ReportError> {
        let potential = layer.potential.as_deref().map(str::parse::<PotentialSpec>).transpose()?;
        let units = UnitSystem::new(layer.hbar.unwrap_or(1.0), layer.mass.unwrap_or(1.0))?;
        let mut tolerances = Tolerances::default();
        if let Some(t) = layer.tol_energy {
            tolerances.energy_rel = t;
        }
        if let Some(t) = layer.tol_quad {
            tolerances.quad_rel = t;
        }
        tolerances.validate().map_err(|e| ReportError::Usage(e.to_string()))?;
        let n_max = layer.n_max.unwrap_or(DEFAULT_N_MAX);
        if n_max == 0 {
            return Err(ReportError::Usage("n-max must be at least 1".into()));
        }
        let variant = layer.variant.as_deref().unwrap_or("all").parse()?;
        let default_format = if command == Command::Wavefunction { Format::Csv } else { Format::Json };
        let format = layer.format.as_deref().map(str::parse).transpose()?.unwrap_or(default_format);
        if format == Format::Csv && command != Command::Wavefunction {
            return Err(ReportError::Usage("csv output is only available for wavefunction samples".into()));
        }
        Ok(RunConfig { potential, units, tolerances, n_max, variant, output_path: layer.out.clone(), format })
    }

    pub fn potential(&self) -> Result<&PotentialSpec, ReportError> {
        self.potential.as_ref().ok_or_else(|| ReportError::Usage("--potential is required".into()))
    }
}

/// `a,b,c` or an inclusive range `lo..hi:count`.
pub fn parse_energies(text: &str) -> Result<Vec<f64>, ReportError> {
    let bad = || ReportError::Usage(format!("cannot parse energies `{text}`; expected `a,b,c` or `lo..hi:count`"));
    if let Some((range, count)) = text.split_once(':') {
        let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        if count == 0 {
            return Err(bad());
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        let last = (count - 1) as f64;
        return Ok((0..count).map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / last }).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

/// A number with 17 significant digits, or `null` when not finite.
pub fn number(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format!("{v:.16e}")).map(Value::Number).unwrap_or(Value::Null)
}

fn domain_json(domain: &Domain) -> Value {
    json!({ "lo": number(domain.lo), "hi": number(domain.hi), "kind": domain.kind.as_str() })
}

pub fn potential_json(spec: &PotentialSpec) -> Value {
    let mut doc = Map::new();
    doc.insert("family".into(), spec.family().into());
    doc.insert("spec".into(), spec.to_string().into());
    let params: Vec<(&str, f64)> = match spec {
        PotentialSpec::InfiniteSquareWell { width } => vec![("L", *width)],
        PotentialSpec::HarmonicOscillator { omega } => vec![("omega", *omega)],
        PotentialSpec::TrigWell { u0, a } | PotentialSpec::ParabolicWell { u0, a } => vec![("u0", *u0), ("a", *a)],
        PotentialSpec::VWell { u0 } | PotentialSpec::Step { u0 } => vec![("u0", *u0)],
        PotentialSpec::QuadraticInverse { a, b } => vec![("a", *a), ("b", *b)],
        PotentialSpec::Expression(e) => {
            doc.insert("source".into(), e.source.clone().into());
            doc.insert("domain".into(), domain_json(&e.domain));
            Vec::new()
        }
    };
    if !params.is_empty() {
        let params: Map<String, Value> = params.into_iter().map(|(k, v)| (k.to_string(), number(v))).collect();
        doc.insert("parameters".into(), Value::Object(params));
    }
    Value::Object(doc)
}

fn units_json(units: &UnitSystem) -> Value {
    json!({ "hbar": number(units.hbar), "mass": number(units.mass) })
}

fn check_residual(label: &str, residual: f64, tol: &Tolerances) -> Result<(), ReportError> {
    if residual <= tol.energy_rel {
        Ok(())
    } else {
        Err(ReportError::ResidualRefused { label: label.to_string(), residual, tolerance: tol.energy_rel })
    }
}

fn ground_json(g: &GroundState) -> Value {
    json!({
        "energy": number(g.energy),
        "d": number(g.tp.d),
        "x0": number(g.tp.x0),
        "bound": g.bound,
        "residual": number(g.residual),
    })
}

fn level_json(l: &EnergyLevel) -> Value {
    json!({
        "n": l.level.n,
        "variant": l.level.variant.as_str(),
        "energy": number(l.energy),
        "K": number(l.k),
        "d": number(l.tp.d),
        "x0": number(l.tp.x0),
        "residual": number(l.residual),
    })
}

/// Ground state and requested levels, each checked against the energy
/// tolerance before anything is emitted.
#[derive(Debug, Clone)]
pub struct Solution {
    pub ground: GroundState,
    pub levels: Vec<EnergyLevel>,
}

pub fn solve(config: &RunConfig) -> Result<Solution, ReportError> {
    let spec = config.potential()?;
    let tol = &config.tolerances;
    let ground = solver::ground_state_energy(spec, &config.units, tol)?;
    check_residual("ground state", ground.residual, tol)?;
    let levels = solver::solve_levels(spec, config.n_max, &config.variant.variants(), &config.units, tol)?;
    for l in &levels {
        check_residual(&format!("{} n={}", l.level.variant, l.level.n), l.residual, tol)?;
    }
    Ok(Solution { ground, levels })
}

fn solution_json(config: &RunConfig, solution: &Solution) -> Result<Map<String, Value>, ReportError> {
    let mut doc = Map::new();
    doc.insert("potential".into(), potential_json(config.potential()?));
    doc.insert("units".into(), units_json(&config.units));
    doc.insert("ground_state".into(), ground_json(&solution.ground));
    doc.insert("levels".into(), solution.levels.iter().map(level_json).collect());
    Ok(doc)
}

pub fn run_solve(config: &RunConfig) -> Result<Value, ReportError> {
    let solution = solve(config)?;
    Ok(Value::Object(solution_json(config, &solution)?))
}

/// Normalized samples of one level on `[x1 - 0.1 d, x2 + 0.1 d]`.
#[derive(Debug, Clone)]
pub struct WavefunctionSamples {
    pub level: LevelSpec,
    pub energy: f64,
    pub x1: f64,
    pub x2: f64,
    pub rows: Vec<(f64, f64)>,
}

/// `all` falls back to the symmetric variant, since one curve is sampled.
pub fn run_wavefunction(config: &RunConfig, n: i64, samples: usize) -> Result<WavefunctionSamples, ReportError> {
    let spec = config.potential()?;
    if n < 1 || n > i64::from(config.n_max) {
        return Err(ReportError::Usage(format!("n must lie in 1..={}, got {n}", config.n_max)));
    }
    if samples == 0 {
        return Err(ReportError::Usage("samples must be at least 1".into()));
    }
    let variant = match config.variant {
        VariantSelector::One(v) => v,
        VariantSelector::All => Variant::Symmetric,
    };
    let tol = &config.tolerances;
    let level = LevelSpec::new(n, variant)?;
    let solved = solver::excited_energy(spec, level, &config.units, tol)?;
    check_residual(&format!("{variant} n={n}"), solved.residual, tol)?;
    let psi = solver::wavefunction(spec, level, solved.energy, &config.units, tol)?.normalize(tol)?;
    let tp = psi.tp;
    let lo = tp.x1 - 0.1 * tp.d;
    let hi = tp.x2 + 0.1 * tp.d;
    let grid: Vec<f64> = if samples == 1 {
        vec![tp.x0]
    } else {
        let last = (samples - 1) as f64;
        (0..samples).map(|i| lo + (hi - lo) * (i as f64 / last)).collect()
    };
    let rows = psi.sample(&grid)?;
    Ok(WavefunctionSamples { level, energy: solved.energy, x1: tp.x1, x2: tp.x2, rows })
}

impl WavefunctionSamples {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,psi\n");
        for (x, psi) in &self.rows {
            let _ = writeln!(out, "{x:.16e},{psi:.16e}");
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.level.n,
            "variant": self.level.variant.as_str(),
            "energy": number(self.energy),
            "x1": number(self.x1),
            "x2": number(self.x2),
            "samples": self.rows.iter().map(|(x, psi)| json!({ "x": number(*x), "psi": number(*psi) })).collect::<Vec<_>>(),
        })
    }
}

pub fn run_scatter(u0: f64, energies: &[f64], x: f64, units: &UnitSystem) -> Result<Value, ReportError> {
    units.validate()?;
    if energies.is_empty() {
        return Err(ReportError::Usage("no energies given".into()));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(ScatteringError::InvalidRegion { x }.into());
    }
    let mut records = Vec::with_capacity(energies.len());
    for &energy in energies {
        let c = scattering::match_coefficients(energy, u0, units)?;
        let t_at_x = if c.regime == Regime::BelowBarrier { 0.0 } else { scattering::transmission_at(energy, u0, x, units)? };
        let raw = if energy <= u0 { Some(scattering::raw_subbarrier_r(energy, u0)?) } else { None };
        records.push(json!({
            "E": number(energy),
            "regime": c.regime.as_str(),
            "R": number(c.r),
            "T0": number(c.t0),
            "T_at_x": number(t_at_x),
            "raw_subbarrier_R": raw.map_or(Value::Null, number),
            "non_physical": raw.is_some(),
            "standard_R": number(scattering::standard_step_r(energy, u0, units)?),
            "standard_T": number(scattering::standard_step_t(energy, u0, units)?),
        }));
    }
    Ok(json!({
        "potential": potential_json(&PotentialSpec::Step { u0 }),
        "units": units_json(units),
        "x": number(x),
        "records": records,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    Numerov,
    Literature,
}

impl ReferenceSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceSource::Numerov => "numerov",
            ReferenceSource::Literature => "literature",
        }
    }
}

/// A method energy beside a standard one. `method_n = 0` is the ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub method_n: u32,
    pub variant: &'static str,
    pub reference_n_index: usize,
    pub source: ReferenceSource,
    pub method_value: f64,
    pub reference_value: f64,
    pub rel_diff: f64,
    pub ratio: f64,
}

impl ComparisonRow {
    pub fn new(
        label: String,
        method_n: u32,
        variant: &'static str,
        reference_n_index: usize,
        source: ReferenceSource,
        method_value: f64,
        reference_value: f64,
    ) -> Self {
        let rel_diff = (method_value - reference_value).abs() / reference_value.abs().max(REL_DIFF_FLOOR);
        Self {
            label,
            method_n,
            variant,
            reference_n_index,
            source,
            method_value,
            reference_value,
            rel_diff,
            ratio: reference_value / method_value,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "label": self.label,
            "method_n": self.method_n,
            "variant": self.variant,
            "reference_n_index": self.reference_n_index,
            "reference_source": self.source.as_str(),
            "method_value": number(self.method_value),
            "reference_value": number(self.reference_value),
            "rel_diff": number(self.rel_diff),
            "ratio": number(self.ratio),
        })
    }
}

/// Textbook ground-state energies: exact for the oscillator and the square
/// well, and the variational estimate 0.813 (hbar^2 U0^2 / m)^(1/3) for the
/// V-shaped well.
pub fn literature_ground(spec: &PotentialSpec, units: &UnitSystem) -> Option<(f64, &'static str)> {
    let (hbar, m) = (units.hbar, units.mass);
    match spec {
        PotentialSpec::HarmonicOscillator { omega } => Some((0.5 * hbar * omega, "exact")),
        PotentialSpec::InfiniteSquareWell { width } => {
            Some((hbar * hbar * std::f64::consts::PI.powi(2) / (2.0 * m * width * width), "exact"))
        }
        PotentialSpec::VWell { u0 } => Some((0.813 * (hbar * hbar * u0 * u0 / m).cbrt(), "variational")),
        _ => None,
    }
}

/// Pairs the k-th energy of each series (the ground state alone, then each
/// variant sorted by energy) with the k-th reference eigenvalue.
pub fn comparison_rows(
    spec: &PotentialSpec,
    units: &UnitSystem,
    solution: &Solution,
    reference: &[ReferenceLevel],
) -> Vec<ComparisonRow> {
    let mut rows = Vec::new();
    if let Some(r) = reference.first() {
        rows.push(ComparisonRow::new(
            "ground".into(),
            0,
            "ground",
            r.n_index,
            ReferenceSource::Numerov,
            solution.ground.energy,
            r.energy,
        ));
    }
    if let Some((value, kind)) = literature_ground(spec, units) {
        rows.push(ComparisonRow::new(
            format!("ground vs {kind}"),
            0,
            "ground",
            0,
            ReferenceSource::Literature,
            solution.ground.energy,
            value,
        ));
    }
    for variant in Variant::ALL {
        let mut series: Vec<&EnergyLevel> = solution.levels.iter().filter(|l| l.level.variant == variant).collect();
        series.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        for (level, r) in series.into_iter().zip(reference) {
            rows.push(ComparisonRow::new(
                format!("{variant} n={}", level.level.n),
                level.level.n,
                variant.as_str(),
                r.n_index,
                ReferenceSource::Numerov,
                level.energy,
                r.energy,
            ));
        }
    }
    rows
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub document: Value,
    pub rows: Vec<ComparisonRow>,
}

pub fn run_compare(config: &RunConfig) -> Result<Comparison, ReportError> {
    let spec = config.potential()?;
    let solution = solve(config)?;
    let reference = reference::shoot_bound_states(spec, config.n_max as usize, &NumerovConfig::default(), &config.units)?;
    let rows = comparison_rows(spec, &config.units, &solution, &reference);
    let mut doc = solution_json(config, &solution)?;
    doc.insert(
        "reference".into(),
        reference
            .iter()
            .map(|r| json!({ "n_index": r.n_index, "energy": number(r.energy), "node_count": r.node_count }))
            .collect(),
    );
    doc.insert("comparison".into(), rows.iter().map(ComparisonRow::to_json).collect());
    Ok(Comparison { document: Value::Object(doc), rows })
}

pub struct Table<'a>(pub &'a [ComparisonRow]);

impl fmt::Display for Table<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<26} {:>3} {:<13} {:>7} {:<10} {:>16} {:>16} {:>12} {:>10}",
            "label", "n", "variant", "ref_idx", "source", "method", "reference", "rel_diff", "ratio"
        )?;
        for r in self.0 {
            writeln!(
                f,
                "{:<26} {:>3} {:<13} {:>7} {:<10} {:>16.9} {:>16.9} {:>12.4e} {:>10.6}",
                r.label,
                r.method_n,
                r.variant,
                r.reference_n_index,
                r.source.as_str(),
                r.method_value,
                r.reference_value,
                r.rel_diff,
                r.ratio
            )?;
        }
        Ok(())
    }
}

/// Pretty JSON with a trailing newline.
pub fn render_json(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).unwrap_or_else(|_| "null".into());
    s.push('\n');
    s
}
