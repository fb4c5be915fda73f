//! Turning-point quantization: self-consistent ground and excited energies,
//! the S-integral, and the trigonometric-times-exponential wavefunctions.
//!
//! Every energy is found by solving `g(E) = E - C / d(E)^2 = 0`, where
//! `d(E)` is the distance between the turning points at `E` and `C` depends
//! only on the level:
//!
//! * ground state: `C = 2 hbar^2 / m`
//! * excited state with `K d = q pi`: `C = q^2 pi^2 hbar^2 / (2 m)`, where
//!   `q = 2n - 1` (symmetric), `2n` (antisymmetric) or `n` (general).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::numerics::{self, NumericsError, Tolerances, DEFAULT_GRID, MAX_GRID, MAX_RANGE_EXPANSIONS};
use crate::potential::{Domain, DomainKind, PotentialError, PotentialSpec, TurningPointSet, TurningPoints, UnitSystem};

/// Half-width of the box first searched on infinite domains.
pub const PROBE_HALF_WIDTH: f64 = 10.0;

/// Below this raw norm integral a wavefunction cannot be normalized.
pub const MIN_NORM: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("{family} is not a bound-state well")]
    NotAWell { family: &'static str },
    #[error("no classically allowed region found at E = {energy}")]
    NoBoundRegion { energy: f64 },
    #[error("found {roots} turning points at E = {energy}; narrow the domain to a single well")]
    AmbiguousWells { energy: f64, roots: usize },
    #[error("quantum number must be at least 1, got {n}")]
    InvalidLevel { n: i64 },
    #[error("wavefunction norm {norm:e} is too small to normalize")]
    DegenerateNorm { norm: f64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Symmetric,
    Antisymmetric,
    General,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Symmetric, Variant::Antisymmetric, Variant::General];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Symmetric => "symmetric",
            Variant::Antisymmetric => "antisymmetric",
            Variant::General => "general",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "symmetric" => Ok(Variant::Symmetric),
            "antisymmetric" => Ok(Variant::Antisymmetric),
            "general" => Ok(Variant::General),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LevelSpec {
    pub n: u32,
    pub variant: Variant,
}

impl LevelSpec {
    pub fn new(n: i64, variant: Variant) -> Result<Self, SolverError> {
        if n < 1 || n > u32::MAX as i64 {
            return Err(SolverError::InvalidLevel { n });
        }
        Ok(Self { n: n as u32, variant })
    }

    /// The integer `q` in the quantization condition `K d = q pi`.
    pub fn q(&self) -> f64 {
        let n = self.n as f64;
        match self.variant {
            Variant::Symmetric => 2.0 * n - 1.0,
            Variant::Antisymmetric => 2.0 * n,
            Variant::General => n,
        }
    }

    /// Whether the spatial factor is a cosine (even about the well center).
    pub fn is_even(&self) -> bool {
        match self.variant {
            Variant::Symmetric => true,
            Variant::Antisymmetric => false,
            Variant::General => self.n % 2 == 1,
        }
    }

    fn constant(&self, units: &UnitSystem) -> f64 {
        let q = self.q();
        q * q * PI * PI * units.hbar * units.hbar / (2.0 * units.mass)
    }
}

/// The self-consistent ground state. The energy is reported as a positive
/// magnitude; `bound` keeps the negative-sign convention of the derivation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub bound: bool,
    pub tp: TurningPoints,
    pub k: f64,
    /// `|E - 2 hbar^2 / (m d^2)| / (1 + E)`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLevel {
    pub level: LevelSpec,
    pub energy: f64,
    pub tp: TurningPoints,
    pub k: f64,
    /// `|E - q^2 pi^2 hbar^2 / (2 m d^2)| / (1 + E)`.
    pub residual: f64,
}

impl EnergyLevel {
    /// `|K d - q pi| / (q pi)`.
    pub fn phase_residual(&self) -> f64 {
        let target = self.level.q() * PI;
        (self.k * self.tp.d - target).abs() / target
    }
}

fn ground_constant(units: &UnitSystem) -> f64 {
    2.0 * units.hbar * units.hbar / units.mass
}

fn require_well(spec: &PotentialSpec) -> Result<(), SolverError> {
    if spec.is_well() {
        Ok(())
    } else {
        Err(SolverError::NotAWell { family: spec.family() })
    }
}

/// Roots `x1 < x2` of `E = U(x)` for the well the solvers work on.
///
/// Closed forms are used when available. Otherwise `E - U` is scanned on a
/// uniform grid over the well domain (infinite sides are probed from
/// `[-10, 10]` or `[0, 10]` and doubled while the region is still open), and
/// each sign change is bisected. A finite domain edge where `E > U` counts as
/// a hard wall. Exactly two roots are required.
pub fn turning_points(
    spec: &PotentialSpec,
    energy: f64,
    units: &UnitSystem,
    tol: &Tolerances,
) -> Result<TurningPoints, SolverError> {
    require_well(spec)?;
    if let Some(set) = spec.analytic_turning_points(energy, units)? {
        return Ok(set.primary());
    }
    numeric_turning_points(spec, energy, units, tol)
}

/// Like [`turning_points`] but keeps the mirrored pair of the
/// quadratic-plus-inverse-square potential.
pub fn turning_point_set(
    spec: &PotentialSpec,
    energy: f64,
    units: &UnitSystem,
    tol: &Tolerances,
) -> Result<TurningPointSet, SolverError> {
    require_well(spec)?;
    match spec.analytic_turning_points(energy, units)? {
        Some(set) => Ok(set),
        None => Ok(TurningPointSet::Single(numeric_turning_points(spec, energy, units, tol)?)),
    }
}

fn probe_box(domain: &Domain) -> (f64, f64) {
    match domain.kind {
        DomainKind::Finite => (domain.lo, domain.hi),
        DomainKind::HalfLinePositive => (0.0, PROBE_HALF_WIDTH),
        DomainKind::FullLine => (-PROBE_HALF_WIDTH, PROBE_HALF_WIDTH),
    }
}

fn numeric_turning_points(
    spec: &PotentialSpec,
    energy: f64,
    units: &UnitSystem,
    tol: &Tolerances,
) -> Result<TurningPoints, SolverError> {
    if !energy.is_finite() {
        return Err(PotentialError::InvalidEnergy { energy, reason: "energy must be finite".into() }.into());
    }
    let domain = spec.well_domain();
    let f = |x: f64| -> Result<f64, SolverError> { Ok(energy - spec.evaluate(x, units)?) };
    let allowed = |x: f64| matches!(f(x), Ok(v) if v > 0.0);

    let (mut lo, mut hi) = probe_box(&domain);
    let open_lo = domain.lo == f64::NEG_INFINITY;
    let open_hi = domain.hi == f64::INFINITY;
    let mut expansions = 0;
    while (open_lo && allowed(lo)) || (open_hi && allowed(hi)) {
        if expansions == MAX_RANGE_EXPANSIONS {
            return Err(SolverError::NoBoundRegion { energy });
        }
        if open_lo && allowed(lo) {
            lo *= 2.0;
        }
        if open_hi && allowed(hi) {
            hi *= 2.0;
        }
        expansions += 1;
    }

    let mut walls = Vec::new();
    if !open_lo && allowed(lo) {
        walls.push(lo);
    }
    if !open_hi && allowed(hi) {
        walls.push(hi);
    }

    let mut n_grid = DEFAULT_GRID;
    loop {
        let brackets = numerics::bracket_roots(f, lo, hi, n_grid);
        let count = walls.len() + brackets.len();
        if count > 2 {
            return Err(SolverError::AmbiguousWells { energy, roots: count });
        }
        if count == 2 {
            let machine = tol.machine_roots();
            let mut roots = walls.clone();
            for b in brackets {
                roots.push(numerics::bisect(f, b, &machine)?);
            }
            return Ok(TurningPoints::new(roots[0], roots[1]));
        }
        if n_grid >= MAX_GRID {
            return Err(SolverError::NoBoundRegion { energy });
        }
        n_grid *= 2;
    }
}

/// `S = integral of U over [x1, x2]` at energy `E`.
pub fn s_integral(
    spec: &PotentialSpec,
    energy: f64,
    units: &UnitSystem,
    tol: &Tolerances,
) -> Result<f64, SolverError> {
    let tp = turning_points(spec, energy, units, tol)?;
    let (x1, x2) = (tp.x1, tp.x2);
    let s = match spec {
        PotentialSpec::InfiniteSquareWell { .. } => 0.0,
        PotentialSpec::HarmonicOscillator { omega } => units.mass * omega * omega / 6.0 * (x2.powi(3) - x1.powi(3)),
        PotentialSpec::TrigWell { u0, a } => {
            let anti = |x: f64| -a / PI / (PI * x / a).tan() - x;
            u0 * (anti(x2) - anti(x1))
        }
        PotentialSpec::VWell { u0 } => u0 * (x2 * x2.abs() - x1 * x1.abs()) / 2.0,
        PotentialSpec::ParabolicWell { u0, a } => {
            let anti = |x: f64| -a * a / x - 2.0 * x + x.powi(3) / (3.0 * a * a);
            u0 * (anti(x2) - anti(x1))
        }
        PotentialSpec::QuadraticInverse { a, b } => {
            let anti = |x: f64| a * x.powi(3) / 3.0 - b / x;
            anti(x2) - anti(x1)
        }
        PotentialSpec::Expression(_) => {
            numerics::integrate(|x| -> Result<f64, SolverError> { Ok(spec.evaluate(x, units)?) }, x1, x2, tol)?
        }
        PotentialSpec::Step { .. } => unreachable!("rejected by turning_points"),
    };
    Ok(s)
}

/// `-m S^2 / (2 hbar^2)`; never positive, and exactly zero when `S = 0`.
pub fn delta_equivalent_energy(s: f64, units: &UnitSystem) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    -units.mass * s * s / (2.0 * units.hbar * units.hbar)
}

/// Lowest admissible energy and a characteristic energy for the well, used
/// to initialize the self-consistent bracket.
pub fn energy_window(spec: &PotentialSpec, units: &UnitSystem) -> Result<(f64, f64), SolverError> {
    require_well(spec)?;
    if let (Some(min), Some(scale)) = (spec.analytic_minimum(), spec.energy_scale(units)) {
        return Ok((min, scale));
    }
    let (lo, hi) = probe_box(&spec.well_domain());
    let n = MAX_GRID;
    let step = (hi - lo) / (n - 1) as f64;
    let (mut u_min, mut u_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let x = if i == n - 1 { hi } else { lo + step * i as f64 };
        if let Ok(u) = spec.evaluate(x, units) {
            u_min = u_min.min(u);
            u_max = u_max.max(u);
        }
    }
    if !u_min.is_finite() {
        return Err(SolverError::NoBoundRegion { energy: f64::NAN });
    }
    let width = hi - lo;
    let kinetic = units.hbar * units.hbar / (units.mass * width * width);
    Ok((u_min, kinetic.max(u_max - u_min)))
}

fn gap(spec: &PotentialSpec, energy: f64, c: f64, units: &UnitSystem, tol: &Tolerances) -> Result<f64, SolverError> {
    match turning_points(spec, energy, units, tol) {
        Ok(tp) if tp.d >= 1e-12 * (1.0 + tp.x0.abs()) => Ok(energy - c / (tp.d * tp.d)),
        // no room for a level yet: the energy is below the solution
        Ok(_)
        | Err(SolverError::NoBoundRegion { .. })
        | Err(SolverError::Potential(PotentialError::InvalidEnergy { .. })) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

fn solve_gap(spec: &PotentialSpec, c: f64, units: &UnitSystem, tol: &Tolerances) -> Result<(f64, TurningPoints, f64), SolverError> {
    let (u_min, scale) = energy_window(spec, units)?;
    let (lo, hi) = (u_min + 1e-9 * scale, u_min + 1e3 * scale);
    let energy = numerics::solve_self_consistent(|e| gap(spec, e, c, units, tol), lo, hi, tol)?;
    let tp = turning_points(spec, energy, units, tol)?;
    let residual = (energy - c / (tp.d * tp.d)).abs() / (1.0 + energy.abs());
    Ok((energy, tp, residual))
}

/// Solves `E = 2 hbar^2 / (m d(E)^2)`.
pub fn ground_state_energy(spec: &PotentialSpec, units: &UnitSystem, tol: &Tolerances) -> Result<GroundState, SolverError> {
    require_well(spec)?;
    let (energy, tp, residual) = solve_gap(spec, ground_constant(units), units, tol)?;
    Ok(GroundState { energy, bound: true, tp, k: units.wavenumber(energy), residual })
}

/// Solves `K(E) d(E) = q pi` for the given level.
pub fn excited_energy(
    spec: &PotentialSpec,
    level: LevelSpec,
    units: &UnitSystem,
    tol: &Tolerances,
) -> Result<EnergyLevel, SolverError> {
    require_well(spec)?;
    if level.n < 1 {
        return Err(SolverError::InvalidLevel { n: level.n as i64 });
    }
    let (energy, tp, residual) = solve_gap(spec, level.constant(units), units, tol)?;
    Ok(EnergyLevel { level, energy, tp, k: units.wavenumber(energy), residual })
}

/// Levels `n = 1..=n_max` of each requested variant, ordered by variant then `n`.
pub fn solve_levels(
    spec: &PotentialSpec,
    n_max: u32,
    variants: &[Variant],
    units: &UnitSystem,
    tol: &Tolerances,
) -> Result<Vec<EnergyLevel>, SolverError> {
    let mut out = Vec::new();
    for &variant in variants {
        for n in 1..=n_max {
            out.push(excited_energy(spec, LevelSpec::new(n as i64, variant)?, units, tol)?);
        }
    }
    Ok(out)
}

fn closed_form(spec: &PotentialSpec, c: f64, units: &UnitSystem) -> Option<f64> {
    let m = units.mass;
    match spec {
        PotentialSpec::InfiniteSquareWell { width } => Some(c / (width * width)),
        PotentialSpec::HarmonicOscillator { omega } => Some(omega * (c * m / 8.0).sqrt()),
        PotentialSpec::VWell { u0 } => Some((c * u0 * u0 / 4.0).cbrt()),
        PotentialSpec::ParabolicWell { u0, a } => Some((c * u0).sqrt() / a),
        PotentialSpec::QuadraticInverse { a, b } => Some((a * b).sqrt() + (a * b + a * c).sqrt()),
        PotentialSpec::TrigWell { .. } | PotentialSpec::Step { .. } | PotentialSpec::Expression(_) => None,
    }
}

/// Closed-form ground-state energy, for the families that have one.
pub fn closed_form_ground(spec: &PotentialSpec, units: &UnitSystem) -> Option<f64> {
    closed_form(spec, ground_constant(units), units)
}

/// Closed-form excited energy, for the families that have one.
pub fn closed_form_excited(spec: &PotentialSpec, level: LevelSpec, units: &UnitSystem) -> Option<f64> {
    closed_form(spec, level.constant(units), units)
}

/// `Q(x)`, the exponent of the envelope `e^{-Q}`.
///
/// Built-in families use their closed forms with zero integration constant.
/// Expressions use `m1 |integral from x0 to x of sqrt(max(U, 0))|`, which
/// vanishes at the well center and grows outwards.
#[derive(Debug, Clone, PartialEq)]
pub struct QFunction {
    spec: PotentialSpec,
    units: UnitSystem,
    anchor: f64,
    tol: Tolerances,
}

impl QFunction {
    pub fn new(spec: &PotentialSpec, units: &UnitSystem, anchor: f64, tol: &Tolerances) -> Result<Self, SolverError> {
        require_well(spec)?;
        Ok(Self { spec: spec.clone(), units: *units, anchor, tol: *tol })
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.spec, PotentialSpec::Expression(_))
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn eval(&self, x: f64) -> Result<f64, SolverError> {
        if let Some(q) = self.spec.analytic_q(x, &self.units)? {
            return Ok(q);
        }
        if x == self.anchor {
            return Ok(0.0);
        }
        let (lo, hi) = if x < self.anchor { (x, self.anchor) } else { (self.anchor, x) };
        let root = |t: f64| -> Result<f64, SolverError> { Ok(self.spec.evaluate(t, &self.units)?.max(0.0).sqrt()) };
        let integral: f64 = numerics::integrate(root, lo, hi, &self.tol)?;
        Ok(self.units.m1() * integral.abs())
    }
}

/// Everything needed to evaluate
/// `psi(x) = amplitude * trig(q pi (x - x0) / d) * e^{-Q(x)}` on `[x1, x2]`,
/// with `psi = 0` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunctionDescriptor {
    pub level: LevelSpec,
    pub energy: f64,
    pub tp: TurningPoints,
    pub amplitude: f64,
    pub q: QFunction,
    pub domain: Domain,
    /// The same function also lives on the mirror-image well `[-x2, -x1]`.
    pub mirrored: bool,
}

/// Un-normalized (`amplitude = 1`) wavefunction of `level` at `energy`.
pub fn wavefunction(
    spec: &PotentialSpec,
    level: LevelSpec,
    energy: f64,
    units: &UnitSystem,
    tol: &Tolerances,
) -> Result<WaveFunctionDescriptor, SolverError> {
    let tp = turning_points(spec, energy, units, tol)?;
    let domain = Domain { lo: tp.x1, hi: tp.x2, kind: DomainKind::Finite };
    Ok(WaveFunctionDescriptor {
        level,
        energy,
        tp,
        amplitude: 1.0,
        q: QFunction::new(spec, units, tp.x0, tol)?,
        domain,
        mirrored: matches!(spec, PotentialSpec::QuadraticInverse { .. }),
    })
}

impl WaveFunctionDescriptor {
    /// The spatial factor `cos` or `sin` of `q pi (x - x0) / d`.
    pub fn trig_factor(&self, x: f64) -> f64 {
        let phase = self.level.q() * PI * (x - self.tp.x0) / self.tp.d;
        if self.level.is_even() {
            phase.cos()
        } else {
            phase.sin()
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, SolverError> {
        if !(self.tp.x1 < x && x < self.tp.x2) {
            return Ok(0.0);
        }
        let t = self.trig_factor(x);
        Ok(self.amplitude * t * (-self.q.eval(x)?).exp())
    }

    /// Integral of `psi^2` over the well.
    pub fn norm_squared(&self, tol: &Tolerances) -> Result<f64, SolverError> {
        let (x1, x2) = (self.tp.x1, self.tp.x2);
        let density = |x: f64| -> Result<f64, SolverError> {
            let t = self.trig_factor(x);
            let envelope = (-self.q.eval(x)?).exp();
            let psi = self.amplitude * t * envelope;
            Ok(psi * psi)
        };
        numerics::integrate(density, x1, x2, tol)
    }

    /// Rescales the amplitude so that the integral of `psi^2` is one.
    pub fn normalize(&self, tol: &Tolerances) -> Result<Self, SolverError> {
        let norm = self.norm_squared(tol)?;
        if !(norm >= MIN_NORM) || !norm.is_finite() {
            return Err(SolverError::DegenerateNorm { norm });
        }
        Ok(Self { amplitude: self.amplitude / norm.sqrt(), ..self.clone() })
    }

    /// `(x, psi(x))` for each grid point.
    pub fn sample(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>, SolverError> {
        grid.iter().map(|&x| Ok((x, self.eval(x)?))).collect()
    }
}
