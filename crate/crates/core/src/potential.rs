//! Potential descriptions, units, pointwise evaluation, and the closed-form
//! turning points and action integrals of the built-in well families.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::{self, Expr, ExprError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("x = {x} lies outside the potential domain or on a pole")]
    Domain { x: f64 },
    #[error("invalid energy {energy}: {reason}")]
    InvalidEnergy { energy: f64, reason: String },
    #[error("invalid parameter {name} = {value}: must be strictly positive and finite")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("invalid domain [{lo}, {hi}]: {reason}")]
    InvalidDomain { lo: f64, hi: f64, reason: String },
    #[error("invalid unit system: {0}")]
    InvalidUnits(String),
    #[error("cannot parse potential spec `{spec}`: {reason}")]
    SpecParse { spec: String, reason: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Reduced Planck constant and particle mass. Natural units are the default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, mass: f64) -> Result<Self, PotentialError> {
        let units = Self { hbar, mass };
        units.validate()?;
        Ok(units)
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if !(self.hbar > 0.0 && self.hbar.is_finite() && self.mass > 0.0 && self.mass.is_finite()) {
            return Err(PotentialError::InvalidUnits(format!(
                "hbar = {}, mass = {}; both must be positive",
                self.hbar, self.mass
            )));
        }
        let m1 = self.m1();
        if !(m1 > 0.0 && m1.is_finite()) {
            return Err(PotentialError::InvalidUnits(format!("sqrt(2m)/hbar = {m1} is not finite")));
        }
        Ok(())
    }

    /// `sqrt(2 m) / hbar`, the factor turning `sqrt(energy)` into a wavenumber.
    pub fn m1(&self) -> f64 {
        (2.0 * self.mass).sqrt() / self.hbar
    }

    pub fn wavenumber(&self, energy: f64) -> f64 {
        self.m1() * energy.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Finite,
    HalfLinePositive,
    FullLine,
}

impl DomainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainKind::Finite => "finite",
            DomainKind::HalfLinePositive => "half_line_positive",
            DomainKind::FullLine => "full_line",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub kind: DomainKind,
}

impl Domain {
    pub fn finite(lo: f64, hi: f64) -> Result<Self, PotentialError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(PotentialError::InvalidDomain {
                lo,
                hi,
                reason: "a finite domain needs finite lo < hi".into(),
            });
        }
        Ok(Self { lo, hi, kind: DomainKind::Finite })
    }

    pub fn half_line_positive() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY, kind: DomainKind::HalfLinePositive }
    }

    pub fn full_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY, kind: DomainKind::FullLine }
    }

    /// Builds the domain for `lo..hi`, inferring its kind from the bounds.
    pub fn from_bounds(lo: f64, hi: f64) -> Result<Self, PotentialError> {
        match (lo, hi) {
            (l, h) if l.is_finite() && h.is_finite() => Self::finite(l, h),
            (l, h) if l == 0.0 && h == f64::INFINITY => Ok(Self::half_line_positive()),
            (l, h) if l == f64::NEG_INFINITY && h == f64::INFINITY => Ok(Self::full_line()),
            _ => Err(PotentialError::InvalidDomain {
                lo,
                hi,
                reason: "supported domains are lo..hi (finite), 0..inf and -inf..inf".into(),
            }),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A user-supplied potential `U(x)` with the domain it is defined on.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionPotential {
    pub source: String,
    pub ast: Expr,
    pub domain: Domain,
}

impl ExpressionPotential {
    pub fn parse(source: &str, domain: Domain) -> Result<Self, PotentialError> {
        let ast = expr::parse(source)?;
        Ok(Self { source: source.trim().to_string(), ast, domain })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `U = 0` on `(0, L)`, infinite walls outside.
    InfiniteSquareWell { width: f64 },
    /// `U = m omega^2 x^2 / 2`.
    HarmonicOscillator { omega: f64 },
    /// `U = U0 cot^2(pi x / a)` on `(0, a)`.
    TrigWell { u0: f64, a: f64 },
    /// `U = U0 |x|`.
    VWell { u0: f64 },
    /// `U = U0 (a/x - x/a)^2` on `x > 0`.
    ParabolicWell { u0: f64, a: f64 },
    /// `U = a x^2 + b / x^2`, a symmetric pair of wells separated by a pole.
    QuadraticInverse { a: f64, b: f64 },
    /// `U = 0` for `x < 0`, `U0` for `x >= 0`.
    Step { u0: f64 },
    Expression(ExpressionPotential),
}

/// Roots `x1 < x2` of `E = U(x)` bounding one classically allowed region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoints {
    pub x1: f64,
    pub x2: f64,
    pub x0: f64,
    pub d: f64,
}

impl TurningPoints {
    pub fn new(a: f64, b: f64) -> Self {
        let (x1, x2) = if a <= b { (a, b) } else { (b, a) };
        Self { x1, x2, x0: 0.5 * (x1 + x2), d: (x2 - x1).abs() }
    }
}

/// Closed-form turning points. [`PotentialSpec::QuadraticInverse`] has two
/// mirrored wells; every other family has one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TurningPointSet {
    Single(TurningPoints),
    Mirrored { positive: TurningPoints, negative: TurningPoints },
}

impl TurningPointSet {
    /// The well the solvers work on: the only one, or the positive side.
    pub fn primary(&self) -> TurningPoints {
        match self {
            TurningPointSet::Single(tp) => *tp,
            TurningPointSet::Mirrored { positive, .. } => *positive,
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<(), PotentialError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(PotentialError::InvalidParameter { name, value })
    }
}

fn arccot(y: f64) -> f64 {
    // principal branch on (0, pi) for y > 0
    1.0f64.atan2(y)
}

impl PotentialSpec {
    pub fn family(&self) -> &'static str {
        match self {
            PotentialSpec::InfiniteSquareWell { .. } => "isw",
            PotentialSpec::HarmonicOscillator { .. } => "sho",
            PotentialSpec::TrigWell { .. } => "trig",
            PotentialSpec::VWell { .. } => "vwell",
            PotentialSpec::ParabolicWell { .. } => "parab",
            PotentialSpec::QuadraticInverse { .. } => "axb",
            PotentialSpec::Step { .. } => "step",
            PotentialSpec::Expression(_) => "expr",
        }
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        match self {
            PotentialSpec::InfiniteSquareWell { width } => check_positive("L", *width),
            PotentialSpec::HarmonicOscillator { omega } => check_positive("omega", *omega),
            PotentialSpec::TrigWell { u0, a } | PotentialSpec::ParabolicWell { u0, a } => {
                check_positive("u0", *u0)?;
                check_positive("a", *a)
            }
            PotentialSpec::VWell { u0 } | PotentialSpec::Step { u0 } => check_positive("u0", *u0),
            PotentialSpec::QuadraticInverse { a, b } => {
                check_positive("a", *a)?;
                check_positive("b", *b)
            }
            PotentialSpec::Expression(e) => {
                Domain::from_bounds(e.domain.lo, e.domain.hi)?;
                Ok(())
            }
        }
    }

    pub fn is_well(&self) -> bool {
        !matches!(self, PotentialSpec::Step { .. })
    }

    /// Domain on which `U` is defined.
    pub fn domain(&self) -> Domain {
        match self {
            PotentialSpec::InfiniteSquareWell { width } => Domain { lo: 0.0, hi: *width, kind: DomainKind::Finite },
            PotentialSpec::TrigWell { a, .. } => Domain { lo: 0.0, hi: *a, kind: DomainKind::Finite },
            PotentialSpec::ParabolicWell { .. } => Domain::half_line_positive(),
            PotentialSpec::HarmonicOscillator { .. }
            | PotentialSpec::VWell { .. }
            | PotentialSpec::QuadraticInverse { .. }
            | PotentialSpec::Step { .. } => Domain::full_line(),
            PotentialSpec::Expression(e) => e.domain,
        }
    }

    /// Domain of the single well the solvers work on. Differs from
    /// [`domain`](Self::domain) only for the mirrored pair, where it is the
    /// positive side.
    pub fn well_domain(&self) -> Domain {
        match self {
            PotentialSpec::QuadraticInverse { .. } => Domain::half_line_positive(),
            _ => self.domain(),
        }
    }

    /// `U(x)`. Points outside the domain, on a wall, or on a pole are errors.
    pub fn evaluate(&self, x: f64, units: &UnitSystem) -> Result<f64, PotentialError> {
        let outside = || PotentialError::Domain { x };
        if !x.is_finite() {
            return Err(outside());
        }
        let u = match self {
            PotentialSpec::InfiniteSquareWell { width } => {
                if !(0.0 < x && x < *width) {
                    return Err(outside());
                }
                0.0
            }
            PotentialSpec::HarmonicOscillator { omega } => 0.5 * units.mass * omega * omega * x * x,
            PotentialSpec::TrigWell { u0, a } => {
                if !(0.0 < x && x < *a) {
                    return Err(outside());
                }
                let t = (PI * x / a).tan();
                if t == 0.0 {
                    return Err(outside());
                }
                u0 / (t * t)
            }
            PotentialSpec::VWell { u0 } => u0 * x.abs(),
            PotentialSpec::ParabolicWell { u0, a } => {
                if x <= 0.0 {
                    return Err(outside());
                }
                let r = a / x - x / a;
                u0 * r * r
            }
            PotentialSpec::QuadraticInverse { a, b } => {
                if x == 0.0 {
                    return Err(outside());
                }
                a * x * x + b / (x * x)
            }
            PotentialSpec::Step { u0 } => {
                if x < 0.0 {
                    0.0
                } else {
                    *u0
                }
            }
            PotentialSpec::Expression(e) => {
                if !e.domain.contains(x) {
                    return Err(outside());
                }
                e.ast.eval(x)?
            }
        };
        if u.is_finite() {
            Ok(u)
        } else {
            Err(outside())
        }
    }

    /// Minimum of `U` over the well, when known in closed form.
    pub fn analytic_minimum(&self) -> Option<f64> {
        match self {
            PotentialSpec::QuadraticInverse { a, b } => Some(2.0 * (a * b).sqrt()),
            PotentialSpec::Expression(_) => None,
            _ => Some(0.0),
        }
    }

    /// Characteristic energy of a built-in well, used to seed the energy
    /// search. `None` for expressions and the step.
    pub fn energy_scale(&self, units: &UnitSystem) -> Option<f64> {
        let (h, m) = (units.hbar, units.mass);
        let kinetic = |w: f64| h * h / (m * w * w);
        let scale = match self {
            PotentialSpec::InfiniteSquareWell { width } => kinetic(*width),
            PotentialSpec::HarmonicOscillator { omega } => h * omega,
            PotentialSpec::TrigWell { u0, a } | PotentialSpec::ParabolicWell { u0, a } => kinetic(*a).max(*u0),
            PotentialSpec::VWell { u0 } => (h * h * u0 * u0 / m).cbrt(),
            PotentialSpec::QuadraticInverse { a, b } => {
                let w = (b / a).powf(0.25);
                kinetic(w).max((a * b).sqrt()).max(h * (2.0 * a / m).sqrt())
            }
            PotentialSpec::Step { .. } | PotentialSpec::Expression(_) => return None,
        };
        Some(scale)
    }

    /// Closed-form roots of `E = U(x)`.
    ///
    /// Returns `Ok(None)` for the step and for expressions, which have no
    /// closed form; callers fall back to a numeric search.
    pub fn analytic_turning_points(
        &self,
        energy: f64,
        units: &UnitSystem,
    ) -> Result<Option<TurningPointSet>, PotentialError> {
        let invalid = |reason: &str| PotentialError::InvalidEnergy { energy, reason: reason.into() };
        if matches!(self, PotentialSpec::Step { .. } | PotentialSpec::Expression(_)) {
            return Ok(None);
        }
        if !energy.is_finite() {
            return Err(invalid("energy must be finite"));
        }
        if let Some(min) = self.analytic_minimum() {
            if energy <= min {
                return Err(invalid("energy must lie above the well minimum"));
            }
        }
        let single = |a: f64, b: f64| Some(TurningPointSet::Single(TurningPoints::new(a, b)));
        let set = match self {
            PotentialSpec::InfiniteSquareWell { width } => single(0.0, *width),
            PotentialSpec::HarmonicOscillator { omega } => {
                let x = (2.0 * energy / (units.mass * omega * omega)).sqrt();
                single(-x, x)
            }
            PotentialSpec::TrigWell { u0, a } => {
                let inner = a / PI * arccot((energy / u0).sqrt());
                single(inner, a - inner)
            }
            PotentialSpec::VWell { u0 } => {
                let x = energy / u0;
                single(-x, x)
            }
            PotentialSpec::ParabolicWell { u0, a } => {
                let r = energy / u0;
                let (s, t) = (r.sqrt(), (r + 4.0).sqrt());
                single(0.5 * a * (t - s), 0.5 * a * (t + s))
            }
            PotentialSpec::QuadraticInverse { a, b } => {
                let disc = energy * energy - 4.0 * a * b;
                if disc <= 0.0 {
                    return Err(invalid("E^2 - 4ab must be positive"));
                }
                let root = disc.sqrt();
                let inner = ((energy - root) / (2.0 * a)).sqrt();
                let outer = ((energy + root) / (2.0 * a)).sqrt();
                Some(TurningPointSet::Mirrored {
                    positive: TurningPoints::new(inner, outer),
                    negative: TurningPoints::new(-outer, -inner),
                })
            }
            PotentialSpec::Step { .. } | PotentialSpec::Expression(_) => None,
        };
        Ok(set)
    }

    /// Closed-form `Q(x) = m1 * integral sqrt(U) dx` with zero integration
    /// constant, as printed for each family. `Ok(None)` for expressions.
    pub fn analytic_q(&self, x: f64, units: &UnitSystem) -> Result<Option<f64>, PotentialError> {
        let m1 = units.m1();
        let outside = PotentialError::Domain { x };
        let q = match self {
            PotentialSpec::InfiniteSquareWell { .. } => 0.0,
            PotentialSpec::HarmonicOscillator { omega } => {
                let a = units.mass * omega / (2.0 * units.hbar);
                a * x * x
            }
            PotentialSpec::TrigWell { u0, a } => {
                if !(0.0 < x && x < *a) {
                    return Err(outside);
                }
                let s = (PI * x / a).sin();
                if s <= 0.0 {
                    return Err(outside);
                }
                m1 * u0.sqrt() * a / PI * s.ln()
            }
            // even continuation of the x > 0 form
            PotentialSpec::VWell { u0 } => m1 * u0.sqrt() * 2.0 / 3.0 * x.abs().powf(1.5),
            PotentialSpec::ParabolicWell { u0, a } => {
                if x <= 0.0 {
                    return Err(outside);
                }
                m1 * u0.sqrt() * (a * x.ln() - x * x / (2.0 * a))
            }
            PotentialSpec::QuadraticInverse { a, b } => {
                if x == 0.0 {
                    return Err(outside);
                }
                let x2 = x * x;
                let r = (a * x2 * x2 + b).sqrt();
                let sb = b.sqrt();
                0.5 * m1 * (r - sb * ((sb + r) / (a.sqrt() * x2)).ln())
            }
            PotentialSpec::Step { u0 } => {
                if x < 0.0 {
                    0.0
                } else {
                    m1 * u0.sqrt() * x
                }
            }
            PotentialSpec::Expression(_) => return Ok(None),
        };
        if q.is_finite() {
            Ok(Some(q))
        } else {
            Err(outside)
        }
    }

    /// Parses the `family:key=value,...` / `expr:<source>;domain=lo..hi`
    /// spec-string form.
    pub fn parse_spec(text: &str) -> Result<Self, PotentialError> {
        text.parse()
    }
}

fn spec_error(spec: &str, reason: impl Into<String>) -> PotentialError {
    PotentialError::SpecParse { spec: spec.to_string(), reason: reason.into() }
}

fn parse_bound(text: &str) -> Option<f64> {
    let t = text.trim().to_ascii_lowercase();
    match t.as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => t.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

fn parse_expression_spec(full: &str, body: &str) -> Result<PotentialSpec, PotentialError> {
    let (source, domain) = match body.rfind(';') {
        Some(idx) => {
            let (src, rest) = (&body[..idx], body[idx + 1..].trim());
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| spec_error(full, "expected `domain=<lo>..<hi>` after `;`"))?;
            if !key.trim().eq_ignore_ascii_case("domain") {
                return Err(spec_error(full, format!("unknown expression option `{}`", key.trim())));
            }
            let (lo, hi) = value
                .split_once("..")
                .ok_or_else(|| spec_error(full, "domain must be written `<lo>..<hi>`"))?;
            let lo = parse_bound(lo).ok_or_else(|| spec_error(full, format!("bad domain bound `{lo}`")))?;
            let hi = parse_bound(hi).ok_or_else(|| spec_error(full, format!("bad domain bound `{hi}`")))?;
            (src, Domain::from_bounds(lo, hi)?)
        }
        None => (body, Domain::full_line()),
    };
    Ok(PotentialSpec::Expression(ExpressionPotential::parse(source, domain)?))
}

impl FromStr for PotentialSpec {
    type Err = PotentialError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let (family, body) = text
            .split_once(':')
            .ok_or_else(|| spec_error(text, "expected `family:key=value,...`"))?;
        let family = family.trim().to_ascii_lowercase();
        if family == "expr" {
            return parse_expression_spec(text, body);
        }

        let mut params: Vec<(String, f64)> = Vec::new();
        for pair in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| spec_error(text, format!("expected key=value, found `{pair}`")))?;
            let key = k.trim().to_ascii_lowercase();
            let value = v
                .trim()
                .parse::<f64>()
                .map_err(|_| spec_error(text, format!("`{}` is not a decimal number", v.trim())))?;
            if params.iter().any(|(existing, _)| *existing == key) {
                return Err(spec_error(text, format!("duplicate key `{key}`")));
            }
            params.push((key, value));
        }

        let allowed: &[&str] = match family.as_str() {
            "isw" => &["l"],
            "sho" => &["omega"],
            "trig" | "parab" => &["u0", "a"],
            "vwell" | "step" => &["u0"],
            "axb" => &["a", "b"],
            other => return Err(spec_error(text, format!("unknown family `{other}`"))),
        };
        if let Some((bad, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(spec_error(text, format!("unknown key `{bad}` for family `{family}`")));
        }
        let get = |key: &str| {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| spec_error(text, format!("missing key `{key}`")))
        };
        let spec = match family.as_str() {
            "isw" => PotentialSpec::InfiniteSquareWell { width: get("l")? },
            "sho" => PotentialSpec::HarmonicOscillator { omega: get("omega")? },
            "trig" => PotentialSpec::TrigWell { u0: get("u0")?, a: get("a")? },
            "vwell" => PotentialSpec::VWell { u0: get("u0")? },
            "parab" => PotentialSpec::ParabolicWell { u0: get("u0")?, a: get("a")? },
            "axb" => PotentialSpec::QuadraticInverse { a: get("a")?, b: get("b")? },
            _ => PotentialSpec::Step { u0: get("u0")? },
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::InfiniteSquareWell { width } => write!(f, "isw:L={width}"),
            PotentialSpec::HarmonicOscillator { omega } => write!(f, "sho:omega={omega}"),
            PotentialSpec::TrigWell { u0, a } => write!(f, "trig:u0={u0},a={a}"),
            PotentialSpec::VWell { u0 } => write!(f, "vwell:u0={u0}"),
            PotentialSpec::ParabolicWell { u0, a } => write!(f, "parab:u0={u0},a={a}"),
            PotentialSpec::QuadraticInverse { a, b } => write!(f, "axb:a={a},b={b}"),
            PotentialSpec::Step { u0 } => write!(f, "step:u0={u0}"),
            PotentialSpec::Expression(e) => write!(
                f,
                "expr:{};domain={}..{}",
                e.source,
                fmt_bound(e.domain.lo),
                fmt_bound(e.domain.hi)
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const NATURAL: UnitSystem = UnitSystem { hbar: 1.0, mass: 1.0 };

    fn builtins(p: f64, q: f64) -> Vec<PotentialSpec> {
        vec![
            PotentialSpec::InfiniteSquareWell { width: p },
            PotentialSpec::HarmonicOscillator { omega: p },
            PotentialSpec::TrigWell { u0: p, a: q },
            PotentialSpec::VWell { u0: p },
            PotentialSpec::ParabolicWell { u0: p, a: q },
            PotentialSpec::QuadraticInverse { a: p, b: q },
        ]
    }

    #[test]
    fn evaluate_examples() {
        let sho = PotentialSpec::HarmonicOscillator { omega: 1.0 };
        assert_eq!(sho.evaluate(2.0, &NATURAL).unwrap(), 2.0);
        let v = PotentialSpec::VWell { u0: 1.0 };
        assert_eq!(v.evaluate(-3.0, &NATURAL).unwrap(), 3.0);
        let trig = PotentialSpec::TrigWell { u0: 1.0, a: 1.0 };
        let direct = 1.0 / (PI / 4.0).tan().powi(2);
        assert_eq!(trig.evaluate(0.25, &NATURAL).unwrap(), direct);
        assert!((direct - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evaluate_domain_errors() {
        let isw = PotentialSpec::InfiniteSquareWell { width: 1.0 };
        assert!(isw.evaluate(0.0, &NATURAL).is_err());
        assert!(isw.evaluate(1.5, &NATURAL).is_err());
        assert_eq!(isw.evaluate(0.5, &NATURAL).unwrap(), 0.0);
        let trig = PotentialSpec::TrigWell { u0: 1.0, a: 1.0 };
        assert!(trig.evaluate(0.0, &NATURAL).is_err());
        assert!(trig.evaluate(1.0, &NATURAL).is_err());
        let axb = PotentialSpec::QuadraticInverse { a: 1.0, b: 1.0 };
        assert!(axb.evaluate(0.0, &NATURAL).is_err());
        let parab = PotentialSpec::ParabolicWell { u0: 1.0, a: 1.0 };
        assert!(parab.evaluate(-1.0, &NATURAL).is_err());
        assert_eq!(parab.evaluate(1.0, &NATURAL).unwrap(), 0.0);
    }

    #[test]
    fn step_values() {
        let step = PotentialSpec::Step { u0: 2.0 };
        assert_eq!(step.evaluate(-1.0, &NATURAL).unwrap(), 0.0);
        assert_eq!(step.evaluate(0.0, &NATURAL).unwrap(), 2.0);
        assert_eq!(step.evaluate(5.0, &NATURAL).unwrap(), 2.0);
    }

    #[test]
    fn analytic_turning_point_examples() {
        let sho = PotentialSpec::HarmonicOscillator { omega: 1.0 };
        let tp = sho.analytic_turning_points(0.5, &NATURAL).unwrap().unwrap().primary();
        assert_eq!((tp.x1, tp.x2, tp.x0, tp.d), (-1.0, 1.0, 0.0, 2.0));

        let v = PotentialSpec::VWell { u0: 1.0 };
        let tp = v.analytic_turning_points(2.0, &NATURAL).unwrap().unwrap().primary();
        assert_eq!((tp.x1, tp.x2, tp.d), (-2.0, 2.0, 4.0));

        let trig = PotentialSpec::TrigWell { u0: 1.0, a: 1.0 };
        let tp = trig.analytic_turning_points(1.0, &NATURAL).unwrap().unwrap().primary();
        assert!((tp.x1 - 0.25).abs() < 1e-15);
        assert!((tp.x2 - 0.75).abs() < 1e-15);
        assert!((tp.d - 0.5).abs() < 1e-15);
        assert!((tp.x0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trig_turning_points_match_bisection_oracle() {
        use crate::numerics::{bisect, bracket_roots, NumericsError, Tolerances};
        let trig = PotentialSpec::TrigWell { u0: 1.0, a: 1.0 };
        let f = |x: f64| -> Result<f64, NumericsError> {
            let c = 1.0 / (PI * x).tan();
            Ok(1.0 - c * c)
        };
        let tol = Tolerances::default().machine_roots();
        let roots: Vec<f64> = bracket_roots(f, 1e-3, 1.0 - 1e-3, 512)
            .into_iter()
            .map(|b| bisect(f, b, &tol).unwrap())
            .collect();
        let tp = trig.analytic_turning_points(1.0, &NATURAL).unwrap().unwrap().primary();
        assert!((roots[0] - tp.x1).abs() < 1e-12);
        assert!((roots[1] - tp.x2).abs() < 1e-12);
    }

    #[test]
    fn quadratic_inverse_pairs_are_mirrored() {
        let axb = PotentialSpec::QuadraticInverse { a: 1.0, b: 1.0 };
        let e = 3.0;
        match axb.analytic_turning_points(e, &NATURAL).unwrap().unwrap() {
            TurningPointSet::Mirrored { positive, negative } => {
                assert_eq!(positive.x0, -negative.x0);
                assert_eq!(positive.d, negative.d);
                let d2 = e / 1.0 - 2.0 * (1.0f64 / 1.0).sqrt();
                assert!((positive.d * positive.d - d2).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert!(axb.analytic_turning_points(2.0, &NATURAL).is_err());
    }

    #[test]
    fn analytic_turning_point_errors() {
        let sho = PotentialSpec::HarmonicOscillator { omega: 1.0 };
        assert!(matches!(
            sho.analytic_turning_points(0.0, &NATURAL),
            Err(PotentialError::InvalidEnergy { .. })
        ));
        let step = PotentialSpec::Step { u0: 1.0 };
        assert_eq!(step.analytic_turning_points(1.0, &NATURAL).unwrap(), None);
        let e: PotentialSpec = "expr:x^2;domain=-1..1".parse().unwrap();
        assert_eq!(e.analytic_turning_points(0.5, &NATURAL).unwrap(), None);
    }

    #[test]
    fn analytic_q_examples() {
        let sho = PotentialSpec::HarmonicOscillator { omega: 1.0 };
        assert_eq!(sho.analytic_q(1.0, &NATURAL).unwrap(), Some(0.5));
        let v = PotentialSpec::VWell { u0: 1.0 };
        let q = v.analytic_q(1.0, &NATURAL).unwrap().unwrap();
        assert!((q - 2f64.sqrt() * 2.0 / 3.0).abs() < 1e-15);
        assert!((q - 0.942809).abs() < 1e-6);
        let isw = PotentialSpec::InfiniteSquareWell { width: 1.0 };
        for x in [0.1, 0.5, 0.9] {
            assert_eq!(isw.analytic_q(x, &NATURAL).unwrap(), Some(0.0));
        }
        let e: PotentialSpec = "expr:x;domain=0..1".parse().unwrap();
        assert_eq!(e.analytic_q(0.5, &NATURAL).unwrap(), None);
    }

    // Derivative of each printed Q against m1 * sqrt(U) by central differences,
    // on the side of the well where the printed antiderivative uses the
    // positive root.
    #[test]
    fn analytic_q_derivative_matches_root_of_potential() {
        let units = UnitSystem { hbar: 0.7, mass: 1.3 };
        let cases: Vec<(PotentialSpec, Vec<f64>)> = vec![
            (PotentialSpec::HarmonicOscillator { omega: 1.5 }, vec![0.2, 0.9, 2.0]),
            (PotentialSpec::TrigWell { u0: 1.2, a: 2.0 }, vec![0.3, 0.6, 0.9]),
            (PotentialSpec::VWell { u0: 0.8 }, vec![0.3, 1.1, 2.5]),
            (PotentialSpec::ParabolicWell { u0: 1.1, a: 1.5 }, vec![0.4, 0.8, 1.2]),
            (PotentialSpec::QuadraticInverse { a: 0.9, b: 1.4 }, vec![0.5, 1.0, 1.7]),
        ];
        for (spec, xs) in cases {
            for x in xs {
                let h = 1e-5;
                let q = |x| spec.analytic_q(x, &units).unwrap().unwrap();
                let slope = (q(x + h) - q(x - h)) / (2.0 * h);
                let want = units.m1() * spec.evaluate(x, &units).unwrap().sqrt();
                assert!((slope - want).abs() < 1e-6 * (1.0 + want), "{spec} at {x}: {slope} vs {want}");
            }
        }
    }

    #[test]
    fn spec_strings() {
        assert_eq!(
            "sho:omega=1".parse::<PotentialSpec>().unwrap(),
            PotentialSpec::HarmonicOscillator { omega: 1.0 }
        );
        assert_eq!(
            "ISW:L=2".parse::<PotentialSpec>().unwrap(),
            PotentialSpec::InfiniteSquareWell { width: 2.0 }
        );
        assert_eq!(
            "trig:U0=1, a=0.5".parse::<PotentialSpec>().unwrap(),
            PotentialSpec::TrigWell { u0: 1.0, a: 0.5 }
        );
        assert_eq!(
            "axb:b=2,a=1".parse::<PotentialSpec>().unwrap(),
            PotentialSpec::QuadraticInverse { a: 1.0, b: 2.0 }
        );
        let e: PotentialSpec = "expr:0.5*x^2;domain=-10..10".parse().unwrap();
        match &e {
            PotentialSpec::Expression(ep) => {
                assert_eq!(ep.domain, Domain::finite(-10.0, 10.0).unwrap());
                assert_eq!(ep.ast.eval(2.0).unwrap(), 2.0);
            }
            other => panic!("{other:?}"),
        }
        let half: PotentialSpec = "expr:x + 1/x;domain=0..inf".parse().unwrap();
        assert_eq!(half.domain().kind, DomainKind::HalfLinePositive);
        let full: PotentialSpec = "expr:x^2".parse().unwrap();
        assert_eq!(full.domain().kind, DomainKind::FullLine);
    }

    #[test]
    fn spec_string_errors() {
        for bad in [
            "sho",
            "sho:omega",
            "sho:omega=abc",
            "sho:omega=-1",
            "sho:omega=0",
            "sho:w=1",
            "sho:omega=1,omega=2",
            "foo:x=1",
            "trig:u0=1",
            "expr:x^2;domain=1..0",
            "expr:x^2;domain=-inf..3",
            "expr:x^2;range=0..1",
            "expr:2x;domain=0..1",
        ] {
            assert!(bad.parse::<PotentialSpec>().is_err(), "{bad}");
        }
        assert!(matches!(
            "expr:foo(x);domain=0..1".parse::<PotentialSpec>(),
            Err(PotentialError::Expr(ExprError::UnknownIdentifier { .. }))
        ));
    }

    #[test]
    fn display_reparses() {
        for spec in builtins(0.5, 2.0).into_iter().chain([
            PotentialSpec::Step { u0: 3.0 },
            "expr:abs(x);domain=-inf..inf".parse().unwrap(),
            "expr:cot(pi*x)^2;domain=0..1".parse().unwrap(),
        ]) {
            let again: PotentialSpec = spec.to_string().parse().unwrap();
            assert_eq!(again, spec);
        }
    }

    proptest! {
        #[test]
        fn analytic_turning_points_solve_e_equals_u(
            p in prop::sample::select(vec![0.5, 1.0, 2.0]),
            q in prop::sample::select(vec![0.5, 1.0, 2.0]),
            hbar in prop::sample::select(vec![0.5, 1.0, 2.0]),
            mass in prop::sample::select(vec![0.5, 1.0, 2.0]),
            factor in 1.01f64..50.0,
        ) {
            let units = UnitSystem { hbar, mass };
            for spec in builtins(p, q) {
                if matches!(spec, PotentialSpec::InfiniteSquareWell { .. }) {
                    continue;
                }
                let min = spec.analytic_minimum().unwrap();
                let e = if min > 0.0 { min * factor } else { 0.1 * factor };
                let set = spec.analytic_turning_points(e, &units).unwrap().unwrap();
                let mut pairs = vec![set.primary()];
                if let TurningPointSet::Mirrored { negative, .. } = set {
                    pairs.push(negative);
                }
                for tp in pairs {
                    prop_assert!(tp.x1 < tp.x2);
                    for x in [tp.x1, tp.x2] {
                        let u = spec.evaluate(x, &units).unwrap();
                        prop_assert!((u - e).abs() <= 1e-8 * (1.0 + e), "{} {} {}", spec, u, e);
                    }
                }
            }
        }

        #[test]
        fn analytic_q_monotone_right_of_center(x in 0.05f64..3.0, dx in 1e-3f64..0.5) {
            let units = NATURAL;
            for spec in [
                PotentialSpec::HarmonicOscillator { omega: 1.0 },
                PotentialSpec::VWell { u0: 1.0 },
                PotentialSpec::QuadraticInverse { a: 1.0, b: 1.0 },
            ] {
                let q0 = spec.analytic_q(x, &units).unwrap().unwrap();
                let q1 = spec.analytic_q(x + dx, &units).unwrap().unwrap();
                prop_assert!(q1 >= q0);
            }
        }

        #[test]
        fn evaluate_is_deterministic(x in 0.01f64..0.99) {
            for spec in builtins(1.0, 1.0) {
                let a = spec.evaluate(x, &NATURAL).unwrap();
                let b = spec.evaluate(x, &NATURAL).unwrap();
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
