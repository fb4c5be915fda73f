//! Scalar root bracketing, bisection, adaptive Simpson quadrature and the
//! self-consistent energy-equation solver.
//!
//! Every routine takes a fallible closure `FnMut(f64) -> Result<f64, E>`
//! where the caller's error type absorbs [`NumericsError`]. Non-finite
//! values returned as `Ok` are treated the same as evaluation failures.

use thiserror::Error;

/// Maximum number of halvings performed by [`bisect`].
pub const MAX_BISECTIONS: usize = 200;

/// Initial uniform grid used by turning-point scans.
pub const DEFAULT_GRID: usize = 256;

/// Largest grid tried by turning-point scans before giving up.
pub const MAX_GRID: usize = 4096;

/// Upward range expansions allowed in [`solve_self_consistent`].
pub const MAX_RANGE_EXPANSIONS: usize = 12;

const MIN_SIMPSON_DEPTH: usize = 3;
const MAX_SHRINK_STEPS: usize = 1000;
const MAX_QUAD_EVALUATIONS: usize = 2_000_000;
// Panels used to estimate the magnitude of an integral before refining.
const SCALE_SAMPLES: usize = 16;

// Closest approach to a singular endpoint; keeps panel widths normal.
const MIN_SINGULAR_OFFSET: f64 = 1e-290;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("no sign change found on [{lo}, {hi}]")]
    NoBracketFound { lo: f64, hi: f64 },
    #[error("bisection did not reach tolerance after {iterations} halvings")]
    MaxIterationsExceeded { iterations: usize },
    #[error("quadrature did not converge on [{a}, {b}]")]
    QuadratureDivergence { a: f64, b: f64 },
    #[error("self-consistent solve did not converge on [{lo}, {hi}]")]
    ConvergenceFailure { lo: f64, hi: f64 },
    #[error("function not evaluable at x = {x}")]
    NotEvaluable { x: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub root_abs: f64,
    pub root_rel: f64,
    pub quad_rel: f64,
    pub quad_max_depth: usize,
    pub energy_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_abs: 1e-12,
            root_rel: 1e-10,
            quad_rel: 1e-10,
            quad_max_depth: 60,
            energy_rel: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), NumericsError> {
        let positive = [
            ("root_abs", self.root_abs),
            ("root_rel", self.root_rel),
            ("quad_rel", self.quad_rel),
            ("energy_rel", self.energy_rel),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(NumericsError::InvalidTolerances(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.quad_max_depth < 10 {
            return Err(NumericsError::InvalidTolerances(format!(
                "quad_max_depth must be at least 10, got {}",
                self.quad_max_depth
            )));
        }
        Ok(())
    }

    /// Same tolerances with root finding pushed to the resolution of f64.
    pub fn machine_roots(&self) -> Self {
        Self {
            root_abs: self.root_abs.min(1e-300),
            root_rel: self.root_rel.min(4.0 * f64::EPSILON),
            ..*self
        }
    }
}

/// A sign-change interval of a scalar function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Option<Self> {
        let valid = lo < hi
            && f_lo.is_finite()
            && f_hi.is_finite()
            && is_negative(f_lo) != is_negative(f_hi);
        valid.then_some(Self { lo, hi, f_lo, f_hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

// Zero counts as non-negative, so a root sitting on a grid node is
// bracketed by the adjacent interval where the sign actually flips.
fn is_negative(v: f64) -> bool {
    v < 0.0
}

fn finite<E>(value: Result<f64, E>) -> Option<f64> {
    value.ok().filter(|v| v.is_finite())
}

/// Scans `n_grid` uniformly spaced points on `[lo, hi]` and returns every
/// interval between adjacent evaluable points where `f` changes sign.
/// Points where `f` fails are skipped and split the scan.
pub fn bracket_roots<F, E>(mut f: F, lo: f64, hi: f64, n_grid: usize) -> Vec<Bracket>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut out = Vec::new();
    if !(lo < hi) || n_grid < 2 || !lo.is_finite() || !hi.is_finite() {
        return out;
    }
    let step = (hi - lo) / (n_grid - 1) as f64;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..n_grid {
        let x = if i == n_grid - 1 { hi } else { lo + step * i as f64 };
        match finite(f(x)) {
            Some(fx) => {
                if let Some((px, pf)) = prev {
                    if let Some(b) = Bracket::new(px, x, pf, fx) {
                        out.push(b);
                    }
                }
                prev = Some((x, fx));
            }
            None => prev = None,
        }
    }
    out
}

/// Bisects `bracket` until its width is at most
/// `root_abs + root_rel * |root|` or the interval can no longer be split.
pub fn bisect<F, E>(mut f: F, bracket: Bracket, tol: &Tolerances) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        f_hi,
    } = bracket;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if hi - lo <= tol.root_abs + tol.root_rel * mid.abs() || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = finite(f(mid)).ok_or(NumericsError::NotEvaluable { x: mid })?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if is_negative(fm) == is_negative(f_lo) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Err(NumericsError::MaxIterationsExceeded {
        iterations: MAX_BISECTIONS,
    }
    .into())
}

/// One Simpson panel on `[a, b]`; exact for cubics.
pub fn simpson_rule<F>(mut f: F, a: f64, b: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

struct Budget {
    left: usize,
}

fn adaptive<F, E>(
    f: &mut F,
    p: Panel,
    eps: f64,
    depth: usize,
    tol: &Tolerances,
    budget: &mut Budget,
) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let Panel { a, b, fa, fm, fb, whole } = p;
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    if !(a < lm && lm < m && m < rm && rm < b) {
        return Ok(whole);
    }
    if budget.left < 2 {
        return Err(NumericsError::QuadratureDivergence { a, b }.into());
    }
    budget.left -= 2;
    let flm = eval_interior(f, lm)?;
    let frm = eval_interior(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MIN_SIMPSON_DEPTH && delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= tol.quad_max_depth {
        return Err(NumericsError::QuadratureDivergence { a, b }.into());
    }
    let l = adaptive(
        f,
        Panel { a, b: m, fa, fm: flm, fb: fm, whole: left },
        0.5 * eps,
        depth + 1,
        tol,
        budget,
    )?;
    let r = adaptive(
        f,
        Panel { a: m, b, fa: fm, fm: frm, fb, whole: right },
        0.5 * eps,
        depth + 1,
        tol,
        budget,
    )?;
    Ok(l + r)
}

fn eval_interior<F, E>(f: &mut F, x: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericsError::NotEvaluable { x }.into())
    }
}

// Adaptive Simpson on an interval whose endpoints are both evaluable. The
// error target is quad_rel times the larger of the panel's own magnitude
// and `reference`.
fn integrate_regular<F, E>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    reference: f64,
    tol: &Tolerances,
) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let m = 0.5 * (a + b);
    let fm = eval_interior(f, m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // a, m and b alone can all sit on zeros of f
    let mut abs_sum = 0.5 * (fa.abs() + fb.abs());
    for i in 1..SCALE_SAMPLES {
        let x = a + (b - a) * (i as f64 / SCALE_SAMPLES as f64);
        abs_sum += eval_interior(f, x)?.abs();
    }
    let abs_whole = (b - a) * abs_sum / SCALE_SAMPLES as f64;
    let scale = whole.abs().max(abs_whole).max(reference);
    let eps = tol.quad_rel * scale;
    let mut budget = Budget { left: MAX_QUAD_EVALUATIONS };
    adaptive(f, Panel { a, b, fa, fm, fb, whole }, eps, 0, tol, &mut budget)
}

// Integrates towards an endpoint where `f` cannot be evaluated, in pieces
// that halve in width, until a piece contributes below quad_rel of the sum.
// When the pieces can no longer shrink (f64 resolution next to a nonzero
// endpoint), the tail is accepted if the last piece is below sqrt(quad_rel).
fn integrate_toward_singularity<F, E>(
    f: &mut F,
    singular: f64,
    other: f64,
    f_other: f64,
    tol: &Tolerances,
) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let mut outer = other;
    let mut f_outer = f_other;
    let mut sum = 0.0f64;
    let mut last = f64::INFINITY;
    for _ in 0..MAX_SHRINK_STEPS {
        let inner = singular + 0.5 * (outer - singular);
        if inner == singular || inner == outer || (inner - singular).abs() < MIN_SINGULAR_OFFSET {
            if last.abs() <= tol.quad_rel.sqrt() * sum.abs() {
                return Ok(sum);
            }
            break;
        }
        let f_inner = eval_interior(f, inner)?;
        let (lo, hi, flo, fhi) = if inner < outer {
            (inner, outer, f_inner, f_outer)
        } else {
            (outer, inner, f_outer, f_inner)
        };
        // pieces near the endpoint are judged against the running sum, or
        // rounding noise in f would keep them from converging
        let piece = integrate_regular(f, lo, hi, flo, fhi, sum.abs(), tol)?;
        sum += piece;
        last = piece;
        if piece.abs() <= tol.quad_rel * sum.abs() {
            return Ok(sum);
        }
        outer = inner;
        f_outer = f_inner;
    }
    let (a, b) = if singular < other {
        (singular, other)
    } else {
        (other, singular)
    };
    Err(NumericsError::QuadratureDivergence { a, b }.into())
}

/// Integrates `f` over `[a, b]` by adaptive Simpson to relative accuracy
/// `quad_rel`. An endpoint where `f` fails or is non-finite is treated as an
/// integrable singularity and approached geometrically.
pub fn integrate<F, E>(mut f: F, a: f64, b: f64, tol: &Tolerances) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(NumericsError::InvalidInterval { lo: a, hi: b }.into());
    }
    let fa = finite(f(a));
    let fb = finite(f(b));
    match (fa, fb) {
        (Some(fa), Some(fb)) => integrate_regular(&mut f, a, b, fa, fb, 0.0, tol),
        _ => {
            let m = 0.5 * (a + b);
            let fm = eval_interior(&mut f, m)?;
            let left = match fa {
                Some(fa) => integrate_regular(&mut f, a, m, fa, fm, 0.0, tol)?,
                None => integrate_toward_singularity(&mut f, a, m, fm, tol)?,
            };
            let right = match fb {
                Some(fb) => integrate_regular(&mut f, m, b, fm, fb, 0.0, tol)?,
                None => integrate_toward_singularity(&mut f, b, m, fm, tol)?,
            };
            Ok(left + right)
        }
    }
}

/// Solves `g(E) = 0` where `g(E) = E - rhs(E)` is increasing, by
/// bracketing on `[e_lo, e_hi]` (widening the bracket tenfold up to
/// [`MAX_RANGE_EXPANSIONS`] times) followed by bisection down to the
/// resolution of f64. The returned value satisfies
/// `|g(E*)| <= energy_rel * (1 + |E*|)`; otherwise the solve fails.
pub fn solve_self_consistent<G, E>(mut g: G, e_lo: f64, e_hi: f64, tol: &Tolerances) -> Result<f64, E>
where
    G: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    if !(e_lo < e_hi) || !e_lo.is_finite() || !e_hi.is_finite() {
        return Err(NumericsError::InvalidInterval { lo: e_lo, hi: e_hi }.into());
    }
    let accept = |e: f64, ge: f64| ge.abs() <= tol.energy_rel * (1.0 + e.abs());

    let mut lo = e_lo;
    let mut g_lo = g(lo)?;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    let mut hi = e_hi;
    let mut g_hi = g(hi)?;
    let mut expansions = 0;
    while is_negative(g_lo) == is_negative(g_hi) || g_lo.is_nan() || g_hi.is_nan() {
        if expansions == MAX_RANGE_EXPANSIONS || g_lo > 0.0 || !hi.is_finite() {
            return Err(NumericsError::ConvergenceFailure { lo: e_lo, hi }.into());
        }
        lo = hi;
        g_lo = g_hi;
        hi = e_lo + 10.0 * (hi - e_lo);
        g_hi = g(hi)?;
        expansions += 1;
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }

    for _ in 0..4 * MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if gm.is_nan() {
            return Err(NumericsError::NotEvaluable { x: mid }.into());
        }
        if gm == 0.0 {
            return Ok(mid);
        }
        if is_negative(gm) == is_negative(g_lo) {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
            g_hi = gm;
        }
    }
    let best = if g_lo.abs() <= g_hi.abs() { (lo, g_lo) } else { (hi, g_hi) };
    if accept(best.0, best.1) {
        Ok(best.0)
    } else {
        Err(NumericsError::ConvergenceFailure { lo, hi }.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type R = Result<f64, NumericsError>;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn default_tolerances_are_valid() {
        tol().validate().unwrap();
        let bad = Tolerances { quad_max_depth: 5, ..tol() };
        assert!(bad.validate().is_err());
        let bad = Tolerances { energy_rel: 0.0, ..tol() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn bracket_sqrt_two() {
        let b = bracket_roots(|x| -> R { Ok(x * x - 2.0) }, 0.0, 2.0, 64);
        assert_eq!(b.len(), 1);
        assert!(b[0].lo < 2f64.sqrt() && 2f64.sqrt() < b[0].hi);
    }

    #[test]
    fn bracket_cot_squared_well() {
        // U0 = a = E = 1: roots of cot^2(pi x) = 1 at x = 1/4 and 3/4
        let f = |x: f64| -> R {
            let c = 1.0 / (std::f64::consts::PI * x).tan();
            Ok(c * c - 1.0)
        };
        let b = bracket_roots(f, 0.01, 0.99, 256);
        assert_eq!(b.len(), 2);
        assert!(b[0].lo < 0.25 && 0.25 < b[0].hi);
        assert!(b[1].lo < 0.75 && 0.75 < b[1].hi);
        assert!(b[0].lo < b[1].lo);
    }

    #[test]
    fn bracket_constant_is_empty() {
        assert!(bracket_roots(|_| -> R { Ok(1.0) }, 0.0, 1.0, 16).is_empty());
    }

    #[test]
    fn bracket_skips_error_points() {
        // 1/x changes sign across the pole but the pole splits the scan
        let f = |x: f64| -> R {
            if x == 0.0 {
                Err(NumericsError::NotEvaluable { x })
            } else {
                Ok(1.0 / x)
            }
        };
        assert!(bracket_roots(f, -1.0, 1.0, 3).is_empty());
        // a root on a grid node is still reported
        let b = bracket_roots(|x| -> R { Ok(x) }, -1.0, 1.0, 3);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].f_hi, 0.0);
    }

    #[test]
    fn bisect_sqrt_two() {
        let f = |x: f64| -> R { Ok(x * x - 2.0) };
        let b = Bracket::new(1.0, 2.0, -1.0, 2.0).unwrap();
        let r = bisect(f, b, &tol()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn bisect_linear() {
        let b = Bracket::new(0.0, 1.0, -0.25, 0.75).unwrap();
        let r = bisect(|x| -> R { Ok(x - 0.25) }, b, &tol()).unwrap();
        assert!((r - 0.25).abs() <= 1e-12 + 1e-10 * 0.25);
    }

    #[test]
    fn bisect_oscillator_turning_point() {
        // E - U(x) for U = x^2/2, E = 0.5
        let f = |x: f64| -> R { Ok(0.5 - 0.5 * x * x) };
        let b = Bracket::new(0.0, 2.0, 0.5, -1.5).unwrap();
        let r = bisect(f, b, &tol()).unwrap();
        assert!((r - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bisect_reports_unevaluable_midpoint() {
        let b = Bracket::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let f = |x: f64| -> R {
            if x == 0.0 {
                Err(NumericsError::NotEvaluable { x })
            } else {
                Ok(x)
            }
        };
        assert!(bisect(f, b, &tol()).is_err());
    }

    #[test]
    fn invalid_bracket_rejected() {
        assert!(Bracket::new(1.0, 0.0, -1.0, 1.0).is_none());
        assert!(Bracket::new(0.0, 1.0, 1.0, 2.0).is_none());
        assert!(Bracket::new(0.0, 1.0, f64::NAN, 2.0).is_none());
    }

    #[test]
    fn integrate_polynomials() {
        let v: f64 = integrate(|x| -> R { Ok(x * x) }, 0.0, 1.0, &tol()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-10);
        // S-integral of the unit oscillator between its turning points at E = 1/2
        let s: f64 = integrate(|x| -> R { Ok(0.5 * x * x) }, -1.0, 1.0, &tol()).unwrap();
        let oracle = |x: f64| x.powi(3) / 6.0;
        assert!((s - (oracle(1.0) - oracle(-1.0))).abs() < 1e-10);
    }

    #[test]
    fn integrate_endpoint_singularity() {
        let f = |x: f64| -> R {
            if x <= 0.0 {
                Err(NumericsError::NotEvaluable { x })
            } else {
                Ok(x.powf(-0.5))
            }
        };
        let v = integrate(f, 0.0, 1.0, &tol()).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "{v}");
        // infinite values at both ends: 1/sqrt(x(1-x)) integrates to pi
        let g = |x: f64| -> R { Ok(1.0 / (x * (1.0 - x)).sqrt()) };
        let v = integrate(g, 0.0, 1.0, &tol()).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-6, "{v}");
    }

    #[test]
    fn integrate_non_integrable_diverges() {
        let f = |x: f64| -> R { Ok(1.0 / x) };
        let err = integrate(f, 0.0, 1.0, &tol()).unwrap_err();
        assert!(matches!(err, NumericsError::QuadratureDivergence { .. }), "{err:?}");
    }

    #[test]
    fn integrate_interior_pole_is_an_error() {
        let f = |x: f64| -> R {
            if x == 0.0 {
                Err(NumericsError::NotEvaluable { x })
            } else {
                Ok(1.0)
            }
        };
        assert!(integrate(f, -1.0, 1.0, &tol()).is_err());
    }

    #[test]
    fn integrate_rejects_bad_interval() {
        assert!(integrate(|x| -> R { Ok(x) }, 1.0, 1.0, &tol()).is_err());
    }

    #[test]
    fn integrate_oscillatory() {
        let v = integrate(|x: f64| -> R { Ok((9.0 * x).cos().powi(2)) }, 0.0, std::f64::consts::PI, &tol()).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-9, "{v}");
    }

    #[test]
    fn simpson_panel_exact_on_cubic() {
        let p = |x: f64| 2.0 * x * x * x - 3.0 * x * x + 0.5 * x + 1.0;
        let exact = |x: f64| 0.5 * x.powi(4) - x.powi(3) + 0.25 * x * x + x;
        let (a, b) = (-1.0, 2.0);
        let v = simpson_rule(p, a, b);
        let want = exact(b) - exact(a);
        let scale = 3.0 * 13.0; // (b - a) * max|p|
        assert!((v - want).abs() <= f64::EPSILON * scale, "{v} vs {want}");
    }

    #[test]
    fn self_consistent_linear() {
        let t = tol();
        let e = solve_self_consistent(|e| -> R { Ok(e - 0.5) }, 0.01, 10.0, &t).unwrap();
        assert!((e - 0.5).abs() <= t.energy_rel * (1.0 + e));
        // bisection runs to f64 resolution, not merely to the residual bound
        assert!((e - 0.5).abs() < 1e-15);
    }

    #[test]
    fn self_consistent_quadratic_root() {
        // E^2 - 2 sqrt(ab) E - 2 a hbar^2 / m with a = b = hbar = m = 1
        let g = |e: f64| -> R { Ok(e * e - 2.0 * e - 2.0) };
        let e = solve_self_consistent(g, 0.01, 10.0, &tol()).unwrap();
        assert!((e - (1.0 + 3f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn self_consistent_expands_upward() {
        let g = |e: f64| -> R { Ok(e - 5000.0) };
        let e = solve_self_consistent(g, 1.0, 2.0, &tol()).unwrap();
        assert!((e - 5000.0).abs() < 1e-6);
        let never = |_e: f64| -> R { Ok(-1.0) };
        let err = solve_self_consistent(never, 1.0, 2.0, &tol()).unwrap_err();
        assert!(matches!(err, NumericsError::ConvergenceFailure { .. }));
    }

    #[test]
    fn self_consistent_handles_negative_infinity() {
        let g = |e: f64| -> R { Ok(if e < 1.0 { f64::NEG_INFINITY } else { e - 3.0 }) };
        let e = solve_self_consistent(g, 0.1, 10.0, &tol()).unwrap();
        assert!((e - 3.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn integrate_is_additive(c0 in -5f64..5.0, c1 in -5f64..5.0, c2 in -5f64..5.0, c3 in -5f64..5.0, c4 in -5f64..5.0,
                                 a in -3f64..-1.0, b in -0.9f64..0.9, c in 1.0f64..3.0) {
            let p = |x: f64| -> R { Ok(c0 + x * (c1 + x * (c2 + x * (c3 + x * c4)))) };
            let t = tol();
            let ab = integrate(p, a, b, &t).unwrap();
            let bc = integrate(p, b, c, &t).unwrap();
            let ac = integrate(p, a, c, &t).unwrap();
            let abs_scale = integrate(|x| p(x).map(f64::abs), a, c, &t).unwrap();
            prop_assert!((ab + bc - ac).abs() <= 2.0 * t.quad_rel * abs_scale.max(ac.abs()) + 1e-13);
        }

        #[test]
        fn bisect_stays_in_bracket(root in -10f64..10.0, w1 in 0.01f64..5.0, w2 in 0.01f64..5.0) {
            let f = |x: f64| -> R { Ok((x - root).powi(3)) };
            let (lo, hi) = (root - w1, root + w2);
            let b = Bracket::new(lo, hi, f(lo).unwrap(), f(hi).unwrap()).unwrap();
            let t = tol();
            let r = bisect(f, b, &t).unwrap();
            prop_assert!(lo <= r && r <= hi);
            let w = t.root_abs + t.root_rel * r.abs();
            prop_assert!(f(r - w).unwrap() <= 0.0 && f(r + w).unwrap() >= 0.0);
        }
    }
}
