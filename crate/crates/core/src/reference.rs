//! Standard bound states by Numerov integration, used as the comparator for
//! the turning-point energies.
//!
//! Each well is placed in a Dirichlet box: the hard walls of a finite domain,
//! or the turning points at a probe energy padded by `box_padding` widths on
//! soft sides. The solution with `psi = 0` at the left edge is swept to the
//! right edge, and by the oscillation theorem its number of sign changes
//! (the right edge included) counts the box eigenvalues below `E`. Level `n`
//! is the smallest energy where that count exceeds `n`, found by bisection.

use thiserror::Error;

use crate::numerics::Tolerances;
use crate::potential::{PotentialError, PotentialSpec, UnitSystem};
use crate::solver::{self, SolverError};

pub use crate::scattering::{standard_step_r, standard_step_t};

const RENORMALIZE_ABOVE: f64 = 1e150;
const RENORMALIZE_BY: f64 = 1e-150;
const MAX_TRIMS: usize = 8;
const STABLE_DECAY: f64 = 0.5;
const MAX_PROBE_ITERATIONS: usize = 8;
const MAX_DOUBLINGS: usize = 60;
const MAX_LEVEL_BISECTIONS: usize = 200;
/// Relative amplitude below which samples are ignored when counting nodes.
pub const NODE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReferenceError {
    #[error("invalid Numerov configuration: {0}")]
    InvalidConfig(String),
    #[error("no eigenvalue bracket found for level {n_index}")]
    ConvergenceFailure { n_index: usize },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumerovConfig {
    pub n_points: usize,
    pub box_padding: f64,
    /// Relative width at which the eigenvalue bisection stops.
    pub energy_tol: f64,
}

impl Default for NumerovConfig {
    fn default() -> Self {
        Self { n_points: 4001, box_padding: 5.0, energy_tol: 1e-9 }
    }
}

impl NumerovConfig {
    pub fn validate(&self) -> Result<(), ReferenceError> {
        if self.n_points < 101 || self.n_points.is_multiple_of(2) {
            return Err(ReferenceError::InvalidConfig(format!(
                "n_points must be odd and at least 101, got {}",
                self.n_points
            )));
        }
        if !(self.box_padding >= 0.0 && self.box_padding.is_finite()) {
            return Err(ReferenceError::InvalidConfig(format!(
                "box_padding must be non-negative, got {}",
                self.box_padding
            )));
        }
        if !(self.energy_tol > 0.0 && self.energy_tol < 1.0) {
            return Err(ReferenceError::InvalidConfig(format!(
                "energy_tol must lie in (0, 1), got {}",
                self.energy_tol
            )));
        }
        Ok(())
    }
}

/// Uniform grid of `n` points on `[lo, hi]`, both edges included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.hi
        } else {
            self.lo + self.step() * i as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceLevel {
    /// 0-based level index.
    pub n_index: usize,
    pub energy: f64,
    /// Interior sign changes of the matched eigenfunction.
    pub node_count: usize,
}

/// `U` on the interior points of a grid, so each energy costs one sweep.
struct Sampled {
    grid: Grid,
    u: Vec<f64>,
    c: f64,
    /// Grid index of a slope discontinuity of `U` and the size of the jump.
    kink: Option<(usize, f64)>,
}

// Points where U' jumps. Numerov drops to second order across a kink unless
// the missing term is added back at the grid point sitting on it.
fn slope_jumps(spec: &PotentialSpec) -> Vec<(f64, f64)> {
    match spec {
        PotentialSpec::VWell { u0 } => vec![(0.0, 2.0 * u0)],
        _ => Vec::new(),
    }
}

impl Sampled {
    fn new(spec: &PotentialSpec, grid: Grid, units: &UnitSystem) -> Result<Self, ReferenceError> {
        let mut u = vec![f64::NAN; grid.n];
        for (i, slot) in u.iter_mut().enumerate().take(grid.n - 1).skip(1) {
            *slot = spec.evaluate(grid.x(i), units)?;
        }
        let h = grid.step();
        let c = h * h * 2.0 * units.mass / (12.0 * units.hbar * units.hbar);
        let kink = slope_jumps(spec).into_iter().find_map(|(x, jump)| {
            let i = ((x - grid.lo) / h).round();
            let on_grid = i >= 1.0 && i <= (grid.n - 2) as f64 && (grid.x(i as usize) - x).abs() <= 1e-9 * h;
            on_grid.then_some((i as usize, jump))
        });
        Ok(Self { grid, u, c, kink })
    }

    fn factors(&self, energy: f64) -> Vec<f64> {
        self.u.iter().map(|u| 1.0 + self.c * (energy - u)).collect()
    }

    fn sweep_right(&self, energy: f64) -> Sweep {
        self.sweep(&self.factors(energy), self.grid.step(), 0)
    }

    fn count(&self, energy: f64) -> usize {
        self.sweep_right(energy).sign_changes
    }

    /// Sweeps `f`, whose first entry sits at grid index `start`; the sweep
    /// runs towards lower grid indices when `start` is the last index.
    fn sweep(&self, f: &[f64], h: f64, start: usize) -> Sweep {
        let kink = self.kink.and_then(|(i, jump)| {
            let local = if start == 0 { i } else { start.checked_sub(i)? };
            (local < f.len()).then_some((local, self.c * h * jump))
        });
        sweep(f, h, kink)
    }
}

struct Sweep {
    y: Vec<f64>,
    /// Sign changes over `y[1..]`, counted before any rescaling.
    sign_changes: usize,
}

// Three-term Numerov recurrence from y0 = 0, y1 = h. The factor at the far
// edge is never used: the last entry holds the numerator b - c, whose sign
// is that of the edge value. Growing solutions are rescaled as they go, which
// can flush early entries to zero, so sign changes are counted on the fly.
// `kink` adds `weight * y_i` at one index.
fn sweep(f: &[f64], h: f64, kink: Option<(usize, f64)>) -> Sweep {
    let n = f.len();
    let mut y = vec![0.0; n];
    y[1] = h;
    let mut sign_changes = 0;
    let mut last_negative = false;
    for i in 1..n - 1 {
        let mut b = (12.0 - 10.0 * f[i]) * y[i];
        if let Some((k, weight)) = kink {
            if k == i {
                b += weight * y[i];
            }
        }
        let c = if y[i - 1] == 0.0 { 0.0 } else { f[i - 1] * y[i - 1] };
        let next = if i + 1 == n - 1 { b - c } else { (b - c) / f[i + 1] };
        y[i + 1] = next;
        if next != 0.0 {
            let negative = next < 0.0;
            if negative != last_negative {
                sign_changes += 1;
            }
            last_negative = negative;
        }
        if next.abs() > RENORMALIZE_ABOVE {
            for v in &mut y[..=i + 1] {
                *v *= RENORMALIZE_BY;
            }
        }
    }
    Sweep { y, sign_changes }
}

fn sign_changes(y: &[f64], threshold: f64) -> usize {
    let mut count = 0;
    let mut prev: Option<bool> = None;
    for &v in y {
        if v == 0.0 || v.abs() < threshold {
            continue;
        }
        let negative = v < 0.0;
        if prev.is_some_and(|p| p != negative) {
            count += 1;
        }
        prev = Some(negative);
    }
    count
}

/// Numerov solution on `grid` with `psi(lo) = 0` and `psi'(lo) > 0`. The
/// potential is evaluated only at interior points; the last entry is the
/// unscaled edge value whose sign is that of `psi(hi)`. Not normalized.
pub fn numerov_integrate(
    spec: &PotentialSpec,
    energy: f64,
    grid: Grid,
    units: &UnitSystem,
) -> Result<Vec<f64>, ReferenceError> {
    if grid.n < 3 || !(grid.lo < grid.hi) {
        return Err(ReferenceError::InvalidConfig(format!("bad grid {grid:?}")));
    }
    Ok(Sampled::new(spec, grid, units)?.sweep_right(energy).y)
}

/// Dirichlet box for the well at a probe energy.
pub fn reference_box(
    spec: &PotentialSpec,
    probe_energy: f64,
    config: &NumerovConfig,
    units: &UnitSystem,
) -> Result<(f64, f64), ReferenceError> {
    let domain = spec.well_domain();
    let tp = solver::turning_points(spec, probe_energy, units, &Tolerances::default())?;
    let pad = config.box_padding * tp.d;
    Ok(((tp.x1 - pad).max(domain.lo), (tp.x2 + pad).min(domain.hi)))
}

// Pulls the box edges in past points where 1 + c(E - U) would go negative
// at the probe energy. The recurrence flips sign there and invents nodes,
// while the true solution is already negligible.
fn stable_sampling(spec: &PotentialSpec, mut grid: Grid, probe: f64, units: &UnitSystem) -> Result<Sampled, ReferenceError> {
    for _ in 0..MAX_TRIMS {
        let sampled = Sampled::new(spec, grid, units)?;
        let stable = |u: &f64| u.is_finite() && sampled.c * (u - probe) <= STABLE_DECAY;
        let (Some(first), Some(last)) = (sampled.u.iter().position(stable), sampled.u.iter().rposition(stable)) else {
            return Err(ReferenceError::InvalidConfig("no stable interior point in the shooting box".into()));
        };
        if first <= 1 && last >= grid.n - 2 {
            return Ok(sampled);
        }
        grid = Grid { lo: grid.x(first - 1), hi: grid.x(last + 1), n: grid.n };
    }
    Sampled::new(spec, grid, units)
}

fn eigenvalue(sampled: &Sampled, n_index: usize, floor: f64, start: f64, tol: f64) -> Result<f64, ReferenceError> {
    let fail = ReferenceError::ConvergenceFailure { n_index };
    let mut lo = floor;
    if sampled.count(lo) > n_index {
        return Err(fail);
    }
    let mut hi = start.max(floor + f64::MIN_POSITIVE);
    let mut doublings = 0;
    while sampled.count(hi) <= n_index {
        if doublings == MAX_DOUBLINGS {
            return Err(fail);
        }
        hi = floor + 2.0 * (hi - floor);
        doublings += 1;
    }
    for _ in 0..MAX_LEVEL_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if hi - lo <= tol * 0.5 * (lo.abs() + hi.abs()) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if sampled.count(mid) > n_index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(fail)
}

// Sign changes of the eigenfunction built from a left sweep and a right
// sweep, each stopped at the outermost classically allowed point so that
// neither runs into the tail where it would grow.
fn eigenfunction_nodes(sampled: &Sampled, energy: f64) -> usize {
    let n = sampled.grid.n;
    let h = sampled.grid.step();
    let m = (1..n - 1)
        .rev()
        .find(|&i| sampled.u[i] < energy)
        .unwrap_or(n / 2)
        .clamp(2, n - 3);
    let f = sampled.factors(energy);
    let left = sampled.sweep(&f[..=m + 1], h, 0).y;
    let mut reversed = f[m - 1..].to_vec();
    reversed.reverse();
    let mut right = sampled.sweep(&reversed, h, n - 1).y;
    right.reverse();
    // right[j] sits at grid index m - 1 + j
    let joined: Vec<f64> = if right[1] != 0.0 {
        let scale = left[m] / right[1];
        left[..m].iter().copied().chain(right[1..].iter().map(|v| v * scale)).collect()
    } else {
        left[..=m].to_vec()
    };
    let peak = joined.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    sign_changes(&joined[1..], NODE_THRESHOLD * peak)
}

/// The lowest `n_max` standard eigenvalues of the well.
pub fn shoot_bound_states(
    spec: &PotentialSpec,
    n_max: usize,
    config: &NumerovConfig,
    units: &UnitSystem,
) -> Result<Vec<ReferenceLevel>, ReferenceError> {
    config.validate()?;
    if !spec.is_well() {
        return Err(SolverError::NotAWell { family: spec.family() }.into());
    }
    let (u_min, scale) = solver::energy_window(spec, units)?;
    let mut probe = u_min + 2.0 * scale * n_max.max(1) as f64;
    for _ in 0..MAX_PROBE_ITERATIONS {
        let (lo, hi) = reference_box(spec, probe, config, units)?;
        let sampled = stable_sampling(spec, Grid { lo, hi, n: config.n_points }, probe, units)?;
        let floor = sampled.u.iter().copied().filter(|u| u.is_finite()).fold(f64::INFINITY, f64::min);
        let mut levels = Vec::with_capacity(n_max);
        let mut start = probe;
        for n_index in 0..n_max {
            let energy = eigenvalue(&sampled, n_index, floor, start, config.energy_tol)?;
            let node_count = eigenfunction_nodes(&sampled, energy);
            levels.push(ReferenceLevel { n_index, energy, node_count });
            start = start.max(energy);
        }
        // a probe far above the levels wastes the grid on empty tails
        match levels.last() {
            Some(top) if top.energy > probe || top.energy - u_min < (probe - u_min) / 8.0 => {
                probe = u_min + 2.0 * (top.energy - u_min)
            }
            _ => return Ok(levels),
        }
    }
    Err(ReferenceError::ConvergenceFailure { n_index: n_max.saturating_sub(1) })
}
