//! Forward solvers for the mean exit time `u` and escape probability `P_E`
//! of `dX = f(X) dt + sqrt(d) dB + ε dL^α` from a bounded interval `D`.
//!
//! Both satisfy nonlocal boundary-value problems with data prescribed on the
//! whole exterior of `D`:
//!
//! ```text
//! A u = -1 in D,  u = 0 on D^c
//! A P = 0  in D,  P = 1 on E, P = 0 on D^c \ E
//! ```
//!
//! Every problem is mapped affinely onto the canonical interval (-1, 1) and
//! discretized there on a uniform grid with `h = 1/J`.

mod assembly;

use crate::drift::{BoundDrift, DriftExpr, ParamEnv};
use crate::error::{Error, Result};
use crate::linalg::{solve_linear, LinearMethod, LinearSystem};
use crate::special::{stable_intensity_constant, StabilityIndex};

pub use assembly::{assemble_ep_system, assemble_met_system};

/// Tolerance used when checking the range of solved profiles.
pub const PROFILE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub alpha: StabilityIndex,
    /// Noise intensity, a linear factor on the jump integral.
    pub epsilon: f64,
    /// Gaussian diffusion coefficient; the generator carries `d/2 · u''`.
    pub d: f64,
    /// Values for the named parameters of the drift.
    pub drift_env: ParamEnv,
}

impl SystemParams {
    pub fn new(alpha: f64, epsilon: f64, d: f64, drift_env: ParamEnv) -> Result<Self> {
        let alpha = StabilityIndex::new(alpha)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!("d must be non-negative, got {d}")));
        }
        Ok(Self { alpha, epsilon, d, drift_env })
    }
}

/// The open interval `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
}

impl Domain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Self { a, b })
        } else {
            Err(Error::InvalidParameter(format!("domain ({a}, {b}) must be finite with a < b")))
        }
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    /// z = (2x − a − b) / (b − a)
    pub fn to_canonical(&self, x: f64) -> f64 {
        (x - self.center()) / self.radius()
    }

    pub fn from_canonical(&self, z: f64) -> f64 {
        self.center() + self.radius() * z
    }
}

/// Uniform grid on canonical `[-2, 2]` with `4J` subintervals; nodes
/// `z_j = j h`, `h = 1/J`. Unknowns live at `|j| < J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub j: usize,
    pub h: f64,
    pub domain: Domain,
}

impl Grid {
    pub fn new(domain: Domain, j: usize) -> Result<Self> {
        if j < 2 {
            return Err(Error::InvalidParameter(format!("grid parameter J must be at least 2, got {j}")));
        }
        Ok(Self { j, h: 1.0 / j as f64, domain })
    }

    /// Number of interior unknowns, `2J − 1`.
    pub fn n_interior(&self) -> usize {
        2 * self.j - 1
    }

    /// Canonical coordinate of node `index` (−2J ≤ index ≤ 2J).
    pub fn node(&self, index: i64) -> f64 {
        index as f64 * self.h
    }

    /// Canonical coordinates of the interior nodes, left to right.
    pub fn interior_nodes(&self) -> Vec<f64> {
        let j = self.j as i64;
        (-j + 1..j).map(|k| self.node(k)).collect()
    }

    /// All `4J + 1` canonical nodes of the doubled interval.
    pub fn all_nodes(&self) -> Vec<f64> {
        let j = self.j as i64;
        (-2 * j..=2 * j).map(|k| self.node(k)).collect()
    }

    /// Interior nodes in original coordinates.
    pub fn interior_points(&self) -> Vec<f64> {
        self.interior_nodes().into_iter().map(|z| self.domain.from_canonical(z)).collect()
    }
}

pub fn build_grid(domain: Domain, j: usize) -> Result<Grid> {
    Grid::new(domain, j)
}

/// The problem transported to (-1, 1) by `x = c + r z`:
/// `d' = d / r²`, `f'(z) = f(c + r z) / r`, `ε' = ε / r^α`.
#[derive(Debug, Clone)]
pub struct CanonicalProblem {
    pub alpha: StabilityIndex,
    pub epsilon: f64,
    pub d: f64,
    pub center: f64,
    pub radius: f64,
    drift: BoundDrift,
}

impl CanonicalProblem {
    /// Canonical drift `f(c + r z) / r`.
    #[inline]
    pub fn drift_at(&self, z: f64) -> f64 {
        self.drift.eval(self.center + self.radius * z) / self.radius
    }

    /// `ε' C_α`, the weight of the canonical jump integral.
    pub fn jump_weight(&self) -> f64 {
        self.epsilon * stable_intensity_constant(self.alpha)
    }
}

pub fn canonicalize_params(params: &SystemParams, drift: &DriftExpr, domain: &Domain) -> Result<CanonicalProblem> {
    let r = domain.radius();
    Ok(CanonicalProblem {
        alpha: params.alpha,
        epsilon: params.epsilon / r.powf(params.alpha.value()),
        d: params.d / (r * r),
        center: domain.center(),
        radius: r,
        drift: drift.bind(&params.drift_env)?,
    })
}

/// Target set `E ⊂ D^c` as a union of intervals, possibly unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    intervals: Vec<(f64, f64)>,
}

impl TargetSet {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidParameter("target set is empty".into()));
        }
        for &(lo, hi) in &intervals {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::InvalidParameter(format!("target interval ({lo}, {hi}) is empty")));
            }
        }
        Ok(Self { intervals })
    }

    /// `(b, ∞)`
    pub fn right(domain: &Domain) -> Self {
        Self { intervals: vec![(domain.b, f64::INFINITY)] }
    }

    /// `(−∞, a)`
    pub fn left(domain: &Domain) -> Self {
        Self { intervals: vec![(f64::NEG_INFINITY, domain.a)] }
    }

    /// The whole complement `D^c`.
    pub fn both(domain: &Domain) -> Self {
        Self { intervals: vec![(f64::NEG_INFINITY, domain.a), (domain.b, f64::INFINITY)] }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Checks that every component lies in the exterior of `domain`.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        for &(lo, hi) in &self.intervals {
            if !(hi <= domain.a || lo >= domain.b) {
                return Err(Error::InvalidParameter(format!(
                    "target interval ({lo}, {hi}) overlaps the domain ({}, {})",
                    domain.a, domain.b
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| x > lo && x < hi)
    }

    /// Complement of this set within `D^c`.
    pub fn complement(&self, domain: &Domain) -> Result<Self> {
        let mut cuts = Vec::new();
        for (lo, hi) in [(f64::NEG_INFINITY, domain.a), (domain.b, f64::INFINITY)] {
            let mut pieces: Vec<(f64, f64)> = self
                .intervals
                .iter()
                .filter(|&&(l, h)| h > lo && l < hi)
                .map(|&(l, h)| (l.max(lo), h.min(hi)))
                .collect();
            pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut cursor = lo;
            for (l, h) in pieces {
                if l > cursor {
                    cuts.push((cursor, l));
                }
                cursor = cursor.max(h);
            }
            if cursor < hi {
                cuts.push((cursor, hi));
            }
        }
        Self::new(cuts)
    }

    pub(crate) fn to_canonical(&self, domain: &Domain) -> Vec<(f64, f64)> {
        let map = |v: f64| if v.is_infinite() { v } else { domain.to_canonical(v) };
        self.intervals.iter().map(|&(lo, hi)| (map(lo), map(hi))).collect()
    }
}

/// Jump intensity from `x` into `interval`:
/// `ε C_α ∫_{x+y ∈ interval} |y|^{-1-α} dy`, in closed form.
pub fn exterior_mass(x: f64, interval: (f64, f64), alpha: StabilityIndex, epsilon: f64) -> Result<f64> {
    let (lo, hi) = interval;
    let a = alpha.value();
    let scale = epsilon * stable_intensity_constant(alpha) / a;
    let tail = |dist: f64| if dist.is_infinite() { 0.0 } else { dist.powf(-a) };
    if lo > x {
        Ok(scale * (tail(lo - x) - tail(hi - x)))
    } else if hi < x {
        Ok(scale * (tail(x - hi) - tail(x - lo)))
    } else {
        Err(Error::Domain { function: "exterior_mass", value: x })
    }
}

/// Discretization of the jump integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Compensated near-field sum plus uncompensated far-field sum, with the
    /// cut at the distance to the nearer boundary.
    Split,
    /// Single principal-value punched-hole sum.
    #[default]
    Simplified,
}

/// Grid resolution, scheme and linear solver for a forward solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub grid: usize,
    pub scheme: Scheme,
    pub method: LinearMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { grid: 200, scheme: Scheme::Simplified, method: LinearMethod::Lu }
    }
}

impl SolverConfig {
    pub fn with_grid(grid: usize) -> Self {
        Self { grid, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    MeanExitTime,
    EscapeProbability,
}

/// Function of x on a set of points: a solved or observed profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub kind: ProfileKind,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    /// Standard errors for Monte Carlo profiles; `None` entries are undefined.
    pub std_errors: Option<Vec<Option<f64>>>,
    pub warnings: Vec<String>,
}

impl Profile {
    pub fn new(kind: ProfileKind, xs: Vec<f64>, values: Vec<f64>) -> Self {
        Self { kind, xs, values, std_errors: None, warnings: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Piecewise-linear interpolation; `xs` must be increasing and `x` within
    /// their range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let n = self.xs.len();
        if n == 0 || x < self.xs[0] || x > self.xs[n - 1] || x.is_nan() {
            return None;
        }
        let i = self.xs.partition_point(|&p| p <= x);
        if i == 0 {
            return Some(self.values[0]);
        }
        if i == n {
            return Some(self.values[n - 1]);
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let t = (x - x0) / (x1 - x0);
        Some(self.values[i - 1] + t * (self.values[i] - self.values[i - 1]))
    }
}

fn solve_profile(kind: ProfileKind, grid: &Grid, system: &LinearSystem, method: LinearMethod) -> Result<Profile> {
    let u = solve_linear(system, method)?;
    let mut profile = Profile::new(kind, grid.interior_points(), u.iter().copied().collect());
    let (lo, hi) = match kind {
        ProfileKind::MeanExitTime => (-PROFILE_TOL, f64::INFINITY),
        ProfileKind::EscapeProbability => (-PROFILE_TOL, 1.0 + PROFILE_TOL),
    };
    if let Some((x, v)) = profile.xs.iter().zip(&profile.values).find(|(_, v)| **v < lo || **v > hi) {
        let msg = format!("{kind:?} value {v:e} at x = {x} is outside [{lo}, {hi}]; grid may be too coarse");
        log::warn!("{msg}");
        profile.warnings.push(msg);
    }
    Ok(profile)
}

/// Mean exit time `u(x)` at the interior grid nodes of `domain`.
pub fn mean_exit_time(params: &SystemParams, drift: &DriftExpr, domain: &Domain, config: &SolverConfig) -> Result<Profile> {
    let problem = canonicalize_params(params, drift, domain)?;
    let grid = Grid::new(*domain, config.grid)?;
    let system = assemble_met_system(&problem, &grid, config.scheme)?;
    solve_profile(ProfileKind::MeanExitTime, &grid, &system, config.method)
}

/// Escape probability `P_E(x)` at the interior grid nodes of `domain`.
pub fn escape_probability(
    params: &SystemParams,
    drift: &DriftExpr,
    domain: &Domain,
    target: &TargetSet,
    config: &SolverConfig,
) -> Result<Profile> {
    target.validate(domain)?;
    let problem = canonicalize_params(params, drift, domain)?;
    let grid = Grid::new(*domain, config.grid)?;
    let system = assemble_ep_system(&problem, &grid, target, config.scheme)?;
    solve_profile(ProfileKind::EscapeProbability, &grid, &system, config.method)
}
