//! Inverse problem: recover (α, ε, d, drift parameters) by minimizing the
//! relative squared L² misfit between a forward-solved profile and
//! observations.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::drift::{DriftExpr, ParamEnv};
use crate::error::{Error, Result};
use crate::optimize::{minimize_multi, minimize_scalar, BoxBounds, NelderMeadConfig};
use crate::solver::{
    escape_probability, mean_exit_time, Domain, Profile, ProfileKind, SolverConfig, SystemParams, TargetSet,
};

/// Names that address [`SystemParams`] fields rather than drift parameters.
pub const RESERVED: [&str; 3] = ["alpha", "epsilon", "d"];

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub kind: ProfileKind,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    /// Required for escape-probability observations.
    pub target: Option<TargetSet>,
}

impl ObservationSet {
    pub fn new(kind: ProfileKind, xs: Vec<f64>, values: Vec<f64>, target: Option<TargetSet>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidObservations(m));
        if xs.len() != values.len() {
            return bad(format!("{} abscissae but {} values", xs.len(), values.len()));
        }
        if xs.is_empty() {
            return bad("no observations".into());
        }
        if let Some(w) = xs.windows(2).find(|w| !(w[0] < w[1])) {
            return bad(format!("abscissae must be strictly increasing ({} then {})", w[0], w[1]));
        }
        if xs.iter().chain(&values).any(|v| !v.is_finite()) {
            return bad("non-finite entry".into());
        }
        if kind == ProfileKind::EscapeProbability {
            if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return bad(format!("escape probability {v} outside [0, 1]"));
            }
            if target.is_none() {
                return bad("escape-probability observations need a target set".into());
            }
        }
        Ok(Self { kind, xs, values, target })
    }

    /// Observations taken directly from a solved profile.
    pub fn from_profile(profile: &Profile, target: Option<TargetSet>) -> Result<Self> {
        Self::new(profile.kind, profile.xs.clone(), profile.values.clone(), target)
    }

    /// Keeps the observations in the central `fraction` of `domain`, i.e.
    /// those whose canonical coordinate satisfies `|z| <= fraction`.
    pub fn central_window(&self, domain: &Domain, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!("window fraction must lie in (0, 1], got {fraction}")));
        }
        let keep: Vec<usize> = (0..self.xs.len()).filter(|&i| domain.to_canonical(self.xs[i]).abs() <= fraction).collect();
        Self::new(
            self.kind,
            keep.iter().map(|&i| self.xs[i]).collect(),
            keep.iter().map(|&i| self.values[i]).collect(),
            self.target.clone(),
        )
    }

    pub fn check_domain(&self, domain: &Domain) -> Result<()> {
        match self.xs.iter().find(|x| !domain.contains(**x)) {
            Some(x) => Err(Error::InvalidObservations(format!("x = {x} is outside ({}, {})", domain.a, domain.b))),
            None => Ok(()),
        }
    }
}

/// `Σ (model(x_i) − v_i)² / Σ v_i²` with the model interpolated linearly
/// onto the observation abscissae.
pub fn relative_l2_objective(model: &Profile, obs: &ObservationSet) -> Result<f64> {
    let denom: f64 = obs.values.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return Err(Error::InvalidObservations("all observed values are zero".into()));
    }
    let mut num = 0.0;
    for (&x, &v) in obs.xs.iter().zip(&obs.values) {
        let m = model.interpolate(x).ok_or_else(|| {
            Error::InvalidObservations(format!("x = {x} lies outside the model profile's node range"))
        })?;
        num += (m - v) * (m - v);
    }
    Ok(num / denom)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeParam {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl FreeParam {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self { name: name.into(), lower, upper }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Bracket tolerance for the scalar search, relative to `1 + |x|`.
    pub xtol: f64,
    /// Lattice points per axis for multi-parameter starts.
    pub multistart: usize,
    /// Forward solves per estimation (scalar) or per start (multi).
    pub max_evals: usize,
    /// Simplex-size tolerance as a fraction of each box side.
    pub simplex_xtol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { xtol: 1e-4, multistart: 3, max_evals: 200, simplex_xtol: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct EstimationProblem {
    pub observations: ObservationSet,
    pub drift: DriftExpr,
    pub domain: Domain,
    pub free: Vec<FreeParam>,
    /// Fixed values for `alpha`, `epsilon`, `d` and drift parameters.
    /// `epsilon` defaults to 1 and `d` to 0.
    pub fixed: ParamEnv,
    pub solver: SolverConfig,
    pub optimizer: OptimizerConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTrace {
    pub start: usize,
    pub step: usize,
    /// Free-parameter values in the order of `EstimationProblem::free`.
    pub params: Vec<f64>,
    /// `+∞` when the forward solve failed.
    pub objective: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    /// Every parameter, free and fixed, including `alpha`, `epsilon`, `d`.
    pub best: ParamEnv,
    pub objective_value: f64,
    pub evaluations: usize,
    pub trace: Vec<EstimateTrace>,
}

impl EstimateResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.best.get(name)
    }
}

impl EstimationProblem {
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidParameter(m));
        if self.free.is_empty() {
            return invalid("at least one parameter must be free".into());
        }
        let drift_params = self.drift.free_parameters();
        if let Some(p) = drift_params.iter().find(|p| RESERVED.contains(&p.as_str())) {
            return invalid(format!("drift parameter `{p}` collides with a reserved name"));
        }
        for (i, fp) in self.free.iter().enumerate() {
            if !(fp.lower.is_finite() && fp.upper.is_finite() && fp.lower < fp.upper) {
                return invalid(format!("bounds for `{}` need finite lower < upper", fp.name));
            }
            if self.free[..i].iter().any(|o| o.name == fp.name) {
                return invalid(format!("`{}` listed as free twice", fp.name));
            }
            if self.fixed.contains(&fp.name) {
                return invalid(format!("`{}` is both free and fixed", fp.name));
            }
            match fp.name.as_str() {
                "alpha" if !(fp.lower > 0.0 && fp.upper < 2.0) => return invalid("alpha bounds must lie in (0, 2)".into()),
                "epsilon" if !(fp.lower > 0.0) => return invalid("epsilon bounds must be positive".into()),
                "d" if !(fp.lower >= 0.0) => return invalid("d bounds must be non-negative".into()),
                name if !RESERVED.contains(&name) && !drift_params.iter().any(|p| p == name) => {
                    return invalid(format!("free parameter `{name}` does not appear in the drift"))
                }
                _ => {}
            }
        }
        let is_free = |n: &str| self.free.iter().any(|f| f.name == n);
        if !is_free("alpha") && !self.fixed.contains("alpha") {
            return invalid("alpha must be free or fixed".into());
        }
        if let Some(p) = drift_params.iter().find(|p| !is_free(p) && !self.fixed.contains(p)) {
            return Err(Error::UnboundParameter(p.clone()));
        }
        self.observations.check_domain(&self.domain)?;
        if self.observations.kind == ProfileKind::EscapeProbability {
            self.observations.target.as_ref().expect("validated by ObservationSet::new").validate(&self.domain)?;
        }
        Ok(())
    }

    /// All parameter values with the free ones set to `values`.
    pub fn environment(&self, values: &[f64]) -> ParamEnv {
        let mut env = self.fixed.clone();
        if !env.contains("epsilon") {
            env.set("epsilon", 1.0);
        }
        if !env.contains("d") {
            env.set("d", 0.0);
        }
        for (fp, v) in self.free.iter().zip(values) {
            env.set(fp.name.clone(), *v);
        }
        env
    }

    /// Forward solve at `env`, returning the model profile extended with its
    /// exterior values at the domain endpoints.
    pub fn forward(&self, env: &ParamEnv) -> Result<Profile> {
        let mut drift_env = env.clone();
        let get = |n: &str| env.get(n).ok_or_else(|| Error::UnboundParameter(n.to_string()));
        let params = SystemParams::new(get("alpha")?, get("epsilon")?, get("d")?, {
            for r in RESERVED {
                drift_env.remove(r);
            }
            drift_env
        })?;
        let (mut profile, left, right) = match self.observations.kind {
            ProfileKind::MeanExitTime => (mean_exit_time(&params, &self.drift, &self.domain, &self.solver)?, 0.0, 0.0),
            ProfileKind::EscapeProbability => {
                let target = self.observations.target.as_ref().expect("validated by ObservationSet::new");
                let p = escape_probability(&params, &self.drift, &self.domain, target, &self.solver)?;
                let edge = |x: f64| if target.contains(x) { 1.0 } else { 0.0 };
                let span = self.domain.b - self.domain.a;
                (p, edge(self.domain.a - 1e-9 * span), edge(self.domain.b + 1e-9 * span))
            }
        };
        profile.xs.insert(0, self.domain.a);
        profile.values.insert(0, left);
        profile.xs.push(self.domain.b);
        profile.values.push(right);
        Ok(profile)
    }

    /// Objective at the given free-parameter values.
    pub fn objective(&self, values: &[f64]) -> Result<f64> {
        let model = self.forward(&self.environment(values))?;
        relative_l2_objective(&model, &self.observations)
    }
}

fn key(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

/// Minimizes the objective over the free parameters: Brent's method for one
/// parameter, multistart bounded Nelder–Mead otherwise. Each evaluation is a
/// full forward solve; failed solves count as `+∞`.
pub fn estimate_parameters(problem: &EstimationProblem) -> Result<EstimateResult> {
    problem.validate()?;
    let failures: Mutex<HashMap<Vec<u64>, String>> = Mutex::new(HashMap::new());
    let eval = |values: &[f64]| -> f64 {
        match problem.objective(values) {
            Ok(v) => v,
            Err(e) => {
                failures.lock().expect("failure map").insert(key(values), e.to_string());
                f64::INFINITY
            }
        }
    };

    let raw: Vec<(usize, usize, Vec<f64>, f64)> = if problem.free.len() == 1 {
        let fp = &problem.free[0];
        // Brent needs finite values; failed solves become the largest float
        let min = minimize_scalar(
            |x| {
                let v = eval(&[x]);
                if v.is_finite() {
                    v
                } else {
                    f64::MAX
                }
            },
            fp.lower,
            fp.upper,
            problem.optimizer.xtol,
            problem.optimizer.max_evals,
        )?;
        min.probes.iter().enumerate().map(|(i, &(x, v))| (0, i, vec![x], if v == f64::MAX { f64::INFINITY } else { v })).collect()
    } else {
        let bounds = BoxBounds::new(
            problem.free.iter().map(|f| f.lower).collect(),
            problem.free.iter().map(|f| f.upper).collect(),
        )?;
        let cfg = NelderMeadConfig {
            multistart: problem.optimizer.multistart,
            max_evals: problem.optimizer.max_evals,
            xtol: problem.optimizer.simplex_xtol,
        };
        match minimize_multi(eval, &bounds, &cfg) {
            Ok(m) => m.trace.into_iter().map(|e| (e.start, e.step, e.x, e.value)).collect(),
            Err(Error::EstimationFailed(_)) => Vec::new(),
            Err(e) => return Err(e),
        }
    };

    let failures = failures.into_inner().expect("failure map");
    let trace: Vec<EstimateTrace> = raw
        .into_iter()
        .map(|(start, step, params, objective)| {
            let failure = failures.get(&key(&params)).cloned();
            EstimateTrace { start, step, params, objective, failure }
        })
        .collect();
    let best = trace
        .iter()
        .filter(|t| t.objective.is_finite())
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .ok_or_else(|| {
            let why = trace.iter().find_map(|t| t.failure.clone()).unwrap_or_else(|| "no probes".into());
            Error::EstimationFailed(format!("no forward solve succeeded ({why})"))
        })?;
    Ok(EstimateResult {
        best: problem.environment(&best.params),
        objective_value: best.objective,
        evaluations: trace.len(),
        trace,
    })
}
