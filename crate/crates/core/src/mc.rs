//! Monte Carlo ground truth: Chambers–Mallows–Stuck sampling of symmetric
//! α-stable variables and Euler–Maruyama simulation of
//! `dX = f(X) dt + sqrt(d) dB + ε dL^α` until the first exit from `D`.
//!
//! Every path draws from its own ChaCha stream selected by
//! `(point index, path index)`, so results do not depend on how paths are
//! scheduled across threads.

use std::f64::consts::PI;

use rand::distributions::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::drift::{BoundDrift, DriftExpr};
use crate::error::{Error, Result};
use crate::par;
use crate::solver::{Domain, Profile, ProfileKind, SystemParams, TargetSet};
use crate::special::StabilityIndex;

/// Draws from the standard symmetric α-stable law with characteristic
/// function `exp(−|θ|^α)`.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler {
    alpha: f64,
    inv_alpha: f64,
    /// (1 − α) / α
    tail_exp: f64,
}

impl StableSampler {
    pub fn new(alpha: StabilityIndex) -> Self {
        let a = alpha.value();
        Self { alpha: a, inv_alpha: 1.0 / a, tail_exp: (1.0 - a) / a }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = Open01.sample(rng);
        let v = PI * (u - 0.5);
        if self.alpha == 1.0 {
            return v.tan();
        }
        let e: f64 = Open01.sample(rng);
        let w = -e.ln();
        let (s, c) = v.sin_cos();
        let (sa, ca) = (self.alpha * v).sin_cos();
        // cos((1 − α)v) by the angle-difference identity
        let c1a = c * ca + s * sa;
        sa * (self.tail_exp * (c1a / w).ln() - self.inv_alpha * c.ln()).exp()
    }
}

pub fn sample_standard_stable<R: Rng + ?Sized>(alpha: StabilityIndex, rng: &mut R) -> f64 {
    StableSampler::new(alpha).sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub max_time: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= self.max_time && self.max_time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < dt <= max_time, got dt = {}, max_time = {}",
                self.dt, self.max_time
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 1e-4, max_time: 100.0, n_paths: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitRecord {
    /// Steps taken times `dt`; equals the horizon for censored paths.
    pub exit_time: f64,
    /// First simulated state outside `D` (the last state if censored).
    pub exit_point: f64,
    /// Whether the exit point lies in the target set, when one was given.
    pub landed_in_target: Option<bool>,
    /// Still inside `D` at `max_time`.
    pub censored: bool,
}

struct PathModel<'a> {
    drift: BoundDrift,
    sampler: StableSampler,
    jump_scale: f64,
    gauss_scale: f64,
    domain: Domain,
    target: Option<&'a TargetSet>,
    dt: f64,
    max_steps: u64,
}

impl<'a> PathModel<'a> {
    fn new(params: &SystemParams, drift: &DriftExpr, domain: &Domain, target: Option<&'a TargetSet>, config: &SimConfig) -> Result<Self> {
        config.validate()?;
        if let Some(t) = target {
            t.validate(domain)?;
        }
        Ok(Self {
            drift: drift.bind(&params.drift_env)?,
            sampler: StableSampler::new(params.alpha),
            jump_scale: params.epsilon * config.dt.powf(1.0 / params.alpha.value()),
            gauss_scale: (params.d * config.dt).sqrt(),
            domain: *domain,
            target,
            dt: config.dt,
            max_steps: (config.max_time / config.dt).round() as u64,
        })
    }

    fn run<R: Rng>(&self, x0: f64, rng: &mut R) -> ExitRecord {
        let (a, b) = (self.domain.a, self.domain.b);
        let mut x = x0;
        let mut steps = 0u64;
        while steps < self.max_steps {
            steps += 1;
            let mut dx = self.drift.eval(x) * self.dt + self.jump_scale * self.sampler.sample(rng);
            if self.gauss_scale > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                dx += self.gauss_scale * z;
            }
            x += dx;
            if !(x > a && x < b) {
                return ExitRecord {
                    exit_time: steps as f64 * self.dt,
                    exit_point: x,
                    landed_in_target: self.target.map(|t| t.contains(x)),
                    censored: false,
                };
            }
        }
        ExitRecord {
            exit_time: steps as f64 * self.dt,
            exit_point: x,
            landed_in_target: self.target.map(|_| false),
            censored: true,
        }
    }
}

/// Simulates one path from `x0` until it leaves `domain` or reaches
/// `config.max_time`. The first state outside `D` is the exit point; no
/// interpolation back to the boundary is attempted.
pub fn simulate_exit<R: Rng>(
    params: &SystemParams,
    drift: &DriftExpr,
    domain: &Domain,
    x0: f64,
    target: Option<&TargetSet>,
    config: &SimConfig,
    rng: &mut R,
) -> Result<ExitRecord> {
    if !domain.contains(x0) {
        return Err(Error::InvalidParameter(format!("x0 = {x0} is outside ({}, {})", domain.a, domain.b)));
    }
    Ok(PathModel::new(params, drift, domain, target, config)?.run(x0, rng))
}

/// RNG for path `path` of starting point `point`.
pub fn path_rng(seed: u64, point: usize, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) | path as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalProfile {
    pub kind: ProfileKind,
    pub xs: Vec<f64>,
    /// Sample mean exit time, or landing frequency when a target was given.
    pub values: Vec<f64>,
    /// `None` when fewer than two paths were simulated.
    pub std_errors: Vec<Option<f64>>,
    pub censored_fraction: Vec<f64>,
    pub n_paths: usize,
}

impl EmpiricalProfile {
    pub fn into_profile(self) -> Profile {
        let mut p = Profile::new(self.kind, self.xs, self.values);
        p.std_errors = Some(self.std_errors);
        for (x, c) in p.xs.iter().zip(&self.censored_fraction) {
            if *c > 0.0 {
                p.warnings.push(format!("{:.3}% of paths from x = {x} censored at the horizon", 100.0 * c));
            }
        }
        p
    }
}

/// Sample mean exit time (no target) or landing frequency in `target` at each
/// starting point, with standard errors. Censored paths contribute the
/// horizon as a lower bound to exit-time means, count as not landed, and are
/// reported per point.
pub fn empirical_statistics(
    params: &SystemParams,
    drift: &DriftExpr,
    domain: &Domain,
    xs: &[f64],
    target: Option<&TargetSet>,
    config: &SimConfig,
) -> Result<EmpiricalProfile> {
    if let Some(x) = xs.iter().find(|x| !domain.contains(**x)) {
        return Err(Error::InvalidParameter(format!("x0 = {x} is outside ({}, {})", domain.a, domain.b)));
    }
    let model = PathModel::new(params, drift, domain, target, config)?;
    let n = config.n_paths;
    let records = par::map_indexed(xs.len() * n, |k| {
        let (point, path) = (k / n, k % n);
        model.run(xs[point], &mut path_rng(config.seed, point, path))
    });

    let kind = if target.is_some() { ProfileKind::EscapeProbability } else { ProfileKind::MeanExitTime };
    let mut out = EmpiricalProfile {
        kind,
        xs: xs.to_vec(),
        values: Vec::with_capacity(xs.len()),
        std_errors: Vec::with_capacity(xs.len()),
        censored_fraction: Vec::with_capacity(xs.len()),
        n_paths: n,
    };
    for chunk in records.chunks(n) {
        let sample = |r: &ExitRecord| match r.landed_in_target {
            Some(hit) => f64::from(u8::from(hit)),
            None => r.exit_time,
        };
        let mean = chunk.iter().map(sample).sum::<f64>() / n as f64;
        let se = (n > 1).then(|| {
            let var = chunk.iter().map(|r| (sample(r) - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        out.values.push(mean);
        out.std_errors.push(se);
        out.censored_fraction.push(chunk.iter().filter(|r| r.censored).count() as f64 / n as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{parse_drift, ParamEnv};

    fn alpha(a: f64) -> StabilityIndex {
        StabilityIndex::new(a).unwrap()
    }

    #[test]
    fn cauchy_median_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut xs: Vec<f64> = (0..100_000).map(|_| sample_standard_stable(alpha(1.0), &mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        assert!(xs[50_000].abs() < 0.02);
    }

    #[test]
    fn characteristic_function_small_sample() {
        // full-size checks live in the acceptance suite
        let n = 200_000;
        for a in [0.6, 1.0, 1.5] {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let s = StableSampler::new(alpha(a));
            let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
            for theta in [0.5, 1.0, 2.0] {
                let ecf = xs.iter().map(|x| (theta * x).cos()).sum::<f64>() / n as f64;
                let exact = (-f64::powf(theta, a)).exp();
                assert!((ecf - exact).abs() <= 3.0 / (n as f64).sqrt(), "alpha {a} theta {theta}: {ecf} vs {exact}");
            }
        }
    }

    #[test]
    fn start_near_right_edge_exits_right() {
        let d = Domain::new(-1.0, 1.0).unwrap();
        let p = SystemParams::new(1.2, 1.0, 0.0, ParamEnv::new()).unwrap();
        let cfg = SimConfig { dt: 1e-4, max_time: 50.0, n_paths: 10_000, seed: 3 };
        let right = TargetSet::right(&d);
        let prof = empirical_statistics(&p, &parse_drift("0").unwrap(), &d, &[0.999], Some(&right), &cfg).unwrap();
        assert!(prof.values[0] > 0.5);
        let met = empirical_statistics(&p, &parse_drift("0").unwrap(), &d, &[0.999], None, &cfg).unwrap();
        assert!(met.values[0] < 0.1);
    }

    #[test]
    fn symmetric_landing_frequency() {
        let d = Domain::new(-1.0, 1.0).unwrap();
        let p = SystemParams::new(1.5, 1.0, 0.0, ParamEnv::new()).unwrap();
        let cfg = SimConfig { dt: 1e-3, max_time: 50.0, n_paths: 20_000, seed: 5 };
        let prof = empirical_statistics(&p, &parse_drift("0").unwrap(), &d, &[0.0], Some(&TargetSet::right(&d)), &cfg).unwrap();
        let se = prof.std_errors[0].unwrap();
        assert!((prof.values[0] - 0.5).abs() <= 3.0 * se, "{} ± {se}", prof.values[0]);
    }

    #[test]
    fn single_path_has_no_standard_error() {
        let d = Domain::new(-1.0, 1.0).unwrap();
        let p = SystemParams::new(1.0, 1.0, 0.0, ParamEnv::new()).unwrap();
        let cfg = SimConfig { dt: 1e-3, max_time: 50.0, n_paths: 1, seed: 9 };
        let drift = parse_drift("0").unwrap();
        let prof = empirical_statistics(&p, &drift, &d, &[0.2], None, &cfg).unwrap();
        assert_eq!(prof.std_errors, vec![None]);
        let single = simulate_exit(&p, &drift, &d, 0.2, None, &cfg, &mut path_rng(9, 0, 0)).unwrap();
        assert_eq!(prof.values[0], single.exit_time);
    }

    #[test]
    fn reproducible_and_censoring_flagged() {
        let d = Domain::new(-1.0, 1.0).unwrap();
        let p = SystemParams::new(0.8, 0.05, 0.0, ParamEnv::new()).unwrap();
        let drift = parse_drift("-x").unwrap();
        let cfg = SimConfig { dt: 1e-2, max_time: 1.0, n_paths: 200, seed: 1 };
        let a = empirical_statistics(&p, &drift, &d, &[0.0, 0.5], None, &cfg).unwrap();
        let b = empirical_statistics(&p, &drift, &d, &[0.0, 0.5], None, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.censored_fraction[0] > 0.5);
        assert!(!a.clone().into_profile().warnings.is_empty());
        let long = SimConfig { max_time: 100.0, ..cfg };
        let c = empirical_statistics(&p, &drift, &d, &[0.0, 0.5], None, &long).unwrap();
        assert!(c.censored_fraction[0] <= a.censored_fraction[0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let d = Domain::new(-1.0, 1.0).unwrap();
        let p = SystemParams::new(1.0, 1.0, 0.0, ParamEnv::new()).unwrap();
        let drift = parse_drift("0").unwrap();
        let cfg = SimConfig::default();
        let mut rng = path_rng(0, 0, 0);
        assert!(simulate_exit(&p, &drift, &d, 1.5, None, &cfg, &mut rng).is_err());
        let bad = SimConfig { dt: 2.0, max_time: 1.0, ..cfg };
        assert!(simulate_exit(&p, &drift, &d, 0.0, None, &bad, &mut rng).is_err());
        assert!(empirical_statistics(&p, &drift, &d, &[0.0, -1.0], None, &cfg).is_err());
    }
}
