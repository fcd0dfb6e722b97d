//! Data series behind the four example figures. Observations are synthetic:
//! a forward solve at the true parameters on a grid twice as fine as the one
//! used for estimation, kept on the central 90% of the domain. Closer to the
//! boundary the central drift difference leaves a grid-dependent odd-even
//! mode that would otherwise dominate the misfit.
//!
//! Files written to the output directory, with `<p>` = `fig<N>` or
//! `fig<N>_<domain>`:
//! - `<p>_observations.csv`: synthetic observations used in the fit (`x,value`)
//! - `<p>_objective.csv`: objective over a parameter lattice
//! - `<p>_estimate.csv`: estimated parameters (`name,value`)
//! - `<p>_fit.csv`: forward solution at the estimate
//! - `<p>_trace.csv`: optimizer probes

use std::fs;
use std::path::Path;

use levy_exit::drift::parse_drift;
use levy_exit::solver::TargetSet;
use levy_exit::{
    escape_probability, estimate_parameters, mean_exit_time, par, Domain, EstimationProblem, FreeParam,
    ObservationSet, OptimizerConfig, ParamEnv, Profile, ProfileKind, SolverConfig, SystemParams,
};

use crate::{io, write_estimate, write_trace, CliError};

const OBS_GRID: usize = 400;
const EST_GRID: usize = 200;
const OBS_WINDOW: f64 = 0.9;

struct Scenario {
    prefix: String,
    kind: ProfileKind,
    drift: &'static str,
    domain: Domain,
    truth: ParamEnv,
    free: Vec<FreeParam>,
}

impl Scenario {
    fn target(&self) -> Option<TargetSet> {
        (self.kind == ProfileKind::EscapeProbability).then(|| TargetSet::right(&self.domain))
    }

    fn observations(&self) -> Result<Profile, CliError> {
        let drift = parse_drift(self.drift).map_err(levy_exit::Error::from)?;
        let mut drift_env = self.truth.clone();
        drift_env.remove("alpha");
        let params = SystemParams::new(self.truth.get("alpha").expect("truth has alpha"), 1.0, 0.0, drift_env)?;
        let cfg = SolverConfig::with_grid(OBS_GRID);
        Ok(match self.target() {
            None => mean_exit_time(&params, &drift, &self.domain, &cfg)?,
            Some(t) => escape_probability(&params, &drift, &self.domain, &t, &cfg)?,
        })
    }

    fn problem(&self, obs: &Profile) -> Result<EstimationProblem, CliError> {
        let mut fixed = ParamEnv::new().with("epsilon", 1.0).with("d", 0.0);
        for (name, v) in self.truth.iter() {
            if !self.free.iter().any(|f| f.name == name) {
                fixed.set(name, v);
            }
        }
        Ok(EstimationProblem {
            observations: ObservationSet::from_profile(obs, self.target())?.central_window(&self.domain, OBS_WINDOW)?,
            drift: parse_drift(self.drift).map_err(levy_exit::Error::from)?,
            domain: self.domain,
            free: self.free.clone(),
            fixed,
            solver: SolverConfig::with_grid(EST_GRID),
            optimizer: OptimizerConfig::default(),
        })
    }
}

fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn run(scenario: &Scenario, dir: &Path) -> Result<(), CliError> {
    let path = |what: &str| dir.join(format!("{}_{what}.csv", scenario.prefix));
    let problem = scenario.problem(&scenario.observations()?)?;
    let used = &problem.observations;
    io::write_profile(&Profile::new(used.kind, used.xs.clone(), used.values.clone()), &path("observations"))?;

    let axes: Vec<Vec<f64>> = scenario
        .free
        .iter()
        .map(|f| match f.name.as_str() {
            "alpha" => lattice(0.1, 1.9, if scenario.free.len() == 1 { 0.05 } else { 0.1 }),
            _ => lattice(f.lower, f.upper, 0.1),
        })
        .collect();
    let points: Vec<Vec<f64>> = axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter().flat_map(|p| axis.iter().map(move |v| [p.as_slice(), &[*v]].concat())).collect()
    });
    let values = par::map_indexed(points.len(), |i| problem.objective(&points[i]).unwrap_or(f64::INFINITY));
    let rows: Vec<Vec<f64>> = points.iter().zip(&values).map(|(p, v)| [p.as_slice(), &[*v]].concat()).collect();
    let mut header: Vec<&str> = scenario.free.iter().map(|f| f.name.as_str()).collect();
    header.push("objective");
    io::write_atomic(&path("objective"), &io::render_table(&header, &rows))?;

    let result = estimate_parameters(&problem)?;
    let fit = problem.forward(&result.best)?;
    io::write_profile(&fit, &path("fit"))?;
    write_trace(&result, &scenario.free, &path("trace"))?;
    write_estimate(&result, &path("estimate"))?;
    for f in &scenario.free {
        log::info!("{}: {} = {}", scenario.prefix, f.name, result.get(&f.name).unwrap_or(f64::NAN));
    }
    Ok(())
}

fn scenarios(which: u8) -> Result<Vec<Scenario>, CliError> {
    let domains = [("small", Domain::new(-0.1, 0.1)?), ("large", Domain::new(-2.0, 2.0)?)];
    let alpha_only = || vec![FreeParam::new("alpha", 0.1, 1.9)];
    let alpha_beta = || vec![FreeParam::new("alpha", 0.1, 1.9), FreeParam::new("beta", 0.1, 3.0)];
    let unit = Domain::new(-1.0, 1.0)?;
    Ok(match which {
        1 => domains
            .iter()
            .map(|(label, domain)| Scenario {
                prefix: format!("fig1_{label}"),
                kind: ProfileKind::MeanExitTime,
                drift: "-x",
                domain: *domain,
                truth: ParamEnv::new().with("alpha", 0.6),
                free: alpha_only(),
            })
            .collect(),
        2 => domains
            .iter()
            .map(|(label, domain)| Scenario {
                prefix: format!("fig2_{label}"),
                kind: ProfileKind::EscapeProbability,
                drift: "x - x^3",
                domain: *domain,
                truth: ParamEnv::new().with("alpha", 1.5),
                free: alpha_only(),
            })
            .collect(),
        3 => vec![Scenario {
            prefix: "fig3".into(),
            kind: ProfileKind::MeanExitTime,
            drift: "x - beta*x^3",
            domain: unit,
            truth: ParamEnv::new().with("alpha", 0.6).with("beta", 1.5),
            free: alpha_beta(),
        }],
        4 => vec![Scenario {
            prefix: "fig4".into(),
            kind: ProfileKind::EscapeProbability,
            drift: "x - beta*x^3",
            domain: unit,
            truth: ParamEnv::new().with("alpha", 1.5).with("beta", 0.4),
            free: alpha_beta(),
        }],
        n => return Err(CliError::Usage(format!("--which {n}: expected 1, 2, 3 or 4"))),
    })
}

pub fn generate(which: u8, dir: &Path) -> Result<(), CliError> {
    let list = scenarios(which)?;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for s in &list {
        run(s, dir)?;
    }
    Ok(())
}
