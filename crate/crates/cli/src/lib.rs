//! Command-line orchestration for `levy-exit`: forward solves, estimation,
//! Monte Carlo simulation and regeneration of the example figure data.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

use std::ffi::OsString;
use std::fmt;
use std::path::Path;

use clap::Parser;
use levy_exit::solver::TargetSet;
use levy_exit::{
    drift::parse_drift, empirical_statistics, escape_probability, estimate_parameters, mean_exit_time, Domain,
    DriftExpr, EstimateResult, EstimationProblem, FreeParam, LinearMethod, OptimizerConfig, ParamEnv,
    ProfileKind, Scheme, SimConfig, SolverConfig, SystemParams,
};

pub mod args;
pub mod config;
mod figures;
pub mod io;

use args::{Cli, Command, EstimateArgs, KindArg, MethodArg, ModelArgs, SchemeArg, SimulateArgs, SolverArgs};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<levy_exit::Error> for CliError {
    fn from(e: levy_exit::Error) -> Self {
        use levy_exit::Error as E;
        match e {
            E::NonFiniteDrift { .. }
            | E::Singular
            | E::NonConvergence { .. }
            | E::NonFiniteObjective { .. }
            | E::EstimationFailed(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        // a second call in the same process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    if threads.is_some_and(|n| n > 1) {
        log::warn!("built without the `parallel` feature; --threads is ignored");
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::SolveMet { model, solver, out } => {
            let (params, drift, domain) = model_parts(&model)?;
            let profile = mean_exit_time(&params, &drift, &domain, &solver_config(&solver))?;
            report_warnings(&profile.warnings);
            io::write_profile(&profile, &out)
        }
        Command::SolveEp { model, solver, target, out } => {
            let (params, drift, domain) = model_parts(&model)?;
            let target = parse_target(&target, &domain)?;
            let profile = escape_probability(&params, &drift, &domain, &target, &solver_config(&solver))?;
            report_warnings(&profile.warnings);
            io::write_profile(&profile, &out)
        }
        Command::Estimate(args) => run_estimate(&args),
        Command::Simulate(args) => run_simulate(&args),
        Command::Figures { which, out } => figures::generate(which, &out),
    }
}

fn report_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

pub fn solver_config(args: &SolverArgs) -> SolverConfig {
    SolverConfig {
        grid: args.grid,
        scheme: match args.scheme {
            SchemeArg::Split => Scheme::Split,
            SchemeArg::Simplified => Scheme::Simplified,
        },
        method: match args.method {
            MethodArg::Lu => LinearMethod::Lu,
            MethodArg::Gmres => {
                LinearMethod::Gmres { restart: args.gmres_restart, tol: args.gmres_tol, max_iter: args.gmres_max_iter }
            }
        },
    }
}

fn parse_drift_arg(text: &str) -> Result<DriftExpr, CliError> {
    parse_drift(text).map_err(|e| CliError::Usage(format!("--drift `{text}`: {e}")))
}

fn parse_domain(v: &[f64]) -> Result<Domain, CliError> {
    Domain::new(v[0], v[1]).map_err(|e| CliError::Usage(format!("--domain {} {}: {e}", v[0], v[1])))
}

fn parse_number(flag: &str, token: &str, s: &str) -> Result<f64, CliError> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse().map_err(|_| CliError::Usage(format!("{flag} `{token}`: malformed number `{t}`"))),
    }
}

/// `name=value` pairs.
pub fn parse_assignments(flag: &str, items: &[String]) -> Result<ParamEnv, CliError> {
    let mut env = ParamEnv::new();
    for item in items {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{flag} `{item}`: expected NAME=VALUE")))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(CliError::Usage(format!("{flag} `{item}`: empty name")));
        }
        if env.contains(name) {
            return Err(CliError::Usage(format!("{flag} `{item}`: `{name}` given twice")));
        }
        let v = parse_number(flag, item, value)?;
        if !v.is_finite() {
            return Err(CliError::Usage(format!("{flag} `{item}`: value must be finite")));
        }
        env.set(name, v);
    }
    Ok(env)
}

/// `name:lower:upper` bounds.
pub fn parse_free(items: &[String]) -> Result<Vec<FreeParam>, CliError> {
    items
        .iter()
        .map(|item| {
            let parts: Vec<&str> = item.split(':').collect();
            if parts.len() != 3 || parts[0].trim().is_empty() {
                return Err(CliError::Usage(format!("--free `{item}`: expected NAME:LO:HI")));
            }
            let lo = parse_number("--free", item, parts[1])?;
            let hi = parse_number("--free", item, parts[2])?;
            Ok(FreeParam::new(parts[0].trim(), lo, hi))
        })
        .collect()
}

/// `left`, `right`, `both`, or comma-separated `lo:hi` intervals.
pub fn parse_target(spec: &str, domain: &Domain) -> Result<TargetSet, CliError> {
    let target = match spec.trim() {
        "left" => TargetSet::left(domain),
        "right" => TargetSet::right(domain),
        "both" => TargetSet::both(domain),
        s => {
            let mut intervals = Vec::new();
            for piece in s.split(',') {
                let (lo, hi) = piece
                    .split_once(':')
                    .ok_or_else(|| CliError::Usage(format!("--target `{spec}`: expected left|right|both|LO:HI[,LO:HI]")))?;
                intervals.push((parse_number("--target", spec, lo)?, parse_number("--target", spec, hi)?));
            }
            TargetSet::new(intervals).map_err(|e| CliError::Usage(format!("--target `{spec}`: {e}")))?
        }
    };
    target.validate(domain).map_err(|e| CliError::Usage(format!("--target `{spec}`: {e}")))?;
    Ok(target)
}

fn model_parts(model: &ModelArgs) -> Result<(SystemParams, DriftExpr, Domain), CliError> {
    let drift = parse_drift_arg(&model.drift)?;
    let domain = parse_domain(&model.domain)?;
    let env = parse_assignments("--param", &model.params)?;
    if let Some((name, _)) = env.iter().find(|(n, _)| levy_exit::estimator::RESERVED.contains(n)) {
        return Err(CliError::Usage(format!("--param `{name}`: use --{name} instead")));
    }
    let params = SystemParams::new(model.alpha, model.epsilon, model.d, env)?;
    Ok((params, drift, domain))
}

/// The domain whose interior grid is the (uniformly spaced) observation set:
/// one spacing beyond each end.
pub fn infer_domain(xs: &[f64]) -> Result<Domain, CliError> {
    let fail = |why: &str| {
        Err(CliError::Usage(format!("cannot infer the domain from the observations ({why}); pass --domain A B")))
    };
    if xs.len() < 2 {
        return fail("fewer than two points");
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let scale = xs[0].abs().max(xs[xs.len() - 1].abs()).max(h);
    if xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * scale) {
        return fail("spacing is not uniform");
    }
    Domain::new(xs[0] - h, xs[xs.len() - 1] + h).map_err(CliError::from)
}

pub fn write_estimate(result: &EstimateResult, path: &Path) -> Result<(), CliError> {
    let mut out = String::from("name,value\n");
    for (name, v) in result.best.iter() {
        out.push_str(&format!("{name},{}\n", io::fmt_f64(v)));
    }
    out.push_str(&format!("objective,{}\n", io::fmt_f64(result.objective_value)));
    out.push_str(&format!("evaluations,{}\n", result.evaluations));
    io::write_atomic(path, &out)
}

pub fn write_trace(result: &EstimateResult, free: &[FreeParam], path: &Path) -> Result<(), CliError> {
    let mut out = String::from("start,step");
    for f in free {
        out.push(',');
        out.push_str(&f.name);
    }
    out.push_str(",objective,failure\n");
    for t in &result.trace {
        out.push_str(&format!("{},{}", t.start, t.step));
        for v in &t.params {
            out.push(',');
            out.push_str(&io::fmt_f64(*v));
        }
        let failure = t.failure.as_deref().unwrap_or("").replace(['"', ','], ";");
        out.push_str(&format!(",{},{failure}\n", io::fmt_f64(t.objective)));
    }
    io::write_atomic(path, &out)
}

fn run_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let drift = parse_drift_arg(&args.drift)?;
    let free = parse_free(&args.free)?;
    let fixed = parse_assignments("--fixed", &args.fixed)?;
    let kind = match args.kind {
        KindArg::Met => ProfileKind::MeanExitTime,
        KindArg::Ep => ProfileKind::EscapeProbability,
    };
    // the target depends on the domain, which may itself come from the data
    let untargeted = io::read_observations(&args.obs, ProfileKind::MeanExitTime, None)?;
    let domain = if args.domain.is_empty() { infer_domain(&untargeted.xs)? } else { parse_domain(&args.domain)? };
    let target = match (kind, &args.target) {
        (ProfileKind::EscapeProbability, None) => {
            return Err(CliError::Usage("--kind ep requires --target".into()));
        }
        (ProfileKind::EscapeProbability, Some(t)) => Some(parse_target(t, &domain)?),
        (ProfileKind::MeanExitTime, Some(_)) => {
            return Err(CliError::Usage("--target only applies to --kind ep".into()));
        }
        (ProfileKind::MeanExitTime, None) => None,
    };
    let observations = match kind {
        ProfileKind::MeanExitTime => untargeted,
        ProfileKind::EscapeProbability => io::read_observations(&args.obs, kind, target)?,
    };
    let observations = if args.window < 1.0 {
        observations.central_window(&domain, args.window).map_err(|e| CliError::Usage(format!("--window: {e}")))?
    } else if args.window == 1.0 {
        observations
    } else {
        return Err(CliError::Usage(format!("--window {}: expected a fraction in (0, 1]", args.window)));
    };
    let problem = EstimationProblem {
        observations,
        drift,
        domain,
        free: free.clone(),
        fixed,
        solver: solver_config(&args.solver),
        optimizer: OptimizerConfig {
            xtol: args.xtol,
            multistart: args.multistart,
            max_evals: args.max_evals,
            ..OptimizerConfig::default()
        },
    };
    let result = estimate_parameters(&problem)?;
    for (name, v) in result.best.iter() {
        log::info!("{name} = {v}");
    }
    if let Some(trace) = &args.trace {
        write_trace(&result, &free, trace)?;
    }
    write_estimate(&result, &args.out)
}

fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let (params, drift, domain) = model_parts(&args.model)?;
    let mut xs = match (&args.x0_list, args.x0) {
        (Some(path), _) => io::read_points(path)?,
        (None, Some(x)) => vec![x],
        (None, None) => return Err(CliError::Usage("one of --x0 or --x0-list is required".into())),
    };
    xs.sort_by(f64::total_cmp);
    if let Some(w) = xs.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Usage(format!("starting point {} listed twice", w[0])));
    }
    let target = args.target.as_deref().map(|t| parse_target(t, &domain)).transpose()?;
    let config = SimConfig { dt: args.dt, max_time: args.max_time, n_paths: args.paths, seed: args.seed };
    let stats = empirical_statistics(&params, &drift, &domain, &xs, target.as_ref(), &config)?;
    let profile = stats.into_profile();
    report_warnings(&profile.warnings);
    io::write_profile(&profile, &args.out)
}
