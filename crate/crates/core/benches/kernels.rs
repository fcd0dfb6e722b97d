//! Kernel timings labelled by execution mode. Run once per build and compare
//! the two series in the criterion report:
//!
//! ```text
//! cargo bench -p levy-exit
//! cargo bench -p levy-exit --no-default-features
//! ```

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use levy_exit::drift::parse_drift;
use levy_exit::solver::{assemble_met_system, canonicalize_params, Grid};
use levy_exit::{
    empirical_statistics, estimate_parameters, mean_exit_time, par, Domain, EstimationProblem, FreeParam,
    ObservationSet, OptimizerConfig, ParamEnv, Scheme, SimConfig, SolverConfig, SystemParams,
};

fn mode() -> &'static str {
    if par::is_parallel() {
        "parallel"
    } else {
        "sequential"
    }
}

fn assembly(c: &mut Criterion) {
    let domain = Domain::new(-2.0, 2.0).unwrap();
    let drift = parse_drift("x - x^3").unwrap();
    let params = SystemParams::new(1.5, 1.0, 0.0, ParamEnv::new()).unwrap();
    let problem = canonicalize_params(&params, &drift, &domain).unwrap();
    let mut group = c.benchmark_group("assemble_met");
    for j in [100, 400] {
        let grid = Grid::new(domain, j).unwrap();
        group.bench_with_input(BenchmarkId::new(mode(), j), &grid, |b, grid| {
            b.iter(|| assemble_met_system(black_box(&problem), grid, Scheme::Split).unwrap())
        });
    }
    group.finish();
}

fn forward_solve(c: &mut Criterion) {
    let domain = Domain::new(-2.0, 2.0).unwrap();
    let drift = parse_drift("-x").unwrap();
    let params = SystemParams::new(0.6, 1.0, 0.0, ParamEnv::new()).unwrap();
    let mut group = c.benchmark_group("mean_exit_time");
    group.sample_size(20);
    for j in [100, 200] {
        group.bench_with_input(BenchmarkId::new(mode(), j), &j, |b, &j| {
            b.iter(|| mean_exit_time(&params, &drift, &domain, &SolverConfig::with_grid(j)).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let domain = Domain::new(-1.0, 1.0).unwrap();
    let drift = parse_drift("-x").unwrap();
    let params = SystemParams::new(1.5, 1.0, 0.0, ParamEnv::new()).unwrap();
    let xs: Vec<f64> = (0..9).map(|k| -0.8 + 0.2 * k as f64).collect();
    let config = SimConfig { dt: 1e-3, max_time: 100.0, n_paths: 500, seed: 1 };
    let mut group = c.benchmark_group("empirical_statistics");
    group.sample_size(10);
    group.bench_function(mode(), |b| {
        b.iter(|| empirical_statistics(&params, &drift, &domain, black_box(&xs), None, &config).unwrap())
    });
    group.finish();
}

fn multistart(c: &mut Criterion) {
    let domain = Domain::new(-1.0, 1.0).unwrap();
    let drift = parse_drift("x - beta*x^3").unwrap();
    let truth = SystemParams::new(0.6, 1.0, 0.0, ParamEnv::new().with("beta", 1.5)).unwrap();
    let observed = mean_exit_time(&truth, &drift, &domain, &SolverConfig::with_grid(40)).unwrap();
    let problem = EstimationProblem {
        observations: ObservationSet::from_profile(&observed, None).unwrap(),
        drift,
        domain,
        free: vec![FreeParam::new("alpha", 0.1, 1.9), FreeParam::new("beta", 0.1, 3.0)],
        fixed: ParamEnv::new(),
        solver: SolverConfig::with_grid(40),
        optimizer: OptimizerConfig { max_evals: 60, ..OptimizerConfig::default() },
    };
    let mut group = c.benchmark_group("estimate_two_parameters");
    group.sample_size(10);
    group.bench_function(mode(), |b| b.iter(|| estimate_parameters(black_box(&problem)).unwrap()));
    group.finish();
}

criterion_group!(benches, assembly, forward_solve, monte_carlo, multistart);
criterion_main!(benches);
