//! Convergence on the smoother manufactured solution u = (1 − x²)^{1+α/2},
//! for which −(−Δ)^{α/2} u = −K (1 − (1+α) x²) with
//! K = 2^α Γ(2+α/2) Γ((1+α)/2) / √π.

use levy_exit::drift::parse_drift;
use levy_exit::linalg::solve_linear;
use levy_exit::solver::{assemble_met_system, canonicalize_params, Grid, Scheme};
use levy_exit::{Domain, LinearMethod, ParamEnv, SystemParams};
use statrs::function::gamma::gamma;

fn main() -> levy_exit::Result<()> {
    let domain = Domain::new(-1.0, 1.0)?;
    let drift = parse_drift("0")?;
    for alpha in [0.5f64, 1.0, 1.5] {
        let k = 2f64.powf(alpha) * gamma(2.0 + alpha / 2.0) * gamma((1.0 + alpha) / 2.0) / std::f64::consts::PI.sqrt();
        let params = SystemParams::new(alpha, 1.0, 0.0, ParamEnv::new())?;
        let problem = canonicalize_params(&params, &drift, &domain)?;
        let mut prev = None;
        for j in [50, 100, 200, 400] {
            let grid = Grid::new(domain, j)?;
            let mut sys = assemble_met_system(&problem, &grid, Scheme::Simplified)?;
            let xs = grid.interior_nodes();
            for (r, x) in xs.iter().enumerate() {
                sys.rhs[r] = -k * (1.0 - (1.0 + alpha) * x * x);
            }
            let u = solve_linear(&sys, LinearMethod::Lu)?;
            let err = xs.iter().zip(u.iter()).map(|(x, v)| (v - (1.0 - x * x).powf(1.0 + alpha / 2.0)).abs()).fold(0.0, f64::max);
            let ratio = prev.map(|p: f64| format!("{:.3}", p / err)).unwrap_or_default();
            println!("alpha {alpha} J {j:4} max {err:.3e} {ratio}");
            prev = Some(err);
        }
    }
    Ok(())
}
