//! Prints max-norm and centre errors of the zero-drift exit time against the
//! closed form for a sequence of grids.

use levy_exit::drift::parse_drift;
use levy_exit::special::reference_met_f0;
use levy_exit::{mean_exit_time, Domain, ParamEnv, SolverConfig, StabilityIndex, SystemParams};

fn main() -> levy_exit::Result<()> {
    let domain = Domain::new(-1.0, 1.0)?;
    let drift = parse_drift("0")?;
    for alpha in [0.5, 1.0, 1.5] {
        let params = SystemParams::new(alpha, 1.0, 0.0, ParamEnv::new())?;
        let mut prev: Option<(f64, f64)> = None;
        for j in [50, 100, 200, 400] {
            let u = mean_exit_time(&params, &drift, &domain, &SolverConfig::with_grid(j))?;
            let mut max_err = 0.0f64;
            let mut centre = 0.0;
            for (x, v) in u.xs.iter().zip(&u.values) {
                let e = (v - reference_met_f0(StabilityIndex::new(alpha)?, *x)?).abs();
                max_err = max_err.max(e);
                if *x == 0.0 {
                    centre = e;
                }
            }
            let ratio = prev.map(|(m, c)| format!("{:.3} {:.3}", m / max_err, c / centre)).unwrap_or_default();
            println!("alpha {alpha} J {j:4} max {max_err:.3e} centre {centre:.3e} {ratio}");
            prev = Some((max_err, centre));
        }
    }
    Ok(())
}
