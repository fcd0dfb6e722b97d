use levy_exit::drift::parse_drift;
use levy_exit::{escape_probability, mean_exit_time, Domain, ParamEnv, SolverConfig, SystemParams, TargetSet};
use proptest::prelude::*;

const J: usize = 24;

fn cfg() -> SolverConfig {
    SolverConfig::with_grid(J)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // x = c + r z maps A_x onto r^{-α} times a canonical generator whose drift
    // is scaled by r^{α-1} and whose diffusion by r^{α-2}.
    #[test]
    fn affine_rescaling(alpha in 0.2f64..1.9, eps in 0.3f64..2.0, d in 0.0f64..1.0,
                        k in 0.0f64..2.0, c in -3.0f64..3.0, r in 0.1f64..4.0) {
        let domain = Domain::new(c - r, c + r).unwrap();
        let drift = parse_drift("-k*(x - m)").unwrap();
        let env = ParamEnv::new().with("k", k).with("m", c);
        let u = mean_exit_time(&SystemParams::new(alpha, eps, d, env).unwrap(), &drift, &domain, &cfg()).unwrap();

        let unit = Domain::new(-1.0, 1.0).unwrap();
        let scaled = parse_drift("-k*x").unwrap();
        let env = ParamEnv::new().with("k", k * r.powf(alpha));
        let params = SystemParams::new(alpha, eps, d * r.powf(alpha - 2.0), env).unwrap();
        let v = mean_exit_time(&params, &scaled, &unit, &cfg()).unwrap();

        let s = r.powf(alpha);
        for (a, b) in u.values.iter().zip(&v.values) {
            prop_assert!((a - s * b).abs() <= 1e-9 * a.abs().max(1e-12), "{a} vs {}", s * b);
        }
        for (x, z) in u.xs.iter().zip(&v.xs) {
            prop_assert!((domain.to_canonical(*x) - z).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_drift_gives_even_exit_time(alpha in 0.2f64..1.9, k in 0.0f64..2.0, d in 0.0f64..0.5) {
        let domain = Domain::new(-1.5, 1.5).unwrap();
        let drift = parse_drift("-k*x^3 + k*x/2").unwrap();
        let params = SystemParams::new(alpha, 1.0, d, ParamEnv::new().with("k", k)).unwrap();
        let u = mean_exit_time(&params, &drift, &domain, &cfg()).unwrap();
        let n = u.values.len();
        for i in 0..n {
            prop_assert!(u.values[i] > 0.0);
            prop_assert!((u.values[i] - u.values[n - 1 - i]).abs() <= 1e-10 * u.values[i]);
        }
    }

    #[test]
    fn escape_probabilities_are_complementary(alpha in 0.2f64..1.9, beta in -1.0f64..2.0, d in 0.0f64..0.5) {
        let domain = Domain::new(-1.0, 2.0).unwrap();
        let drift = parse_drift("x - beta*x^3").unwrap();
        let params = SystemParams::new(alpha, 1.0, d, ParamEnv::new().with("beta", beta)).unwrap();
        let right = escape_probability(&params, &drift, &domain, &TargetSet::right(&domain), &cfg()).unwrap();
        let left = escape_probability(&params, &drift, &domain, &TargetSet::left(&domain), &cfg()).unwrap();
        for (p, q) in right.values.iter().zip(&left.values) {
            prop_assert!((p + q - 1.0).abs() < 1e-9);
            prop_assert!((-1e-8..=1.0 + 1e-8).contains(p));
        }
    }
}
