//! Mean exit time and escape probability for scalar SDEs driven by symmetric
//! α-stable Lévy noise,
//!
//! ```text
//! dX_t = f(β, X_t) dt + sqrt(d) dB_t + ε dL_t^α,
//! ```
//!
//! computed by finite-difference discretization of the nonlocal
//! boundary-value problems the two statistics satisfy, together with an
//! inverse-problem layer that recovers (α, β, ε, d) from observed profiles
//! and an independent Monte Carlo path simulator used as a cross-check.
//!
//! Module map:
//!
//! - [`special`]: stable-law intensity constant, Riemann zeta, closed-form
//!   zero-drift exit time.
//! - [`drift`]: a small expression language for drift fields.
//! - [`solver`]: grids, assembly of the discretized nonlocal operator, and the
//!   forward solves.
//! - [`linalg`]: dense LU and restarted GMRES.
//! - [`optimize`]: bounded scalar (Brent) and box-constrained Nelder–Mead
//!   minimizers.
//! - [`estimator`]: relative-L² objectives and parameter estimation.
//! - [`mc`]: α-stable sampling and Euler–Maruyama exit statistics.
//!
//! Data-parallel loops (row assembly, multistart, Monte Carlo paths) use rayon
//! when the `parallel` feature is enabled (the default) and run sequentially
//! otherwise. Results are identical either way.

pub mod drift;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod mc;
pub mod optimize;
pub mod par;
pub mod solver;
pub mod special;

pub use drift::{BoundDrift, DriftExpr, ParamEnv};
pub use error::{Error, Result};
pub use estimator::{
    estimate_parameters, relative_l2_objective, EstimateResult, EstimationProblem, FreeParam,
    ObservationSet, OptimizerConfig,
};
pub use linalg::{solve_linear, LinearMethod, LinearSystem};
pub use mc::{empirical_statistics, sample_standard_stable, simulate_exit, EmpiricalProfile, ExitRecord, SimConfig};
pub use solver::{
    escape_probability, mean_exit_time, Domain, Grid, Profile, ProfileKind, Scheme, SolverConfig,
    SystemParams, TargetSet,
};
pub use special::StabilityIndex;
