//! Row-wise assembly of the discretized generator on canonical (-1, 1).
//!
//! Row `j` (interior node `z_j = j h`) of the simplified scheme reads
//!
//! ```text
//! C_h (U_{j-1} - 2U_j + U_{j+1}) / h²  +  f(z_j) (U_{j+1} - U_{j-1}) / 2h
//!   - (εC_α/α) [(1+z_j)^{-α} + (1-z_j)^{-α}] U_j
//!   + εC_α h Σ''_{k=-J-j, k≠0}^{J-j} (U_{j+k} - U_j) / |z_k|^{1+α}
//! ```
//!
//! where `Σ''` halves the two end terms and
//! `C_h = d/2 − εC_α ζ(α−1) h^{2−α}` absorbs the leading error of the
//! punched-hole sum. Values at `j = ±J` are known boundary data and move to
//! the right-hand side.

use nalgebra::{DMatrix, DVector};

use super::{exterior_mass, CanonicalProblem, Grid, Scheme, TargetSet};
use crate::error::{Error, Result};
use crate::linalg::LinearSystem;
use crate::par;
use crate::special::riemann_zeta;

/// Known values of the solution at the boundary nodes `z = -1` and `z = 1`.
#[derive(Debug, Clone, Copy)]
struct BoundaryValues {
    left: f64,
    right: f64,
}

/// Iterates `(k, weight)` over the trapezoid rule on `lo..=hi`, end terms
/// halved and `k = 0` punched out. A single-point range has zero length and
/// contributes nothing.
fn trapezoid(lo: i64, hi: i64) -> impl Iterator<Item = (i64, f64)> {
    let empty = lo >= hi;
    (lo..=hi)
        .filter(move |&k| !empty && k != 0)
        .map(move |k| (k, if k == lo || k == hi { 0.5 } else { 1.0 }))
}

struct RowBuilder<'a> {
    row: &'a mut [f64],
    j_max: i64,
    boundary: BoundaryValues,
    /// Σ coefficient · boundary value, to be subtracted from the rhs.
    known: f64,
}

impl RowBuilder<'_> {
    #[inline]
    fn add(&mut self, m: i64, v: f64) {
        if m.abs() < self.j_max {
            self.row[(m + self.j_max - 1) as usize] += v;
        } else if m == self.j_max {
            self.known += v * self.boundary.right;
        } else {
            debug_assert_eq!(m, -self.j_max);
            self.known += v * self.boundary.left;
        }
    }
}

fn assemble_operator(
    problem: &CanonicalProblem,
    grid: &Grid,
    scheme: Scheme,
    boundary: BoundaryValues,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let jj = grid.j as i64;
    let n = grid.n_interior();
    let h = grid.h;
    let alpha = problem.alpha.value();
    let jump = problem.jump_weight();
    let c_h = 0.5 * problem.d - jump * riemann_zeta(alpha - 1.0)? * h.powf(2.0 - alpha);

    let nodes = grid.interior_nodes();
    let drift: Vec<f64> = nodes.iter().map(|&z| problem.drift_at(z)).collect();
    if let Some((z, v)) = nodes.iter().zip(&drift).find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteDrift { x: grid.domain.from_canonical(*z), value: *v });
    }
    // kernel weight h / |k h|^{1+α} for |k| ≤ 2J
    let kernel: Vec<f64> = (0..=2 * jj).map(|k| if k == 0 { 0.0 } else { h / (k as f64 * h).powf(1.0 + alpha) }).collect();

    let rows = par::map_indexed(n, |r| {
        let j = r as i64 - jj + 1;
        let z = j as f64 * h;
        let mut row = vec![0.0; n];
        let mut b = RowBuilder { row: &mut row, j_max: jj, boundary, known: 0.0 };

        let second = c_h / (h * h);
        b.add(j - 1, second);
        b.add(j, -2.0 * second);
        b.add(j + 1, second);

        let first = drift[r] / (2.0 * h);
        b.add(j + 1, first);
        b.add(j - 1, -first);

        b.add(j, -jump / alpha * ((1.0 + z).powf(-alpha) + (1.0 - z).powf(-alpha)));

        let plain = |b: &mut RowBuilder, lo: i64, hi: i64| {
            for (k, w) in trapezoid(lo, hi) {
                let c = jump * w * kernel[k.unsigned_abs() as usize];
                b.add(j + k, c);
                b.add(j, -c);
            }
        };
        match scheme {
            Scheme::Simplified => plain(&mut b, -jj - j, jj - j),
            Scheme::Split => {
                // far field runs toward the farther boundary; near field is
                // symmetric with radius min(1 + z, 1 − z)
                let (far, near) = if j >= 0 { ((-jj - j, -jj + j), jj - j) } else { ((jj + j, jj - j), jj + j) };
                plain(&mut b, far.0, far.1);
                // compensator −(U_{j+1} − U_{j−1}) z_k / 2h, where z_k / 2h = k / 2
                let mut comp = 0.0;
                for (k, w) in trapezoid(-near, near) {
                    let c = jump * w * kernel[k.unsigned_abs() as usize];
                    b.add(j + k, c);
                    b.add(j, -c);
                    comp += c * 0.5 * k as f64;
                }
                b.add(j + 1, -comp);
                b.add(j - 1, comp);
            }
        }
        let known = b.known;
        (row, known)
    });
    let matrix = DMatrix::from_fn(n, n, |r, c| rows[r].0[c]);
    let known = rows.iter().map(|(_, k)| *k).collect();
    Ok((matrix, known))
}

/// Mean-exit-time system: `M U = −1` with `U = 0` outside (−1, 1).
pub fn assemble_met_system(problem: &CanonicalProblem, grid: &Grid, scheme: Scheme) -> Result<LinearSystem> {
    let (matrix, known) = assemble_operator(problem, grid, scheme, BoundaryValues { left: 0.0, right: 0.0 })?;
    let rhs = DVector::from_iterator(known.len(), known.iter().map(|k| -1.0 - k));
    LinearSystem::new(matrix, rhs)
}

/// Escape-probability system: same operator; the exterior data `1` on `E`
/// enters through the closed-form jump mass into `E` and, where `E` touches
/// the domain, through the boundary node values.
pub fn assemble_ep_system(problem: &CanonicalProblem, grid: &Grid, target: &TargetSet, scheme: Scheme) -> Result<LinearSystem> {
    target.validate(&grid.domain)?;
    let components = target.to_canonical(&grid.domain);
    const TOUCH: f64 = 1e-12;
    let touches_right = components.iter().any(|&(lo, _)| (lo - 1.0).abs() <= TOUCH);
    let touches_left = components.iter().any(|&(_, hi)| (hi + 1.0).abs() <= TOUCH);
    let boundary = BoundaryValues {
        left: if touches_left { 1.0 } else { 0.0 },
        right: if touches_right { 1.0 } else { 0.0 },
    };
    let (matrix, known) = assemble_operator(problem, grid, scheme, boundary)?;
    let mut rhs = DVector::zeros(known.len());
    for (r, z) in grid.interior_nodes().into_iter().enumerate() {
        let mut mass = 0.0;
        for &component in &components {
            mass += exterior_mass(z, component, problem.alpha, problem.epsilon)?;
        }
        rhs[r] = -mass - known[r];
    }
    LinearSystem::new(matrix, rhs)
}
