//! Dense linear solves for the assembled nonlocal systems: LU with partial
//! pivoting (nalgebra) or restarted GMRES.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `matrix · U = rhs` with rows indexed by interior grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl LinearSystem {
    pub fn new(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != rhs.len() {
            return Err(Error::InvalidParameter(format!(
                "system shape {}x{} with rhs of length {}",
                matrix.nrows(),
                matrix.ncols(),
                rhs.len()
            )));
        }
        if matrix.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("system has non-finite entries".into()));
        }
        Ok(Self { matrix, rhs })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// ‖M u − b‖₂ / ‖b‖₂ (absolute residual when b = 0).
    pub fn relative_residual(&self, u: &DVector<f64>) -> f64 {
        let r = (&self.matrix * u - &self.rhs).norm();
        let b = self.rhs.norm();
        if b > 0.0 {
            r / b
        } else {
            r
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearMethod {
    Lu,
    Gmres {
        restart: usize,
        tol: f64,
        /// Maximum number of restart cycles.
        max_iter: usize,
    },
}

impl Default for LinearMethod {
    fn default() -> Self {
        LinearMethod::Lu
    }
}

impl LinearMethod {
    pub fn gmres_default() -> Self {
        LinearMethod::Gmres { restart: 30, tol: 1e-12, max_iter: 500 }
    }
}

pub fn solve_linear(system: &LinearSystem, method: LinearMethod) -> Result<DVector<f64>> {
    match method {
        LinearMethod::Lu => {
            let lu = system.matrix.clone().lu();
            lu.solve(&system.rhs).ok_or(Error::Singular)
        }
        LinearMethod::Gmres { restart, tol, max_iter } => gmres(&system.matrix, &system.rhs, restart, tol, max_iter),
    }
}

/// Restarted GMRES(m) from a zero initial guess, modified Gram–Schmidt
/// Arnoldi with Givens rotations on the Hessenberg least-squares problem.
pub fn gmres(a: &DMatrix<f64>, b: &DVector<f64>, restart: usize, tol: f64, max_cycles: usize) -> Result<DVector<f64>> {
    let n = b.len();
    let m = restart.clamp(1, n.max(1));
    let bnorm = b.norm();
    let mut x = DVector::zeros(n);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut residual = 1.0;
    let mut iterations = 0;
    for _ in 0..max_cycles {
        let r = b - a * &x;
        let beta = r.norm();
        residual = beta / bnorm;
        if residual <= tol {
            return Ok(x);
        }
        let mut v: Vec<DVector<f64>> = Vec::with_capacity(m + 1);
        v.push(r / beta);
        let mut h = DMatrix::<f64>::zeros(m + 1, m);
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = DVector::<f64>::zeros(m + 1);
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            iterations += 1;
            let mut w = a * &v[k];
            for (i, vi) in v.iter().enumerate() {
                let hik = w.dot(vi);
                h[(i, k)] = hik;
                w.axpy(-hik, vi, 1.0);
            }
            let wn = w.norm();
            h[(k + 1, k)] = wn;
            for i in 0..k {
                let t = cs[i] * h[(i, k)] + sn[i] * h[(i + 1, k)];
                h[(i + 1, k)] = -sn[i] * h[(i, k)] + cs[i] * h[(i + 1, k)];
                h[(i, k)] = t;
            }
            let (hk, hk1) = (h[(k, k)], h[(k + 1, k)]);
            let denom = hk.hypot(hk1);
            if denom == 0.0 {
                break;
            }
            cs[k] = hk / denom;
            sn[k] = hk1 / denom;
            h[(k, k)] = denom;
            h[(k + 1, k)] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            let lucky = wn <= 1e-14 * beta;
            if (g[k + 1].abs() / bnorm) <= tol || lucky {
                break;
            }
            v.push(w / wn);
        }
        // back substitution on the triangularized Hessenberg block
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[(i, j)] * y[j];
            }
            y[i] = s / h[(i, i)];
        }
        for (i, yi) in y.iter().enumerate() {
            x.axpy(*yi, &v[i], 1.0);
        }
    }
    let r = (b - a * &x).norm() / bnorm;
    if r <= tol {
        return Ok(x);
    }
    residual = residual.min(r);
    Err(Error::NonConvergence { iterations, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(m: DMatrix<f64>, b: &[f64]) -> LinearSystem {
        LinearSystem::new(m, DVector::from_column_slice(b)).unwrap()
    }

    #[test]
    fn identity_and_diagonal() {
        for method in [LinearMethod::Lu, LinearMethod::gmres_default()] {
            let u = solve_linear(&sys(DMatrix::identity(3, 3), &[1.0, 2.0, 3.0]), method).unwrap();
            assert_eq!(u.as_slice(), &[1.0, 2.0, 3.0]);
            let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
            let u = solve_linear(&sys(d, &[2.0, 8.0]), method).unwrap();
            assert!((u[0] - 1.0).abs() < 1e-14 && (u[1] - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_lu_reported() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(solve_linear(&sys(m, &[1.0, 1.0]), LinearMethod::Lu), Err(Error::Singular)));
    }

    #[test]
    fn gmres_nonconvergence_carries_residual() {
        // a cyclic shift stalls restarted GMRES(1)
        let n = 8;
        let m = DMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j { 1.0 } else { 0.0 });
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        match solve_linear(&sys(m, &b), LinearMethod::Gmres { restart: 1, tol: 1e-12, max_iter: 5 }) {
            Err(Error::NonConvergence { residual, .. }) => assert!(residual > 1e-12),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn gmres_matches_lu_on_nonsymmetric() {
        let n = 60;
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                4.0 + i as f64 * 0.01
            } else {
                0.3 / (1.0 + (i as f64 - j as f64).abs()).powi(2) * if j > i { 1.5 } else { 0.7 }
            }
        });
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let s = sys(m, &b);
        let lu = solve_linear(&s, LinearMethod::Lu).unwrap();
        let gm = solve_linear(&s, LinearMethod::Gmres { restart: 10, tol: 1e-13, max_iter: 200 }).unwrap();
        assert!((lu - &gm).amax() < 1e-11);
        assert!(s.relative_residual(&gm) <= 1e-13);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(LinearSystem::new(DMatrix::zeros(2, 3), DVector::zeros(2)).is_err());
        assert!(LinearSystem::new(DMatrix::identity(2, 2), DVector::from_vec(vec![1.0, f64::NAN])).is_err());
    }
}
