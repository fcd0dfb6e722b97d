use crate::error::{Error, Result};

/// (3 − √5) / 2
const GOLDEN: f64 = 0.381_966_011_250_105_15;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMinimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
    /// Every probe in evaluation order.
    pub probes: Vec<(f64, f64)>,
}

/// Bounded minimization on `[lo, hi]` by Brent's method: successive parabolic
/// interpolation through the three best points, with golden-section steps
/// whenever the parabola falls outside the bracket or fails to shrink it.
///
/// Stops when the bracket width is at most `xtol · (1 + |x|)` or after
/// `max_eval` evaluations. The returned point is the best one probed.
pub fn minimize_scalar<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_eval: usize) -> Result<ScalarMinimum>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("bracket [{lo}, {hi}] is empty")));
    }
    if !(xtol > 0.0) || max_eval == 0 {
        return Err(Error::InvalidParameter("xtol must be positive and max_eval non-zero".into()));
    }
    let mut probes = Vec::new();
    let mut eval = |x: f64, probes: &mut Vec<(f64, f64)>| -> Result<f64> {
        let v = f(x);
        probes.push((x, v));
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective { at: vec![x], value: v })
        }
    };

    let sqrt_eps = f64::EPSILON.sqrt();
    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(x, &mut probes)?;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);

    while probes.len() < max_eval {
        let m = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + 0.25 * xtol * (1.0 + x.abs());
        let tol2 = 2.0 * tol1;
        if b - a <= xtol * (1.0 + x.abs()) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(m - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = eval(u, &mut probes)?;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    let (bx, bf) = probes.iter().copied().fold((x, fx), |best, p| if p.1 < best.1 { p } else { best });
    Ok(ScalarMinimum { x: bx, fx: bf, evaluations: probes.len(), probes })
}
