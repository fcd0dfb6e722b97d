//! Nelder–Mead on a box, run in logit coordinates so every vertex maps back
//! inside the bounds, restarted from a lattice of starting points.

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidParameter("bounds must be non-empty and of equal length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidParameter("every bound needs finite lower < upper".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn to_box(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&ti, (&l, &u))| l + (u - l) / (1.0 + (-ti).exp()))
            .collect()
    }

    fn to_unbounded(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.lower.iter().zip(&self.upper)).map(|(&xi, (&l, &u))| ((xi - l) / (u - xi)).ln()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    /// Starting points per axis; the lattice has `multistart^dim` points.
    pub multistart: usize,
    /// Objective evaluations allowed per start.
    pub max_evals: usize,
    /// Stop once the simplex spans at most this fraction of every box side.
    pub xtol: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { multistart: 3, max_evals: 200, xtol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub start: usize,
    pub step: usize,
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiMinimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evaluations: usize,
    /// Ordered by (start, step).
    pub trace: Vec<TraceEntry>,
}

// initial simplex edge in logit units
const SIMPLEX_STEP: f64 = 0.6;

struct Run<'a, F> {
    f: &'a F,
    bounds: &'a BoxBounds,
    start: usize,
    trace: Vec<TraceEntry>,
    max_evals: usize,
}

impl<F: Fn(&[f64]) -> f64> Run<'_, F> {
    fn eval(&mut self, t: &[f64]) -> f64 {
        let x = self.bounds.to_box(t);
        let v = (self.f)(&x);
        self.trace.push(TraceEntry { start: self.start, step: self.trace.len(), x, value: v });
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn exhausted(&self) -> bool {
        self.trace.len() >= self.max_evals
    }

    fn diameter(&self, simplex: &[(Vec<f64>, f64)]) -> f64 {
        let best = self.bounds.to_box(&simplex[0].0);
        simplex[1..]
            .iter()
            .flat_map(|(t, _)| {
                let x = self.bounds.to_box(t);
                x.into_iter()
                    .zip(&best)
                    .zip(self.bounds.lower.iter().zip(&self.bounds.upper))
                    .map(|((a, b), (l, u))| (a - b).abs() / (u - l))
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    /// One Nelder–Mead descent from `t0` with value `f0`.
    fn descend(&mut self, t0: Vec<f64>, f0: f64, xtol: f64) -> (Vec<f64>, f64) {
        let n = t0.len();
        let mut simplex = vec![(t0.clone(), f0)];
        for i in 0..n {
            let mut t = t0.clone();
            t[i] += SIMPLEX_STEP;
            let v = self.eval(&t);
            simplex.push((t, v));
        }
        let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
        order(&mut simplex);
        while !self.exhausted() && self.diameter(&simplex) > xtol {
            let worst = simplex[n].clone();
            let centroid: Vec<f64> =
                (0..n).map(|k| simplex[..n].iter().map(|(t, _)| t[k]).sum::<f64>() / n as f64).collect();
            let along = |c: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(m, w)| m + c * (m - w)).collect() };

            let reflected = along(1.0);
            let fr = self.eval(&reflected);
            if fr < simplex[0].1 {
                let expanded = along(2.0);
                let fe = self.eval(&expanded);
                simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (reflected, fr);
            } else {
                let (contracted, fc) = if fr < worst.1 {
                    let c = along(0.5);
                    let v = self.eval(&c);
                    (c, v)
                } else {
                    let c = along(-0.5);
                    let v = self.eval(&c);
                    (c, v)
                };
                if fc < worst.1.min(fr) {
                    simplex[n] = (contracted, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        let t: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
                        let v = self.eval(&t);
                        *vertex = (t, v);
                    }
                }
            }
            order(&mut simplex);
        }
        simplex.swap_remove(0)
    }
}

fn lattice(bounds: &BoxBounds, per_axis: usize) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for (l, u) in bounds.lower.iter().zip(&bounds.upper) {
        let axis: Vec<f64> = (0..per_axis).map(|i| l + (u - l) * (i as f64 + 0.5) / per_axis as f64).collect();
        points = points.into_iter().flat_map(|p| axis.iter().map(move |&a| [p.clone(), vec![a]].concat())).collect();
    }
    points
}

/// Minimizes `f` over `bounds` with Nelder–Mead started from every point of
/// a `multistart^dim` lattice (cell centers). Each start is followed by one
/// restart from its best vertex. Starts run concurrently; the merged trace
/// is ordered by (start, step) regardless of scheduling.
pub fn minimize_multi<F>(f: F, bounds: &BoxBounds, config: &NelderMeadConfig) -> Result<MultiMinimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if config.multistart == 0 || config.max_evals == 0 {
        return Err(Error::InvalidParameter("multistart and max_evals must be positive".into()));
    }
    let starts = lattice(bounds, config.multistart);
    let runs = par::map_indexed(starts.len(), |s| {
        let mut run = Run { f: &f, bounds, start: s, trace: Vec::new(), max_evals: config.max_evals };
        let t0 = bounds.to_unbounded(&starts[s]);
        let f0 = run.eval(&t0);
        if !f0.is_finite() {
            return (None, run.trace);
        }
        let (t1, f1) = run.descend(t0, f0, config.xtol);
        let (t2, f2) = if run.exhausted() { (t1.clone(), f1) } else { run.descend(t1.clone(), f1, config.xtol) };
        let best = if f2 <= f1 { (t2, f2) } else { (t1, f1) };
        (Some((bounds.to_box(&best.0), best.1)), run.trace)
    });

    let mut trace = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (result, run_trace) in runs {
        trace.extend(run_trace);
        if let Some((x, v)) = result {
            if best.as_ref().map_or(true, |b| v < b.1) {
                best = Some((x, v));
            }
        }
    }
    let (x, fx) = best.ok_or_else(|| Error::EstimationFailed("objective non-finite at every starting point".into()))?;
    Ok(MultiMinimum { x, fx, evaluations: trace.len(), trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_quadratic() {
        let bounds = BoxBounds::new(vec![0.1, 0.1], vec![1.9, 3.0]).unwrap();
        let r = minimize_multi(|v| (v[0] - 0.6).powi(2) + (v[1] - 1.5).powi(2), &bounds, &NelderMeadConfig::default())
            .unwrap();
        assert!((r.x[0] - 0.6).abs() < 1e-4 && (r.x[1] - 1.5).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn rosenbrock_in_box() {
        let bounds = BoxBounds::new(vec![-2.0, -1.0], vec![2.0, 3.0]).unwrap();
        let cfg = NelderMeadConfig { multistart: 2, max_evals: 2000, xtol: 1e-9 };
        let r = minimize_multi(|v| 100.0 * (v[1] - v[0] * v[0]).powi(2) + (1.0 - v[0]).powi(2), &bounds, &cfg).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn iterates_stay_in_box() {
        let bounds = BoxBounds::new(vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 3.0]).unwrap();
        // unconstrained minimum far outside the box
        let r = minimize_multi(|v| v.iter().map(|x| (x + 5.0).powi(2)).sum(), &bounds, &NelderMeadConfig::default())
            .unwrap();
        for e in &r.trace {
            for (k, x) in e.x.iter().enumerate() {
                assert!(*x >= bounds.lower[k] && *x <= bounds.upper[k]);
            }
        }
        assert!(r.x.iter().all(|x| *x < 1e-3));
    }

    #[test]
    fn trace_is_ordered_and_best_is_minimum() {
        let bounds = BoxBounds::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let r = minimize_multi(|v| (v[0] * 3.0).sin() + v[1] * v[1], &bounds, &NelderMeadConfig::default()).unwrap();
        let keys: Vec<_> = r.trace.iter().map(|e| (e.start, e.step)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(r.trace.iter().all(|e| r.fx <= e.value));
        assert_eq!(r.evaluations, r.trace.len());
    }

    #[test]
    fn skips_failing_starts_and_errors_when_all_fail() {
        let bounds = BoxBounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let r = minimize_multi(|v| if v[0] < 0.3 { f64::NAN } else { (v[0] - 0.8).powi(2) + v[1] }, &bounds, &NelderMeadConfig::default())
            .unwrap();
        assert!((r.x[0] - 0.8).abs() < 1e-3);
        assert!(minimize_multi(|_| f64::NAN, &bounds, &NelderMeadConfig::default()).is_err());
    }

    #[test]
    fn lattice_is_cell_centred() {
        let bounds = BoxBounds::new(vec![0.0, 10.0], vec![3.0, 16.0]).unwrap();
        let pts = lattice(&bounds, 3);
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], vec![0.5, 11.0]);
        assert_eq!(pts[8], vec![2.5, 15.0]);
    }
}
