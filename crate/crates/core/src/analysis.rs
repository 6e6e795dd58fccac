//! Error metrics, step-by-step checks of the closed-form error dynamics on
//! quadratics, the safeguard-interval diagnostic and rate estimation.

use serde::Serialize;

use crate::costs::{Cost, CostEnsemble, Objective};
use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix};
use crate::mixing::MixingMatrix;
use crate::solvers::{Safeguards, Trace};

/// `(1/n) Σ_i ‖x_i − y*‖ / ‖y*‖`.
pub fn relative_error(x: &[f64], y_star: &[f64]) -> Result<f64> {
    let d = y_star.len();
    if d == 0 || !x.len().is_multiple_of(d) {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let scale = norm(y_star);
    if scale == 0.0 {
        return Err(Error::ZeroMinimizer);
    }
    Ok(mean_distance(x, y_star) / scale)
}

/// Relative error when `y* ≠ 0`, the plain mean distance otherwise.
pub fn error_metric(x: &[f64], y_star: &[f64]) -> f64 {
    let scale = norm(y_star);
    let dist = mean_distance(x, y_star);
    if scale > 0.0 { dist / scale } else { dist }
}

fn mean_distance(x: &[f64], y_star: &[f64]) -> f64 {
    let d = y_star.len();
    let n = x.len() / d;
    let total: f64 = x
        .chunks_exact(d)
        .map(|xi| xi.iter().zip(y_star).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .sum();
    total / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDecomposition {
    /// `x − 1⊗y*`.
    pub e: Vec<f64>,
    /// Consensus violation `(I − J)x`.
    pub x_tilde: Vec<f64>,
    /// `x̄ − y*`.
    pub e_bar: Vec<f64>,
    /// `v + ∇F(1⊗y*)` for the primal-dual variable `v`.
    pub u_tilde: Vec<f64>,
}

fn block_mean(x: &[f64], d: usize) -> Vec<f64> {
    let n = x.len() / d;
    let mut mean = vec![0.0; d];
    for block in x.chunks_exact(d) {
        for (m, v) in mean.iter_mut().zip(block) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    mean
}

pub fn decompose_error(x: &[f64], u: &[f64], e: &CostEnsemble) -> Result<ErrorDecomposition> {
    let (n, d) = (e.n(), e.d());
    for v in [x, u] {
        if v.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, got: v.len() });
        }
    }
    let mean = block_mean(x, d);
    let y = e.y_star();
    let err: Vec<f64> = x.chunks_exact(d).flat_map(|b| b.iter().zip(y).map(|(a, c)| a - c)).collect();
    let x_tilde = x.chunks_exact(d).flat_map(|b| b.iter().zip(&mean).map(|(a, m)| a - m)).collect();
    let e_bar = mean.iter().zip(y).map(|(m, c)| m - c).collect();
    let grad_star = e.stacked_gradient(&e.stacked_minimizer())?;
    let u_tilde = u.iter().zip(&grad_star).map(|(a, b)| a + b).collect();
    Ok(ErrorDecomposition { e: err, x_tilde, e_bar, u_tilde })
}

/// Largest step residual `‖e^{k+1} − (I − σ_k⁻¹A)e^k‖ / max(1, ‖e^k‖)` of a
/// centralized run on `½xᵀAx + …` with minimizer `x_star`. The trace needs
/// recorded history.
pub fn verify_sg_recursion(trace: &Trace, a: &Matrix, x_star: &[f64]) -> Result<f64> {
    let h = trace
        .history
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("trace has no recorded history".into()))?;
    let mut worst = 0.0f64;
    for k in 0..h.x.len().saturating_sub(1) {
        let ek: Vec<f64> = x_star.iter().zip(&h.x[k]).map(|(s, x)| s - x).collect();
        let ek1: Vec<f64> = x_star.iter().zip(&h.x[k + 1]).map(|(s, x)| s - x).collect();
        let sigma = h.sigma[k][0];
        let aek = a.matvec(&ek)?;
        let resid: Vec<f64> = (0..ek.len()).map(|i| ek1[i] - (ek[i] - aek[i] / sigma)).collect();
        worst = worst.max(norm(&resid) / norm(&ek).max(1.0));
    }
    Ok(worst)
}

/// Curvatures `h_i` and shifts `b_i` of a one-dimensional quadratic ensemble.
fn scalar_quadratics(e: &CostEnsemble) -> Result<(Vec<f64>, Vec<f64>)> {
    if e.d() != 1 {
        return Err(Error::InvalidArgument(format!("error dynamics check needs d = 1, got d = {}", e.d())));
    }
    let mut h = Vec::with_capacity(e.n());
    let mut b = Vec::with_capacity(e.n());
    for c in e.costs() {
        let Cost::Quadratic(q) = c else {
            return Err(Error::InvalidArgument("error dynamics check needs quadratic costs".into()));
        };
        h.push(q.hessian()[(0, 0)]);
        b.push(q.shift()[0]);
    }
    Ok((h, b))
}

/// The `2n × 2n` matrix `[[W − Σ⁻¹H, −Σ⁻¹], [(W − I)H, W − J]]` propagating
/// `(e, ũ)` for one-dimensional quadratics.
pub fn dsg_recursion_matrix(e: &CostEnsemble, m: &MixingMatrix, sigma: &[f64]) -> Result<Matrix> {
    let (h, _) = scalar_quadratics(e)?;
    let n = e.n();
    if sigma.len() != n || m.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sigma.len() });
    }
    let inv_n = 1.0 / n as f64;
    Ok(Matrix::from_fn(2 * n, 2 * n, |r, c| {
        let w = m.weight(r % n, c % n);
        let (i, j) = (r % n, c % n);
        let eye = if i == j { 1.0 } else { 0.0 };
        match (r < n, c < n) {
            (true, true) => w - eye * h[j] / sigma[i],
            (true, false) => -eye / sigma[i],
            (false, true) => (w - eye) * h[j],
            (false, false) => w - inv_n,
        }
    }))
}

/// Largest relative residual of the primal-dual error recursion over a
/// recorded primal-dual DSG trace on one-dimensional quadratics.
pub fn verify_dsg_recursion(trace: &Trace, e: &CostEnsemble, m: &MixingMatrix) -> Result<f64> {
    if trace.algorithm != "dsg-pd" {
        return Err(Error::InvalidArgument(format!(
            "error dynamics check needs a primal-dual DSG trace, got `{}`",
            trace.algorithm
        )));
    }
    let (h, b) = scalar_quadratics(e)?;
    let hist = trace
        .history
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("trace has no recorded history".into()))?;
    let y = e.y_star()[0];
    let grad_star: Vec<f64> = h.iter().zip(&b).map(|(hi, bi)| hi * (y - bi)).collect();
    let stacked = |k: usize| -> Vec<f64> {
        let err = hist.x[k].iter().map(|x| x - y);
        let dual = hist.aux[k].iter().zip(&grad_star).map(|(v, g)| v + g);
        err.chain(dual).collect()
    };
    let mut worst = 0.0f64;
    for k in 0..hist.x.len().saturating_sub(1) {
        let z = stacked(k);
        let z1 = stacked(k + 1);
        let pred = dsg_recursion_matrix(e, m, &hist.sigma[k])?.matvec(&z)?;
        let resid: Vec<f64> = z1.iter().zip(&pred).map(|(a, b)| a - b).collect();
        worst = worst.max(norm(&resid) / norm(&z).max(1.0));
    }
    Ok(worst)
}

/// Sufficient step-size conditions for R-linear convergence, evaluated for
/// a concrete safeguard interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SafeguardReport {
    pub d_min: f64,
    pub d_max: f64,
    pub delta: f64,
    /// `d_max / d_min < 1 + μ/L`.
    pub cond_ratio_ok: bool,
    /// `d_max < (1 − λ₂)/(μ + L)`.
    pub cond_magnitude_ok: bool,
    /// Open interval of admissible contraction factors, if nonempty.
    pub delta_feasible: Option<(f64, f64)>,
}

impl SafeguardReport {
    pub fn all_ok(&self) -> bool {
        self.cond_ratio_ok && self.cond_magnitude_ok && self.delta_feasible.is_some()
    }
}

pub fn check_safeguards(mu: f64, l: f64, lambda2: f64, _lambda_n: f64, g: Safeguards) -> SafeguardReport {
    let d_min = g.d_min();
    let d_max = g.d_max();
    let delta = d_max - d_min;
    let lower = 1.0 - d_min * mu + delta * l;
    SafeguardReport {
        d_min,
        d_max,
        delta,
        cond_ratio_ok: d_max / d_min < 1.0 + mu / l,
        cond_magnitude_ok: d_max < (1.0 - lambda2) / (mu + l),
        delta_feasible: (lower < 1.0).then_some((lower.max(0.0), 1.0)),
    }
}

/// Least-squares slope of `ln(error)` against `k` over the trailing
/// `tail_fraction` of the trace. Exactly-zero errors are skipped; if none
/// are left the run hit the solution and the slope is `-inf`.
pub fn estimate_rate(trace: &Trace, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("tail fraction must lie in (0, 1), got {tail_fraction}")));
    }
    let len = trace.records.len();
    if len < 20 {
        return Err(Error::InvalidArgument(format!("need at least 20 records, got {len}")));
    }
    let take = ((len as f64 * tail_fraction).ceil() as usize).clamp(2, len);
    let points: Vec<(f64, f64)> = trace.records[len - take..]
        .iter()
        .filter(|r| r.rel_error > 0.0)
        .map(|r| (r.k as f64, r.rel_error.ln()))
        .collect();
    if points.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite error in trace tail".into()));
    }
    if points.len() < 2 {
        return Ok(f64::NEG_INFINITY);
    }
    let count = points.len() as f64;
    let mk = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mv = points.iter().map(|p| p.1).sum::<f64>() / count;
    let sxy: f64 = points.iter().map(|(k, v)| (k - mk) * (v - mv)).sum();
    let sxx: f64 = points.iter().map(|(k, _)| (k - mk) * (k - mk)).sum();
    Ok(sxy / sxx)
}

/// `‖Σ_i ∇f_i(y*)‖` for any ensemble.
pub fn stationarity(e: &CostEnsemble) -> Result<f64> {
    Ok(norm(&e.aggregate().gradient(e.y_star())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{Status, TraceRecord};

    fn synthetic(errors: impl Iterator<Item = f64>) -> Trace {
        let records = errors
            .enumerate()
            .map(|(k, rel_error)| TraceRecord { k, rel_error, step_min: 1.0, step_mean: 1.0, step_max: 1.0, grad_norm: 0.0 })
            .collect();
        Trace { algorithm: "synthetic".into(), records, status: Status::MaxIters, history: None }
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(&[1.0, 0.0, 3.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(relative_error(&[2.0, 4.0, 2.0, 4.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(relative_error(&[1.0, 2.0, 1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(relative_error(&[1.0, 2.0], &[0.0, 0.0]), Err(Error::ZeroMinimizer)));
    }

    #[test]
    fn safeguard_report_examples() {
        let r = check_safeguards(1.0, 1.0, 0.5, 0.0, Safeguards::pinned(10.0).unwrap());
        assert!((r.d_min - 0.1).abs() < 1e-15 && r.delta == 0.0);
        assert!(r.cond_ratio_ok && r.cond_magnitude_ok);
        let (lo, hi) = r.delta_feasible.unwrap();
        assert!((lo - 0.9).abs() < 1e-12 && hi == 1.0);

        let r = check_safeguards(1.0, 10.0, 0.5, 0.0, Safeguards::new(1.0, 100.0).unwrap());
        assert!(!r.cond_ratio_ok);
        assert!(r.delta_feasible.is_none());
        assert!(!r.all_ok());
    }

    #[test]
    fn pinned_safeguards_always_satisfy_ratio() {
        for (mu, l) in [(1.0, 1.0), (0.01, 100.0), (3.0, 7.0)] {
            let r = check_safeguards(mu, l, 0.9, -0.5, Safeguards::pinned(1e6).unwrap());
            assert!(r.cond_ratio_ok);
        }
    }

    #[test]
    fn rate_of_geometric_sequence() {
        let t = synthetic((0..60).map(|k| 0.5f64.powi(k)));
        assert!((estimate_rate(&t, 0.5).unwrap() - 0.5f64.ln()).abs() < 1e-6);
        let t = synthetic((0..30).map(|_| 0.2));
        assert!(estimate_rate(&t, 0.3).unwrap().abs() < 1e-12);
        let t = synthetic((0..30).map(|k| if k < 10 { 1.0 } else { 0.0 }));
        assert_eq!(estimate_rate(&t, 0.5).unwrap(), f64::NEG_INFINITY);
        assert!(estimate_rate(&synthetic((0..10).map(|_| 1.0)), 0.5).is_err());
        assert!(estimate_rate(&t, 1.0).is_err());
    }
}
