use crate::costs::Objective;
use crate::error::{Error, Result};
use crate::linalg::{norm, sub};

use super::{bb_coefficient, diverged, safeguard, History, Run, RunOptions, Safeguards, Status, Trace, TraceRecord};

/// `x ← x − σ_k⁻¹ ∇φ(x)` with `σ_k` the safeguarded secant coefficient of the
/// previous displacement. Stops when `‖∇φ‖ ≤ opts.tol`. `reference`, when
/// given, is the known minimizer used for the error column.
pub fn run_centralized_sg(
    objective: &dyn Objective,
    x0: &[f64],
    sigma0: f64,
    guards: Safeguards,
    reference: Option<&[f64]>,
    opts: &RunOptions,
) -> Result<Run> {
    let d = objective.dim();
    if x0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x0.len() });
    }
    if !guards.contains(sigma0) {
        return Err(Error::InvalidArgument(format!(
            "sigma0 = {sigma0} outside [{}, {}]",
            guards.sigma_min(),
            guards.sigma_max()
        )));
    }
    let ref_norm = reference.map(norm);
    let error_of = |x: &[f64]| match (reference, ref_norm) {
        (Some(r), Some(rn)) if rn > 0.0 => norm(&sub(x, r)) / rn,
        (Some(r), _) => norm(&sub(x, r)),
        (None, _) => f64::NAN,
    };

    let mut x = x0.to_vec();
    let mut grad = objective.gradient(&x)?;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut sigma = sigma0;
    let mut records = Vec::new();
    let mut history = opts.record_history.then(History::default);

    let status = loop {
        let k = records.len();
        if let Some((px, pg)) = &prev {
            sigma = safeguard(bb_coefficient(&sub(&x, px), &sub(&grad, pg)), guards, sigma);
        }
        let grad_norm = norm(&grad);
        records.push(TraceRecord {
            k,
            rel_error: error_of(&x),
            step_min: 1.0 / sigma,
            step_mean: 1.0 / sigma,
            step_max: 1.0 / sigma,
            grad_norm,
        });
        if let Some(h) = history.as_mut() {
            h.x.push(x.clone());
            h.sigma.push(vec![sigma]);
        }
        if diverged(&x) || !grad_norm.is_finite() {
            break Status::Diverged;
        }
        if grad_norm <= opts.tol {
            break Status::Converged;
        }
        if k == opts.max_iters {
            break Status::MaxIters;
        }
        let next: Vec<f64> = x.iter().zip(&grad).map(|(x, g)| x - g / sigma).collect();
        let next_grad = objective.gradient(&next)?;
        prev = Some((std::mem::replace(&mut x, next), std::mem::replace(&mut grad, next_grad)));
    };

    Ok(Run {
        trace: Trace { algorithm: "centralized-sg".into(), records, status, history },
        x,
    })
}
