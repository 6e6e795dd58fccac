use crate::analysis::error_metric;
use crate::costs::CostEnsemble;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::mixing::MixingMatrix;

use super::{diverged, dsg_coefficients, step_stats, History, Run, RunOptions, Safeguards, Status, Trace, TraceRecord};

/// Per-node iterate and auxiliary state of the tracking family.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub x: Vec<f64>,
    /// Tracker `u` (tracker form) or dual `v` (primal-dual form).
    pub aux: Vec<f64>,
    pub grad: Vec<f64>,
    pub prev_x: Option<Vec<f64>>,
    pub prev_grad: Option<Vec<f64>>,
    pub sigma: Vec<f64>,
}

impl SolverState {
    /// Stacked displacement `s = x^k − x^{k−1}` and gradient difference
    /// `y = ∇F(x^k) − ∇F(x^{k−1})`; `None` at `k = 0`.
    pub fn differences(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let px = self.prev_x.as_ref()?;
        let pg = self.prev_grad.as_ref()?;
        let s = self.x.iter().zip(px).map(|(a, b)| a - b).collect();
        let y = self.grad.iter().zip(pg).map(|(a, b)| a - b).collect();
        Some((s, y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    /// `x⁺ = Wx − D u`, `u⁺ = Wu + ∇F(x⁺) − ∇F(x)`, `u⁰ = ∇F(x⁰)`.
    Tracker,
    /// `x⁺ = Wx − D(∇F(x) + v)`, `v⁺ = Wv + (W − I)∇F(x)`, `v⁰ = 0`.
    PrimalDual,
}

#[derive(Debug, Clone, Copy)]
enum StepPolicy {
    Spectral { guards: Safeguards, sigma_init: f64 },
    Constant { alpha: f64 },
}

fn check_inputs(e: &CostEnsemble, m: &MixingMatrix, x0: &[f64]) -> Result<()> {
    if m.n() != e.n() {
        return Err(Error::DimensionMismatch { expected: e.n(), got: m.n() });
    }
    if x0.len() != e.n() * e.d() {
        return Err(Error::DimensionMismatch { expected: e.n() * e.d(), got: x0.len() });
    }
    Ok(())
}

fn check_sigma_init(guards: Safeguards, sigma_init: f64) -> Result<()> {
    if !guards.contains(sigma_init) {
        return Err(Error::InvalidArgument(format!(
            "sigma_init = {sigma_init} outside [{}, {}]",
            guards.sigma_min(),
            guards.sigma_max()
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("step-size must be positive, got {alpha}")));
    }
    Ok(())
}

/// Distributed spectral gradient method, tracker form.
pub fn run_dsg_form_a(
    e: &CostEnsemble,
    m: &MixingMatrix,
    guards: Safeguards,
    sigma_init: f64,
    x0: &[f64],
    opts: &RunOptions,
) -> Result<Run> {
    check_sigma_init(guards, sigma_init)?;
    run_family(e, m, x0, Form::Tracker, StepPolicy::Spectral { guards, sigma_init }, opts, "dsg")
}

/// Distributed spectral gradient method, primal-dual form.
pub fn run_dsg_form_b(
    e: &CostEnsemble,
    m: &MixingMatrix,
    guards: Safeguards,
    sigma_init: f64,
    x0: &[f64],
    opts: &RunOptions,
) -> Result<Run> {
    check_sigma_init(guards, sigma_init)?;
    run_family(e, m, x0, Form::PrimalDual, StepPolicy::Spectral { guards, sigma_init }, opts, "dsg-pd")
}

/// Gradient tracking with a constant step `alpha`. Divergence is reported
/// through the trace status.
pub fn run_gradient_tracking(
    e: &CostEnsemble,
    m: &MixingMatrix,
    alpha: f64,
    x0: &[f64],
    opts: &RunOptions,
) -> Result<Run> {
    check_alpha(alpha)?;
    run_family(e, m, x0, Form::Tracker, StepPolicy::Constant { alpha }, opts, "tracking")
}

fn run_family(
    e: &CostEnsemble,
    m: &MixingMatrix,
    x0: &[f64],
    form: Form,
    policy: StepPolicy,
    opts: &RunOptions,
    name: &str,
) -> Result<Run> {
    check_inputs(e, m, x0)?;
    let (n, d) = (e.n(), e.d());
    let grad = e.stacked_gradient(x0)?;
    let aux = match form {
        Form::Tracker => grad.clone(),
        Form::PrimalDual => vec![0.0; n * d],
    };
    let sigma0 = match policy {
        StepPolicy::Spectral { sigma_init, .. } => sigma_init,
        StepPolicy::Constant { alpha } => 1.0 / alpha,
    };
    let mut st = SolverState {
        n,
        d,
        k: 0,
        x: x0.to_vec(),
        aux,
        grad,
        prev_x: None,
        prev_grad: None,
        sigma: vec![sigma0; n],
    };
    let mut records = Vec::new();
    let mut history = opts.record_history.then(History::default);

    let status = loop {
        if let StepPolicy::Spectral { guards, .. } = policy {
            if let Some((s, y)) = st.differences() {
                st.sigma = dsg_coefficients(&s, &y, &st.sigma, d, m, guards);
            }
        }
        let steps = |i: usize| match policy {
            StepPolicy::Spectral { .. } => 1.0 / st.sigma[i],
            StepPolicy::Constant { alpha } => alpha,
        };
        let (step_min, step_mean, step_max) = step_stats((0..n).map(steps));
        records.push(TraceRecord {
            k: st.k,
            rel_error: error_metric(&st.x, e.y_star()),
            step_min,
            step_mean,
            step_max,
            grad_norm: grad_sum_norm(&st.grad, d),
        });
        if let Some(h) = history.as_mut() {
            h.x.push(st.x.clone());
            h.aux.push(st.aux.clone());
            h.sigma.push(st.sigma.clone());
        }
        if diverged(&st.x) || diverged(&st.aux) {
            break Status::Diverged;
        }
        if records.last().unwrap().rel_error <= opts.tol {
            break Status::Converged;
        }
        if st.k == opts.max_iters {
            break Status::MaxIters;
        }

        let mut next = m.mix(&st.x, d)?;
        let mixed_aux = m.mix(&st.aux, d)?;
        for i in 0..n {
            let block = i * d..(i + 1) * d;
            for idx in block {
                let dir = match form {
                    Form::Tracker => st.aux[idx],
                    Form::PrimalDual => st.grad[idx] + st.aux[idx],
                };
                next[idx] -= match policy {
                    StepPolicy::Spectral { .. } => dir / st.sigma[i],
                    StepPolicy::Constant { alpha } => alpha * dir,
                };
            }
        }
        let next_grad = e.stacked_gradient(&next)?;
        let next_aux: Vec<f64> = match form {
            Form::Tracker => (0..n * d).map(|idx| mixed_aux[idx] + (next_grad[idx] - st.grad[idx])).collect(),
            Form::PrimalDual => {
                let mixed_grad = m.mix(&st.grad, d)?;
                (0..n * d).map(|idx| mixed_aux[idx] + (mixed_grad[idx] - st.grad[idx])).collect()
            }
        };
        st.prev_x = Some(std::mem::replace(&mut st.x, next));
        st.prev_grad = Some(std::mem::replace(&mut st.grad, next_grad));
        st.aux = next_aux;
        st.k += 1;
    };

    Ok(Run { trace: Trace { algorithm: name.into(), records, status, history }, x: st.x })
}

/// Plain distributed gradient descent `x⁺ = Wx − α∇F(x)`. `alpha = 0` gives
/// pure averaging.
pub fn run_dgd(e: &CostEnsemble, m: &MixingMatrix, alpha: f64, x0: &[f64], opts: &RunOptions) -> Result<Run> {
    check_inputs(e, m, x0)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("step-size must be nonnegative, got {alpha}")));
    }
    let (n, d) = (e.n(), e.d());
    let mut x = x0.to_vec();
    let mut grad = e.stacked_gradient(&x)?;
    let mut records = Vec::new();
    let mut history = opts.record_history.then(History::default);
    let mut mixed = vec![0.0; n * d];
    let status = loop {
        let k = records.len();
        records.push(TraceRecord {
            k,
            rel_error: error_metric(&x, e.y_star()),
            step_min: alpha,
            step_mean: alpha,
            step_max: alpha,
            grad_norm: grad_sum_norm(&grad, d),
        });
        if let Some(h) = history.as_mut() {
            h.x.push(x.clone());
        }
        if diverged(&x) {
            break Status::Diverged;
        }
        if records[k].rel_error <= opts.tol {
            break Status::Converged;
        }
        if k == opts.max_iters {
            break Status::MaxIters;
        }
        m.mix_into(&x, d, &mut mixed)?;
        for (xi, (mi, gi)) in x.iter_mut().zip(mixed.iter().zip(&grad)) {
            *xi = mi - alpha * gi;
        }
        grad = e.stacked_gradient(&x)?;
    };
    Ok(Run { trace: Trace { algorithm: "dgd".into(), records, status, history }, x })
}

fn grad_sum_norm(grad: &[f64], d: usize) -> f64 {
    let mut sum = vec![0.0; d];
    for block in grad.chunks_exact(d) {
        for (acc, g) in sum.iter_mut().zip(block) {
            *acc += g;
        }
    }
    norm(&sum)
}
