//! Self-checks behind `dsg verify`: closed-form error dynamics, form
//! equivalence, tracking identities and gradient oracles on small seeded
//! problems.

use crate::analysis::{verify_dsg_recursion, verify_sg_recursion};
use crate::costs::{Cost, CostEnsemble, Objective, QuadraticCost, QuadraticRanges};
use crate::error::Result;
use crate::linalg::{norm, Matrix};
use crate::mixing::MixingMatrix;
use crate::network::Graph;
use crate::rng::{random_vector, SeededRng, STREAM_TEST};
use crate::solvers::{run_centralized_sg, run_dsg_form_a, run_dsg_form_b, RunOptions, Safeguards};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, bound: f64) -> Check {
    Check { name, passed: value <= bound, detail: format!("{value:.3e} <= {bound:.0e}") }
}

fn history_opts(max_iters: usize) -> RunOptions {
    RunOptions { max_iters, tol: 0.0, record_history: true }
}

/// Worst residual of the centralized error recursion on random SPD
/// quadratics of dimension 10.
pub fn sg_recursion_residual(seeds: &[u64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &seed in seeds {
        let e = CostEnsemble::generate_quadratic(1, 10, seed, QuadraticRanges::default())?;
        let Cost::Quadratic(q) = &e.costs()[0] else { unreachable!() };
        let guards = Safeguards::new(0.5, 200.0)?;
        let run = run_centralized_sg(q, &[0.0; 10], e.l(), guards, Some(e.y_star()), &history_opts(100))?;
        worst = worst.max(verify_sg_recursion(&run.trace, q.hessian(), e.y_star())?);
    }
    Ok(worst)
}

/// Error at `k = 2` of the centralized method on `½ a‖x − b‖²`.
pub fn scaled_identity_error(a: f64) -> Result<f64> {
    let b = vec![3.0, -1.0, 2.0, 0.5];
    let q = QuadraticCost::new(Matrix::identity(4).scale(a), b.clone())?;
    let run = run_centralized_sg(&q, &[0.0; 4], 1.0, Safeguards::new(0.1, 1e3)?, Some(&b), &history_opts(2))?;
    let x2 = &run.trace.history.as_ref().expect("history recorded").x[2];
    Ok(norm(&crate::linalg::sub(x2, &b)))
}

/// Ring of five scalar quadratics with curvatures in `[1, 10]`.
pub fn scalar_ring(seed: u64) -> Result<(CostEnsemble, MixingMatrix)> {
    let e = CostEnsemble::generate_quadratic(5, 1, seed, QuadraticRanges { shift: (1.0, 31.0), eigen: (1.0, 10.0) })?;
    let m = MixingMatrix::max_degree(&Graph::ring(5))?;
    Ok((e, m))
}

pub fn dsg_recursion_residual(seeds: &[u64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &seed in seeds {
        let (e, m) = scalar_ring(seed)?;
        let guards = Safeguards::new(e.l(), 1e8)?;
        let run = run_dsg_form_b(&e, &m, guards, 3.0 * e.l(), &[0.0; 5], &history_opts(100))?;
        worst = worst.max(verify_dsg_recursion(&run.trace, &e, &m)?);
    }
    Ok(worst)
}

/// Largest relative gap between tracker-form and primal-dual-form iterates,
/// together with the number of iterates compared. A run that trips the
/// divergence guard is compared up to the shorter of the two histories.
pub fn form_gap(e: &CostEnsemble, m: &MixingMatrix, guards: Safeguards, sigma_init: f64, iters: usize) -> Result<(f64, usize)> {
    let x0 = vec![0.0; e.n() * e.d()];
    let a = run_dsg_form_a(e, m, guards, sigma_init, &x0, &history_opts(iters))?;
    let b = run_dsg_form_b(e, m, guards, sigma_init, &x0, &history_opts(iters))?;
    let (ha, hb) = (a.trace.history.unwrap(), b.trace.history.unwrap());
    let mut worst = 0.0f64;
    for (xa, xb) in ha.x.iter().zip(&hb.x) {
        let diff = norm(&crate::linalg::sub(xa, xb));
        worst = worst.max(diff / norm(xa).max(norm(xb)).max(1e-300));
    }
    Ok((worst, ha.x.len().min(hb.x.len())))
}

/// Worst violation of `mean(u) = mean(∇F(x))` (tracker form) and
/// `mean(v) = 0` (primal-dual form), measured against the root-mean-square
/// block norm of the tracked quantity (floored at 1).
pub fn tracking_identity_gap(e: &CostEnsemble, m: &MixingMatrix, guards: Safeguards, sigma_init: f64, iters: usize) -> Result<f64> {
    let (n, d) = (e.n(), e.d());
    let x0 = vec![0.0; n * d];
    let mean = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; d];
        for block in v.chunks_exact(d) {
            out.iter_mut().zip(block).for_each(|(o, b)| *o += b / n as f64);
        }
        out
    };
    let scale = |v: &[f64]| (norm(v) / (n as f64).sqrt()).max(1.0);
    let mut worst = 0.0f64;
    let a = run_dsg_form_a(e, m, guards, sigma_init, &x0, &history_opts(iters))?;
    let ha = a.trace.history.unwrap();
    for (x, u) in ha.x.iter().zip(&ha.aux) {
        let g = e.stacked_gradient(x)?;
        let gap = norm(&crate::linalg::sub(&mean(u), &mean(&g)));
        worst = worst.max(gap / scale(&g).max(scale(u)));
    }
    let b = run_dsg_form_b(e, m, guards, sigma_init, &x0, &history_opts(iters))?;
    for v in &b.trace.history.unwrap().aux {
        worst = worst.max(norm(&mean(v)) / scale(v));
    }
    Ok(worst)
}

/// Worst relative mismatch between analytic gradients and central
/// differences (step `1e-6`) over `points` random points per cost.
pub fn gradient_fd_gap(e: &CostEnsemble, points: usize, seed: u64) -> Result<f64> {
    let mut rng = SeededRng::new(seed, STREAM_TEST);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for cost in e.costs() {
        for _ in 0..points {
            let x: Vec<f64> = e.y_star().iter().zip(random_vector(&mut rng, e.d(), -1.0, 1.0)).map(|(y, r)| y + r).collect();
            let g = cost.gradient(&x)?;
            let mut fd = vec![0.0; e.d()];
            for k in 0..e.d() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                fd[k] = (cost.value(&xp)? - cost.value(&xm)?) / (2.0 * h);
            }
            let gap = norm(&crate::linalg::sub(&fd, &g)) / norm(&g).max(1.0);
            worst = worst.max(gap);
        }
    }
    Ok(worst)
}

pub fn run_verification() -> Result<Vec<Check>> {
    let mut checks = vec![
        check("centralized error recursion (d=10, 5 seeds)", sg_recursion_residual(&[0, 1, 2, 3, 4])?, 1e-10),
        check("centralized scaled identity solved at k=2", scaled_identity_error(7.0)?, 1e-12),
        check("primal-dual error recursion (n=5 ring, d=1, 3 seeds)", dsg_recursion_residual(&[0, 1, 2])?, 1e-10),
    ];
    let e = CostEnsemble::generate_quadratic(10, 3, 11, QuadraticRanges::default())?;
    let m = MixingMatrix::max_degree(&Graph::ring(10))?;
    let guards = Safeguards::new(e.l(), 1e8)?;
    let (gap, compared) = form_gap(&e, &m, guards, 3.0 * e.l(), 200)?;
    checks.push(check("tracker / primal-dual iterate agreement", if compared == 201 { gap } else { f64::INFINITY }, 1e-9));
    checks.push(check("gradient tracking mean identities", tracking_identity_gap(&e, &m, guards, 3.0 * e.l(), 200)?, 1e-12));
    checks.push(check("quadratic gradients vs central differences", gradient_fd_gap(&e, 20, 1)?, 1e-5));
    let logistic = CostEnsemble::generate_logistic(4, 3, 20, 1.0, 11)?;
    checks.push(check("logistic gradients vs central differences", gradient_fd_gap(&logistic, 20, 2)?, 1e-5));
    Ok(checks)
}
