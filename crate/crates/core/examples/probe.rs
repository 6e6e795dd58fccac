use dsg::analysis::verify_dsg_recursion;
use dsg::harness::verify::scalar_ring;
use dsg::solvers::*;
fn main() {
    for frac in [0.3, 0.6, 1.0] {
        for seed in 0..3u64 {
            let (e, m) = scalar_ring(seed).unwrap();
            let guards = Safeguards::new(frac * e.l(), 1e8).unwrap();
            let opts = RunOptions { max_iters: 100, tol: 0.0, record_history: true };
            let r = run_dsg_form_b(&e, &m, guards, 3.0 * e.l(), &[0.0; 5], &opts).unwrap();
            let h = r.trace.history.as_ref().unwrap();
            let interior = h.sigma.iter().flatten().filter(|&&s| s > guards.sigma_min() * (1.0 + 1e-12)).count();
            println!("frac={frac} seed={seed} {} k={} err={:.2e} interior={interior} res={:.2e}", r.trace.status, r.trace.iterations(), r.trace.final_error(), verify_dsg_recursion(&r.trace, &e, &m).unwrap());
        }
    }
}
