use proptest::prelude::*;

use dsg::analysis::decompose_error;
use dsg::costs::{Cost, CostEnsemble, QuadraticRanges};
use dsg::linalg::{norm, sub, symmetric_eigen};
use dsg::mixing::MixingMatrix;
use dsg::network::{default_radius, generate_rgg, Graph};
use dsg::solvers::{run_dgd, run_dsg_form_a, run_gradient_tracking, RunOptions, Safeguards};

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    norm(&sub(a, b)) <= tol * norm(a).max(norm(b)).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rgg_is_deterministic_and_handshakes(n in 2usize..40, seed in 0u64..1000) {
        let a = generate_rgg(n, default_radius(n.max(3)), seed, 1000).unwrap();
        let b = generate_rgg(n, default_radius(n.max(3)), seed, 1000).unwrap();
        prop_assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        prop_assert!(a.is_connected());
        prop_assert_eq!(a.degrees().iter().sum::<usize>(), 2 * a.edge_count());
    }

    #[test]
    fn edge_list_round_trips(n in 2usize..25, seed in 0u64..1000) {
        let g = generate_rgg(n, default_radius(n.max(3)), seed, 1000).unwrap();
        let back = Graph::from_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn mixing_is_doubly_stochastic_and_contracting(n in 2usize..30, seed in 0u64..1000) {
        let g = generate_rgg(n, default_radius(n.max(3)), seed, 1000).unwrap();
        let m = MixingMatrix::max_degree(&g).unwrap();
        for i in 0..n {
            let row: f64 = m.row_entries(i).iter().map(|(_, w)| w).sum();
            prop_assert!((row - 1.0).abs() < 1e-12);
            for j in 0..n {
                prop_assert_eq!(m.weight(i, j), m.weight(j, i));
            }
        }
        prop_assert!(m.lambda2() <= 1.0 - 1e-8);
        prop_assert!(m.lambda_n() > -1.0);
    }

    #[test]
    fn mixing_is_linear(seed in 0u64..1000, a in -5.0f64..5.0, b in -5.0f64..5.0, x in prop::collection::vec(-10.0f64..10.0, 36), y in prop::collection::vec(-10.0f64..10.0, 36)) {
        let g = generate_rgg(12, default_radius(12), seed, 1000).unwrap();
        let m = MixingMatrix::max_degree(&g).unwrap();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = m.mix(&combo, 3).unwrap();
        let (mx, my) = (m.mix(&x, 3).unwrap(), m.mix(&y, 3).unwrap());
        let rhs: Vec<f64> = mx.iter().zip(&my).map(|(p, q)| a * p + b * q).collect();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn error_decomposition_reassembles(seed in 0u64..1000, x in prop::collection::vec(-30.0f64..30.0, 12)) {
        let e = CostEnsemble::generate_quadratic(4, 3, seed, QuadraticRanges::default()).unwrap();
        let parts = decompose_error(&x, &[0.0; 12], &e).unwrap();
        let rebuilt: Vec<f64> = parts.x_tilde.chunks(3).flat_map(|b| b.iter().zip(&parts.e_bar).map(|(t, m)| t + m).collect::<Vec<_>>()).collect();
        prop_assert!(close(&rebuilt, &parts.e, 1e-12));
    }

    #[test]
    fn generated_hessians_match_their_spectrum(seed in 0u64..1000) {
        let e = CostEnsemble::generate_quadratic(5, 6, seed, QuadraticRanges::default()).unwrap();
        for cost in e.costs() {
            let Cost::Quadratic(q) = cost else { unreachable!() };
            prop_assert!(q.hessian().asymmetry() == 0.0);
            let eig = symmetric_eigen(q.hessian()).unwrap();
            let (lo, hi) = q.curvature_range();
            prop_assert!(lo >= 1.0 - 1e-8 && hi <= 101.0 + 1e-8);
            prop_assert!(e.mu() <= lo + 1e-8 && hi <= e.l() + 1e-8);
            prop_assert!((eig.values[0] - hi).abs() < 1e-8);
            for &b in q.shift() {
                prop_assert!((1.0..=31.0).contains(&b));
            }
        }
    }

    #[test]
    fn ensemble_text_round_trips(seed in 0u64..1000) {
        let e = CostEnsemble::generate_quadratic(3, 2, seed, QuadraticRanges::default()).unwrap();
        let back = CostEnsemble::from_text(&e.to_text()).unwrap();
        prop_assert_eq!(back.y_star(), e.y_star());
        prop_assert_eq!(back.mu(), e.mu());
        prop_assert_eq!(back.l(), e.l());
    }
}

#[test]
fn pinned_dsg_is_gradient_tracking() {
    let g = generate_rgg(15, default_radius(15), 3, 1000).unwrap();
    let m = MixingMatrix::max_degree(&g).unwrap();
    let e = CostEnsemble::generate_quadratic(15, 4, 3, QuadraticRanges::default()).unwrap();
    let alpha = 1.0 / (3.0 * e.l());
    let x0 = vec![0.0; 60];
    let opts = RunOptions { max_iters: 300, tol: 0.0, record_history: false };
    let t = run_gradient_tracking(&e, &m, alpha, &x0, &opts).unwrap();
    let d = run_dsg_form_a(&e, &m, Safeguards::pinned(1.0 / alpha).unwrap(), 1.0 / alpha, &x0, &opts).unwrap();
    assert!(close(&t.x, &d.x, 1e-12));
    for (a, b) in t.trace.records.iter().zip(&d.trace.records) {
        assert!((a.rel_error - b.rel_error).abs() <= 1e-12 * a.rel_error.max(1.0));
    }
}

#[test]
fn dgd_stalls_where_tracking_keeps_decaying() {
    let m = MixingMatrix::max_degree(&Graph::ring(8)).unwrap();
    let e = CostEnsemble::generate_quadratic(8, 2, 5, QuadraticRanges::default()).unwrap();
    let alpha = 1.0 / (3.0 * e.l());
    let x0 = vec![0.0; 16];
    let opts = RunOptions { max_iters: 4000, tol: 0.0, record_history: false };
    let dgd = run_dgd(&e, &m, alpha, &x0, &opts).unwrap();
    let tracking = run_gradient_tracking(&e, &m, alpha, &x0, &opts).unwrap();
    let plateau = dgd.trace.records[2000].rel_error;
    assert!(plateau > 1e-3);
    assert!((dgd.trace.final_error() - plateau).abs() < 1e-3 * plateau);
    assert!(tracking.trace.final_error() < 1e-8);
}

#[test]
fn conservative_safeguards_converge_on_every_node() {
    let g = generate_rgg(20, default_radius(20), 1, 1000).unwrap();
    let m = MixingMatrix::max_degree(&g).unwrap();
    let e = CostEnsemble::generate_quadratic(20, 3, 1, QuadraticRanges::default()).unwrap();
    let guards = Safeguards::new(e.l(), 1e8).unwrap();
    let opts = RunOptions { max_iters: 20000, tol: 1e-6, record_history: false };
    let run = run_dsg_form_a(&e, &m, guards, 3.0 * e.l(), &vec![0.0; 60], &opts).unwrap();
    assert_eq!(run.trace.status, dsg::solvers::Status::Converged);
    for block in run.x.chunks(3) {
        assert!(close(block, e.y_star(), 1e-5));
    }
}
