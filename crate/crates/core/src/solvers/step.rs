use crate::linalg::dot;
use crate::mixing::MixingMatrix;

use super::Safeguards;

/// Below this `sᵀs` the displacement carries no curvature information.
pub const SS_FLOOR: f64 = 1e-300;

/// Scalar secant fit `sᵀy / sᵀs`; `None` when `s` is (numerically) zero.
pub fn bb_coefficient(s: &[f64], y: &[f64]) -> Option<f64> {
    let ss = dot(s, s);
    if ss < SS_FLOOR {
        return None;
    }
    Some(dot(s, y) / ss)
}

/// Projects `v` onto the safeguard interval, or returns `fallback` when
/// there is no finite value to project.
pub fn safeguard(v: Option<f64>, g: Safeguards, fallback: f64) -> f64 {
    match v {
        Some(v) if v.is_finite() => v.clamp(g.sigma_min(), g.sigma_max()),
        _ => fallback,
    }
}

/// Per-node inverse step-sizes
///
/// `σ_i = P[ s_iᵀy_i/s_iᵀs_i + Σ_{j∈Ō_i} w_ij (1 − s_iᵀy_j/s_iᵀs_i) ]`
///
/// from stacked displacements `s` and gradient differences `y`. A node
/// whose displacement vanishes keeps its previous coefficient.
pub fn dsg_coefficients(
    s: &[f64],
    y: &[f64],
    prev_sigma: &[f64],
    d: usize,
    m: &MixingMatrix,
    g: Safeguards,
) -> Vec<f64> {
    (0..m.n())
        .map(|i| {
            let si = &s[i * d..(i + 1) * d];
            let ss = dot(si, si);
            if ss < SS_FLOOR {
                return prev_sigma[i];
            }
            let own = dot(si, &y[i * d..(i + 1) * d]) / ss;
            let coupling: f64 = m
                .row_entries(i)
                .iter()
                .map(|&(j, wij)| wij * (1.0 - dot(si, &y[j * d..(j + 1) * d]) / ss))
                .sum();
            safeguard(Some(own + coupling), g, prev_sigma[i])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Graph;

    #[test]
    fn bb_examples() {
        assert_eq!(bb_coefficient(&[1.0, 1.0], &[3.0, 3.0]), Some(3.0));
        assert_eq!(bb_coefficient(&[0.0, 0.0], &[3.0, 3.0]), None);
    }

    #[test]
    fn safeguard_examples() {
        let g = Safeguards::new(1.0, 2.0).unwrap();
        assert_eq!(safeguard(Some(5.0), g, 1.7), 2.0);
        assert_eq!(safeguard(Some(1.5), g, 1.7), 1.5);
        assert_eq!(safeguard(Some(0.1), g, 1.7), 1.0);
        assert_eq!(safeguard(None, g, 1.7), 1.7);
        assert_eq!(safeguard(Some(f64::NAN), g, 1.7), 1.7);
    }

    #[test]
    fn proportional_differences_give_unit_coefficient() {
        let m = MixingMatrix::max_degree(&Graph::path(4)).unwrap();
        let d = 2;
        let c = 7.5;
        // the same displacement at every node, y_j = c s
        let s: Vec<f64> = (0..4).flat_map(|_| [0.3, -1.2]).collect();
        let y: Vec<f64> = s.iter().map(|v| c * v).collect();
        let g = Safeguards::new(0.01, 100.0).unwrap();
        for sigma in dsg_coefficients(&s, &y, &[5.0; 4], d, &m, g) {
            assert!((sigma - 1.0).abs() < 1e-12, "{sigma}");
        }
    }

    #[test]
    fn single_node_cancels_to_one() {
        let w = crate::linalg::Matrix::identity(1);
        let m = MixingMatrix::from_dense(w).unwrap();
        let g = Safeguards::new(0.5, 10.0).unwrap();
        let sigma = dsg_coefficients(&[0.4, 2.0], &[9.0, -3.0], &[4.0], 2, &m, g);
        assert!((sigma[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_displacement_keeps_previous() {
        let m = MixingMatrix::max_degree(&Graph::path(3)).unwrap();
        let g = Safeguards::new(1.0, 10.0).unwrap();
        let s = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 4.0];
        let sigma = dsg_coefficients(&s, &y, &[4.2, 2.0, 2.0], 1, &m, g);
        assert_eq!(sigma[0], 4.2);
    }

    #[test]
    fn coefficient_matches_hand_evaluation() {
        // path 0-1-2, d = 1: W = [[5/6,1/6,0],[1/6,2/3,1/6],[0,1/6,5/6]]
        let m = MixingMatrix::max_degree(&Graph::path(3)).unwrap();
        let g = Safeguards::new(0.01, 100.0).unwrap();
        let s = [1.0, 2.0, 1.0];
        let y = [3.0, 10.0, 1.0];
        let sigma = dsg_coefficients(&s, &y, &[1.0; 3], 1, &m, g);
        // node 1: 5 + (1/6)(1 - 1.5) + (2/3)(1 - 5) + (1/6)(1 - 0.5) = 7/3
        assert!((sigma[1] - 7.0 / 3.0).abs() < 1e-12);
        // node 0: 3 + (5/6)(1 - 3) + (1/6)(1 - 10) = -1/6, clamped
        assert_eq!(sigma[0], 0.01);
    }
}
