use std::fmt;

use serde::Serialize;

use crate::analysis::{estimate_rate, SafeguardReport};
use crate::solvers::{Status, Trace};

/// Fraction of the trace used for the rate fit.
pub const RATE_TAIL: f64 = 0.5;

#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmSummary {
    pub name: String,
    pub status: Status,
    pub iterations: usize,
    pub iterations_to_target: Option<usize>,
    pub final_error: f64,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Savings {
    pub method: String,
    pub baseline: String,
    /// `1 − iters(method) / iters(baseline)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub target: f64,
    pub n: usize,
    pub d: usize,
    pub mu: f64,
    pub l: f64,
    pub lambda2: f64,
    pub lambda_n: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub safeguards: SafeguardReport,
    pub algorithms: Vec<AlgorithmSummary>,
    pub savings: Vec<Savings>,
}

pub fn summarize(trace: &Trace, target: f64) -> AlgorithmSummary {
    let rate = (trace.status != Status::Diverged && trace.records.len() >= 20)
        .then(|| estimate_rate(trace, RATE_TAIL).ok())
        .flatten();
    AlgorithmSummary {
        name: trace.algorithm.clone(),
        status: trace.status,
        iterations: trace.iterations(),
        iterations_to_target: trace.iterations_to(target),
        final_error: trace.final_error(),
        rate,
    }
}

/// Savings of every spectral run against every constant-step run, for
/// pairs where both reached the target.
pub fn pairwise_savings(summaries: &[AlgorithmSummary]) -> Vec<Savings> {
    let spectral = |s: &AlgorithmSummary| s.name.starts_with("dsg");
    let mut out = Vec::new();
    for m in summaries.iter().filter(|s| spectral(s)) {
        for b in summaries.iter().filter(|s| !spectral(s)) {
            if let (Some(mi), Some(bi)) = (m.iterations_to_target, b.iterations_to_target) {
                if bi > 0 {
                    out.push(Savings {
                        method: m.name.clone(),
                        baseline: b.name.clone(),
                        ratio: 1.0 - mi as f64 / bi as f64,
                    });
                }
            }
        }
    }
    out
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n={} d={} mu={:.4} L={:.4} lambda2={:.6} lambda_n={:.6} sigma=[{:.6e}, {:.6e}]",
            self.n, self.d, self.mu, self.l, self.lambda2, self.lambda_n, self.sigma_min, self.sigma_max
        )?;
        writeln!(
            f,
            "safeguard conditions: ratio={} magnitude={} (sufficient, not necessary)",
            self.safeguards.cond_ratio_ok, self.safeguards.cond_magnitude_ok
        )?;
        writeln!(f, "{:<10} {:>10} {:>8} {:>14} {:>14} {:>12}", "algorithm", "status", "iters", "iters@target", "final error", "rate")?;
        for a in &self.algorithms {
            let reached = a.iterations_to_target.map_or("-".to_string(), |k| k.to_string());
            let rate = a.rate.map_or("-".to_string(), |r| format!("{r:.3e}"));
            writeln!(
                f,
                "{:<10} {:>10} {:>8} {:>14} {:>14.6e} {:>12}",
                a.name,
                a.status.to_string(),
                a.iterations,
                reached,
                a.final_error,
                rate
            )?;
        }
        for s in &self.savings {
            writeln!(f, "savings {} vs {} at {:e}: {:.1}%", s.method, s.baseline, self.target, 100.0 * s.ratio)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(name: &str, reached: Option<usize>) -> AlgorithmSummary {
        AlgorithmSummary {
            name: name.into(),
            status: Status::Converged,
            iterations: 0,
            iterations_to_target: reached,
            final_error: 0.0,
            rate: None,
        }
    }

    #[test]
    fn savings_only_for_pairs_that_reached_target() {
        let s = pairwise_savings(&[summary("dsg", Some(340)), summary("tracking", Some(560)), summary("dgd", None)]);
        assert_eq!(s.len(), 1);
        assert!((s[0].ratio - (1.0 - 340.0 / 560.0)).abs() < 1e-15);
        assert!(pairwise_savings(&[summary("dsg", None), summary("tracking", Some(10))]).is_empty());
    }
}
