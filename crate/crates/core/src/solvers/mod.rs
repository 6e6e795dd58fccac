//! Iterative methods: the centralized spectral gradient method, the
//! distributed spectral gradient method in tracker and primal-dual form,
//! constant-step gradient tracking and plain distributed gradient descent.

mod centralized;
mod distributed;
mod step;

pub use centralized::run_centralized_sg;
pub use distributed::{run_dgd, run_dsg_form_a, run_dsg_form_b, run_gradient_tracking, SolverState};
pub use step::{bb_coefficient, dsg_coefficients, safeguard, SS_FLOOR};

use serde::Serialize;

use crate::error::{Error, Result};

/// Iterates with `‖x‖` above this (or any non-finite entry) count as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Interval `[sigma_min, sigma_max]` the inverse step-sizes are clamped to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Safeguards {
    sigma_min: f64,
    sigma_max: f64,
}

impl Safeguards {
    pub fn new(sigma_min: f64, sigma_max: f64) -> Result<Self> {
        if !(sigma_min > 0.0 && sigma_min < sigma_max && sigma_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "safeguards need 0 < sigma_min < sigma_max < inf, got [{sigma_min}, {sigma_max}]"
            )));
        }
        Ok(Safeguards { sigma_min, sigma_max })
    }

    /// Degenerate interval `[sigma, sigma]`: every step is `1/sigma`.
    pub fn pinned(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("pinned sigma must be positive, got {sigma}")));
        }
        Ok(Safeguards { sigma_min: sigma, sigma_max: sigma })
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn contains(&self, sigma: f64) -> bool {
        (self.sigma_min..=self.sigma_max).contains(&sigma)
    }

    /// Largest step `1/sigma_min`.
    pub fn d_max(&self) -> f64 {
        1.0 / self.sigma_min
    }

    /// Smallest step `1/sigma_max`.
    pub fn d_min(&self) -> f64 {
        1.0 / self.sigma_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIters => "max-iters",
            Status::Diverged => "diverged",
        })
    }
}

/// One row of a trace. Steps are `1/sigma` across nodes; `grad_norm` is the
/// norm of the sum of local gradients at the local iterates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: usize,
    pub rel_error: f64,
    pub step_min: f64,
    pub step_mean: f64,
    pub step_max: f64,
    pub grad_norm: f64,
}

/// Full per-iteration state, kept only when requested.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub x: Vec<Vec<f64>>,
    /// Tracker `u` (form A / tracking) or dual `v` (form B); empty otherwise.
    pub aux: Vec<Vec<f64>>,
    /// Per-node inverse step-sizes used at each iteration.
    pub sigma: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub algorithm: String,
    pub records: Vec<TraceRecord>,
    pub status: Status,
    pub history: Option<History>,
}

impl Trace {
    /// Number of updates executed; one less than the record count.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    /// First iteration whose relative error is at or below `target`.
    pub fn iterations_to(&self, target: f64) -> Option<usize> {
        self.records.iter().find(|r| r.rel_error <= target).map(|r| r.k)
    }

    pub fn final_error(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.rel_error)
    }
}

#[derive(Debug, Clone)]
pub struct Run {
    pub trace: Trace,
    /// Final iterate (stacked for distributed methods).
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub max_iters: usize,
    /// Stop once the error metric reaches this value; `0` runs to `max_iters`.
    pub tol: f64,
    pub record_history: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_iters: 5000, tol: 1e-2, record_history: false }
    }
}

pub(crate) fn step_stats(steps: impl Iterator<Item = f64>) -> (f64, f64, f64) {
    let (mut lo, mut hi, mut sum, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for s in steps {
        lo = lo.min(s);
        hi = hi.max(s);
        sum += s;
        count += 1;
    }
    (lo, sum / count as f64, hi)
}

pub(crate) fn diverged(x: &[f64]) -> bool {
    let mut sq = 0.0;
    for v in x {
        if !v.is_finite() {
            return true;
        }
        sq += v * v;
    }
    !(sq.sqrt() <= DIVERGENCE_THRESHOLD)
}
