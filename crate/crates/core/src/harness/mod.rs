//! Experiment orchestration: builds the network, weights and problem from a
//! config, runs every configured method from the same starting point and
//! assembles the comparison report.

pub mod config;
pub mod csv;
pub mod report;
pub mod verify;

use std::path::{Path, PathBuf};

pub use config::{AlgorithmSpec, ExperimentConfig, LRelative, Problem, Radius, Topology};
pub use csv::{emit_csv, trace_to_csv, CSV_HEADER};
pub use report::{AlgorithmSummary, ComparisonReport, Savings};

use crate::analysis::check_safeguards;
use crate::costs::{CostEnsemble, QuadraticRanges};
use crate::error::{Error, Result};
use crate::mixing::MixingMatrix;
use crate::network::{default_radius, generate_rgg, Graph};
use crate::solvers::{run_dgd, run_dsg_form_a, run_dsg_form_b, run_gradient_tracking, RunOptions, Safeguards, Status, Trace};
use crate::sweep;

/// Everything a run needs, built deterministically from the config.
#[derive(Debug, Clone)]
pub struct Setup {
    pub graph: Graph,
    pub mixing: MixingMatrix,
    pub ensemble: CostEnsemble,
    pub safeguards: Safeguards,
}

pub fn build_graph(topology: &Topology, seed: u64) -> Result<Graph> {
    Ok(match topology {
        Topology::Rgg { n, radius, max_attempts } => {
            let r = match radius {
                Radius::Auto => default_radius(*n),
                Radius::Fixed(r) => *r,
            };
            generate_rgg(*n, r, seed, *max_attempts)?
        }
        Topology::File(path) => Graph::read(path)?,
        Topology::Path(n) => Graph::path(*n),
        Topology::Ring(n) => Graph::ring(*n),
        Topology::Star(n) => Graph::star(*n),
        Topology::Complete(n) => Graph::complete(*n),
    })
}

pub fn build_ensemble(problem: &Problem, n: usize, seed: u64) -> Result<CostEnsemble> {
    let e = match problem {
        Problem::Quadratic { d, shift_range, eigen_range } => CostEnsemble::generate_quadratic(
            n,
            *d,
            seed,
            QuadraticRanges { shift: *shift_range, eigen: *eigen_range },
        )?,
        Problem::Logistic { d, samples_per_node, reg } => {
            CostEnsemble::generate_logistic(n, *d, *samples_per_node, *reg, seed)?
        }
        Problem::File(path) => CostEnsemble::read(path)?,
    };
    if e.n() != n {
        return Err(Error::config("problem", format!("ensemble has {} nodes, network has {n}", e.n())));
    }
    Ok(e)
}

impl Setup {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let graph = build_graph(&cfg.topology, cfg.seed)?;
        let mixing = MixingMatrix::max_degree(&graph)?;
        let ensemble = build_ensemble(&cfg.problem, graph.n(), cfg.seed)?;
        let (lo, hi) = (cfg.sigma_min.resolve(ensemble.l()), cfg.sigma_max.resolve(ensemble.l()));
        let safeguards = Safeguards::new(lo, hi)
            .map_err(|_| Error::config("safeguards", format!("resolved interval [{lo}, {hi}] is empty")))?;
        Ok(Setup { graph, mixing, ensemble, safeguards })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub traces: Vec<Trace>,
    pub report: ComparisonReport,
    /// CSV files written, one per trace, when an output directory was set.
    pub csv_paths: Vec<PathBuf>,
}

impl ExperimentOutcome {
    /// 0 when every run converged, 2 if one stopped at the iteration cap,
    /// 3 if one diverged.
    pub fn exit_code(&self) -> i32 {
        let statuses = self.traces.iter().map(|t| t.status);
        statuses.fold(0, |code, s| match s {
            Status::Converged => code,
            Status::MaxIters => code.max(2),
            Status::Diverged => 3,
        })
    }
}

pub fn run_algorithm(spec: &AlgorithmSpec, setup: &Setup, x0: &[f64], opts: &RunOptions) -> Result<Trace> {
    let Setup { mixing: m, ensemble: e, safeguards: g, .. } = setup;
    let l = e.l();
    let run = match spec {
        AlgorithmSpec::Dsg { sigma_init, primal_dual: false } => run_dsg_form_a(e, m, *g, sigma_init.resolve(l), x0, opts)?,
        AlgorithmSpec::Dsg { sigma_init, primal_dual: true } => run_dsg_form_b(e, m, *g, sigma_init.resolve(l), x0, opts)?,
        AlgorithmSpec::Tracking { alpha } => run_gradient_tracking(e, m, alpha.resolve(l), x0, opts)?,
        AlgorithmSpec::Dgd { alpha } => run_dgd(e, m, alpha.resolve(l), x0, opts)?,
    };
    Ok(run.trace)
}

fn csv_names(traces: &[Trace]) -> Vec<String> {
    traces
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let earlier = traces[..i].iter().filter(|o| o.algorithm == t.algorithm).count();
            if earlier == 0 { format!("{}.csv", t.algorithm) } else { format!("{}-{}.csv", t.algorithm, earlier + 1) }
        })
        .collect()
}

/// Runs every configured algorithm from `x⁰ = 0` and writes one CSV per run
/// plus `report.json` into `output_dir` (if any).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let setup = Setup::from_config(cfg)?;
    let (n, d) = (setup.ensemble.n(), setup.ensemble.d());
    let x0 = vec![0.0; n * d];
    let opts = RunOptions { max_iters: cfg.max_iters, tol: cfg.tol, record_history: false };
    let traces = sweep::map(&cfg.algorithms, |spec| run_algorithm(spec, &setup, &x0, &opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let summaries: Vec<AlgorithmSummary> = traces.iter().map(|t| report::summarize(t, cfg.target)).collect();
    let e = &setup.ensemble;
    let (lambda2, lambda_n) = setup.mixing.spectral_bounds();
    let report = ComparisonReport {
        target: cfg.target,
        n,
        d,
        mu: e.mu(),
        l: e.l(),
        lambda2,
        lambda_n,
        sigma_min: setup.safeguards.sigma_min(),
        sigma_max: setup.safeguards.sigma_max(),
        safeguards: check_safeguards(e.mu(), e.l(), lambda2, lambda_n, setup.safeguards),
        savings: report::pairwise_savings(&summaries),
        algorithms: summaries,
    };

    let mut csv_paths = Vec::new();
    if let Some(dir) = &cfg.output_dir {
        csv_paths = write_outputs(dir, &traces, &report)?;
    }
    Ok(ExperimentOutcome { traces, report, csv_paths })
}

fn write_outputs(dir: &Path, traces: &[Trace], report: &ComparisonReport) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::with_capacity(traces.len());
    for (trace, name) in traces.iter().zip(csv_names(traces)) {
        let path = dir.join(name);
        emit_csv(trace, &path)?;
        paths.push(path);
    }
    let path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(paths)
}
