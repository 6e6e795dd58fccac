use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dsg::harness::{run_experiment, verify::run_verification, ExperimentConfig};
use dsg::sweep;

#[derive(Parser)]
#[command(name = "dsg", version, about = "Distributed spectral gradient simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm and write one CSV trace per run.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Like `run`, and print the comparison report. With `--seeds`, repeat
    /// the experiment for each seed and print per-seed savings.
    Compare {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated seeds; outputs go to `<output-dir>/seed-<s>/`.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
    /// Run the built-in oracle checks.
    Verify,
}

fn load(config: &Path, overrides: &Overrides) -> dsg::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &overrides.output_dir {
        cfg.output_dir = Some(dir.clone());
    }
    Ok(cfg)
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, overrides } => load(&config, &overrides).and_then(|cfg| {
            let out = run_experiment(&cfg)?;
            for (trace, path) in out.traces.iter().zip(out.csv_paths.iter().map(Some).chain(std::iter::repeat(None))) {
                let written = path.map_or(String::new(), |p| format!(" -> {}", p.display()));
                println!("{:<10} {:<10} {:>6} iterations{written}", trace.algorithm, trace.status.to_string(), trace.iterations());
            }
            Ok(out.exit_code())
        }),
        Command::Compare { config, overrides, seeds } => load(&config, &overrides).and_then(|cfg| {
            if seeds.is_empty() {
                let out = run_experiment(&cfg)?;
                print!("{}", out.report);
                return Ok(out.exit_code());
            }
            let configs: Vec<ExperimentConfig> = seeds
                .iter()
                .map(|&s| {
                    let mut c = cfg.clone();
                    c.seed = s;
                    c.output_dir = cfg.output_dir.as_ref().map(|d| d.join(format!("seed-{s}")));
                    c
                })
                .collect();
            let outcomes = sweep::map(&configs, run_experiment).into_iter().collect::<dsg::Result<Vec<_>>>()?;
            let mut by_pair: Vec<((String, String), Vec<f64>)> = Vec::new();
            let mut code = 0;
            for (seed, out) in seeds.iter().zip(&outcomes) {
                println!("== seed {seed}");
                print!("{}", out.report);
                code = code.max(out.exit_code());
                for s in &out.report.savings {
                    let key = (s.method.clone(), s.baseline.clone());
                    match by_pair.iter_mut().find(|(k, _)| *k == key) {
                        Some((_, v)) => v.push(s.ratio),
                        None => by_pair.push((key, vec![s.ratio])),
                    }
                }
            }
            for ((m, b), ratios) in by_pair {
                let count = ratios.len();
                let med = median(ratios).unwrap_or(f64::NAN);
                println!("median savings {m} vs {b}: {:.1}% over {count}/{} seeds", 100.0 * med, seeds.len());
            }
            Ok(code)
        }),
        Command::Verify => run_verification().map(|checks| {
            let mut failed = 0;
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            i32::from(failed > 0)
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
