//! TOML experiment configuration.
//!
//! ```toml
//! seed = 7
//! max_iters = 5000
//! tol = 1e-2            # stop once the relative error reaches this
//! target = 1e-2         # accuracy used for iteration counts in the report
//! output_dir = "out"
//!
//! [topology]
//! kind = "rgg"          # rgg | file | path | ring | star | complete
//! n = 30
//! radius = "auto"       # sqrt(ln n / n), or a number
//!
//! [problem]
//! kind = "quadratic"    # quadratic | logistic | file
//! d = 10
//!
//! [safeguards]
//! sigma_min = "3L/10"   # absolute numbers or multiples of L
//! sigma_max = 1e8
//!
//! [[algorithms]]
//! name = "dsg"          # dsg | dsg-pd | tracking | dgd
//! sigma_init = "3L"
//!
//! [[algorithms]]
//! name = "tracking"
//! alpha = "1/(3L)"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

/// A number, or a multiple of the smoothness constant `L` written as
/// `3L`, `3L/10`, `L/2`, `1/(3L)` or `10/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LRelative {
    Absolute(f64),
    TimesL(f64),
    OverL(f64),
}

impl LRelative {
    pub fn parse(text: &str) -> Option<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Ok(v) = s.parse::<f64>() {
            return Some(LRelative::Absolute(v));
        }
        let coef = |c: &str| -> Option<f64> { if c.is_empty() { Some(1.0) } else { c.parse().ok() } };
        if let Some((num, den)) = s.split_once('/') {
            let den = den.strip_prefix('(').and_then(|d| d.strip_suffix(')')).unwrap_or(den);
            if let Some(c) = den.strip_suffix('L') {
                // a/(cL) or a/L
                if num.contains('L') {
                    return None;
                }
                return Some(LRelative::OverL(num.parse::<f64>().ok()? / coef(c)?));
            }
            // cL/q
            let c = num.strip_suffix('L')?;
            return Some(LRelative::TimesL(coef(c)? / den.parse::<f64>().ok()?));
        }
        let c = s.strip_suffix('L')?;
        Some(LRelative::TimesL(coef(c)?))
    }

    pub fn resolve(self, l: f64) -> f64 {
        match self {
            LRelative::Absolute(v) => v,
            LRelative::TimesL(c) => c * l,
            LRelative::OverL(c) => c / l,
        }
    }

    /// Compares two specs when the order does not depend on `L`.
    fn definitely_not_less(self, other: LRelative) -> bool {
        match (self, other) {
            (LRelative::Absolute(a), LRelative::Absolute(b))
            | (LRelative::TimesL(a), LRelative::TimesL(b)) => a >= b,
            (LRelative::OverL(a), LRelative::OverL(b)) => a >= b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Number(f64),
    Text(String),
}

fn l_relative(field: &str, raw: Option<RawValue>, default: LRelative) -> Result<LRelative> {
    let spec = match raw {
        None => default,
        Some(RawValue::Number(v)) => LRelative::Absolute(v),
        Some(RawValue::Text(t)) => LRelative::parse(&t)
            .ok_or_else(|| Error::config(field, format!("cannot read `{t}` as a number or multiple of L")))?,
    };
    let probe = spec.resolve(1.0);
    if !(probe > 0.0 && probe.is_finite()) {
        return Err(Error::config(field, "must be positive"));
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Radius {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    Rgg { n: usize, radius: Radius, max_attempts: usize },
    File(PathBuf),
    Path(usize),
    Ring(usize),
    Star(usize),
    Complete(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Quadratic { d: usize, shift_range: (f64, f64), eigen_range: (f64, f64) },
    Logistic { d: usize, samples_per_node: usize, reg: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSpec {
    /// Tracker form unless `primal_dual`.
    Dsg { sigma_init: LRelative, primal_dual: bool },
    Tracking { alpha: LRelative },
    Dgd { alpha: LRelative },
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Dsg { primal_dual: false, .. } => "dsg",
            AlgorithmSpec::Dsg { primal_dual: true, .. } => "dsg-pd",
            AlgorithmSpec::Tracking { .. } => "tracking",
            AlgorithmSpec::Dgd { .. } => "dgd",
        }
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self, AlgorithmSpec::Dsg { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub topology: Topology,
    pub problem: Problem,
    pub algorithms: Vec<AlgorithmSpec>,
    pub sigma_min: LRelative,
    pub sigma_max: LRelative,
    pub seed: u64,
    pub max_iters: usize,
    pub tol: f64,
    pub target: f64,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    max_iters: Option<usize>,
    tol: Option<f64>,
    target: Option<f64>,
    output_dir: Option<PathBuf>,
    topology: RawTopology,
    problem: RawProblem,
    safeguards: Option<RawSafeguards>,
    #[serde(default)]
    algorithms: Vec<RawAlgorithm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    kind: String,
    n: Option<usize>,
    radius: Option<RawValue>,
    max_attempts: Option<usize>,
    path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kind: String,
    d: Option<usize>,
    shift_range: Option<(f64, f64)>,
    eigen_range: Option<(f64, f64)>,
    samples_per_node: Option<usize>,
    reg: Option<f64>,
    path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSafeguards {
    sigma_min: Option<RawValue>,
    sigma_max: Option<RawValue>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgorithm {
    name: String,
    sigma_init: Option<RawValue>,
    alpha: Option<RawValue>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = ExperimentConfig::parse(&text)?;
        // relative file paths are taken relative to the config file
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Topology::File(p) = &mut cfg.topology {
            rebase(p);
        }
        if let Problem::File(p) = &mut cfg.problem {
            rebase(p);
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            msg: e.message().to_string(),
        })?;
        ExperimentConfig::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let t = raw.topology;
        let need_n = |what: &str| t.n.ok_or_else(|| Error::config("topology.n", format!("required for {what}")));
        let topology = match t.kind.as_str() {
            "rgg" => {
                let n = need_n("rgg")?;
                if n < 2 {
                    return Err(Error::config("topology.n", "rgg needs at least 2 nodes"));
                }
                let radius = match t.radius {
                    None => Radius::Auto,
                    Some(RawValue::Text(s)) if s == "auto" => Radius::Auto,
                    Some(RawValue::Number(r)) if r > 0.0 => Radius::Fixed(r),
                    Some(_) => return Err(Error::config("topology.radius", "expected \"auto\" or a positive number")),
                };
                let max_attempts = t.max_attempts.unwrap_or(1000);
                if max_attempts == 0 {
                    return Err(Error::config("topology.max_attempts", "must be at least 1"));
                }
                Topology::Rgg { n, radius, max_attempts }
            }
            "file" => Topology::File(t.path.ok_or_else(|| Error::config("topology.path", "required for kind = \"file\""))?),
            "path" => Topology::Path(need_n("path")?),
            "ring" => {
                let n = need_n("ring")?;
                if n < 3 {
                    return Err(Error::config("topology.n", "ring needs at least 3 nodes"));
                }
                Topology::Ring(n)
            }
            "star" => Topology::Star(need_n("star")?),
            "complete" => Topology::Complete(need_n("complete")?),
            other => return Err(Error::config("topology.kind", format!("unknown topology `{other}`"))),
        };
        if let Topology::Path(0) | Topology::Star(0) | Topology::Complete(0) = topology {
            return Err(Error::config("topology.n", "must be at least 1"));
        }

        let p = raw.problem;
        let need_d = || match p.d {
            Some(d) if d >= 1 => Ok(d),
            Some(_) => Err(Error::config("problem.d", "must be at least 1")),
            None => Err(Error::config("problem.d", "required")),
        };
        let problem = match p.kind.as_str() {
            "quadratic" => {
                let shift_range = p.shift_range.unwrap_or((1.0, 31.0));
                let eigen_range = p.eigen_range.unwrap_or((1.0, 101.0));
                if !(shift_range.0 <= shift_range.1) {
                    return Err(Error::config("problem.shift_range", "lower bound exceeds upper bound"));
                }
                if !(eigen_range.0 > 0.0 && eigen_range.0 <= eigen_range.1) {
                    return Err(Error::config("problem.eigen_range", "needs 0 < lower <= upper"));
                }
                Problem::Quadratic { d: need_d()?, shift_range, eigen_range }
            }
            "logistic" => {
                let reg = p.reg.unwrap_or(1.0);
                if !(reg > 0.0) {
                    return Err(Error::config("problem.reg", "must be positive"));
                }
                Problem::Logistic { d: need_d()?, samples_per_node: p.samples_per_node.unwrap_or(20), reg }
            }
            "file" => Problem::File(p.path.ok_or_else(|| Error::config("problem.path", "required for kind = \"file\""))?),
            other => return Err(Error::config("problem.kind", format!("unknown problem `{other}`"))),
        };

        let (raw_min, raw_max) = raw.safeguards.map_or((None, None), |s| (s.sigma_min, s.sigma_max));
        let sigma_min = l_relative("safeguards.sigma_min", raw_min, LRelative::TimesL(0.3))?;
        let sigma_max = l_relative("safeguards.sigma_max", raw_max, LRelative::Absolute(1e8))?;
        if sigma_min.definitely_not_less(sigma_max) {
            return Err(Error::config("safeguards", "sigma_min must be smaller than sigma_max"));
        }

        if raw.algorithms.is_empty() {
            return Err(Error::config("algorithms", "at least one algorithm is required"));
        }
        let mut algorithms = Vec::with_capacity(raw.algorithms.len());
        for (i, a) in raw.algorithms.into_iter().enumerate() {
            let field = |k: &str| format!("algorithms[{i}].{k}");
            let spec = match a.name.as_str() {
                "dsg" | "dsg-pd" => {
                    if a.alpha.is_some() {
                        return Err(Error::config(field("alpha"), "not used by dsg"));
                    }
                    AlgorithmSpec::Dsg {
                        sigma_init: l_relative(&field("sigma_init"), a.sigma_init, LRelative::TimesL(3.0))?,
                        primal_dual: a.name == "dsg-pd",
                    }
                }
                "tracking" | "dgd" => {
                    if a.sigma_init.is_some() {
                        return Err(Error::config(field("sigma_init"), "only used by dsg"));
                    }
                    let alpha = l_relative(&field("alpha"), a.alpha, LRelative::OverL(1.0 / 3.0))?;
                    if a.name == "tracking" { AlgorithmSpec::Tracking { alpha } } else { AlgorithmSpec::Dgd { alpha } }
                }
                other => return Err(Error::config(field("name"), format!("unknown algorithm `{other}`"))),
            };
            algorithms.push(spec);
        }

        let tol = raw.tol.unwrap_or(1e-2);
        if !(tol > 0.0) {
            return Err(Error::config("tol", "must be positive"));
        }
        let target = raw.target.unwrap_or(1e-2);
        if !(target > 0.0) {
            return Err(Error::config("target", "must be positive"));
        }
        Ok(ExperimentConfig {
            topology,
            problem,
            algorithms,
            sigma_min,
            sigma_max,
            seed: raw.seed.unwrap_or(0),
            max_iters: raw.max_iters.unwrap_or(5000),
            tol,
            target,
            output_dir: raw.output_dir,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER_SETUP: &str = r#"
seed = 7
[topology]
kind = "rgg"
n = 30
radius = "auto"
[problem]
kind = "quadratic"
d = 10
[safeguards]
sigma_min = "3L/10"
sigma_max = 1e8
[[algorithms]]
name = "dsg"
[[algorithms]]
name = "tracking"
alpha = "1/(3L)"
"#;

    #[test]
    fn l_relative_forms() {
        let l = 100.0;
        let cases = [("3L/10", 30.0), ("3L", 300.0), ("L", 100.0), ("L/4", 25.0), ("1/(3L)", 1.0 / 300.0), ("10/(3L)", 10.0 / 300.0), ("2/L", 0.02), ("1e8", 1e8), ("0.5 L", 50.0)];
        for (text, want) in cases {
            let got = LRelative::parse(text).unwrap().resolve(l);
            assert!((got - want).abs() <= 1e-12 * want, "{text}: {got} vs {want}");
        }
        for bad in ["3X", "L/(2L)", "abc", "3L/"] {
            assert!(LRelative::parse(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn rgg_quadratic_setup_parses() {
        let cfg = ExperimentConfig::parse(PAPER_SETUP).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.topology, Topology::Rgg { n: 30, radius: Radius::Auto, max_attempts: 1000 });
        assert_eq!(cfg.problem, Problem::Quadratic { d: 10, shift_range: (1.0, 31.0), eigen_range: (1.0, 101.0) });
        assert_eq!(cfg.sigma_min, LRelative::TimesL(0.3));
        assert_eq!(cfg.sigma_max, LRelative::Absolute(1e8));
        assert_eq!(cfg.algorithms.len(), 2);
        assert_eq!(cfg.algorithms[0], AlgorithmSpec::Dsg { sigma_init: LRelative::TimesL(3.0), primal_dual: false });
        assert_eq!(cfg.tol, 1e-2);
    }

    #[test]
    fn rejects_inverted_safeguards() {
        let text = PAPER_SETUP.replace("sigma_min = \"3L/10\"", "sigma_min = 2e8");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "safeguards"), "{err}");
    }

    #[test]
    fn rejects_empty_algorithm_list() {
        let text = PAPER_SETUP.split("[[algorithms]]").next().unwrap();
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "algorithms"));
    }

    #[test]
    fn parse_error_names_line() {
        let err = ExperimentConfig::parse("seed = 1\n[topology\nkind = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_fields() {
        let text = PAPER_SETUP.replace("n = 30", "n = 1");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config { ref field, .. }) if field == "topology.n"));
        let text = PAPER_SETUP.replace("alpha = \"1/(3L)\"", "alpha = \"fast\"");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config { ref field, .. }) if field == "algorithms[1].alpha"));
        let text = PAPER_SETUP.replace("seed = 7", "seed = 7\ntol = 0.0");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config { ref field, .. }) if field == "tol"));
    }
}
