//! Local cost functions, the random problem ensembles and the centralized
//! minimizer of their sum.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, solve, symmetric_eigen, Matrix};
use crate::rng::{SeededRng, STREAM_LOGISTIC, STREAM_QUADRATIC};
use crate::solvers::{run_centralized_sg, RunOptions, Safeguards, Status};

/// Anything with a value and a gradient on `R^d`.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
}

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}

/// `f(x) = ½ (x − b)ᵀ A (x − b)` with `A` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCost {
    a: Matrix,
    b: Vec<f64>,
}

impl QuadraticCost {
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if !a.is_square() || a.rows() != b.len() {
            return Err(Error::DimensionMismatch { expected: b.len(), got: a.rows() });
        }
        if a.asymmetry() > 1e-12 {
            return Err(Error::InvalidArgument("quadratic matrix is not symmetric".into()));
        }
        let eig = symmetric_eigen(&a)?;
        if eig.values.last().is_some_and(|&v| v <= 0.0) {
            return Err(Error::InvalidArgument("quadratic matrix is not positive definite".into()));
        }
        Ok(QuadraticCost { a, b })
    }

    pub fn hessian(&self) -> &Matrix {
        &self.a
    }

    pub fn shift(&self) -> &[f64] {
        &self.b
    }

    /// Extreme eigenvalues `(min, max)` of the Hessian.
    pub fn curvature_range(&self) -> (f64, f64) {
        let eig = symmetric_eigen(&self.a).expect("square by construction");
        (*eig.values.last().unwrap(), eig.values[0])
    }
}

impl Objective for QuadraticCost {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        let r: Vec<f64> = x.iter().zip(&self.b).map(|(x, b)| x - b).collect();
        Ok(0.5 * dot(&r, &self.a.matvec(&r)?))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x)?;
        let r: Vec<f64> = x.iter().zip(&self.b).map(|(x, b)| x - b).collect();
        self.a.matvec(&r)
    }
}

/// Labelled sample for the logistic loss; `label` is ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: f64,
}

/// `f(x) = Σ log(1 + exp(−label·featuresᵀx)) + (reg/2)‖x‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticCost {
    d: usize,
    samples: Vec<Sample>,
    reg: f64,
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl LogisticCost {
    pub fn new(d: usize, samples: Vec<Sample>, reg: f64) -> Result<Self> {
        if !(reg > 0.0 && reg.is_finite()) {
            return Err(Error::InvalidArgument(format!("logistic reg must be positive, got {reg}")));
        }
        for s in &samples {
            check_dim(d, &s.features)?;
            if s.label != 1.0 && s.label != -1.0 {
                return Err(Error::InvalidArgument(format!("label {} is not ±1", s.label)));
            }
        }
        Ok(LogisticCost { d, samples, reg })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn reg(&self) -> f64 {
        self.reg
    }

    /// `reg + ¼ · max row-sum of |Σ a aᵀ|`.
    pub fn lipschitz(&self) -> f64 {
        let mut gram = Matrix::zeros(self.d, self.d);
        for s in &self.samples {
            for r in 0..self.d {
                for c in 0..self.d {
                    gram[(r, c)] += s.features[r] * s.features[c];
                }
            }
        }
        let max_row = (0..self.d)
            .map(|r| gram.row(r).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        self.reg + 0.25 * max_row
    }
}

impl Objective for LogisticCost {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.d, x)?;
        let loss: f64 = self.samples.iter().map(|s| softplus(-s.label * dot(&s.features, x))).sum();
        Ok(loss + 0.5 * self.reg * dot(x, x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.d, x)?;
        let mut g: Vec<f64> = x.iter().map(|v| self.reg * v).collect();
        for s in &self.samples {
            let coef = -s.label * sigmoid(-s.label * dot(&s.features, x));
            for (gi, fi) in g.iter_mut().zip(&s.features) {
                *gi += coef * fi;
            }
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cost {
    Quadratic(QuadraticCost),
    Logistic(LogisticCost),
}

impl Objective for Cost {
    fn dim(&self) -> usize {
        match self {
            Cost::Quadratic(c) => c.dim(),
            Cost::Logistic(c) => c.dim(),
        }
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Cost::Quadratic(c) => c.value(x),
            Cost::Logistic(c) => c.value(x),
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Cost::Quadratic(c) => c.gradient(x),
            Cost::Logistic(c) => c.gradient(x),
        }
    }
}

/// Sampling ranges for the random quadratic ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticRanges {
    pub shift: (f64, f64),
    pub eigen: (f64, f64),
}

impl Default for QuadraticRanges {
    fn default() -> Self {
        QuadraticRanges { shift: (1.0, 31.0), eigen: (1.0, 101.0) }
    }
}

/// The `n` local costs with their strong convexity and smoothness bounds
/// and the minimizer of their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct CostEnsemble {
    costs: Vec<Cost>,
    d: usize,
    mu: f64,
    l: f64,
    y_star: Vec<f64>,
}

impl CostEnsemble {
    /// `b_i` uniform on `ranges.shift`, `A_i = Q_i D_i Q_iᵀ` with `D_i`
    /// uniform on `ranges.eigen` and `Q_i` the eigenvectors of a symmetrized
    /// Gaussian matrix.
    pub fn generate_quadratic(n: usize, d: usize, seed: u64, ranges: QuadraticRanges) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument(format!("need n >= 1 and d >= 1, got n={n}, d={d}")));
        }
        let (elo, ehi) = ranges.eigen;
        if !(elo > 0.0 && ehi >= elo) {
            return Err(Error::InvalidArgument(format!("eigenvalue range [{elo}, {ehi}] is not positive")));
        }
        let mut rng = SeededRng::new(seed, STREAM_QUADRATIC);
        let mut costs = Vec::with_capacity(n);
        let mut mu = f64::INFINITY;
        let mut l = 0.0f64;
        for _ in 0..n {
            let b: Vec<f64> = (0..d).map(|_| rng.uniform_in(ranges.shift.0, ranges.shift.1)).collect();
            let raw = Matrix::from_fn(d, d, |_, _| rng.gaussian());
            let sym = raw.add(&raw.transpose())?.scale(0.5);
            let q = symmetric_eigen(&sym)?.vectors;
            let diag: Vec<f64> = (0..d).map(|_| rng.uniform_in(elo, ehi)).collect();
            mu = diag.iter().copied().fold(mu, f64::min);
            l = diag.iter().copied().fold(l, f64::max);
            let mut a = q.matmul(&Matrix::from_diag(&diag))?.matmul(&q.transpose())?;
            symmetrize(&mut a);
            costs.push(Cost::Quadratic(QuadraticCost { a, b }));
        }
        let y_star = quadratic_minimizer(&costs, d)?;
        Ok(CostEnsemble { costs, d, mu, l, y_star })
    }

    /// Ensemble from hand-built quadratics; `mu`/`l` come from their spectra.
    pub fn from_quadratics(costs: Vec<QuadraticCost>) -> Result<Self> {
        let d = costs.first().map(Objective::dim).ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
        let mut mu = f64::INFINITY;
        let mut l = 0.0f64;
        for c in &costs {
            check_dim(d, c.shift())?;
            let (lo, hi) = c.curvature_range();
            mu = mu.min(lo);
            l = l.max(hi);
        }
        let costs: Vec<Cost> = costs.into_iter().map(Cost::Quadratic).collect();
        let y_star = quadratic_minimizer(&costs, d)?;
        Ok(CostEnsemble { costs, d, mu, l, y_star })
    }

    /// Gaussian features, labels drawn from a logistic model around a
    /// shared random weight vector.
    pub fn generate_logistic(n: usize, d: usize, samples_per_node: usize, reg: f64, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument(format!("need n >= 1 and d >= 1, got n={n}, d={d}")));
        }
        let mut rng = SeededRng::new(seed, STREAM_LOGISTIC);
        let truth: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
        let mut costs = Vec::with_capacity(n);
        for _ in 0..n {
            let samples = (0..samples_per_node)
                .map(|_| {
                    let features: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
                    let p = sigmoid(dot(&features, &truth));
                    let label = if rng.uniform() < p { 1.0 } else { -1.0 };
                    Sample { features, label }
                })
                .collect();
            costs.push(LogisticCost::new(d, samples, reg)?);
        }
        CostEnsemble::from_logistic(costs)
    }

    pub fn from_logistic(costs: Vec<LogisticCost>) -> Result<Self> {
        let d = costs.first().map(Objective::dim).ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
        let mu = costs.iter().map(LogisticCost::reg).fold(f64::INFINITY, f64::min);
        let l = costs.iter().map(LogisticCost::lipschitz).fold(0.0, f64::max);
        let mut e = CostEnsemble {
            costs: costs.into_iter().map(Cost::Logistic).collect(),
            d,
            mu,
            l,
            y_star: vec![0.0; d],
        };
        let tol = 1e-10 * e.l.max(1.0);
        e.y_star = e.solve_centralized(tol)?;
        Ok(e)
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn y_star(&self) -> &[f64] {
        &self.y_star
    }

    pub fn costs(&self) -> &[Cost] {
        &self.costs
    }

    pub fn is_quadratic(&self) -> bool {
        self.costs.iter().all(|c| matches!(c, Cost::Quadratic(_)))
    }

    /// `1 ⊗ y*`.
    pub fn stacked_minimizer(&self) -> Vec<f64> {
        (0..self.n()).flat_map(|_| self.y_star.iter().copied()).collect()
    }

    /// Stacked `∇F(x) = (∇f_1(x_1), …, ∇f_n(x_n))`.
    pub fn stacked_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n() * self.d, x)?;
        let mut out = Vec::with_capacity(x.len());
        for (cost, block) in self.costs.iter().zip(x.chunks_exact(self.d)) {
            out.extend(cost.gradient(block)?);
        }
        Ok(out)
    }

    /// The sum `Σ f_i` as a single objective on `R^d`.
    pub fn aggregate(&self) -> Aggregate<'_> {
        Aggregate { ensemble: self }
    }

    /// Minimizer of the aggregate: a direct solve for quadratics, the
    /// centralized spectral gradient method otherwise.
    pub fn solve_centralized(&self, tol: f64) -> Result<Vec<f64>> {
        if self.is_quadratic() {
            return quadratic_minimizer(&self.costs, self.d);
        }
        let n = self.n() as f64;
        let (lo, hi) = (n * self.mu, n * self.l);
        let guards = if lo < hi { Safeguards::new(lo, hi)? } else { Safeguards::pinned(hi)? };
        let opts = RunOptions { max_iters: 100_000, tol, record_history: false };
        let agg = self.aggregate();
        let run = run_centralized_sg(&agg, &vec![0.0; self.d], hi, guards, None, &opts)?;
        let grad_norm = run.trace.records.last().map_or(f64::NAN, |r| r.grad_norm);
        match run.trace.status {
            Status::Converged => Ok(run.x),
            _ => Err(Error::NotConverged { iterations: run.trace.iterations(), grad_norm }),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# dsg ensemble v1\n");
        let kind = if self.is_quadratic() { "quadratic" } else { "logistic" };
        let _ = writeln!(out, "kind {kind}");
        let _ = writeln!(out, "n {}", self.n());
        let _ = writeln!(out, "d {}", self.d);
        let _ = writeln!(out, "mu {:?}", self.mu);
        let _ = writeln!(out, "l {:?}", self.l);
        let _ = writeln!(out, "y_star {}", join(&self.y_star));
        for (i, cost) in self.costs.iter().enumerate() {
            let _ = writeln!(out, "node {i}");
            match cost {
                Cost::Quadratic(q) => {
                    let _ = writeln!(out, "b {}", join(&q.b));
                    for r in 0..self.d {
                        let _ = writeln!(out, "a {}", join(q.a.row(r)));
                    }
                }
                Cost::Logistic(c) => {
                    let _ = writeln!(out, "reg {:?}", c.reg);
                    for s in &c.samples {
                        let _ = writeln!(out, "sample {:?} {}", s.label, join(&s.features));
                    }
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut p = EnsembleParser::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            p.line(line).map_err(|msg| Error::Parse { line: lineno + 1, msg })?;
        }
        p.finish()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CostEnsemble::from_text(&text)
    }
}

fn symmetrize(a: &mut Matrix) {
    for i in 0..a.rows() {
        for j in i + 1..a.cols() {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

fn quadratic_minimizer(costs: &[Cost], d: usize) -> Result<Vec<f64>> {
    let mut sum_a = Matrix::zeros(d, d);
    let mut sum_ab = vec![0.0; d];
    for c in costs {
        let Cost::Quadratic(q) = c else {
            return Err(Error::InvalidArgument("closed-form minimizer needs quadratic costs".into()));
        };
        sum_a = sum_a.add(&q.a)?;
        for (acc, v) in sum_ab.iter_mut().zip(q.a.matvec(&q.b)?) {
            *acc += v;
        }
    }
    solve(&sum_a, &sum_ab)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

pub struct Aggregate<'a> {
    ensemble: &'a CostEnsemble,
}

impl Objective for Aggregate<'_> {
    fn dim(&self) -> usize {
        self.ensemble.d
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.ensemble.costs.iter().map(|c| c.value(x)).sum()
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.ensemble.d];
        for c in &self.ensemble.costs {
            for (acc, v) in g.iter_mut().zip(c.gradient(x)?) {
                *acc += v;
            }
        }
        Ok(g)
    }
}

/// Norm of the aggregate gradient at the stored minimizer.
pub fn minimizer_residual(e: &CostEnsemble) -> f64 {
    norm(&e.aggregate().gradient(e.y_star()).expect("dimension matches"))
}

#[derive(Default)]
struct EnsembleParser {
    kind: Option<String>,
    n: Option<usize>,
    d: Option<usize>,
    mu: Option<f64>,
    l: Option<f64>,
    y_star: Option<Vec<f64>>,
    nodes: Vec<NodeText>,
}

#[derive(Default)]
struct NodeText {
    b: Option<Vec<f64>>,
    a_rows: Vec<Vec<f64>>,
    reg: Option<f64>,
    samples: Vec<Sample>,
}

fn floats(toks: &[&str]) -> std::result::Result<Vec<f64>, String> {
    toks.iter().map(|t| t.parse::<f64>().map_err(|_| format!("bad number `{t}`"))).collect()
}

impl EnsembleParser {
    fn line<'a>(&mut self, line: &'a str) -> std::result::Result<(), String> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let rest = &toks[1..];
        let key = toks[0];
        let one = |rest: &[&'a str]| -> std::result::Result<&'a str, String> {
            match rest {
                [v] => Ok(v),
                _ => Err(format!("`{key}` takes one value")),
            }
        };
        let node = |nodes: &mut Vec<NodeText>| -> std::result::Result<(), String> {
            if nodes.is_empty() { Err("data before first `node` line".into()) } else { Ok(()) }
        };
        match toks[0] {
            "kind" => self.kind = Some(one(rest)?.to_string()),
            "n" => self.n = Some(one(rest)?.parse().map_err(|_| "bad n")?),
            "d" => self.d = Some(one(rest)?.parse().map_err(|_| "bad d")?),
            "mu" => self.mu = Some(one(rest)?.parse().map_err(|_| "bad mu")?),
            "l" => self.l = Some(one(rest)?.parse().map_err(|_| "bad l")?),
            "y_star" => self.y_star = Some(floats(rest)?),
            "node" => {
                let i: usize = one(rest)?.parse().map_err(|_| "bad node index")?;
                if i != self.nodes.len() {
                    return Err(format!("expected node {}, found node {i}", self.nodes.len()));
                }
                self.nodes.push(NodeText::default());
            }
            "b" => {
                node(&mut self.nodes)?;
                self.nodes.last_mut().unwrap().b = Some(floats(rest)?);
            }
            "a" => {
                node(&mut self.nodes)?;
                self.nodes.last_mut().unwrap().a_rows.push(floats(rest)?);
            }
            "reg" => {
                node(&mut self.nodes)?;
                self.nodes.last_mut().unwrap().reg = Some(one(rest)?.parse().map_err(|_| "bad reg")?);
            }
            "sample" => {
                node(&mut self.nodes)?;
                let vals = floats(rest)?;
                let (label, features) = vals.split_first().ok_or("sample needs a label")?;
                self.nodes.last_mut().unwrap().samples.push(Sample { features: features.to_vec(), label: *label });
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    fn finish(self) -> Result<CostEnsemble> {
        let missing = |what: &str| Error::Parse { line: 0, msg: format!("missing `{what}`") };
        let kind = self.kind.ok_or_else(|| missing("kind"))?;
        let n = self.n.ok_or_else(|| missing("n"))?;
        let d = self.d.ok_or_else(|| missing("d"))?;
        let mu = self.mu.ok_or_else(|| missing("mu"))?;
        let l = self.l.ok_or_else(|| missing("l"))?;
        let y_star = self.y_star.ok_or_else(|| missing("y_star"))?;
        check_dim(d, &y_star)?;
        if self.nodes.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.nodes.len() });
        }
        let mut costs = Vec::with_capacity(n);
        for node in self.nodes {
            let cost = match kind.as_str() {
                "quadratic" => {
                    let b = node.b.ok_or_else(|| missing("b"))?;
                    let a = Matrix::from_rows(&node.a_rows)?;
                    Cost::Quadratic(QuadraticCost::new(a, b)?)
                }
                "logistic" => {
                    let reg = node.reg.ok_or_else(|| missing("reg"))?;
                    Cost::Logistic(LogisticCost::new(d, node.samples, reg)?)
                }
                other => return Err(Error::Parse { line: 0, msg: format!("unknown kind `{other}`") }),
            };
            check_dim(d, &vec![0.0; cost.dim()])?;
            costs.push(cost);
        }
        Ok(CostEnsemble { costs, d, mu, l, y_star })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_vector, STREAM_TEST};

    fn quad(a: Vec<Vec<f64>>, b: Vec<f64>) -> QuadraticCost {
        QuadraticCost::new(Matrix::from_rows(&a).unwrap(), b).unwrap()
    }

    #[test]
    fn quadratic_value_and_gradient_examples() {
        let c = quad(vec![vec![2.0, 0.0], vec![0.0, 2.0]], vec![0.0, 0.0]);
        assert_eq!(c.value(&[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(c.gradient(&[1.0, 0.0]).unwrap(), vec![2.0, 0.0]);

        let c = quad(vec![vec![3.0, 1.0], vec![1.0, 2.0]], vec![4.0, -1.0]);
        assert_eq!(c.value(&[4.0, -1.0]).unwrap(), 0.0);
        assert!(norm(&c.gradient(&[4.0, -1.0]).unwrap()) <= 1e-10);
        assert!(matches!(c.value(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn logistic_value_example() {
        let c = LogisticCost::new(1, vec![Sample { features: vec![0.0], label: 1.0 }], 1.0).unwrap();
        let v = c.value(&[5.0]).unwrap();
        assert!((v - (2f64.ln() + 12.5)).abs() < 1e-12);
    }

    #[test]
    fn logistic_rejects_nonpositive_reg() {
        assert!(LogisticCost::new(1, vec![], 0.0).is_err());
    }

    #[test]
    fn two_node_hand_built_minimizer() {
        let e = CostEnsemble::from_quadratics(vec![quad(vec![vec![1.0]], vec![0.0]), quad(vec![vec![3.0]], vec![4.0])])
            .unwrap();
        assert!((e.y_star()[0] - 3.0).abs() < 1e-14);
        assert!((e.solve_centralized(1e-12).unwrap()[0] - 3.0).abs() < 1e-14);
        assert_eq!((e.mu(), e.l()), (1.0, 3.0));
    }

    #[test]
    fn single_node_minimizer_is_shift() {
        let e = CostEnsemble::from_quadratics(vec![quad(vec![vec![2.0, 0.5], vec![0.5, 1.0]], vec![1.0, 7.0])]).unwrap();
        assert!((e.y_star()[0] - 1.0).abs() < 1e-13 && (e.y_star()[1] - 7.0).abs() < 1e-13);
    }

    #[test]
    fn generated_quadratics_have_requested_spectra() {
        let e = CostEnsemble::generate_quadratic(4, 6, 17, QuadraticRanges::default()).unwrap();
        for cost in e.costs() {
            let Cost::Quadratic(q) = cost else { panic!() };
            let (lo, hi) = q.curvature_range();
            assert!(lo >= e.mu() - 1e-8 && hi <= e.l() + 1e-8);
            assert!((1.0..=101.0).contains(&lo) && hi <= 101.0 + 1e-8);
            assert!(q.shift().iter().all(|b| (1.0..31.0).contains(b)));
        }
        assert!(minimizer_residual(&e) <= 1e-10 * e.l() * norm(e.y_star()).max(1.0));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = CostEnsemble::generate_quadratic(3, 4, 5, QuadraticRanges::default()).unwrap();
        let b = CostEnsemble::generate_quadratic(3, 4, 5, QuadraticRanges::default()).unwrap();
        let c = CostEnsemble::generate_quadratic(3, 4, 6, QuadraticRanges::default()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn logistic_ensemble_minimizer_is_stationary() {
        let e = CostEnsemble::generate_logistic(4, 2, 20, 1.0, 3).unwrap();
        let tol = 1e-8;
        let y = e.solve_centralized(tol).unwrap();
        assert!(norm(&e.aggregate().gradient(&y).unwrap()) <= tol);
        assert!(minimizer_residual(&e) <= 1e-10 * e.l().max(1.0));
        assert_eq!(e.mu(), 1.0);
    }

    #[test]
    fn text_format_round_trips() {
        let q = CostEnsemble::generate_quadratic(3, 3, 2, QuadraticRanges::default()).unwrap();
        assert_eq!(CostEnsemble::from_text(&q.to_text()).unwrap(), q);
        let l = CostEnsemble::generate_logistic(2, 3, 5, 0.5, 2).unwrap();
        assert_eq!(CostEnsemble::from_text(&l.to_text()).unwrap(), l);
    }

    #[test]
    fn text_format_reports_line() {
        let err = CostEnsemble::from_text("kind quadratic\nn 1\nd 1\nbogus 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }));
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let e = CostEnsemble::generate_logistic(2, 3, 10, 0.3, 9).unwrap();
        let mut rng = SeededRng::new(1, STREAM_TEST);
        for cost in e.costs() {
            for _ in 0..5 {
                let x = random_vector(&mut rng, 3, -2.0, 2.0);
                let g = cost.gradient(&x).unwrap();
                for k in 0..3 {
                    let h = 1e-6;
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += h;
                    xm[k] -= h;
                    let fd = (cost.value(&xp).unwrap() - cost.value(&xm).unwrap()) / (2.0 * h);
                    assert!((fd - g[k]).abs() <= 1e-5 * g[k].abs().max(1.0));
                }
            }
        }
    }
}
