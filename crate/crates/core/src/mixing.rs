//! Symmetric doubly stochastic weight matrices and their block action on
//! stacked iterates.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::network::Graph;

pub const ROW_SUM_TOL: f64 = 1e-12;
pub const TOP_EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct MixingMatrix {
    w: Matrix,
    /// Nonzero entries of each row (closed neighbourhood), sorted by column.
    rows: Vec<Vec<(usize, f64)>>,
    lambda2: f64,
    lambda_n: f64,
}

impl MixingMatrix {
    /// Weights `1 / (2 (1 + max(d_i, d_j)))` on edges, the remainder on the
    /// diagonal.
    pub fn max_degree(g: &Graph) -> Result<Self> {
        if !g.is_connected() {
            return Err(Error::GraphNotConnected);
        }
        let n = g.n();
        let deg = g.degrees();
        let mut w = Matrix::zeros(n, n);
        for (i, j) in g.edges() {
            let wij = 1.0 / (2.0 * (1.0 + deg[i].max(deg[j]) as f64));
            w[(i, j)] = wij;
            w[(j, i)] = wij;
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
            w[(i, i)] = 1.0 - off;
        }
        let m = MixingMatrix::from_dense(w)?;
        m.check_support(g)?;
        Ok(m)
    }

    /// Validates `w` and caches its spectrum.
    pub fn from_dense(w: Matrix) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::InvalidMixing(format!("{}x{} is not square", w.rows(), w.cols())));
        }
        let n = w.rows();
        for i in 0..n {
            for j in i + 1..n {
                if w[(i, j)] != w[(j, i)] {
                    return Err(Error::InvalidMixing(format!("w[{i}][{j}] != w[{j}][{i}]")));
                }
            }
        }
        for i in 0..n {
            let sum: f64 = w.row(i).iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidMixing(format!("row {i} sums to {sum}")));
            }
            let wii = w[(i, i)];
            // a single node has w_00 = 1 and nothing to mix with
            if n > 1 && !(wii > 0.0 && wii < 1.0) {
                return Err(Error::InvalidMixing(format!("diagonal w[{i}][{i}] = {wii} not in (0, 1)")));
            }
            if w.row(i).iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidMixing(format!("negative entry in row {i}")));
            }
        }
        let eig = symmetric_eigen(&w)?;
        if (eig.values[0] - 1.0).abs() > TOP_EIGEN_TOL {
            return Err(Error::InvalidMixing(format!("largest eigenvalue {} != 1", eig.values[0])));
        }
        let (lambda2, lambda_n) = if n == 1 {
            (0.0, 0.0)
        } else {
            (eig.values[1], eig.values[n - 1])
        };
        if lambda2.abs() >= 1.0 || lambda_n.abs() >= 1.0 {
            return Err(Error::InvalidMixing(format!(
                "spectrum not contracting: lambda2={lambda2}, lambda_n={lambda_n}"
            )));
        }
        let rows = (0..n)
            .map(|i| (0..n).filter(|&j| w[(i, j)] != 0.0).map(|j| (j, w[(i, j)])).collect())
            .collect();
        Ok(MixingMatrix { w, rows, lambda2, lambda_n })
    }

    /// Off-diagonal support must coincide with the edge set.
    pub fn check_support(&self, g: &Graph) -> Result<()> {
        let n = self.n();
        if g.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.n() });
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && (self.w[(i, j)] > 0.0) != g.has_edge(i, j) {
                    return Err(Error::InvalidMixing(format!("support of w[{i}][{j}] disagrees with graph")));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.w.rows()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[(i, j)]
    }

    pub fn dense(&self) -> &Matrix {
        &self.w
    }

    /// `(j, w_ij)` for every `j` in the closed neighbourhood of `i`.
    pub fn row_entries(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn lambda_n(&self) -> f64 {
        self.lambda_n
    }

    pub fn spectral_bounds(&self) -> (f64, f64) {
        (self.lambda2, self.lambda_n)
    }

    /// `(W ⊗ I_d) x` for a stacked iterate of `n` blocks of length `d`.
    pub fn mix(&self, x: &[f64], d: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.mix_into(x, d, &mut out)?;
        Ok(out)
    }

    pub fn mix_into(&self, x: &[f64], d: usize, out: &mut [f64]) -> Result<()> {
        let n = self.n();
        if x.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, got: x.len() });
        }
        if out.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, got: out.len() });
        }
        for (i, block) in out.chunks_exact_mut(d).enumerate() {
            block.fill(0.0);
            for &(j, wij) in &self.rows[i] {
                for (o, v) in block.iter_mut().zip(&x[j * d..(j + 1) * d]) {
                    *o += wij * v;
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            let row: Vec<String> = self.w.row(i).iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
