//! Column-sparse sketching matrices, dense matrices, and the exact symmetric
//! eigenvalue oracle every other module leans on.
//!
//! A `SketchMatrix` is the m×n sketch Π with a declared per-column sparsity
//! budget. The distortion of Π on a d-dimensional subspace spanned by an
//! isometry U reduces exactly to the extreme eigenvalues of (ΠU)ᵀ(ΠU), which
//! `gram_eigen_bounds` computes with cyclic Jacobi rotations (d ≤ 512).

use crate::error::{Error, Result};

/// Column-sparse m×n real matrix with a declared max column sparsity.
///
/// Invariants (enforced at construction):
/// * each column holds at most `max_col_nnz` entries,
/// * row indices within a column are strictly increasing,
/// * stored values are finite and nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchMatrix {
    rows: usize,
    cols: usize,
    max_col_nnz: usize,
    columns: Vec<Vec<(usize, f64)>>,
}

impl SketchMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        max_col_nnz: usize,
        columns: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "sketch must be non-degenerate, got {rows}x{cols}"
            )));
        }
        if columns.len() != cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {cols} columns, got {}",
                columns.len()
            )));
        }
        for (c, col) in columns.iter().enumerate() {
            if col.len() > max_col_nnz {
                return Err(Error::InvalidParameter(format!(
                    "column {c} has {} entries, max_col_nnz is {max_col_nnz}",
                    col.len()
                )));
            }
            let mut prev: Option<usize> = None;
            for &(r, v) in col {
                if r >= rows {
                    return Err(Error::DimensionMismatch(format!(
                        "column {c}: row index {r} out of range [0, {rows})"
                    )));
                }
                if let Some(p) = prev {
                    if r <= p {
                        return Err(Error::InvalidParameter(format!(
                            "column {c}: row indices not strictly increasing at {r}"
                        )));
                    }
                }
                if !v.is_finite() || v == 0.0 {
                    return Err(Error::NumericInput(format!(
                        "column {c}, row {r}: value {v} must be finite and nonzero"
                    )));
                }
                prev = Some(r);
            }
        }
        Ok(Self { rows, cols, max_col_nnz, columns })
    }

    /// All-zero sketch (every column empty).
    pub fn zeros(rows: usize, cols: usize, max_col_nnz: usize) -> Result<Self> {
        Self::new(rows, cols, max_col_nnz, vec![Vec::new(); cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn max_col_nnz(&self) -> usize {
        self.max_col_nnz
    }

    /// Sorted (row, value) entries of column `c`. Panics if `c` is out of range.
    pub fn column(&self, c: usize) -> &[(usize, f64)] {
        &self.columns[c]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn column_norm(&self, c: usize) -> f64 {
        self.columns[c]
            .iter()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Exact sparse dot product of columns `i` and `j` (two-pointer merge).
    pub fn column_inner_product(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.cols || j >= self.cols {
            return Err(Error::DimensionMismatch(format!(
                "column index out of range: ({i}, {j}) vs {} columns",
                self.cols
            )));
        }
        let (a, b) = (&self.columns[i], &self.columns[j]);
        let (mut p, mut q) = (0, 0);
        let mut acc = 0.0;
        while p < a.len() && q < b.len() {
            match a[p].0.cmp(&b[q].0) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[p].1 * b[q].1;
                    p += 1;
                    q += 1;
                }
            }
        }
        Ok(acc)
    }

    /// New sketch with every stored value multiplied by `c` (c finite, nonzero).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|col| col.iter().map(|&(r, v)| (r, c * v)).collect())
            .collect();
        Self::new(self.rows, self.cols, self.max_col_nnz, columns)
    }
}

/// Sparse column vector with sorted coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut prev: Option<usize> = None;
        for &(i, v) in &entries {
            if i >= dim {
                return Err(Error::DimensionMismatch(format!(
                    "index {i} out of range [0, {dim})"
                )));
            }
            if let Some(p) = prev {
                if i <= p {
                    return Err(Error::InvalidParameter(format!(
                        "indices not strictly increasing at {i}"
                    )));
                }
            }
            if !v.is_finite() {
                return Err(Error::NumericInput(format!("entry {i} is not finite")));
            }
            prev = Some(i);
        }
        Ok(Self { dim, entries })
    }

    pub fn unit(dim: usize, index: usize) -> Result<Self> {
        Self::new(dim, vec![(index, 1.0)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericInput("dense matrix entry not finite".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// y = A x for a dense vector x of length `cols`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn scaled(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| c * v).collect(),
        }
    }
}

/// Materializes Π·U column by column for sparse input columns.
///
/// Output column j is the linear combination of Π's columns selected and
/// weighted by `u_cols[j]`.
pub fn apply_sketch(pi: &SketchMatrix, u_cols: &[SparseVec]) -> Result<DenseMatrix> {
    for (j, u) in u_cols.iter().enumerate() {
        if u.dim() != pi.cols() {
            return Err(Error::DimensionMismatch(format!(
                "input column {j} lives in dimension {}, sketch has {} columns",
                u.dim(),
                pi.cols()
            )));
        }
    }
    let mut out = DenseMatrix::zeros(pi.rows(), u_cols.len());
    for (j, u) in u_cols.iter().enumerate() {
        for &(i, w) in u.entries() {
            for &(r, v) in pi.column(i) {
                let cur = out.get(r, j);
                out.set(r, j, cur + w * v);
            }
        }
    }
    Ok(out)
}

/// Smallest and largest eigenvalues of AᵀA.
///
/// The Gram matrix is solved exactly by cyclic Jacobi rotations (off-diagonal
/// Frobenius norm below 1e-14 or 64 sweeps). Negative eigenvalues down to
/// -1e-10 are clamped to zero: the Gram matrix is PSD and such values are
/// roundoff.
pub fn gram_eigen_bounds(a: &DenseMatrix) -> Result<(f64, f64)> {
    let d = a.cols();
    if d == 0 {
        return Err(Error::InvalidParameter("matrix with zero columns".into()));
    }
    if d > 512 {
        return Err(Error::InvalidParameter(format!(
            "Gram solver limited to 512 columns, got {d}"
        )));
    }
    if a.entries().iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericInput("matrix entry not finite".into()));
    }

    let mut gram = vec![0.0; d * d];
    for r in 0..a.rows() {
        let row = a.row(r);
        for i in 0..d {
            let ri = row[i];
            if ri == 0.0 {
                continue;
            }
            for j in i..d {
                gram[i * d + j] += ri * row[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            gram[i * d + j] = gram[j * d + i];
        }
    }

    let eigs = jacobi_eigenvalues(gram, d);
    let mut lambda_min = f64::INFINITY;
    let mut lambda_max = f64::NEG_INFINITY;
    for &e in &eigs {
        lambda_min = lambda_min.min(e);
        lambda_max = lambda_max.max(e);
    }
    if (-1e-10..0.0).contains(&lambda_min) {
        lambda_min = 0.0;
    }
    Ok((lambda_min, lambda_max))
}

/// Eigenvalues of a symmetric d×d matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(mut a: Vec<f64>, d: usize) -> Vec<f64> {
    const MAX_SWEEPS: usize = 64;
    const OFF_TOL: f64 = 1e-14;

    if d == 1 {
        return a;
    }
    for _ in 0..MAX_SWEEPS {
        let mut off_sq = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off_sq += a[p * d + q] * a[p * d + q];
            }
        }
        if off_sq.sqrt() <= OFF_TOL {
            break;
        }
        for p in 0..d - 1 {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                // tan of the rotation angle, the root of smaller magnitude
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;
            }
        }
    }
    (0..d).map(|i| a[i * d + i]).collect()
}
