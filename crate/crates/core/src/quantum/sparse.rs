//! Compressed-sparse-row complex matrices with the handful of operations the
//! operator algebra needs: Kronecker products, products, adjoints, and
//! sparse-times-dense kernels on column-major square blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` entries; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < rows && c < cols, "entry ({r}, {c}) outside {rows}x{cols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        SparseMatrix { rows, cols, indptr, indices, values }.pruned()
    }

    fn pruned(self) -> Self {
        if self.values.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return self;
        }
        let mut entries = Vec::with_capacity(self.values.len());
        for (r, c, v) in self.iter() {
            if v != C64::new(0.0, 0.0) {
                entries.push((r, c, v));
            }
        }
        let mut indptr = vec![0usize; self.rows + 1];
        for (r, _, _) in &entries {
            indptr[r + 1] += 1;
        }
        for r in 0..self.rows {
            indptr[r + 1] += indptr[r];
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices: entries.iter().map(|e| e.1).collect(),
            values: entries.iter().map(|e| e.2).collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, indptr: vec![0; rows + 1], indices: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, C64::new(1.0, 0.0))).collect())
    }

    /// Real diagonal matrix.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SparseMatrix::from_triplets(n, n, diag.iter().enumerate().map(|(i, d)| (i, i, C64::new(*d, 0.0))).collect())
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    entries.push((r, c, v));
                }
            }
        }
        SparseMatrix::from_triplets(m.nrows(), m.ncols(), entries)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows)
            .flat_map(move |r| (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k])))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let row = self.indptr[r]..self.indptr[r + 1];
        match self.indices[row.clone()].binary_search(&c) {
            Ok(k) => self.values[row.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        SparseMatrix::from_triplets(self.cols, self.rows, self.iter().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out.pruned()
    }

    pub fn add(&self, other: &SparseMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        SparseMatrix::from_triplets(self.rows, self.cols, self.iter().chain(other.iter()).collect())
    }

    pub fn sub(&self, other: &SparseMatrix) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn matmul(&self, other: &SparseMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut entries = Vec::new();
        let mut acc = vec![C64::new(0.0, 0.0); other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.cols];
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let (mid, a) = (self.indices[k], self.values[k]);
                for j in other.indptr[mid]..other.indptr[mid + 1] {
                    let c = other.indices[j];
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * other.values[j];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                entries.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                mark[c] = false;
            }
            touched.clear();
        }
        SparseMatrix::from_triplets(self.rows, other.cols, entries)
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &SparseMatrix) -> Self {
        let mut entries = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.iter() {
            for (r2, c2, v2) in other.iter() {
                entries.push((r1 * other.rows + r2, c1 * other.cols + c2, v1 * v2));
            }
        }
        SparseMatrix::from_triplets(self.rows * other.rows, self.cols * other.cols, entries)
    }

    pub fn kron_all(factors: &[SparseMatrix]) -> Self {
        factors.iter().skip(1).fold(factors[0].clone(), |acc, f| acc.kron(f))
    }

    /// Largest entry of `|A − A†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.sub(&self.adjoint()).values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `out += alpha · A · B` for column-major `B` with `ncols` columns.
    pub fn mul_dense_acc(&self, alpha: C64, b: &[C64], ncols: usize, out: &mut [C64]) {
        debug_assert_eq!(b.len(), self.cols * ncols);
        debug_assert_eq!(out.len(), self.rows * ncols);
        for j in 0..ncols {
            let bcol = &b[j * self.cols..(j + 1) * self.cols];
            let ocol = &mut out[j * self.rows..(j + 1) * self.rows];
            for r in 0..self.rows {
                let mut s = C64::new(0.0, 0.0);
                for k in self.indptr[r]..self.indptr[r + 1] {
                    s += self.values[k] * bcol[self.indices[k]];
                }
                ocol[r] += alpha * s;
            }
        }
    }

    /// `out += alpha · B · A` for column-major `B` with `nrows` rows.
    pub fn dense_mul_acc(&self, alpha: C64, b: &[C64], nrows: usize, out: &mut [C64]) {
        debug_assert_eq!(b.len(), nrows * self.rows);
        debug_assert_eq!(out.len(), nrows * self.cols);
        for k in 0..self.rows {
            let bcol = &b[k * nrows..(k + 1) * nrows];
            for e in self.indptr[k]..self.indptr[k + 1] {
                let j = self.indices[e];
                let a = alpha * self.values[e];
                let ocol = &mut out[j * nrows..(j + 1) * nrows];
                for (o, bv) in ocol.iter_mut().zip(bcol) {
                    *o += a * bv;
                }
            }
        }
    }

    /// `tr(ρ A) = Σ_ij A_ij ρ_ji`.
    pub fn expectation(&self, rho: &DMatrix<C64>) -> Result<C64> {
        if rho.nrows() != self.cols || rho.ncols() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: rho.nrows() });
        }
        Ok(self.iter().map(|(r, c, v)| v * rho[(c, r)]).sum())
    }

    /// Action on a state vector.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        self.mul_dense_acc(C64::new(1.0, 0.0), psi, 1, &mut out);
        out
    }
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    a.matmul(b).sub(&b.matmul(a))
}

/// Largest entrywise modulus of `A − B`.
pub fn max_abs_diff(a: &SparseMatrix, b: &SparseMatrix) -> f64 {
    a.sub(b).max_abs()
}
