//! Compressed-row complex matrices and block-wise Hermitian eigensolvers.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square complex matrix in compressed sparse row form. Entries within a row
/// are sorted by column and exact zeros are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        SparseOperator {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_triplets(
            values.len(),
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i, i, Complex64::new(v, 0.0)))
                .collect(),
        )
    }

    /// Duplicate coordinates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside dimension {dim}");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != ZERO);
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOperator {
            dim,
            row_ptr,
            cols: merged.iter().map(|e| e.1).collect(),
            vals: merged.iter().map(|e| e.2).collect(),
        }
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        let mut triplets = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != ZERO {
                    triplets.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.dim,
            self.entries().map(|(i, j, v)| (j, i, v.conj())).collect(),
        )
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_triplets(
            self.dim,
            self.entries().map(|(i, j, v)| (i, j, v * factor)).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self::from_triplets(self.dim, self.entries().chain(other.entries()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut acc = vec![ZERO; self.dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; self.dim];
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..self.dim {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != ZERO {
                    cols.push(j);
                    vals.push(acc[j]);
                }
                acc[j] = ZERO;
                mark[j] = false;
            }
            touched.clear();
            row_ptr[i + 1] = cols.len();
        }
        SparseOperator {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).map(|(j, a)| a * v[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `Tr[self · other]`.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries().map(|(i, j, v)| v * other.get(j, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other)
            .vals
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(i, j, _)| i == j)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    /// Principal submatrix on `indices`, as a dense matrix.
    pub fn dense_block(&self, indices: &[usize]) -> DMatrix<Complex64> {
        let position: BTreeMap<usize, usize> =
            indices.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut m = DMatrix::from_element(indices.len(), indices.len(), ZERO);
        for (a, &i) in indices.iter().enumerate() {
            for (j, v) in self.row(i) {
                if let Some(&b) = position.get(&j) {
                    m[(a, b)] = v;
                }
            }
        }
        m
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Connected components of the joint sparsity graph of `ops`, restricted to
/// indices that carry at least one stored entry. Components and their
/// members are sorted ascending.
pub fn joint_blocks(ops: &[&SparseOperator]) -> Vec<Vec<usize>> {
    let dim = ops.first().map_or(0, |o| o.dim);
    let mut parent: Vec<usize> = (0..dim).collect();
    let mut active = vec![false; dim];
    for op in ops {
        for (i, j, _) in op.entries() {
            active[i] = true;
            active[j] = true;
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &used) in active.iter().enumerate() {
        if used {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
    }
    groups.into_values().collect()
}

/// Eigenvalues of a Hermitian operator, computed block by block, ascending.
/// Rows with no stored entries contribute zero eigenvalues.
pub fn hermitian_eigenvalues(op: &SparseOperator) -> Vec<f64> {
    let blocks = joint_blocks(&[op]);
    let covered: usize = blocks.iter().map(Vec::len).sum();
    let mut out = vec![0.0; op.dim - covered];
    for block in blocks {
        let dense = op.dense_block(&block);
        out.extend(dense.symmetric_eigenvalues().iter().copied());
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Eigenvalues below `-tolerance` reject the matrix; anything above is
/// clamped to zero before taking the square root.
pub(crate) fn psd_sqrt_dense(m: DMatrix<Complex64>, tolerance: f64) -> Result<DMatrix<Complex64>> {
    let eig = m.symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tolerance {
        return Err(Error::NotPsd(min));
    }
    let roots = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
    let vecs = &eig.eigenvectors;
    Ok(vecs * DMatrix::from_diagonal(&roots) * vecs.adjoint())
}

/// `√M` for a positive semidefinite Hermitian operator.
pub fn psd_sqrt(op: &SparseOperator, tolerance: f64) -> Result<SparseOperator> {
    let mut triplets = Vec::new();
    for block in joint_blocks(&[op]) {
        let root = psd_sqrt_dense(op.dense_block(&block), tolerance)?;
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                triplets.push((i, j, root[(a, b)]));
            }
        }
    }
    Ok(SparseOperator::from_triplets(op.dim, triplets))
}
