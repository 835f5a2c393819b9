//! Compressed sparse row matrices over `Complex64`.

use crate::linalg::{CMat, CVec, C64, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let dim = d.len();
        let mut triplets = Vec::with_capacity(dim);
        for (i, &v) in d.iter().enumerate() {
            triplets.push((i, i, v));
        }
        Self::from_triplets(dim, triplets)
    }

    /// Builds from `(row, col, value)` entries; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let mut kept_cols = Vec::with_capacity(cols.len());
        let mut kept_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != ZERO {
                row_ptr[r + 1] += 1;
                kept_cols.push(c);
                kept_vals.push(v);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            dim,
            row_ptr,
            cols: kept_cols,
            vals: kept_vals,
        }
    }

    pub fn from_dense(m: &CMat, drop_below: f64) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)].norm() > drop_below {
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

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.row(i).find(|&(c, _)| c == j).map_or(ZERO, |(_, v)| v)
    }

    pub fn matvec(&self, x: &CVec) -> CVec {
        let mut y = CVec::zeros(self.dim);
        self.matvec_into(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    /// `y = A x` for Hermitian `A`, walking only the non-zero entries of `x`
    /// (column `j` of `A` is the conjugate of row `j`).
    pub fn hermitian_matvec_sparse_input(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for k in self.row_ptr[j]..self.row_ptr[j + 1] {
                y[self.cols[k]] += self.vals[k].conj() * xj;
            }
        }
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &CVec) -> C64 {
        x.dotc(&self.matvec(x))
    }

    pub fn adjoint(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                triplets.push((j, i, v.conj()));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `Σ c_k A_k`; exact zeros are dropped.
    pub fn linear_combination(dim: usize, terms: &[(C64, &SparseMatrix)]) -> Self {
        for (_, m) in terms {
            assert_eq!(m.dim, dim, "dimension mismatch in linear combination");
        }
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut acc = vec![ZERO; dim];
        let mut touched = vec![false; dim];
        let mut pattern = Vec::new();
        for i in 0..dim {
            for &(c, m) in terms {
                if c == ZERO {
                    continue;
                }
                for (j, v) in m.row(i) {
                    if !touched[j] {
                        touched[j] = true;
                        pattern.push(j);
                    }
                    acc[j] += c * v;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                if acc[j] != ZERO {
                    cols.push(j);
                    vals.push(acc[j]);
                }
                acc[j] = ZERO;
                touched[j] = false;
            }
            pattern.clear();
            row_ptr[i + 1] = cols.len();
        }
        SparseMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn add(&self, other: &SparseMatrix) -> Self {
        let one = C64::new(1.0, 0.0);
        Self::linear_combination(self.dim, &[(one, self), (one, other)])
    }

    pub fn sub(&self, other: &SparseMatrix) -> Self {
        let one = C64::new(1.0, 0.0);
        Self::linear_combination(self.dim, &[(one, self), (-one, other)])
    }

    pub fn matmul(&self, other: &SparseMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut acc = vec![ZERO; self.dim];
        let mut touched = vec![false; self.dim];
        let mut pattern = Vec::new();
        for i in 0..self.dim {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                if acc[j] != ZERO {
                    cols.push(j);
                    vals.push(acc[j]);
                }
                acc[j] = ZERO;
                touched[j] = false;
            }
            pattern.clear();
            row_ptr[i + 1] = cols.len();
        }
        SparseMatrix {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// `A B + B A`.
    pub fn anticommutator(&self, other: &SparseMatrix) -> Self {
        self.matmul(other).add(&other.matmul(self))
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Largest `|A_ij - s δ_ij|`.
    pub fn distance_to_scaled_identity(&self, s: C64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            let mut diag = ZERO;
            for (j, v) in self.row(i) {
                if j == i {
                    diag = v;
                } else {
                    worst = worst.max(v.norm());
                }
            }
            worst = worst.max((diag - s).norm());
        }
        worst
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    pub fn diagonal_entries(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// True when every entry off the diagonal is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(j, _)| j == i))
    }
}
