use std::collections::BTreeSet;
use std::sync::Arc;

use super::space::FeSpace;

/// Square CSR matrix. The sparsity pattern is shared (via `Arc`) between
/// matrices built for the same space, so linear combinations are cheap and
/// factorization symbolics can be reused.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pattern: Arc<Pattern>,
    values: Vec<f64>,
}

#[derive(Debug, PartialEq)]
pub(crate) struct Pattern {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
}

impl Pattern {
    fn find(&self, i: usize, j: usize) -> Option<usize> {
        let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        cols.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }
}

impl SparseMatrix {
    /// All-zero matrix with the element-coupling pattern of `space`.
    pub fn for_space(space: &FeSpace) -> Self {
        space.zero_matrix()
    }

    pub(crate) fn pattern_of(space: &FeSpace) -> Self {
        let n = space.n_dofs();
        let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for e in 0..space.mesh().n_elements() {
            let dofs = space.element_dofs(e);
            for &i in dofs {
                rows[i].extend(dofs.iter().copied());
            }
        }
        Self::from_row_sets(n, rows)
    }

    fn from_row_sets(n: usize, rows: Vec<BTreeSet<usize>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows {
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self {
            pattern: Arc::new(Pattern { n, row_ptr, col_idx }),
            values: vec![0.0; nnz],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_row_sets(n, (0..n).map(|i| BTreeSet::from([i])).collect());
        m.values.fill(1.0);
        m
    }

    /// Sums duplicate entries.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(i, j, _) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside {n}x{n}");
            rows[i].insert(j);
        }
        let mut m = Self::from_row_sets(n, rows);
        for &(i, j, v) in triplets {
            m.add(i, j, v);
        }
        m
    }

    /// Zero matrix sharing this matrix's pattern.
    pub fn zeros_like(&self) -> Self {
        Self {
            pattern: self.pattern.clone(),
            values: vec![0.0; self.values.len()],
        }
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.pattern.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.pattern.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern
    }

    /// Entry `(i, j)`, zero outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.find(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds to an entry; panics outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .pattern
            .find(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the sparsity pattern"));
        self.values[k] += v;
    }

    /// Scatters a dense `dofs.len()`² local matrix (row-major).
    pub fn add_local(&mut self, dofs: &[usize], local: &[f64]) {
        let n = dofs.len();
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                self.add(i, j, local[a * n + b]);
            }
        }
    }

    /// Iterates the stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.pattern.row_ptr[i]..self.pattern.row_ptr[i + 1];
        self.pattern.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> (&[usize], &mut [f64]) {
        let r = self.pattern.row_ptr[i]..self.pattern.row_ptr[i + 1];
        (&self.pattern.col_idx[r.clone()], &mut self.values[r])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n());
        (0..self.n()).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `Σ c_k A_k`; every operand must share one pattern.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> SparseMatrix {
        let (_, first) = terms.first().expect("at least one term");
        let mut out = first.zeros_like();
        for (c, m) in terms {
            assert!(out.same_pattern(m), "linear combination of mismatched patterns");
            for (o, v) in out.values.iter_mut().zip(&m.values) {
                *o += c * v;
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> SparseMatrix {
        Self::linear_combination(&[(c, self)])
    }

    /// Largest entrywise difference, treating entries outside either pattern
    /// as zero.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        assert_eq!(self.n(), other.n());
        let mut m: f64 = 0.0;
        for i in 0..self.n() {
            for (j, v) in self.row(i) {
                m = m.max((v - other.get(i, j)).abs());
            }
            for (j, v) in other.row(i) {
                m = m.max((v - self.get(i, j)).abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n()]; self.n()];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}
