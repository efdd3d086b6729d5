use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows below this count are multiplied sequentially.
const PAR_ROWS: usize = 4096;

/// Index structure shared by every matrix assembled from the same pattern.
///
/// Stores both the row-major layout and its transpose so that `Mx` and `Mᵀx`
/// are both computed as per-row gathers.
#[derive(Debug, PartialEq, Eq)]
pub struct CsrPattern {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    t_indptr: Vec<usize>,
    t_indices: Vec<usize>,
    // position in `values` of each transposed entry
    t_perm: Vec<usize>,
}

impl CsrPattern {
    /// Builds a pattern from coordinates. Entries must be unique; they are
    /// sorted by row then column. Returns the pattern and, for each input
    /// coordinate, its slot in the value array.
    pub fn from_coords(n: usize, coords: &[(usize, usize)]) -> Result<(Self, Vec<usize>)> {
        for &(i, j) in coords {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, n });
            }
        }
        let mut order: Vec<usize> = (0..coords.len()).collect();
        order.sort_by_key(|&k| coords[k]);
        for w in order.windows(2) {
            if coords[w[0]] == coords[w[1]] {
                let (i, j) = coords[w[0]];
                return Err(Error::ArcConflict(i, j));
            }
        }
        let mut slot = vec![0; coords.len()];
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(coords.len());
        for (pos, &k) in order.iter().enumerate() {
            let (i, j) = coords[k];
            slot[k] = pos;
            indptr[i + 1] += 1;
            indices.push(j);
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }

        let mut t_indptr = vec![0; n + 1];
        for &j in &indices {
            t_indptr[j + 1] += 1;
        }
        for j in 0..n {
            t_indptr[j + 1] += t_indptr[j];
        }
        let mut next = t_indptr.clone();
        let mut t_indices = vec![0; indices.len()];
        let mut t_perm = vec![0; indices.len()];
        for i in 0..n {
            for (k, &j) in indices.iter().enumerate().take(indptr[i + 1]).skip(indptr[i]) {
                t_indices[next[j]] = i;
                t_perm[next[j]] = k;
                next[j] += 1;
            }
        }
        Ok((
            Self {
                n,
                indptr,
                indices,
                t_indptr,
                t_indices,
                t_perm,
            },
            slot,
        ))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

/// Square nonnegative matrix in compressed sparse row layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pattern: Arc<CsrPattern>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Wraps values laid out in `pattern` order.
    pub fn new(pattern: Arc<CsrPattern>, values: Vec<f64>) -> Result<Self> {
        if values.len() != pattern.nnz() {
            return Err(Error::Dimension {
                expected: pattern.nnz(),
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Parameter(format!("matrix entry {v} is not a nonnegative finite number")));
        }
        Ok(Self { pattern, values })
    }

    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let coords: Vec<_> = triplets.iter().map(|&(i, j, _)| (i, j)).collect();
        let (pattern, slot) = CsrPattern::from_coords(n, &coords)?;
        let mut values = vec![0.0; triplets.len()];
        for (k, &(_, _, v)) in triplets.iter().enumerate() {
            values[slot[k]] = v;
        }
        Self::new(Arc::new(pattern), values)
    }

    /// Keeps the nonzero entries of a dense row-major matrix.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &triplets)
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    /// Number of structural entries (zeros included).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let p = &self.pattern;
        let row = &p.indices[p.indptr[i]..p.indptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.values[p.indptr[i] + k],
            Err(_) => 0.0,
        }
    }

    /// Iterates `(row, col, value)` over structural entries in row order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let p = &self.pattern;
        (0..p.n).flat_map(move |i| {
            (p.indptr[i]..p.indptr[i + 1]).map(move |k| (i, p.indices[k], self.values[k]))
        })
    }

    /// `y = M x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let p = &self.pattern;
        let row = |i: usize| -> f64 {
            let mut acc = 0.0;
            for k in p.indptr[i]..p.indptr[i + 1] {
                acc += self.values[k] * x[p.indices[k]];
            }
            acc
        };
        if p.n >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row(i);
            }
        }
    }

    /// `y = Mᵀ x`
    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        let p = &self.pattern;
        let col = |j: usize| -> f64 {
            let mut acc = 0.0;
            for k in p.t_indptr[j]..p.t_indptr[j + 1] {
                acc += self.values[p.t_perm[k]] * x[p.t_indices[k]];
            }
            acc
        };
        if p.n >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(j, yj)| *yj = col(j));
        } else {
            for (j, yj) in y.iter_mut().enumerate() {
                *yj = col(j);
            }
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.matvec(&vec![1.0; self.n()], &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n()]; self.n()];
        for (i, j, v) in self.entries() {
            d[i][j] = v;
        }
        d
    }
}
