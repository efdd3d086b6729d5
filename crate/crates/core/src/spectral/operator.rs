use nalgebra::DMatrix;

use crate::graph::SparseMatrix;

/// Square matrix accessed only through products.
///
/// `apply_transpose` computes `Mᵀx`, i.e. the row vector `xᵀM`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]);

    fn is_symmetric(&self) -> bool {
        false
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_transpose(x, y)
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = self.column(j).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// `M + ξeeᵀ` without forming the rank-one term.
pub struct Shifted<'a, M: LinearOperator> {
    pub inner: &'a M,
    pub xi: f64,
}

impl<M: LinearOperator> LinearOperator for Shifted<'_, M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply(x, y);
        let s = self.xi * x.iter().sum::<f64>();
        y.iter_mut().for_each(|v| *v += s);
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply_transpose(x, y);
        let s = self.xi * x.iter().sum::<f64>();
        y.iter_mut().for_each(|v| *v += s);
    }

    fn is_symmetric(&self) -> bool {
        self.inner.is_symmetric()
    }
}

/// Dense copy of an operator, one column per basis vector.
pub fn to_dense<M: LinearOperator + ?Sized>(op: &M) -> DMatrix<f64> {
    let n = op.dim();
    let mut d = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            d[(i, j)] = col[i];
        }
    }
    d
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_and_sparse_agree() {
        let rows = vec![vec![0.0, 1.0, 2.0], vec![3.0, 0.0, 0.5], vec![0.0, 4.0, 1.0]];
        let s = SparseMatrix::from_dense(&rows).unwrap();
        let d = DMatrix::from_fn(3, 3, |i, j| rows[i][j]);
        assert_eq!(to_dense(&s), d);
        let x = [1.0, -2.0, 0.5];
        let (mut a, mut b) = (vec![0.0; 3], vec![0.0; 3]);
        s.apply_transpose(&x, &mut a);
        d.apply_transpose(&x, &mut b);
        assert_eq!(a, b);
        let sh = Shifted { inner: &s, xi: 0.5 };
        let dd = to_dense(&sh);
        assert_eq!(dd[(0, 0)], 0.5);
        assert_eq!(dd[(1, 0)], 3.5);
    }
}
