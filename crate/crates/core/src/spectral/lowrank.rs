use crate::graph::Link;

/// Matrix `Σ_t s_t · l_t r_tᵀ` kept in factored form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LowRankGradient {
    terms: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl LowRankGradient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn outer(scale: f64, left: Vec<f64>, right: Vec<f64>) -> Self {
        Self {
            terms: vec![(scale, left, right)],
        }
    }

    pub fn push(&mut self, scale: f64, left: Vec<f64>, right: Vec<f64>) {
        debug_assert_eq!(left.len(), right.len());
        self.terms.push((scale, left, right));
    }

    pub fn terms(&self) -> &[(f64, Vec<f64>, Vec<f64>)] {
        &self.terms
    }

    /// Upper bound on the rank.
    pub fn rank_bound(&self) -> usize {
        self.terms.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.terms.iter().map(|(s, l, r)| s * l[i] * r[j]).sum()
    }

    /// Entries at the given coordinates, in order.
    pub fn restrict(&self, links: &[Link]) -> Vec<f64> {
        links.iter().map(|&(i, j)| self.entry(i, j)).collect()
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.0 *= factor);
        self
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.terms.first().map_or(0, |t| t.1.len());
        nalgebra::DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }
}

/// Derivative of a simple eigenvalue: `∂λ/∂M_ij = vᵢuⱼ` with `vᵀu = 1`.
pub fn root_gradient(u: &[f64], v: &[f64]) -> LowRankGradient {
    LowRankGradient::outer(1.0, v.to_vec(), u.to_vec())
}
