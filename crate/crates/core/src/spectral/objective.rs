use std::collections::BTreeSet;

use super::Normalization;

/// Differentiable utility of a ranking vector.
pub trait Objective: Sync {
    fn value(&self, u: &[f64]) -> f64;

    fn gradient(&self, u: &[f64], out: &mut [f64]);

    fn gradient_vec(&self, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; u.len()];
        self.gradient(u, &mut g);
        g
    }
}

/// Aggregate of the scores of a target set of pages.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetObjective {
    /// `Σ_{i∈I} uᵢ²`
    SumSquares(Vec<usize>),
    /// `Σ_{i∈I} uᵢ`
    Sum(Vec<usize>),
    /// `Σ_{i∈I} exp(uᵢ)`
    SumExp(Vec<usize>),
}

impl TargetObjective {
    pub fn sum_squares(targets: &BTreeSet<usize>) -> Self {
        Self::SumSquares(targets.iter().copied().collect())
    }

    pub fn sum(targets: &BTreeSet<usize>) -> Self {
        Self::Sum(targets.iter().copied().collect())
    }

    pub fn sum_exp(targets: &BTreeSet<usize>) -> Self {
        Self::SumExp(targets.iter().copied().collect())
    }
}

impl Objective for TargetObjective {
    fn value(&self, u: &[f64]) -> f64 {
        match self {
            Self::SumSquares(t) => t.iter().map(|&i| u[i] * u[i]).sum(),
            Self::Sum(t) => t.iter().map(|&i| u[i]).sum(),
            Self::SumExp(t) => t.iter().map(|&i| u[i].exp()).sum(),
        }
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        match self {
            Self::SumSquares(t) => t.iter().for_each(|&i| out[i] = 2.0 * u[i]),
            Self::Sum(t) => t.iter().for_each(|&i| out[i] = 1.0),
            Self::SumExp(t) => t.iter().for_each(|&i| out[i] = u[i].exp()),
        }
    }
}

/// `f = N`: constant on the normalization manifold, so its gradient
/// through the eigenvector vanishes.
#[derive(Debug, Clone)]
pub struct NormObjective(pub Normalization);

impl Objective for NormObjective {
    fn value(&self, u: &[f64]) -> f64 {
        self.0.value(u)
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        self.0.gradient(u, out)
    }
}

/// Objective built from a pair of closures.
pub struct FnObjective<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    fn value(&self, u: &[f64]) -> f64 {
        (self.value)(u)
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        (self.gradient)(u, out)
    }
}
