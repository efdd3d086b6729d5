use serde::{Deserialize, Serialize};

/// Degree-one homogeneous normalization `N` for right eigenvectors:
/// `N(αu) = αN(u)` for `α ≥ 0`, hence `∇N(u)·u = N(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Sum of entries; the 1-norm on nonnegative vectors.
    L1,
    L2,
    /// Value of a single coordinate.
    Coordinate(usize),
    /// `(Σ rᵢuᵢ²)^½` with nonnegative weights `r`.
    WeightedL2(Vec<f64>),
}

impl Normalization {
    pub fn value(&self, u: &[f64]) -> f64 {
        match self {
            Self::L1 => u.iter().sum(),
            Self::L2 => u.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Self::Coordinate(i) => u[*i],
            Self::WeightedL2(r) => r.iter().zip(u).map(|(r, x)| r * x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn gradient(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Self::L1 => out.fill(1.0),
            Self::L2 => {
                let n = self.value(u);
                for (o, x) in out.iter_mut().zip(u) {
                    *o = x / n;
                }
            }
            Self::Coordinate(i) => {
                out.fill(0.0);
                out[*i] = 1.0;
            }
            Self::WeightedL2(r) => {
                let n = self.value(u);
                for ((o, x), r) in out.iter_mut().zip(u).zip(r) {
                    *o = r * x / n;
                }
            }
        }
    }

    pub fn gradient_vec(&self, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; u.len()];
        self.gradient(u, &mut g);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::operator::dot;

    #[test]
    fn euler_identity_holds() {
        let u = [0.3, 1.2, 0.7, 2.0];
        for n in [
            Normalization::L1,
            Normalization::L2,
            Normalization::Coordinate(2),
            Normalization::WeightedL2(vec![1.0, 0.0, 2.0, 0.5]),
        ] {
            let g = n.gradient_vec(&u);
            assert!((dot(&g, &u) - n.value(&u)).abs() < 1e-14, "{n:?}");
            assert!(g.iter().all(|&x| x >= 0.0));
            let scaled: Vec<f64> = u.iter().map(|x| 3.0 * x).collect();
            assert!((n.value(&scaled) - 3.0 * n.value(&u)).abs() < 1e-13);
        }
    }
}
