use serde::{Deserialize, Serialize};

use super::lowrank::LowRankGradient;
use super::objective::Objective;
use super::operator::{dist_inf, dot, norm_inf, LinearOperator};
use super::Normalization;
use crate::error::{Error, Result};

/// Iterate `(u, v, w̃)` of the coupled power and derivative scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronState {
    /// Right vector, `N(u) = 1`.
    pub u: Vec<f64>,
    /// Left vector, `vᵀu = 1`.
    pub v: Vec<f64>,
    /// Auxiliary row vector.
    pub w: Vec<f64>,
    /// Eigenvalue estimate `N(M u)` of the last step.
    pub rho: f64,
    /// Steps taken since initialization.
    pub iter: usize,
}

impl PerronState {
    /// `u₀ = e/N(e)`, `v₀ = e/(eᵀu₀)`, `w̃₀ = 0`.
    pub fn initial(n: usize, norm: &Normalization) -> Self {
        let e = vec![1.0; n];
        let s = norm.value(&e);
        let u: Vec<f64> = e.iter().map(|x| x / s).collect();
        let eu: f64 = u.iter().sum();
        Self {
            v: vec![1.0 / eu; n],
            u,
            w: vec![0.0; n],
            rho: f64::NAN,
            iter: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    fn distance(&self, other: &Self) -> f64 {
        dist_inf(&self.u, &other.u)
            .max(dist_inf(&self.v, &other.v))
            .max(dist_inf(&self.w, &other.w))
    }
}

/// Default iteration cap, `10n + 1000`.
pub fn default_cap(n: usize) -> usize {
    10 * n + 1000
}

/// Power method for the Perron pair of `M`.
///
/// Returns `(ρ, u, v)` with `‖Mu − ρu‖∞ ≤ tol·ρ`, `N(u) = 1` and `vᵀu = 1`.
/// The left vector meets the same relative test.
pub fn power_iterate<M: LinearOperator + ?Sized>(
    m: &M,
    norm: &Normalization,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let n = m.dim();
    let s0 = PerronState::initial(n, norm);
    let (mut u, mut v) = (s0.u, s0.v);
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        m.apply(&u, &mut y);
        if norm_inf(&y) == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let rho = norm.value(&y);
        if m.is_symmetric() {
            z.copy_from_slice(&y);
        } else {
            m.apply_transpose(&v, &mut z);
        }
        let ru = y.iter().zip(&u).fold(0.0f64, |a, (y, u)| a.max((y - rho * u).abs()));
        let rv = if m.is_symmetric() {
            0.0
        } else {
            z.iter().zip(&v).fold(0.0f64, |a, (z, v)| a.max((z - rho * v).abs())) / norm_inf(&v)
        };
        residual = ru.max(rv);
        if residual <= tol * rho {
            if m.is_symmetric() {
                let uu = dot(&u, &u);
                v = u.iter().map(|x| x / uu).collect();
            }
            return Ok((rho, u, v));
        }
        u.iter_mut().zip(&y).for_each(|(u, y)| *u = y / rho);
        if !m.is_symmetric() {
            let zu = dot(&z, &u);
            if zu.abs() < f64::MIN_POSITIVE {
                return Err(Error::DegenerateLeftVector(zu));
            }
            v.iter_mut().zip(&z).for_each(|(v, z)| *v = z / zu);
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

/// One step of the three coupled recurrences
///
/// ```text
/// u⁺ = Mu / N(Mu),   ρ = N(Mu)
/// v⁺ᵀ = vᵀM / (vᵀMu⁺)
/// w̃⁺ᵀ = (∇fᵀ − (∇f·u)∇Nᵀ + w̃ᵀM)(I − u⁺v⁺ᵀ) / ρ
/// ```
///
/// with `∇f`, `∇N` taken at `u`. Uses three products with `M`, or two when
/// the operator is symmetric (then `v⁺ = u⁺/(u⁺ᵀu⁺)`).
pub fn power_derivative_step<M, O>(m: &M, obj: &O, norm: &Normalization, s: &PerronState) -> Result<PerronState>
where
    M: LinearOperator + ?Sized,
    O: Objective + ?Sized,
{
    let n = s.n();
    let mut mu = vec![0.0; n];
    m.apply(&s.u, &mut mu);
    let rho = norm.value(&mu);
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let u: Vec<f64> = mu.iter().map(|x| x / rho).collect();

    let v = if m.is_symmetric() {
        let uu = dot(&u, &u);
        u.iter().map(|x| x / uu).collect::<Vec<_>>()
    } else {
        let mut vm = vec![0.0; n];
        m.apply_transpose(&s.v, &mut vm);
        let vmu = dot(&vm, &u);
        if !(vmu.abs() > 1e-300 && vmu.is_finite()) {
            return Err(Error::DegenerateLeftVector(vmu));
        }
        vm.iter_mut().for_each(|x| *x /= vmu);
        vm
    };

    let mut w = vec![0.0; n];
    m.apply_transpose(&s.w, &mut w);
    let gf = obj.gradient_vec(&s.u);
    let gn = norm.gradient_vec(&s.u);
    let c = dot(&gf, &s.u);
    for k in 0..n {
        w[k] = (w[k] + gf[k] - c * gn[k]) / rho;
    }
    let wu = dot(&w, &u);
    w.iter_mut().zip(&v).for_each(|(w, v)| *w -= wu * v);

    Ok(PerronState {
        u,
        v,
        w,
        rho,
        iter: s.iter + 1,
    })
}

/// Runs [`power_derivative_step`] from `s0` until two successive iterates
/// are within `delta` in the ∞-norm of the concatenated triple.
///
/// Returns the last state and the number of steps `k ≥ 1`.
pub fn iterate_to_level<M, O>(
    m: &M,
    obj: &O,
    norm: &Normalization,
    s0: &PerronState,
    delta: f64,
    cap: usize,
) -> Result<(PerronState, usize)>
where
    M: LinearOperator + ?Sized,
    O: Objective + ?Sized,
{
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Parameter(format!("level tolerance must be positive, got {delta}")));
    }
    let mut s = s0.clone();
    let mut last = f64::INFINITY;
    for k in 1..=cap {
        let next = power_derivative_step(m, obj, norm, &s)?;
        last = next.distance(&s);
        s = next;
        if last <= delta {
            return Ok((s, k));
        }
    }
    Err(Error::NonConvergence {
        iterations: cap,
        residual: last,
    })
}

/// Maps the derivative `w uᵀ` with respect to the iterated matrix to the
/// derivative with respect to the underlying adjacency matrix.
pub trait ChainRule {
    fn gradient(&self, u: &[f64], w: &[f64]) -> LowRankGradient;
}

/// The iterated matrix is the decision matrix (up to constant terms).
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl ChainRule for Identity {
    fn gradient(&self, u: &[f64], w: &[f64]) -> LowRankGradient {
        LowRankGradient::outer(1.0, w.to_vec(), u.to_vec())
    }
}

/// `J_n = f(u)` and the matching gradient at a state of the coupled scheme.
pub fn assemble_j_g<O, C>(s: &PerronState, obj: &O, chain: &C) -> (f64, LowRankGradient)
where
    O: Objective + ?Sized,
    C: ChainRule + ?Sized,
{
    (obj.value(&s.u), chain.gradient(&s.u, &s.w))
}

/// Hides the symmetry flag of an operator so the generic three-product
/// path is used.
pub struct Unsymmetric<'a, M: ?Sized>(pub &'a M);

impl<M: LinearOperator + ?Sized> LinearOperator for Unsymmetric<'_, M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y)
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply_transpose(x, y)
    }
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::spectral::objective::{NormObjective, TargetObjective};

    fn mat(n: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, v)
    }

    #[test]
    fn power_on_small_matrices() {
        let (rho, u, v) = power_iterate(&mat(2, &[1.0, 1.0, 1.0, 1.0]), &Normalization::L1, 1e-12, 100).unwrap();
        assert!((rho - 2.0).abs() < 1e-12);
        assert!((u[0] - 0.5).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);

        let (rho, u, v) = power_iterate(&mat(2, &[2.0, 1.0, 1.0, 2.0]), &Normalization::L1, 1e-12, 200).unwrap();
        assert!((rho - 3.0).abs() < 1e-10);
        assert!((u[0] - 0.5).abs() < 1e-10 && (v[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn periodic_matrix_is_reported() {
        let r = power_iterate(&mat(2, &[0.0, 1.0, 2.0, 0.0]), &Normalization::L1, 1e-10, 500);
        assert!(matches!(r, Err(Error::NonConvergence { iterations: 500, .. })));
        let r = power_iterate(&DMatrix::<f64>::zeros(3, 3), &Normalization::L1, 1e-10, 10);
        assert!(matches!(r, Err(Error::ZeroMatrix)));
    }

    #[test]
    fn two_by_two_auxiliary_limit() {
        let m = mat(2, &[1.0, 1.0, 1.0, 1.0]);
        let f = TargetObjective::Sum(vec![0]);
        let s0 = PerronState::initial(2, &Normalization::L1);
        let (s, _) = iterate_to_level(&m, &f, &Normalization::L1, &s0, 1e-14, 1000).unwrap();
        assert!((s.w[0] - 0.25).abs() < 1e-12 && (s.w[1] + 0.25).abs() < 1e-12);

        let again = power_derivative_step(&m, &f, &Normalization::L1, &s).unwrap();
        assert!(again.distance(&s) < 1e-14);
    }

    #[test]
    fn huge_level_stops_after_one_step() {
        let m = mat(3, &[1.0, 2.0, 0.5, 0.3, 1.0, 1.0, 2.0, 0.1, 1.0]);
        let f = TargetObjective::SumSquares(vec![1]);
        let s0 = PerronState::initial(3, &Normalization::L2);
        let (_, k) = iterate_to_level(&m, &f, &Normalization::L2, &s0, 1e3, 10).unwrap();
        assert_eq!(k, 1);
    }

    #[test]
    fn normalization_objective_has_zero_gradient() {
        let m = mat(3, &[1.0, 2.0, 0.5, 0.3, 1.0, 1.0, 2.0, 0.1, 1.0]);
        let norm = Normalization::L2;
        let f = NormObjective(norm.clone());
        let (s, _) = iterate_to_level(&m, &f, &norm, &PerronState::initial(3, &norm), 1e-13, 1000).unwrap();
        let (j, g) = assemble_j_g(&s, &f, &Identity);
        assert!((j - 1.0).abs() < 1e-12);
        assert!(g.to_dense().iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn invariants_hold_after_each_step() {
        let m = mat(3, &[1.0, 2.0, 0.5, 0.3, 1.0, 1.0, 2.0, 0.1, 1.0]);
        let norm = Normalization::L2;
        let f = TargetObjective::SumSquares(vec![0, 2]);
        let mut s = PerronState::initial(3, &norm);
        for _ in 0..30 {
            s = power_derivative_step(&m, &f, &norm, &s).unwrap();
            assert!((norm.value(&s.u) - 1.0).abs() <= 1e-12);
            assert!((dot(&s.v, &s.u) - 1.0).abs() <= 1e-10);
        }
        assert!(dot(&s.w, &s.u).abs() < 1e-10);
    }
}
