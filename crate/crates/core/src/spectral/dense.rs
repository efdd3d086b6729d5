//! Dense O(n³) reference computations, limited to `n ≤ 200`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

pub const DENSE_CAP: usize = 200;

fn check_cap(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        return Err(Error::SizeCap { n, cap: DENSE_CAP });
    }
    Ok(())
}

fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    // values only: the vector-accumulating SVD is inaccurate on some
    // rank-deficient inputs
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Solves `[[A, c], [dᵀ, 0]]·[x; s] = [0; 1]`, whose `x` spans the right null
/// space of a rank `n − 1` matrix `A` when the border is nondegenerate.
fn bordered_null(a: &DMatrix<f64>, c: &[f64], d: &[f64]) -> Option<DVector<f64>> {
    let n = a.nrows();
    let b = DMatrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => a[(i, j)],
        (true, false) => c[i],
        (false, true) => d[j],
        (false, false) => 0.0,
    });
    let s = singular_values(&b);
    if s[0] <= 1e-12 * s[n] {
        return None;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    let x = b.lu().solve(&rhs)?;
    Some(x.rows(0, n).into_owned())
}

/// Right and left null vectors of `M − λI`, checking that `λ` is a simple
/// eigenvalue. The right vector is scaled to have a nonnegative sum and the
/// left one so that `vᵀu = 1`.
fn simple_null_pair(m: &DMatrix<f64>, lambda: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = m.nrows();
    let a = m - DMatrix::identity(n, n) * lambda;
    let s = singular_values(&a);
    let scale = s[n - 1].max(1.0);
    if s[0] > 1e-8 * scale {
        return Err(Error::Parameter(format!("{lambda} is not an eigenvalue (smallest singular value {:.3e})", s[0])));
    }
    if n > 1 && s[1] <= 1e-8 * scale {
        return Err(Error::NotSimple(lambda));
    }
    let e = vec![1.0; n];
    let alt: Vec<f64> = (0..n).map(|k| 1.0 + (k as f64 * 0.618).fract()).collect();
    let pair = |c: &[f64], d: &[f64]| Some((bordered_null(&a, c, d)?, bordered_null(&a.transpose(), d, c)?));
    let (mut u, v) = pair(&e, &e).or_else(|| pair(&alt, &e)).or_else(|| pair(&e, &alt)).ok_or(Error::NotSimple(lambda))?;
    if u.sum() < 0.0 {
        u = -u;
    }
    let vu = v.dot(&u);
    if vu.abs() < 1e-10 * v.norm() * u.norm() {
        return Err(Error::NotSimple(lambda));
    }
    Ok((u, v / vu))
}

/// Group inverse `S = (M − λI)^#` through `S = (M − λI + P)⁻¹ − P` with
/// `P = uvᵀ` the eigenprojector.
pub fn drazin_dense(m: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    check_cap(n)?;
    let (u, v) = simple_null_pair(m, lambda)?;
    let p = &u * v.transpose();
    let a = m - DMatrix::identity(n, n) * lambda + &p;
    let inv = a.try_inverse().ok_or(Error::Singular("M - λI + P"))?;
    Ok(inv - p)
}

/// Eigenprojector `P = uvᵀ/(vᵀu)` of a simple eigenvalue.
pub fn eigenprojector(m: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    check_cap(m.nrows())?;
    let (u, v) = simple_null_pair(m, lambda)?;
    Ok(&u * v.transpose())
}

/// Solves `[wᵀ, w_{n+1}]·[[M − λI, −u], [∇Nᵀ, 0]] = [−∇fᵀ, 0]` and returns `w`.
pub fn solve_bordered(m: &DMatrix<f64>, lambda: f64, u: &[f64], grad_n: &[f64], grad_f: &[f64]) -> Result<Vec<f64>> {
    let n = m.nrows();
    check_cap(n)?;
    let b = bordered(m, lambda, u, grad_n);
    let s = singular_values(&b);
    if s[0] <= 1e-13 * s[n] {
        return Err(Error::Singular("bordered eigenvector system"));
    }
    let mut rhs = DVector::zeros(n + 1);
    for k in 0..n {
        rhs[k] = -grad_f[k];
    }
    let sol = b.transpose().lu().solve(&rhs).ok_or(Error::Singular("bordered eigenvector system"))?;
    Ok(sol.iter().take(n).copied().collect())
}

fn bordered(m: &DMatrix<f64>, lambda: f64, x: &[f64], p: &[f64]) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => m[(i, j)] - if i == j { lambda } else { 0.0 },
        (true, false) => -x[i],
        (false, true) => p[j],
        (false, false) => 0.0,
    })
}

/// Quantities of the a posteriori eigenpair enclosure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedBound {
    pub eta: f64,
    pub sigma: f64,
    pub tau: f64,
    pub delta: f64,
    /// Radius enclosing both the vector (∞-norm) and the eigenvalue error;
    /// `None` when `σ ≥ 1` or `Δ < 0`.
    pub beta: Option<f64>,
}

impl CertifiedBound {
    pub fn is_available(&self) -> bool {
        self.beta.is_some()
    }
}

fn norm_inf_mat(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Enclosure radius `β` for an approximate eigenpair `(x̃, λ̃)` normalized
/// by `pᵀx̃ = 1`.
pub fn certified_eigen_bound(m: &DMatrix<f64>, x: &[f64], lambda: f64, p: &[f64]) -> Result<CertifiedBound> {
    let n = m.nrows();
    check_cap(n)?;
    let b = bordered(m, lambda, x, p);
    let c = b.clone().try_inverse().ok_or(Error::Singular("bordered eigenvector system"))?;
    let xv = DVector::from_column_slice(x);
    let r = m * &xv - &xv * lambda;
    let mut rr = DVector::zeros(n + 1);
    rr.rows_mut(0, n).copy_from(&r);
    let eta = (&c * rr).amax();
    let sigma = norm_inf_mat(&(DMatrix::identity(n + 1, n + 1) - &c * &b));
    let tau = norm_inf_mat(&c);
    let delta = (1.0 - sigma).powi(2) - 4.0 * eta * tau;
    let beta = (sigma < 1.0 && delta >= 0.0).then(|| 2.0 * eta / (1.0 - sigma + delta.sqrt()));
    Ok(CertifiedBound {
        eta,
        sigma,
        tau,
        delta,
        beta,
    })
}

const SCHUR_ITER: usize = 100_000;

/// Dense eigenvalues, `None` when the Schur iteration does not converge.
fn eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    if (m - m.transpose()).amax() <= 1e-15 * m.amax() {
        let s = m.clone().symmetric_eigenvalues();
        return Some(s.iter().map(|&x| Complex::new(x, 0.0)).collect());
    }
    let s = m.clone().try_schur(f64::EPSILON, SCHUR_ITER)?;
    Some(s.complex_eigenvalues().iter().copied().collect())
}

fn stalled() -> Error {
    Error::NonConvergence {
        iterations: SCHUR_ITER,
        residual: f64::NAN,
    }
}

/// Spectral radius from the dense eigenvalues.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    check_cap(m.nrows())?;
    let ev = eigenvalues(m).ok_or_else(stalled)?;
    Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Perron pair `(ρ, u, v)` with `eᵀu = 1` and `vᵀu = 1`.
pub fn perron_dense(m: &DMatrix<f64>) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    check_cap(m.nrows())?;
    let rho = match eigenvalues(m) {
        Some(ev) => ev
            .iter()
            .filter(|z| z.im.abs() <= 1e-9 * z.norm().max(1.0))
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max),
        None => {
            // M + I is primitive when M is nonnegative irreducible
            let n = m.nrows();
            let shifted = m + DMatrix::identity(n, n);
            let (r, _, _) = super::power_iterate(&shifted, &super::Normalization::L1, 1e-13, 1_000_000)?;
            r - 1.0
        }
    };
    let (u, v) = simple_null_pair(m, rho)?;
    // one Rayleigh correction of the QR eigenvalue
    let rho = v.dot(&(m * &u)) / v.dot(&u);
    let (u, v) = simple_null_pair(m, rho)?;
    let s = u.sum();
    Ok((rho, (u / s).iter().copied().collect(), (v * s).iter().copied().collect()))
}

/// Checks `ρ(C) ≤ ρ(A)ᵗρ(B)¹⁻ᵗ` with `C_ij = A_ijᵗ B_ij¹⁻ᵗ`, up to a
/// relative slack of `1e-12`.
pub fn log_convexity_check(a: &DMatrix<f64>, b: &DMatrix<f64>, t: f64) -> Result<bool> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let c = a.zip_map(b, |x, y| if x == 0.0 || y == 0.0 { 0.0 } else { x.powf(t) * y.powf(1.0 - t) });
    let rc = spectral_radius(&c)?;
    let bound = spectral_radius(a)?.powf(t) * spectral_radius(b)?.powf(1.0 - t);
    Ok(rc <= bound + 1e-12 * rc)
}
