//! HOTS scores: the dual "temperature" vector `p` of a maximum entropy flow
//! on the graph plus a teleportation node, and its optimization.
//!
//! With `φ(p) = (1−α) log Σ e^{pᵢ}` and `S_A(p) = Σ A_ij e^{pᵢ−pⱼ}`,
//!
//! ```text
//! θ(p) = C(α) + φ(p) + φ(−p) + (2α−1) log S_A(p)
//! ```
//!
//! is convex and translation invariant; HOTS scores are `e^p` at its
//! minimum, normalized by `N(p) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Assembler, Link, LinkGraph, SparseMatrix};
use crate::hits::{sorted_scores, ArcReport, Classification, PageThreshold, ThresholdReport};
use crate::optimizer::{Evaluation, ProblemAdapter};
use crate::spectral::operator::{dist_inf, dot, norm_inf};
use crate::spectral::{LowRankGradient, Objective};

/// Normalization with `N(p + λe) = N(p) + λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HotsNormalization {
    MeanZero,
    /// `log Σ e^{pᵢ} = 0`
    LogSumExp,
    /// `log Σ_{i∈I} e^{pᵢ} = 0`
    LogSumExpTargets(Vec<usize>),
}

fn log_sum_exp<I: Iterator<Item = f64> + Clone>(xs: I) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl HotsNormalization {
    pub fn value(&self, p: &[f64]) -> f64 {
        match self {
            Self::MeanZero => p.iter().sum::<f64>() / p.len() as f64,
            Self::LogSumExp => log_sum_exp(p.iter().copied()),
            Self::LogSumExpTargets(t) => log_sum_exp(t.iter().map(|&i| p[i])),
        }
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let n = p.len();
        match self {
            Self::MeanZero => vec![1.0 / n as f64; n],
            Self::LogSumExp => {
                let l = self.value(p);
                p.iter().map(|x| (x - l).exp()).collect()
            }
            Self::LogSumExpTargets(t) => {
                let l = self.value(p);
                let mut g = vec![0.0; n];
                t.iter().for_each(|&i| g[i] = (p[i] - l).exp());
                g
            }
        }
    }

    /// `p − N(p)e`
    pub fn normalize(&self, p: &mut [f64]) {
        let c = self.value(p);
        p.iter_mut().for_each(|x| *x -= c);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotsConfig {
    pub alpha: f64,
    /// Target for `‖∇θ(p)‖∞`.
    pub tol: f64,
    pub max_iter: usize,
    pub normalization: HotsNormalization,
}

impl Default for HotsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            tol: 1e-12,
            max_iter: 1_000_000,
            normalization: HotsNormalization::LogSumExp,
        }
    }
}

impl HotsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.5 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (1/2, 1), got {}", self.alpha)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Parameter("tolerance must be positive".into()));
        }
        Ok(())
    }

    /// `C(α) = 1 − 2(1−α) log(1−α) − (2α−1) log(2α−1)`
    pub fn constant(&self) -> f64 {
        let a = self.alpha;
        1.0 - 2.0 * (1.0 - a) * (1.0 - a).ln() - (2.0 * a - 1.0) * (2.0 * a - 1.0).ln()
    }

    /// `κ = (1−α)/(2α−1)`
    fn kappa(&self) -> f64 {
        (1.0 - self.alpha) / (2.0 * self.alpha - 1.0)
    }
}

/// Exponential sums of `p`, scaled by `a = max p` and `b = max(−p)`:
/// `S⁺ = e^a·sp`, `S⁻ = e^b·sm`, `S_A = e^{a+b}·sa`,
/// `Σᵢ A_il e^{pᵢ} = e^a·inn_l`, `Σⱼ A_lj e^{−pⱼ} = e^b·out_l`.
struct Sums {
    a: f64,
    b: f64,
    ep: Vec<f64>,
    em: Vec<f64>,
    sp: f64,
    sm: f64,
    sa: f64,
    inn: Vec<f64>,
    out: Vec<f64>,
}

impl Sums {
    fn new(p: &[f64], am: &SparseMatrix) -> Result<Self> {
        let n = p.len();
        if am.nnz() == 0 || am.values().iter().all(|&v| v == 0.0) {
            return Err(Error::NoArcs);
        }
        let a = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let b = p.iter().map(|x| -x).fold(f64::NEG_INFINITY, f64::max);
        let ep: Vec<f64> = p.iter().map(|x| (x - a).exp()).collect();
        let em: Vec<f64> = p.iter().map(|x| (-x - b).exp()).collect();
        let (mut inn, mut out) = (vec![0.0; n], vec![0.0; n]);
        am.matvec_transpose(&ep, &mut inn);
        am.matvec(&em, &mut out);
        Ok(Self {
            sp: ep.iter().sum(),
            sm: em.iter().sum(),
            sa: dot(&ep, &out),
            a,
            b,
            ep,
            em,
            inn,
            out,
        })
    }

    fn log_s_plus(&self) -> f64 {
        self.a + self.sp.ln()
    }

    fn log_s_minus(&self) -> f64 {
        self.b + self.sm.ln()
    }

    fn log_s_a(&self) -> f64 {
        self.a + self.b + self.sa.ln()
    }

    fn theta(&self, cfg: &HotsConfig) -> f64 {
        let al = cfg.alpha;
        cfg.constant() + (1.0 - al) * (self.log_s_plus() + self.log_s_minus()) + (2.0 * al - 1.0) * self.log_s_a()
    }

    fn grad(&self, cfg: &HotsConfig) -> Vec<f64> {
        let al = cfg.alpha;
        (0..self.ep.len())
            .map(|l| {
                let s = self.ep[l] / self.sp;
                let t = self.em[l] / self.sm;
                let out = self.ep[l] * self.out[l] / self.sa;
                let inn = self.em[l] * self.inn[l] / self.sa;
                (1.0 - al) * (s - t) + (2.0 * al - 1.0) * (out - inn)
            })
            .collect()
    }

    fn fixed_point(&self, cfg: &HotsConfig) -> Vec<f64> {
        let k = cfg.kappa() * self.sa;
        let shift = self.a - self.b + self.sp.ln() - self.sm.ln();
        (0..self.ep.len())
            .map(|l| 0.5 * ((self.inn[l] * self.sm + k).ln() - (self.out[l] * self.sp + k).ln() + shift))
            .collect()
    }

    fn d(&self, p: &[f64], cfg: &HotsConfig) -> Vec<f64> {
        let al = cfg.alpha;
        (0..p.len())
            .map(|l| {
                (p[l] + self.b).exp() * self.sm * self.sa
                    / ((2.0 * al - 1.0) * self.inn[l] * self.sm + (1.0 - al) * self.sa)
            })
            .collect()
    }
}

/// `θ(p)`
pub fn theta(p: &[f64], a: &SparseMatrix, cfg: &HotsConfig) -> Result<f64> {
    Ok(Sums::new(p, a)?.theta(cfg))
}

/// `∇θ(p)`; its entries sum to zero.
pub fn theta_grad(p: &[f64], a: &SparseMatrix, cfg: &HotsConfig) -> Result<Vec<f64>> {
    Ok(Sums::new(p, a)?.grad(cfg))
}

/// `d_l = e^{p_l} S⁻ S_A / ((2α−1) (Σᵢ A_il e^{pᵢ}) S⁻ + (1−α) S_A)`
pub fn d_vector(p: &[f64], a: &SparseMatrix, cfg: &HotsConfig) -> Result<Vec<f64>> {
    Ok(Sums::new(p, a)?.d(p, cfg))
}

/// The map `u(p)` in its explicit logarithmic form; `u(p) = p` iff
/// `∇θ(p) = 0`.
pub fn fixed_point_map(p: &[f64], a: &SparseMatrix, cfg: &HotsConfig) -> Result<Vec<f64>> {
    Ok(Sums::new(p, a)?.fixed_point(cfg))
}

/// `u_l(p) = p_l − ½ log(1 + d_l ∂θ/∂p_l)`
pub fn fixed_point_map_d(p: &[f64], a: &SparseMatrix, cfg: &HotsConfig) -> Result<Vec<f64>> {
    let s = Sums::new(p, a)?;
    let (g, d) = (s.grad(cfg), s.d(p, cfg));
    Ok((0..p.len()).map(|l| p[l] - 0.5 * (d[l] * g[l]).ln_1p()).collect())
}

/// One fixed-point step, renormalized.
pub fn hots_fixed_point_step(p: &[f64], a: &SparseMatrix, cfg: &HotsConfig) -> Result<Vec<f64>> {
    let mut q = fixed_point_map(p, a, cfg)?;
    cfg.normalization.normalize(&mut q);
    Ok(q)
}

/// Solution of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotsState {
    pub p: Vec<f64>,
    pub log_s_plus: f64,
    pub log_s_minus: f64,
    pub log_s_a: f64,
    pub theta: f64,
    /// `‖∇θ(p)‖∞`
    pub residual: f64,
    pub iterations: usize,
    /// Largest `θ(p_{k+1}) − θ(p_k)` seen (non-positive for a descent).
    pub max_theta_increase: f64,
}

impl HotsState {
    pub fn scores(&self) -> Vec<f64> {
        self.p.iter().map(|x| x.exp()).collect()
    }
}

/// Iterates [`hots_fixed_point_step`] from `p0` until `‖∇θ(p)‖∞ ≤ cfg.tol`.
pub fn hots_solve(p0: &[f64], a: &SparseMatrix, cfg: &HotsConfig) -> Result<HotsState> {
    cfg.validate()?;
    let mut p = p0.to_vec();
    cfg.normalization.normalize(&mut p);
    let mut sums = Sums::new(&p, a)?;
    let mut th = sums.theta(cfg);
    let mut worst = f64::NEG_INFINITY;
    for it in 0..=cfg.max_iter {
        let residual = norm_inf(&sums.grad(cfg));
        if residual <= cfg.tol {
            return Ok(HotsState {
                log_s_plus: sums.log_s_plus(),
                log_s_minus: sums.log_s_minus(),
                log_s_a: sums.log_s_a(),
                theta: th,
                residual,
                iterations: it,
                max_theta_increase: worst,
                p,
            });
        }
        if it == cfg.max_iter || !residual.is_finite() {
            return Err(Error::NonConvergence {
                iterations: it,
                residual,
            });
        }
        p = sums.fixed_point(cfg);
        cfg.normalization.normalize(&mut p);
        sums = Sums::new(&p, a)?;
        let next = sums.theta(cfg);
        worst = worst.max(next - th);
        th = next;
    }
    unreachable!()
}

/// `∇²θ(p)·y` in `O(nnz)`:
/// `(1−α)(diag s − ssᵀ + diag t − ttᵀ)y + (2α−1)Zᵀ(diag q − qqᵀ)Zy`
/// with `s`, `t` the softmax of `p`, `−p`, `(Zy)_ij = yᵢ − yⱼ` over arcs and
/// `q_ij = A_ij e^{pᵢ−pⱼ}/S_A`.
pub fn hessian_matvec(p: &[f64], a: &SparseMatrix, cfg: &HotsConfig, y: &[f64]) -> Result<Vec<f64>> {
    Ok(Hessian::new(p, a, cfg)?.apply(y))
}

/// Cached arc weights for repeated Hessian products.
struct Hessian<'a> {
    a: &'a SparseMatrix,
    s: Vec<f64>,
    t: Vec<f64>,
    /// `q` in CSR value order.
    q: Vec<f64>,
    alpha: f64,
}

impl<'a> Hessian<'a> {
    fn new(p: &[f64], a: &'a SparseMatrix, cfg: &HotsConfig) -> Result<Self> {
        let sums = Sums::new(p, a)?;
        let q = a.entries().map(|(i, j, v)| v * sums.ep[i] * sums.em[j] / sums.sa).collect();
        Ok(Self {
            a,
            s: sums.ep.iter().map(|x| x / sums.sp).collect(),
            t: sums.em.iter().map(|x| x / sums.sm).collect(),
            q,
            alpha: cfg.alpha,
        })
    }

    fn apply(&self, y: &[f64]) -> Vec<f64> {
        let (sy, ty) = (dot(&self.s, y), dot(&self.t, y));
        let c = 1.0 - self.alpha;
        let mut r: Vec<f64> = (0..y.len())
            .map(|l| c * (self.s[l] * (y[l] - sy) + self.t[l] * (y[l] - ty)))
            .collect();
        let m: f64 = self.a.entries().zip(&self.q).map(|((i, j, _), q)| q * (y[i] - y[j])).sum();
        let k = 2.0 * self.alpha - 1.0;
        for ((i, j, _), q) in self.a.entries().zip(&self.q) {
            let v = k * q * (y[i] - y[j] - m);
            r[i] += v;
            r[j] -= v;
        }
        r
    }
}

/// How the auxiliary vector was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxMode {
    Plain,
    Preconditioned,
    PreconditionedFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxVector {
    pub w: Vec<f64>,
    pub mode: AuxMode,
    pub iterations: usize,
}

/// Default iteration cap of [`hots_aux_w`].
pub const AUX_CAP: usize = 1_000_000;

fn center(w: &mut [f64]) {
    let m = w.iter().sum::<f64>() / w.len() as f64;
    w.iter_mut().for_each(|x| *x -= m);
}

/// `w = (−∇f + (∇f·e)∇N)(∇²θ)^#`, with `wᵀe = 0`.
///
/// Iterates `w ← (w − ½∇²θ·w + ½r)(I − eeᵀ/n)` (the derivative fixed point
/// for `M = I − ½∇²θ`). With `precondition`, iterates instead on
/// `M = I − ½ diag(d)∇²θ` and falls back to the plain iteration if that
/// fails to converge. `w0` hot-starts both.
#[allow(clippy::too_many_arguments)]
pub fn hots_aux_w(
    p: &[f64],
    a: &SparseMatrix,
    cfg: &HotsConfig,
    grad_f: &[f64],
    grad_n: &[f64],
    tol: f64,
    w0: Option<&[f64]>,
    precondition: bool,
    cap: usize,
) -> Result<AuxVector> {
    let n = p.len();
    let h = Hessian::new(p, a, cfg)?;
    let fe: f64 = grad_f.iter().sum();
    let r: Vec<f64> = (0..n).map(|l| -grad_f[l] + fe * grad_n[l]).collect();
    let start = w0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let mut spent = 0;
    if precondition {
        let d = d_vector(p, a, cfg)?;
        match aux_iterate(&h, &r, Some(&d), &start, tol, cap) {
            Ok((w, k)) => {
                return Ok(AuxVector {
                    w,
                    mode: AuxMode::Preconditioned,
                    iterations: k,
                })
            }
            Err(k) => spent = k,
        }
    }
    match aux_iterate(&h, &r, None, &start, tol, cap) {
        Ok((w, k)) => Ok(AuxVector {
            w,
            mode: if precondition { AuxMode::PreconditionedFallback } else { AuxMode::Plain },
            iterations: spent + k,
        }),
        Err(k) => Err(Error::SpectralObstruction(format!(
            "no convergence of the auxiliary iteration within {} steps; the second smallest Hessian eigenvalue is too small",
            spent + k
        ))),
    }
}

/// Returns the centered `w` and the step count, or the steps spent on failure.
fn aux_iterate(h: &Hessian, r: &[f64], d: Option<&[f64]>, w0: &[f64], tol: f64, cap: usize) -> std::result::Result<(Vec<f64>, usize), usize> {
    let n = r.len();
    // iterate on w' with w = d∘w'
    let mut wp: Vec<f64> = match d {
        Some(d) => w0.iter().zip(d).map(|(w, d)| w / d).collect(),
        None => w0.to_vec(),
    };
    let y: Vec<f64> = match d {
        Some(d) => d.iter().map(|x| 1.0 / x).collect(),
        None => vec![1.0; n],
    };
    let ye: f64 = y.iter().sum();
    let eff = |wp: &[f64]| -> Vec<f64> {
        match d {
            Some(d) => wp.iter().zip(d).map(|(w, d)| w * d).collect(),
            None => wp.to_vec(),
        }
    };
    let mut w = eff(&wp);
    let scale = norm_inf(r).max(f64::MIN_POSITIVE);
    for k in 1..=cap {
        let hw = h.apply(&w);
        let mut next: Vec<f64> = (0..n).map(|l| wp[l] - 0.5 * hw[l] + 0.5 * r[l]).collect();
        let c: f64 = next.iter().sum::<f64>() / ye;
        next.iter_mut().zip(&y).for_each(|(x, y)| *x -= c * y);
        let nw = eff(&next);
        let step = dist_inf(&nw, &w);
        if !step.is_finite() || norm_inf(&nw) > 1e12 * scale {
            return Err(k);
        }
        wp = next;
        w = nw;
        if step <= tol {
            center(&mut w);
            return Ok((w, k));
        }
    }
    Err(cap)
}

/// Gradient with respect to `A` as three outer products:
/// `g_ij = (2α−1)/S_A · e^{pᵢ−pⱼ}(wᵢ − wⱼ + B)`. Returns the gradient and `B`.
pub fn hots_gradient(p: &[f64], w: &[f64], a: &SparseMatrix, cfg: &HotsConfig) -> Result<(LowRankGradient, f64)> {
    let s = Sums::new(p, a)?;
    let b = aux_offset(&s, w);
    let c = (2.0 * cfg.alpha - 1.0) / s.sa;
    let epw: Vec<f64> = s.ep.iter().zip(w).map(|(e, w)| e * w).collect();
    let emw: Vec<f64> = s.em.iter().zip(w).map(|(e, w)| e * w).collect();
    let mut g = LowRankGradient::outer(c, epw, s.em.clone());
    g.push(-c, s.ep.clone(), emw);
    g.push(c * b, s.ep, s.em);
    Ok((g, b))
}

/// `B = Σ_l w_l B_l` with `B_l = (Σᵢ A_il e^{pᵢ−p_l} − Σⱼ A_lj e^{p_l−pⱼ})/S_A`.
fn aux_offset(s: &Sums, w: &[f64]) -> f64 {
    (0..w.len())
        .map(|l| w[l] * (s.em[l] * s.inn[l] - s.ep[l] * s.out[l]) / s.sa)
        .sum()
}

/// `Σ_l w_l c^l_ij` evaluated term by term from
/// `c^l_ij = (2α−1)/S_A · e^{pᵢ−pⱼ}(δ_li − δ_lj + B_l)`, on the given arcs.
pub fn hots_gradient_contraction(p: &[f64], w: &[f64], a: &SparseMatrix, cfg: &HotsConfig, links: &[Link]) -> Result<Vec<f64>> {
    let s = Sums::new(p, a)?;
    let n = p.len();
    let bl: Vec<f64> = (0..n).map(|l| (s.em[l] * s.inn[l] - s.ep[l] * s.out[l]) / s.sa).collect();
    let c = (2.0 * cfg.alpha - 1.0) / s.sa;
    Ok(links
        .iter()
        .map(|&(i, j)| {
            let e = s.ep[i] * s.em[j];
            (0..n)
                .map(|l| {
                    let delta = (l == i) as u8 as f64 - (l == j) as u8 as f64;
                    w[l] * c * e * (delta + bl[l])
                })
                .sum()
        })
        .collect())
}

/// Classifies facultative arcs by the sign of `wᵢ − wⱼ + B`, the sign of the
/// derivative. In a maximization, `wⱼ < wᵢ + B` asks for weight 1; the
/// per-page cutoff is `wᵢ + B` and lower `wⱼ` is preferred.
#[allow(clippy::too_many_arguments)]
pub fn hots_threshold_report(
    graph: &LinkGraph,
    p: &[f64],
    w: &[f64],
    b: f64,
    a: &SparseMatrix,
    cfg: &HotsConfig,
    x: &[f64],
    tol: f64,
    maximize: bool,
) -> Result<ThresholdReport> {
    let s = Sums::new(p, a)?;
    let c = (2.0 * cfg.alpha - 1.0) / s.sa;
    let pages = graph
        .controlled_pages()
        .into_iter()
        .map(|i| PageThreshold {
            page: i,
            threshold: Some(w[i] + b),
        })
        .collect();
    let arcs = graph
        .facultative()
        .iter()
        .zip(x)
        .map(|(&(i, j), &weight)| {
            let gradient = c * s.ep[i] * s.em[j] * (w[i] - w[j] + b);
            ArcReport {
                src: i,
                dst: j,
                weight,
                gradient,
                class: Classification::from_gradient(gradient, tol, maximize),
            }
        })
        .collect();
    Ok(ThresholdReport {
        pages,
        scores: sorted_scores(w.iter().map(|x| -x).collect()),
        arcs,
    })
}

/// Flow recovered from the dual variables, with feasibility residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimalFlow {
    pub mu: f64,
    pub a_last: f64,
    pub b_last: f64,
    /// `(i, j, ρ_ij)` on graph arcs.
    pub arcs: Vec<(usize, usize, f64)>,
    /// `ρ_{i,n+1}`
    pub to_virtual: Vec<f64>,
    /// `ρ_{n+1,j}`
    pub from_virtual: Vec<f64>,
    /// Largest inflow minus outflow imbalance over all `n + 1` nodes.
    pub conservation: f64,
    /// `|Σρ − 1|`
    pub mass: f64,
    /// `|Σᵢ ρ_{i,n+1} − (1−α)|`
    pub to_virtual_residual: f64,
    /// `|Σⱼ ρ_{n+1,j} − (1−α)|`
    pub from_virtual_residual: f64,
}

impl PrimalFlow {
    pub fn max_residual(&self) -> f64 {
        self.conservation
            .max(self.mass)
            .max(self.to_virtual_residual)
            .max(self.from_virtual_residual)
    }
}

/// `e^μ = (2α−1)/S_A`, `e^{a} = (1−α)e^{−μ}/S⁻`, `e^{−b} = (1−α)e^{−μ}/S⁺`,
/// `ρ_ij = A_ij e^{pᵢ−pⱼ+μ}`, `ρ_{i,n+1} = e^{−b+pᵢ+μ}`, `ρ_{n+1,j} = e^{a−pⱼ+μ}`.
pub fn primal_flow(p: &[f64], a: &SparseMatrix, cfg: &HotsConfig) -> Result<PrimalFlow> {
    let n = p.len();
    let s = Sums::new(p, a)?;
    let al = cfg.alpha;
    let mu = (2.0 * al - 1.0).ln() - s.log_s_a();
    let a_last = (1.0 - al).ln() - mu - s.log_s_minus();
    let b_last = -(1.0 - al).ln() + mu + s.log_s_plus();
    let arcs: Vec<(usize, usize, f64)> = a
        .entries()
        .filter(|&(_, _, v)| v > 0.0)
        .map(|(i, j, v)| (i, j, v * (p[i] - p[j] + mu).exp()))
        .collect();
    let to_virtual: Vec<f64> = p.iter().map(|x| (-b_last + x + mu).exp()).collect();
    let from_virtual: Vec<f64> = p.iter().map(|x| (a_last - x + mu).exp()).collect();
    let mut balance: Vec<f64> = (0..n).map(|l| from_virtual[l] - to_virtual[l]).collect();
    for &(i, j, r) in &arcs {
        balance[i] -= r;
        balance[j] += r;
    }
    let tv: f64 = to_virtual.iter().sum();
    let fv: f64 = from_virtual.iter().sum();
    let conservation = norm_inf(&balance).max((tv - fv).abs());
    let total = arcs.iter().map(|a| a.2).sum::<f64>() + tv + fv;
    Ok(PrimalFlow {
        mu,
        a_last,
        b_last,
        arcs,
        conservation,
        mass: (total - 1.0).abs(),
        to_virtual_residual: (tv - (1.0 - al)).abs(),
        from_virtual_residual: (fv - (1.0 - al)).abs(),
        to_virtual,
        from_virtual,
    })
}

/// Hot-start handle: last temperatures and auxiliary vector.
#[derive(Debug, Clone, PartialEq)]
pub struct HotsWarm {
    pub p: Vec<f64>,
    pub w: Option<Vec<f64>>,
}

/// HOTS optimization over the facultative weights; the objective acts on `p`.
pub struct HotsProblem<O> {
    graph: LinkGraph,
    assembler: Assembler,
    pub config: HotsConfig,
    pub objective: O,
    pub maximize: bool,
    pub precondition: bool,
    pub aux_cap: usize,
}

/// Everything computed at one weight vector.
#[derive(Debug, Clone)]
pub struct HotsPoint {
    pub state: HotsState,
    pub aux: Option<AuxVector>,
    pub gradient: Option<LowRankGradient>,
    pub offset: f64,
}

impl<O: Objective> HotsProblem<O> {
    pub fn new(graph: LinkGraph, config: HotsConfig, objective: O) -> Self {
        Self {
            assembler: graph.assembler(),
            graph,
            config,
            objective,
            maximize: true,
            precondition: false,
            aux_cap: AUX_CAP,
        }
    }

    pub fn graph(&self) -> &LinkGraph {
        &self.graph
    }

    pub fn matrix(&self, x: &[f64]) -> SparseMatrix {
        self.assembler.assemble(x)
    }

    /// Solves for `p` to `‖∇θ‖∞ ≤ tol` and, if asked, the gradient with the
    /// auxiliary iteration run to the same tolerance.
    pub fn solve(&self, x: &[f64], tol: f64, start: &HotsWarm, want_gradient: bool) -> Result<HotsPoint> {
        let a = self.matrix(x);
        let cfg = HotsConfig { tol, ..self.config.clone() };
        let state = hots_solve(&start.p, &a, &cfg)?;
        if !want_gradient {
            return Ok(HotsPoint {
                state,
                aux: None,
                gradient: None,
                offset: 0.0,
            });
        }
        let gf = self.objective.gradient_vec(&state.p);
        let gn = cfg.normalization.gradient(&state.p);
        let aux = hots_aux_w(&state.p, &a, &cfg, &gf, &gn, tol, start.w.as_deref(), self.precondition, self.aux_cap)?;
        let (g, b) = hots_gradient(&state.p, &aux.w, &a, &cfg)?;
        Ok(HotsPoint {
            state,
            aux: Some(aux),
            gradient: Some(g),
            offset: b,
        })
    }

    pub fn threshold_report(&self, x: &[f64], point: &HotsPoint, tol: f64) -> Result<ThresholdReport> {
        let w = point
            .aux
            .as_ref()
            .ok_or_else(|| Error::Parameter("threshold report needs the auxiliary vector".into()))?;
        hots_threshold_report(&self.graph, &point.state.p, &w.w, point.offset, &self.matrix(x), &self.config, x, tol, self.maximize)
    }
}

impl<O: Objective> ProblemAdapter for HotsProblem<O> {
    type State = HotsWarm;

    fn dim(&self) -> usize {
        self.graph.facultative().len()
    }

    fn maximize(&self) -> bool {
        self.maximize
    }

    fn initial_state(&self) -> HotsWarm {
        HotsWarm {
            p: vec![0.0; self.graph.n()],
            w: None,
        }
    }

    fn evaluate(&self, x: &[f64], delta: f64, start: &HotsWarm, want_gradient: bool) -> Result<Evaluation<HotsWarm>> {
        let pt = self.solve(x, delta, start, want_gradient)?;
        let aux_steps = pt.aux.as_ref().map_or(0, |a| a.iterations);
        Ok(Evaluation {
            value: self.objective.value(&pt.state.p),
            gradient: pt.gradient.map(|g| g.restrict(self.graph.facultative())),
            inner_steps: pt.state.iterations + aux_steps,
            state: HotsWarm {
                w: pt.aux.map(|a| a.w).or_else(|| start.w.clone()),
                p: pt.state.p,
            },
        })
    }

    fn heuristic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::{central_difference, max_relative_error};
    use crate::graph::synthetic::{random_weights, strongly_connected};

    fn cycle() -> SparseMatrix {
        SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn cfg(alpha: f64) -> HotsConfig {
        HotsConfig {
            alpha,
            ..HotsConfig::default()
        }
    }

    fn random_instance(seed: u64) -> (SparseMatrix, Vec<f64>) {
        let g = strongly_connected(10, 12, 2, 8, seed);
        let a = g.assembler().assemble(&random_weights(8, 0.0, 1.0, seed));
        (a, random_weights(10, -1.0, 1.0, seed + 100))
    }

    #[test]
    fn theta_of_two_cycle() {
        let t = theta(&[0.0, 0.0], &cycle(), &cfg(0.75)).unwrap();
        let want = 1.0 - 0.5 * 0.25f64.ln() - 0.5 * 0.5f64.ln() + 2f64.ln();
        assert!((t - want).abs() < 1e-14);
        assert!((t - 2.7329).abs() < 1e-4);
        assert!(theta_grad(&[0.0, 0.0], &cycle(), &cfg(0.75)).unwrap().iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn empty_graph_is_rejected() {
        let a = SparseMatrix::from_triplets(2, &[(0, 1, 0.0)]).unwrap();
        assert!(matches!(theta(&[0.0, 0.0], &a, &cfg(0.8)), Err(Error::NoArcs)));
    }

    #[test]
    fn d_of_two_cycle() {
        let d = d_vector(&[0.0, 0.0], &cycle(), &cfg(0.75)).unwrap();
        assert!(d.iter().all(|x| (x - 8.0 / 3.0).abs() < 1e-14));
    }

    #[test]
    fn translation_invariance_and_gradient() {
        let (a, p) = random_instance(3);
        let c = cfg(0.85);
        let shifted: Vec<f64> = p.iter().map(|x| x + 0.7).collect();
        assert!((theta(&p, &a, &c).unwrap() - theta(&shifted, &a, &c).unwrap()).abs() < 1e-12);
        let g = theta_grad(&p, &a, &c).unwrap();
        assert!(g.iter().sum::<f64>().abs() < 1e-12);
        let fd = central_difference(|q| theta(q, &a, &c).unwrap(), &p, 1e-5);
        assert!(max_relative_error(&g, &fd, 1e-6) < 1e-7);
    }

    #[test]
    fn both_forms_of_the_map_agree() {
        let (a, p) = random_instance(4);
        let c = cfg(0.7);
        let u1 = fixed_point_map(&p, &a, &c).unwrap();
        let u2 = fixed_point_map_d(&p, &a, &c).unwrap();
        assert!(dist_inf(&u1, &u2) < 1e-10);
    }

    #[test]
    fn solve_two_cycle() {
        let c = HotsConfig {
            normalization: HotsNormalization::MeanZero,
            ..cfg(0.75)
        };
        let s = hots_solve(&[0.3, -0.1], &cycle(), &c).unwrap();
        assert!(s.p.iter().all(|x| x.abs() < 1e-12));
        assert!(s.residual <= 1e-12);
        assert!(dist_inf(&hots_fixed_point_step(&s.p, &cycle(), &c).unwrap(), &s.p) < 1e-11);
    }

    #[test]
    fn solve_descends_and_is_feasible() {
        let (a, _) = random_instance(6);
        let s = hots_solve(&[0.0; 10], &a, &cfg(0.8)).unwrap();
        assert!(s.max_theta_increase <= 1e-12);
        let f = primal_flow(&s.p, &a, &cfg(0.8)).unwrap();
        assert!(f.max_residual() < 1e-10, "{f:?}");
    }

    #[test]
    fn flow_of_two_cycle() {
        let f = primal_flow(&[0.0, 0.0], &cycle(), &cfg(0.75)).unwrap();
        assert!((f.mu - 0.25f64.ln()).abs() < 1e-15);
        assert!(f.arcs.iter().all(|a| (a.2 - 0.25).abs() < 1e-15));
        assert!(f.to_virtual.iter().chain(&f.from_virtual).all(|r| (r - 0.125).abs() < 1e-15));
        assert!(f.max_residual() < 1e-15);
        let g = primal_flow(&[0.3, 0.0], &cycle(), &cfg(0.75)).unwrap();
        assert!(g.conservation > 1e-3);
    }

    #[test]
    fn hessian_properties() {
        let (a, p) = random_instance(8);
        let c = cfg(0.9);
        assert!(norm_inf(&hessian_matvec(&p, &a, &c, &[1.0; 10]).unwrap()) < 1e-12);
        let y = random_weights(10, -1.0, 1.0, 1);
        let q = dot(&y, &hessian_matvec(&p, &a, &c, &y).unwrap());
        assert!(q >= 0.0 && q <= 4.0 * dot(&y, &y));
        let h0 = theta_grad(&p, &a, &c).unwrap();
        let mut pp = p.clone();
        pp[2] += 1e-6;
        let h1 = theta_grad(&pp, &a, &c).unwrap();
        let mut e = vec![0.0; 10];
        e[2] = 1.0;
        let col = hessian_matvec(&p, &a, &c, &e).unwrap();
        let fd: Vec<f64> = h1.iter().zip(&h0).map(|(a, b)| (a - b) / 1e-6).collect();
        assert!(dist_inf(&col, &fd) < 1e-5);
    }

    #[test]
    fn gradient_forms_agree() {
        let (a, p) = random_instance(9);
        let c = cfg(0.8);
        let w = random_weights(10, -1.0, 1.0, 2);
        let links: Vec<Link> = a.entries().map(|(i, j, _)| (i, j)).collect();
        let (g, _) = hots_gradient(&p, &w, &a, &c).unwrap();
        let h = hots_gradient_contraction(&p, &w, &a, &c, &links).unwrap();
        assert!(dist_inf(&g.restrict(&links), &h) < 1e-10);
        let (z, b) = hots_gradient(&p, &[0.0; 10], &a, &c).unwrap();
        assert_eq!(b, 0.0);
        assert!(z.to_dense().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn constant_objective_gradient_gives_zero_w() {
        let (a, _) = random_instance(10);
        let c = HotsConfig {
            normalization: HotsNormalization::MeanZero,
            ..cfg(0.8)
        };
        let s = hots_solve(&[0.0; 10], &a, &c).unwrap();
        let gn = c.normalization.gradient(&s.p);
        let aux = hots_aux_w(&s.p, &a, &c, &[2.0; 10], &gn, 1e-12, None, false, AUX_CAP).unwrap();
        assert!(norm_inf(&aux.w) < 1e-12);
    }

    #[test]
    fn preconditioned_and_plain_agree() {
        let (a, _) = random_instance(12);
        let c = cfg(0.85);
        let s = hots_solve(&[0.0; 10], &a, &c).unwrap();
        let gf: Vec<f64> = s.p.iter().map(|x| x.exp()).collect();
        let gn = c.normalization.gradient(&s.p);
        let plain = hots_aux_w(&s.p, &a, &c, &gf, &gn, 1e-13, None, false, AUX_CAP).unwrap();
        let pre = hots_aux_w(&s.p, &a, &c, &gf, &gn, 1e-13, None, true, AUX_CAP).unwrap();
        assert_eq!(plain.mode, AuxMode::Plain);
        assert_ne!(pre.mode, AuxMode::Plain);
        assert!(dist_inf(&plain.w, &pre.w) < 1e-8, "{}", dist_inf(&plain.w, &pre.w));
        assert!(plain.w.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn adapter_gradient_matches_differences() {
        use crate::spectral::TargetObjective;
        let g = strongly_connected(8, 6, 3, 10, 21);
        let f = TargetObjective::sum_exp(g.targets());
        let p = HotsProblem::new(g, cfg(0.9), f);
        let x = random_weights(10, 0.2, 0.8, 5);
        let e = p.evaluate(&x, 1e-12, &p.initial_state(), true).unwrap();
        let fd = central_difference(|y| p.evaluate(y, 1e-12, &e.state, false).unwrap().value, &x, 1e-6);
        assert!(max_relative_error(&e.gradient.unwrap(), &fd, 1e-6) < 1e-4);
    }
}
