//! HITS authority: Perron vector of `h(A) = AᵀA + ξeeᵀ`.

use serde::Serialize;

use crate::error::Result;
use crate::graph::{Assembler, LinkGraph, SparseMatrix};
use crate::optimizer::{Evaluation, ProblemAdapter};
use crate::spectral::{
    default_cap, iterate_to_level, ChainRule, LinearOperator, LowRankGradient, Normalization, Objective, PerronState,
};

/// `AᵀA + ξeeᵀ` applied through two sparse products.
pub struct HitsOperator<'a> {
    pub a: &'a SparseMatrix,
    pub xi: f64,
}

impl LinearOperator for HitsOperator<'_> {
    fn dim(&self) -> usize {
        self.a.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut t = vec![0.0; x.len()];
        self.a.matvec(x, &mut t);
        self.a.matvec_transpose(&t, y);
        let s = self.xi * x.iter().sum::<f64>();
        y.iter_mut().for_each(|v| *v += s);
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.apply(x, y)
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// `(AᵀA + ξeeᵀ)x`
pub fn hits_matvec(a: &SparseMatrix, xi: f64, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    HitsOperator { a, xi }.apply(x, &mut y);
    y
}

/// Derivative with respect to `A`: `(Aw)uᵀ + (Au)wᵀ`.
pub fn hits_chain_gradient(a: &SparseMatrix, u: &[f64], w: &[f64]) -> LowRankGradient {
    let n = u.len();
    let (mut aw, mut au) = (vec![0.0; n], vec![0.0; n]);
    a.matvec(w, &mut aw);
    a.matvec(u, &mut au);
    let mut g = LowRankGradient::outer(1.0, aw, u.to_vec());
    g.push(1.0, au, w.to_vec());
    g
}

struct HitsChain<'a>(&'a SparseMatrix);

impl ChainRule for HitsChain<'_> {
    fn gradient(&self, u: &[f64], w: &[f64]) -> LowRankGradient {
        hits_chain_gradient(self.0, u, w)
    }
}

pub struct HitsProblem<O> {
    graph: LinkGraph,
    assembler: Assembler,
    pub xi: f64,
    pub objective: O,
    pub normalization: Normalization,
    pub maximize: bool,
    pub cap: usize,
    /// Use the three-product recurrence even though `h(A)` is symmetric.
    pub generic_path: bool,
}

impl<O: Objective> HitsProblem<O> {
    pub fn new(graph: LinkGraph, xi: f64, objective: O, normalization: Normalization) -> Self {
        let cap = default_cap(graph.n()).max(100_000);
        Self {
            assembler: graph.assembler(),
            graph,
            xi,
            objective,
            normalization,
            maximize: true,
            cap,
            generic_path: false,
        }
    }

    pub fn graph(&self) -> &LinkGraph {
        &self.graph
    }

    pub fn matrix(&self, x: &[f64]) -> SparseMatrix {
        self.assembler.assemble(x)
    }

    /// Converged state, step count and full gradient at `x`.
    pub fn solve(&self, x: &[f64], delta: f64, start: &PerronState) -> Result<(PerronState, usize, LowRankGradient)> {
        let a = self.matrix(x);
        let op = HitsOperator { a: &a, xi: self.xi };
        let (s, k) = if self.generic_path {
            let op = crate::spectral::Unsymmetric(&op);
            iterate_to_level(&op, &self.objective, &self.normalization, start, delta, self.cap)?
        } else {
            iterate_to_level(&op, &self.objective, &self.normalization, start, delta, self.cap)?
        };
        let g = HitsChain(&a).gradient(&s.u, &s.w);
        Ok((s, k, g))
    }

    pub fn threshold_report(&self, x: &[f64], state: &PerronState, tol: f64) -> ThresholdReport {
        threshold_report(&self.graph, &self.matrix(x), &state.u, &state.w, x, tol, self.maximize)
    }
}

impl<O: Objective> ProblemAdapter for HitsProblem<O> {
    type State = PerronState;

    fn dim(&self) -> usize {
        self.graph.facultative().len()
    }

    fn maximize(&self) -> bool {
        self.maximize
    }

    fn initial_state(&self) -> PerronState {
        PerronState::initial(self.graph.n(), &self.normalization)
    }

    fn evaluate(&self, x: &[f64], delta: f64, start: &PerronState, want_gradient: bool) -> Result<Evaluation<PerronState>> {
        let (s, k, g) = self.solve(x, delta, start)?;
        Ok(Evaluation {
            value: self.objective.value(&s.u),
            gradient: want_gradient.then(|| g.restrict(self.graph.facultative())),
            inner_steps: k,
            state: s,
        })
    }
}

/// What the gradient suggests for a facultative arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Activate,
    Deactivate,
    Indifferent,
}

impl Classification {
    /// Gradient sign read in the problem's sense.
    pub fn from_gradient(g: f64, tol: f64, maximize: bool) -> Self {
        let g = if maximize { g } else { -g };
        if g > tol {
            Self::Activate
        } else if g < -tol {
            Self::Deactivate
        } else {
            Self::Indifferent
        }
    }

    /// Whether a weight agrees with the classification.
    pub fn consistent_with(self, weight: f64, slack: f64) -> bool {
        match self {
            Self::Activate => weight >= 1.0 - slack,
            Self::Deactivate => weight <= slack,
            Self::Indifferent => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcReport {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
    pub gradient: f64,
    pub class: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageThreshold {
    pub page: usize,
    /// Cutoff `b_i`; absent for pages without outlinks.
    pub threshold: Option<f64>,
}

/// Threshold analysis at a (near) stationary point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub pages: Vec<PageThreshold>,
    /// `(j, score_j)` sorted by decreasing score: `w_j/u_j` for HITS, `−w_j`
    /// for HOTS. Higher scores are preferred link targets.
    pub scores: Vec<(usize, f64)>,
    pub arcs: Vec<ArcReport>,
}

impl ThresholdReport {
    /// Arcs whose weight contradicts their classification.
    pub fn violations(&self, slack: f64) -> Vec<&ArcReport> {
        self.arcs.iter().filter(|a| !a.class.consistent_with(a.weight, slack)).collect()
    }
}

pub(crate) fn sorted_scores(scores: Vec<f64>) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = scores.into_iter().enumerate().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

/// `b_i = −(Aw)ᵢ/(Au)ᵢ` per controlled page, `w_j/u_j` per node, and the
/// sign classification of each facultative arc. Since
/// `g_ij = (Au)ᵢ u_j (w_j/u_j − b_i)`, arc `(i, j)` is activated in a
/// maximization iff `w_j/u_j > b_i`.
pub fn threshold_report(
    graph: &LinkGraph,
    a: &SparseMatrix,
    u: &[f64],
    w: &[f64],
    x: &[f64],
    tol: f64,
    maximize: bool,
) -> ThresholdReport {
    let n = u.len();
    let (mut aw, mut au) = (vec![0.0; n], vec![0.0; n]);
    a.matvec(w, &mut aw);
    a.matvec(u, &mut au);
    let pages = graph
        .controlled_pages()
        .into_iter()
        .map(|i| PageThreshold {
            page: i,
            threshold: (au[i] > 0.0).then(|| -aw[i] / au[i]),
        })
        .collect();
    let arcs = graph
        .facultative()
        .iter()
        .zip(x)
        .map(|(&(i, j), &weight)| {
            let gradient = aw[i] * u[j] + au[i] * w[j];
            ArcReport {
                src: i,
                dst: j,
                weight,
                gradient,
                class: Classification::from_gradient(gradient, tol, maximize),
            }
        })
        .collect();
    ThresholdReport {
        pages,
        scores: sorted_scores(w.iter().zip(u).map(|(w, u)| w / u).collect()),
        arcs,
    }
}

/// One row of the rounding sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// Weights `≥ threshold` are set to 1; `0⁺` is reported as 0.
    pub threshold: f64,
    pub active: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rounding {
    pub x: Vec<f64>,
    pub value: f64,
    pub relaxed_value: f64,
    /// Relative gap `|relaxed − binary| / |relaxed|`.
    pub gap: f64,
    pub sweep: Vec<SweepRow>,
}

/// Threshold rounding of a relaxed solution: evaluates the objective with
/// every weight `≥ t` set to 1 and the others to 0, for `t = 0⁺`, `t = 1`
/// and each distinct positive weight, and keeps the best.
pub fn round_heuristic<P: ProblemAdapter + ?Sized>(x_star: &[f64], problem: &P, delta: f64) -> Result<Rounding> {
    let start = problem.initial_state();
    let relaxed = problem.evaluate(x_star, delta, &start, false)?;
    let mut ts: Vec<f64> = x_star.iter().copied().filter(|&v| v > 0.0).collect();
    ts.push(1.0);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    // 0⁺ rounds every positive weight up, like the smallest one does
    let mut thresholds = vec![0.0];
    thresholds.extend(ts.into_iter().skip(1));
    let mut sweep = Vec::with_capacity(thresholds.len());
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut state = relaxed.state.clone();
    for t in thresholds {
        let xb: Vec<f64> = x_star.iter().map(|&v| if (t == 0.0 && v > 0.0) || (t > 0.0 && v >= t) { 1.0 } else { 0.0 }).collect();
        let e = problem.evaluate(&xb, delta, &state, false)?;
        state = e.state;
        sweep.push(SweepRow {
            threshold: t,
            active: xb.iter().filter(|&&v| v == 1.0).count(),
            value: e.value,
        });
        let better = match &best {
            None => true,
            Some((_, b)) if problem.maximize() => e.value > *b,
            Some((_, b)) => e.value < *b,
        };
        if better {
            best = Some((xb, e.value));
        }
    }
    let (x, value) = best.expect("sweep is never empty");
    Ok(Rounding {
        x,
        value,
        relaxed_value: relaxed.value,
        gap: (relaxed.value - value).abs() / relaxed.value.abs().max(f64::MIN_POSITIVE),
        sweep,
    })
}
