//! Perron vector of `A(x) + ξeeᵀ` as the ranking.

use crate::error::Result;
use crate::graph::{Assembler, LinkGraph, SparseMatrix};
use crate::optimizer::{Evaluation, ProblemAdapter};
use crate::spectral::{
    default_cap, iterate_to_level, ChainRule, Identity, LowRankGradient, Normalization, Objective, PerronState,
    Shifted,
};

pub struct PerronProblem<O> {
    graph: LinkGraph,
    assembler: Assembler,
    pub xi: f64,
    pub objective: O,
    pub normalization: Normalization,
    pub maximize: bool,
    pub cap: usize,
}

impl<O: Objective> PerronProblem<O> {
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
        }
    }

    pub fn graph(&self) -> &LinkGraph {
        &self.graph
    }

    pub fn matrix(&self, x: &[f64]) -> SparseMatrix {
        self.assembler.assemble(x)
    }

    /// Converged state and the full low-rank gradient at `x`.
    pub fn solve(&self, x: &[f64], delta: f64, start: &PerronState) -> Result<(PerronState, usize, LowRankGradient)> {
        let a = self.matrix(x);
        let op = Shifted { inner: &a, xi: self.xi };
        let (s, k) = iterate_to_level(&op, &self.objective, &self.normalization, start, delta, self.cap)?;
        let g = Identity.gradient(&s.u, &s.w);
        Ok((s, k, g))
    }
}

impl<O: Objective> ProblemAdapter for PerronProblem<O> {
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
