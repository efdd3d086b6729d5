//! Projected gradient with Armijo steps along the projected arc, and the
//! master loop that refines the inner precision `Δ(n) = Δ₀ⁿ` on demand.
//!
//! All decrease tests are written for minimization. Maximization problems
//! report `maximize() == true` and are minimized through `−J`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::operator::norm_inf;

/// Line-search parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmijoParams {
    pub sigma: f64,
    pub beta: f64,
    pub alpha0: f64,
    /// Trials at level `n` are `m < trial_base + n`.
    pub trial_base: usize,
    /// Trial cap of the exact line search.
    pub exact_trials: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            beta: 0.5,
            alpha0: 1.0,
            trial_base: 10,
            exact_trials: 60,
        }
    }
}

impl ArmijoParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.sigma > 0.0 && self.sigma < 1.0 && self.beta > 0.0 && self.beta < 1.0 && self.alpha0 > 0.0;
        if !ok {
            return Err(Error::Parameter(format!("Armijo parameters out of range: {self:?}")));
        }
        Ok(())
    }

    /// `M̄_n`
    pub fn trials(&self, level: usize) -> usize {
        self.trial_base + level
    }
}

/// Master loop parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MasterParams {
    pub omega: f64,
    pub sigma_prime: f64,
    pub n_start: usize,
    pub delta0: f64,
    pub outer_cap: usize,
    /// Largest level tried before reporting that precision is exhausted.
    pub level_cap: usize,
    /// Stationarity tolerance on both `Δ(n)` and the projected displacement.
    pub tol: f64,
    /// Smallest tolerance handed to the inner solver.
    pub inner_floor: f64,
    /// With `s = max(‖g(x₀)‖∞, tol)`, use `α⁰/s` as the initial step and
    /// `s·σ′Δ(n)^ω` as the required decrease.
    pub rescale: bool,
    /// Stop once the objective reaches this value (in the problem's sense).
    pub target: Option<f64>,
}

impl Default for MasterParams {
    fn default() -> Self {
        Self {
            omega: 0.5,
            sigma_prime: 0.01,
            n_start: 4,
            delta0: 0.5,
            outer_cap: 10_000,
            level_cap: 200,
            tol: 1e-6,
            inner_floor: 1e-15,
            rescale: true,
            target: None,
        }
    }
}

impl MasterParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !(unit(self.omega) && unit(self.sigma_prime) && unit(self.delta0) && self.tol > 0.0 && self.inner_floor > 0.0) {
            return Err(Error::Parameter(format!("master parameters out of range: {self:?}")));
        }
        Ok(())
    }

    /// `Δ(n) = Δ₀ⁿ`
    pub fn delta(&self, level: usize) -> f64 {
        self.delta0.powi(level as i32)
    }

    /// Tolerance handed to the inner solver at level `n`.
    pub fn inner_tol(&self, level: usize) -> f64 {
        self.delta(level).max(self.inner_floor)
    }

    /// Required decrease `s·σ′Δ(n)^ω` for gradient scale `s`.
    pub fn required_decrease(&self, level: usize, scale: f64) -> f64 {
        scale * self.sigma_prime * self.delta(level).powf(self.omega)
    }
}

/// Box `[lo, hi]ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSet {
    pub lo: f64,
    pub hi: f64,
}

impl BoxSet {
    pub const UNIT: BoxSet = BoxSet { lo: 0.0, hi: 1.0 };

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|&v| if v.is_nan() { self.lo } else { v.clamp(self.lo, self.hi) })
            .collect()
    }

    /// `P(x − αg)`
    pub fn arc(&self, x: &[f64], g: &[f64], alpha: f64) -> Vec<f64> {
        let y: Vec<f64> = x.iter().zip(g).map(|(x, g)| x - alpha * g).collect();
        self.project(&y)
    }

    /// `‖x − P(x − αg)‖∞`
    pub fn displacement(&self, x: &[f64], g: &[f64], alpha: f64) -> f64 {
        let y = self.arc(x, g, alpha);
        x.iter().zip(&y).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Result of one evaluation of the approximate objective.
#[derive(Debug, Clone)]
pub struct Evaluation<S> {
    /// Objective value in the problem's own sense.
    pub value: f64,
    /// Gradient over the facultative coordinates, when requested.
    pub gradient: Option<Vec<f64>>,
    /// Inner iterations spent (power steps, fixed-point steps, ...).
    pub inner_steps: usize,
    /// Hot-start handle for the next evaluation.
    pub state: S,
}

/// Problem seen by the optimizer.
pub trait ProblemAdapter {
    type State: Clone;

    /// Number of decision variables.
    fn dim(&self) -> usize;

    fn maximize(&self) -> bool;

    fn initial_state(&self) -> Self::State;

    /// `J_Δ(x)` and, if asked, `g_Δ(x)`, computed to inner tolerance `delta`
    /// starting from `start`.
    fn evaluate(&self, x: &[f64], delta: f64, start: &Self::State, want_gradient: bool) -> Result<Evaluation<Self::State>>;

    fn feasible_set(&self) -> BoxSet {
        BoxSet::UNIT
    }

    /// Whether convergence theory covers this problem.
    fn heuristic(&self) -> bool {
        false
    }
}

fn sign<P: ProblemAdapter + ?Sized>(p: &P) -> f64 {
    if p.maximize() {
        -1.0
    } else {
        1.0
    }
}

/// Accepted line-search step.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmijoStep {
    pub x: Vec<f64>,
    pub alpha: f64,
    pub m: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Armijo rule along the projected arc with exact `J` and `∇J` (minimization).
///
/// `m` is the first index with `J(x′) − J(x) ≤ −σ‖x − x′‖²/α`, `α = βᵐα⁰`.
pub fn armijo_exact_step<F: FnMut(&[f64]) -> f64>(
    x: &[f64],
    mut j: F,
    grad: &[f64],
    set: &BoxSet,
    params: &ArmijoParams,
) -> Result<ArmijoStep> {
    let j0 = j(x);
    let mut alpha = params.alpha0;
    for m in 0..params.exact_trials {
        let y = set.arc(x, grad, alpha);
        if j(&y) - j0 <= -params.sigma * sq_dist(x, &y) / alpha {
            return Ok(ArmijoStep { x: y, alpha, m });
        }
        alpha *= params.beta;
    }
    Err(Error::NonConvergence {
        iterations: params.exact_trials,
        residual: alpha,
    })
}

/// Outcome of the approximate line search at a fixed level.
#[derive(Debug, Clone)]
pub enum ArmijoOutcome<S> {
    Accepted {
        step: ArmijoStep,
        /// `J_n(x′)` in the minimization sense.
        merit: f64,
        eval: Evaluation<S>,
        inner_steps: usize,
    },
    Failed {
        inner_steps: usize,
    },
}

/// Approximate Armijo rule: like [`armijo_exact_step`] with `J_n`, `g_n`
/// evaluated at inner tolerance `delta`, trying `m < trials` only.
///
/// `merit` and `grad` are `J_n(x)` and `g_n(x)` in the minimization sense.
/// Each trial point is evaluated hot-started from `state`.
#[allow(clippy::too_many_arguments)]
pub fn approx_armijo<P: ProblemAdapter + ?Sized>(
    problem: &P,
    x: &[f64],
    merit: f64,
    grad: &[f64],
    state: &P::State,
    delta: f64,
    trials: usize,
    params: &ArmijoParams,
    alpha0: f64,
) -> Result<ArmijoOutcome<P::State>> {
    let set = problem.feasible_set();
    let s = sign(problem);
    let mut alpha = alpha0;
    let mut inner = 0;
    for m in 0..trials {
        let y = set.arc(x, grad, alpha);
        let eval = problem.evaluate(&y, delta, state, false)?;
        inner += eval.inner_steps;
        let my = s * eval.value;
        if my - merit <= -params.sigma * sq_dist(x, &y) / alpha {
            return Ok(ArmijoOutcome::Accepted {
                step: ArmijoStep { x: y, alpha, m },
                merit: my,
                eval,
                inner_steps: inner,
            });
        }
        alpha *= params.beta;
    }
    Ok(ArmijoOutcome::Failed { inner_steps: inner })
}

/// Why an optimization run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    TargetReached,
    OuterCap,
    PrecisionExhausted,
    LineSearchFailed,
}

impl Status {
    pub fn is_success(self) -> bool {
        matches!(self, Status::Converged | Status::TargetReached)
    }
}

/// Kind of trajectory record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Event {
    Start,
    Accept,
    Refine,
    Stop,
}

/// One line of the trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub iteration: usize,
    pub event: Event,
    pub level: usize,
    pub delta: f64,
    /// Objective in the problem's sense at the current iterate.
    pub value: f64,
    /// Minimization-sense values before and after an accepted step, both at
    /// the same level.
    pub merit_before: Option<f64>,
    pub merit_after: Option<f64>,
    /// Required decrease `s·σ′Δ(n)^ω` (master loop only).
    pub required: Option<f64>,
    pub alpha: Option<f64>,
    pub m: Option<usize>,
    /// For refinements: `J_{n+1}(x) − J_n(x)`.
    pub level_change: Option<f64>,
    pub displacement: f64,
    pub inner_steps: usize,
    pub total_inner_steps: usize,
    pub evaluations: usize,
    pub wall_time: f64,
}

/// Iterate history of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub status: Status,
    pub level: usize,
    pub alpha0: f64,
    /// Gradient scale `s` applied to `α⁰` and the required decrease.
    pub scale: f64,
    pub total_inner_steps: usize,
    pub evaluations: usize,
    pub heuristic: bool,
}

impl Trajectory {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }

    pub fn accepted(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| r.event == Event::Accept)
    }
}

struct Recorder {
    records: Vec<Record>,
    start: Instant,
    total_inner: usize,
    evaluations: usize,
}

impl Recorder {
    fn new() -> Self {
        Self {
            records: Vec::new(),
            start: Instant::now(),
            total_inner: 0,
            evaluations: 0,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn base(&self, iteration: usize, event: Event, level: usize, delta: f64, value: f64, displacement: f64, inner: usize) -> Record {
        Record {
            iteration,
            event,
            level,
            delta,
            value,
            merit_before: None,
            merit_after: None,
            required: None,
            alpha: None,
            m: None,
            level_change: None,
            displacement,
            inner_steps: inner,
            total_inner_steps: self.total_inner,
            evaluations: self.evaluations,
            wall_time: self.start.elapsed().as_secs_f64(),
        }
    }
}

fn target_reached(target: Option<f64>, value: f64, maximize: bool) -> bool {
    match target {
        Some(t) if maximize => value >= t,
        Some(t) => value <= t,
        None => false,
    }
}

/// `max(‖g‖∞, tol)`
fn gradient_scale(g: &[f64], tol: f64) -> f64 {
    norm_inf(g).max(tol)
}

fn gradient_of<S>(e: &Evaluation<S>) -> Result<Vec<f64>> {
    e.gradient
        .clone()
        .ok_or_else(|| Error::Parameter("adapter returned no gradient".into()))
}

/// Master loop: approximate Armijo steps at level `n`, increasing `n` when
/// the line search fails or the decrease `s·σ′Δ(n)^ω` is not met.
pub fn master_optimize<P: ProblemAdapter + ?Sized>(
    x0: &[f64],
    problem: &P,
    mp: &MasterParams,
    ap: &ArmijoParams,
) -> Result<Trajectory> {
    mp.validate()?;
    ap.validate()?;
    if x0.len() != problem.dim() {
        return Err(Error::Dimension {
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    let set = problem.feasible_set();
    let s = sign(problem);
    let mut rec = Recorder::new();
    let mut level = mp.n_start;
    let mut x = set.project(x0);
    let mut eval = problem.evaluate(&x, mp.inner_tol(level), &problem.initial_state(), true)?;
    rec.total_inner += eval.inner_steps;
    rec.evaluations += 1;
    let mut g: Vec<f64> = gradient_of(&eval)?.iter().map(|v| s * v).collect();
    let scale = if mp.rescale { gradient_scale(&g, mp.tol) } else { 1.0 };
    let alpha0 = ap.alpha0 / scale;
    let disp = set.displacement(&x, &g, alpha0);
    let first = rec.base(0, Event::Start, level, mp.delta(level), eval.value, disp, eval.inner_steps);
    rec.records.push(first);

    let mut status = Status::OuterCap;
    for it in 1..=mp.outer_cap {
        let disp = set.displacement(&x, &g, alpha0);
        if target_reached(mp.target, eval.value, problem.maximize()) {
            status = Status::TargetReached;
            break;
        }
        if mp.delta(level) < mp.tol && disp < mp.tol {
            status = Status::Converged;
            break;
        }
        if level > mp.level_cap {
            status = Status::PrecisionExhausted;
            break;
        }
        let merit = s * eval.value;
        let delta = mp.inner_tol(level);
        let outcome = approx_armijo(problem, &x, merit, &g, &eval.state, delta, ap.trials(level), ap, alpha0)?;
        let required = mp.required_decrease(level, scale);
        match outcome {
            ArmijoOutcome::Accepted {
                step,
                merit: after,
                eval: trial,
                inner_steps,
            } if after - merit <= -required => {
                rec.total_inner += inner_steps;
                rec.evaluations += step.m + 1;
                // gradient at the accepted point, hot-started from the trial
                let next = problem.evaluate(&step.x, delta, &trial.state, true)?;
                rec.total_inner += next.inner_steps;
                rec.evaluations += 1;
                x = step.x;
                g = gradient_of(&next)?.iter().map(|v| s * v).collect();
                let d = set.displacement(&x, &g, alpha0);
                let mut r = rec.base(it, Event::Accept, level, mp.delta(level), trial.value, d, inner_steps + next.inner_steps);
                r.merit_before = Some(merit);
                r.merit_after = Some(after);
                r.required = Some(required);
                r.alpha = Some(step.alpha);
                r.m = Some(step.m);
                rec.records.push(r);
                eval = next;
            }
            other => {
                let spent = match other {
                    ArmijoOutcome::Accepted { inner_steps, step, .. } => {
                        rec.evaluations += step.m + 1;
                        inner_steps
                    }
                    ArmijoOutcome::Failed { inner_steps } => {
                        rec.evaluations += ap.trials(level);
                        inner_steps
                    }
                };
                rec.total_inner += spent;
                level += 1;
                let next = problem.evaluate(&x, mp.inner_tol(level), &eval.state, true)?;
                rec.total_inner += next.inner_steps;
                rec.evaluations += 1;
                g = gradient_of(&next)?.iter().map(|v| s * v).collect();
                let d = set.displacement(&x, &g, alpha0);
                let mut r = rec.base(it, Event::Refine, level, mp.delta(level), next.value, d, spent + next.inner_steps);
                r.level_change = Some(next.value - eval.value);
                r.required = Some(required);
                rec.records.push(r);
                eval = next;
            }
        }
    }
    let disp = set.displacement(&x, &g, alpha0);
    let last = rec.base(rec.records.len(), Event::Stop, level, mp.delta(level), eval.value, disp, 0);
    rec.records.push(last);
    Ok(Trajectory {
        records: rec.records,
        value: eval.value,
        gradient: g.iter().map(|v| s * v).collect(),
        x,
        status,
        level,
        alpha0,
        scale,
        total_inner_steps: rec.total_inner,
        evaluations: rec.evaluations,
        heuristic: problem.heuristic(),
    })
}

/// Projected gradient with every evaluation run to the fixed inner tolerance
/// `eps`, hot-started from the previous one. Stops when the projected
/// displacement is at most `tol`.
pub fn fixed_precision_gradient<P: ProblemAdapter + ?Sized>(
    x0: &[f64],
    problem: &P,
    eps: f64,
    tol: f64,
    outer_cap: usize,
    ap: &ArmijoParams,
) -> Result<Trajectory> {
    ap.validate()?;
    if !(eps > 0.0 && tol > 0.0) {
        return Err(Error::Parameter("tolerances must be positive".into()));
    }
    let set = problem.feasible_set();
    let s = sign(problem);
    let mut rec = Recorder::new();
    let mut x = set.project(x0);
    let mut eval = problem.evaluate(&x, eps, &problem.initial_state(), true)?;
    rec.total_inner += eval.inner_steps;
    rec.evaluations += 1;
    let mut g: Vec<f64> = gradient_of(&eval)?.iter().map(|v| s * v).collect();
    let scale = gradient_scale(&g, tol);
    let alpha0 = ap.alpha0 / scale;
    let first = rec.base(0, Event::Start, 0, eps, eval.value, set.displacement(&x, &g, alpha0), eval.inner_steps);
    rec.records.push(first);

    let mut status = Status::OuterCap;
    for it in 1..=outer_cap {
        if set.displacement(&x, &g, alpha0) <= tol {
            status = Status::Converged;
            break;
        }
        let merit = s * eval.value;
        match approx_armijo(problem, &x, merit, &g, &eval.state, eps, ap.exact_trials, ap, alpha0)? {
            ArmijoOutcome::Accepted {
                step,
                merit: after,
                eval: trial,
                inner_steps,
            } => {
                rec.total_inner += inner_steps;
                rec.evaluations += step.m + 1;
                let next = problem.evaluate(&step.x, eps, &trial.state, true)?;
                rec.total_inner += next.inner_steps;
                rec.evaluations += 1;
                x = step.x;
                g = gradient_of(&next)?.iter().map(|v| s * v).collect();
                let mut r = rec.base(it, Event::Accept, 0, eps, trial.value, set.displacement(&x, &g, alpha0), inner_steps + next.inner_steps);
                r.merit_before = Some(merit);
                r.merit_after = Some(after);
                r.alpha = Some(step.alpha);
                r.m = Some(step.m);
                rec.records.push(r);
                eval = next;
            }
            ArmijoOutcome::Failed { inner_steps } => {
                rec.total_inner += inner_steps;
                rec.evaluations += ap.exact_trials;
                status = Status::LineSearchFailed;
                break;
            }
        }
    }
    let last = rec.base(rec.records.len(), Event::Stop, 0, eps, eval.value, set.displacement(&x, &g, alpha0), 0);
    rec.records.push(last);
    Ok(Trajectory {
        records: rec.records,
        value: eval.value,
        gradient: g.iter().map(|v| s * v).collect(),
        x,
        status,
        level: 0,
        alpha0,
        scale,
        total_inner_steps: rec.total_inner,
        evaluations: rec.evaluations,
        heuristic: problem.heuristic(),
    })
}
