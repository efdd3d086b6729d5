//! Command line jobs: `rank`, `optimize`, `round`, `bench`, `verify`.
//!
//! Flags fill a [`JobConfig`]; a TOML file given with `--config` overrides
//! them key by key. Results go to the output directory:
//!
//! ```text
//! summary.json       stable key order, no timings
//! scores.txt         <page> <score>
//! weights.txt        <src> <dst> <weight>
//! trajectory.jsonl   one record per outer event
//! thresholds.json    arc classification at the final point
//! sweep.json         rounding thresholds and values
//! bench.json         per-strategy counters (bench only)
//! ```
//!
//! Exit codes: 0 success, 1 usage or I/O, 2 numerical non-convergence.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::synthetic::random_weights;
use crate::graph::{parse_graph, parse_weights, serialize_weights, LinkGraph, ParseOptions, WeightVector};
use crate::hits::{round_heuristic, ArcReport, Classification, HitsOperator, HitsProblem, ThresholdReport};
use crate::hots::{self, HotsConfig, HotsNormalization, HotsProblem};
use crate::optimizer::{
    fixed_precision_gradient, master_optimize, ArmijoParams, Evaluation, MasterParams, ProblemAdapter, Status,
    Trajectory,
};
use crate::perron::PerronProblem;
use crate::spectral::operator::to_dense;
use crate::spectral::{
    certified_eigen_bound, drazin_dense, perron_dense, power_iterate, solve_bordered, CertifiedBound, ChainRule,
    Identity, LinearOperator, NormObjective, Normalization, Objective, Shifted, TargetObjective, DENSE_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Hits,
    Hots,
    Perron,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// Σ_{i∈I} uᵢ
    Sum,
    /// Σ_{i∈I} uᵢ²
    SumSquares,
    /// Σ_{i∈I} exp(uᵢ)
    SumExp,
    /// the normalization itself
    Norm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    L1,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HotsNormKind {
    MeanZero,
    LogSumExp,
    LogSumExpTargets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Master,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Start {
    /// every facultative weight 1/2
    Uniform,
    /// uniform on [0, 1] from the seed
    Random,
}

/// Everything a job needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JobConfig {
    pub graph: Option<PathBuf>,
    /// Starting (optimize) or evaluated (rank, round, verify) weights.
    pub weights: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub algorithm: Algorithm,
    /// Defaults: sum-squares (hits), sum-exp (hots), sum (perron).
    pub objective: Option<ObjectiveKind>,
    /// Defaults: l2 (hits), l1 (perron).
    pub normalization: Option<NormKind>,
    pub hots_normalization: HotsNormKind,
    pub alpha: f64,
    pub xi: f64,
    pub precondition: bool,
    pub minimize: bool,
    pub strategy: Strategy,
    /// Inner tolerance of the fixed-precision strategy.
    pub eps: f64,
    /// Inner tolerance of `rank` and `verify`.
    pub rank_tol: f64,
    /// `|g|` below which an arc is reported indifferent.
    pub threshold_tol: f64,
    pub start: Start,
    pub seed: u64,
    pub allow_self_loops: bool,
    pub armijo: ArmijoParams,
    pub master: MasterParams,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            graph: None,
            weights: None,
            out: None,
            algorithm: Algorithm::Hits,
            objective: None,
            normalization: None,
            hots_normalization: HotsNormKind::LogSumExp,
            alpha: 0.9,
            xi: 1e-4,
            precondition: false,
            minimize: false,
            strategy: Strategy::Master,
            eps: 1e-10,
            rank_tol: 1e-12,
            threshold_tol: 1e-8,
            start: Start::Uniform,
            seed: 0,
            allow_self_loops: false,
            armijo: ArmijoParams::default(),
            master: MasterParams::default(),
        }
    }
}

impl JobConfig {
    pub fn validate(&self) -> Result<()> {
        self.armijo.validate()?;
        self.master.validate()?;
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(Error::Parameter(format!("xi must be positive, got {}", self.xi)));
        }
        for (name, v) in [("eps", self.eps), ("rank_tol", self.rank_tol), ("threshold_tol", self.threshold_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.algorithm == Algorithm::Hots {
            self.hots_config().validate()?;
        }
        Ok(())
    }

    pub fn objective_kind(&self) -> ObjectiveKind {
        self.objective.unwrap_or(match self.algorithm {
            Algorithm::Hits => ObjectiveKind::SumSquares,
            Algorithm::Hots => ObjectiveKind::SumExp,
            Algorithm::Perron => ObjectiveKind::Sum,
        })
    }

    pub fn perron_normalization(&self) -> Normalization {
        match self.normalization.unwrap_or(match self.algorithm {
            Algorithm::Perron => NormKind::L1,
            _ => NormKind::L2,
        }) {
            NormKind::L1 => Normalization::L1,
            NormKind::L2 => Normalization::L2,
        }
    }

    fn hots_config(&self) -> HotsConfig {
        HotsConfig {
            alpha: self.alpha,
            ..HotsConfig::default()
        }
    }

    /// Merges a TOML document over `self`; unknown keys are errors.
    pub fn overlay_toml(&self, text: &str) -> Result<Self> {
        let over: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parameter(format!("config: {e}")))?;
        let mut base = toml::Table::try_from(self).map_err(|e| Error::Parameter(format!("config: {e}")))?;
        merge(&mut base, over);
        base.try_into().map_err(|e: toml::de::Error| Error::Parameter(format!("config: {e}")))
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "linkopt", version, about = "Optimize HITS and HOTS scores over facultative hyperlinks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Rank,
    Optimize,
    Round,
    Bench,
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scores of the graph with the given (default 1/2) weights.
    Rank(JobArgs),
    /// Projected gradient optimization of the facultative weights.
    Optimize(JobArgs),
    /// Threshold rounding of a weight file.
    Round(JobArgs),
    /// Dense, fixed-precision and coupled gradient strategies side by side.
    Bench(JobArgs),
    /// Certified error bound of the computed eigenpair (flow residuals for hots).
    Verify(JobArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct JobArgs {
    /// TOML file whose keys override the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algorithm: Option<Algorithm>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveKind>,
    #[arg(long, value_enum)]
    pub normalization: Option<NormKind>,
    #[arg(long, value_enum)]
    pub hots_normalization: Option<HotsNormKind>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub precondition: bool,
    #[arg(long)]
    pub minimize: bool,
    #[arg(long, value_enum)]
    pub strategy: Option<Strategy>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long)]
    pub threshold_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub start: Option<Start>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub allow_self_loops: bool,
    /// stationarity tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub outer_cap: Option<usize>,
    #[arg(long)]
    pub level_cap: Option<usize>,
    #[arg(long)]
    pub n_start: Option<usize>,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub sigma_prime: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// initial Armijo step
    #[arg(long)]
    pub step0: Option<f64>,
    #[arg(long)]
    pub trial_base: Option<usize>,
}

impl JobArgs {
    /// Flags over defaults, then the config file over both.
    pub fn to_config(&self) -> Result<JobConfig> {
        let mut c = JobConfig::default();
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { c.$($field).+ = v; })*
            };
        }
        set!(
            algorithm => algorithm, hots_normalization => hots_normalization, alpha => alpha, xi => xi,
            strategy => strategy, eps => eps, rank_tol => rank_tol, threshold_tol => threshold_tol,
            start => start, seed => seed, tol => master.tol, outer_cap => master.outer_cap,
            level_cap => master.level_cap, n_start => master.n_start, delta0 => master.delta0,
            omega => master.omega, sigma_prime => master.sigma_prime, sigma => armijo.sigma,
            beta => armijo.beta, step0 => armijo.alpha0, trial_base => armijo.trial_base,
        );
        c.graph = self.graph.clone();
        c.weights = self.weights.clone();
        c.out = self.out.clone();
        c.objective = self.objective;
        c.normalization = self.normalization;
        c.master.target = self.target;
        c.precondition = self.precondition;
        c.minimize = self.minimize;
        c.allow_self_loops = self.allow_self_loops;
        if let Some(path) = &self.config {
            c = c.overlay_toml(&read(path)?)?;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Objectives selectable from the command line.
#[derive(Debug, Clone)]
pub enum JobObjective {
    Target(TargetObjective),
    Norm(NormObjective),
    HotsNorm(HotsNormalization),
}

impl Objective for JobObjective {
    fn value(&self, u: &[f64]) -> f64 {
        match self {
            Self::Target(f) => f.value(u),
            Self::Norm(f) => f.value(u),
            Self::HotsNorm(n) => n.value(u),
        }
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Self::Target(f) => f.gradient(u, out),
            Self::Norm(f) => f.gradient(u, out),
            Self::HotsNorm(n) => out.copy_from_slice(&n.gradient(u)),
        }
    }
}

/// A job failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. }
            | Error::SpectralObstruction(_)
            | Error::DegenerateLeftVector(_)
            | Error::NotSimple(_)
            | Error::Singular(_) => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text).map_err(|e| Error::Parameter(format!("{}: {e}", dir.join(name).display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Parses `args` (including the program name) and runs the job; returns
/// the exit code. Messages go to stderr, the summary to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (kind, job) = match &cli.command {
        Command::Rank(a) => (CommandKind::Rank, a),
        Command::Optimize(a) => (CommandKind::Optimize, a),
        Command::Round(a) => (CommandKind::Round, a),
        Command::Bench(a) => (CommandKind::Bench, a),
        Command::Verify(a) => (CommandKind::Verify, a),
    };
    let outcome = job.to_config().map_err(Failure::from).and_then(|c| execute(kind, &c));
    match outcome {
        Ok(out) => {
            print!("{}", out.summary);
            if let Some(m) = &out.message {
                eprintln!("linkopt: {m}");
            }
            out.code
        }
        Err(f) => {
            eprintln!("linkopt: {}", f.message);
            f.code
        }
    }
}

/// Result of a finished job.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
    pub message: Option<String>,
}

/// Runs one command with a resolved configuration.
pub fn execute(kind: CommandKind, cfg: &JobConfig) -> std::result::Result<Outcome, Failure> {
    let path = cfg
        .graph
        .as_ref()
        .ok_or_else(|| Failure {
            code: 1,
            message: "no input graph (use --graph or the `graph` key)".into(),
        })?;
    let graph = parse_graph(
        &read(path)?,
        ParseOptions {
            allow_self_loops: cfg.allow_self_loops,
        },
    )?;
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(|e| Error::Parameter(format!("{}: {e}", dir.display())))?;
    }
    let x = initial_weights(&graph, cfg)?;
    let objective = build_objective(&graph, cfg);
    let maximize = !cfg.minimize;
    match cfg.algorithm {
        Algorithm::Hits => {
            let mut p = HitsProblem::new(graph, cfg.xi, objective, cfg.perron_normalization());
            p.maximize = maximize;
            dispatch(kind, cfg, &p, x)
        }
        Algorithm::Perron => {
            let mut p = PerronProblem::new(graph, cfg.xi, objective, cfg.perron_normalization());
            p.maximize = maximize;
            dispatch(kind, cfg, &p, x)
        }
        Algorithm::Hots => {
            let hc = HotsConfig {
                normalization: hots_normalization(&graph, cfg.hots_normalization),
                ..cfg.hots_config()
            };
            let mut p = HotsProblem::new(graph, hc, objective);
            p.maximize = maximize;
            p.precondition = cfg.precondition;
            dispatch(kind, cfg, &p, x)
        }
    }
}

fn hots_normalization(g: &LinkGraph, k: HotsNormKind) -> HotsNormalization {
    match k {
        HotsNormKind::MeanZero => HotsNormalization::MeanZero,
        HotsNormKind::LogSumExp => HotsNormalization::LogSumExp,
        HotsNormKind::LogSumExpTargets => HotsNormalization::LogSumExpTargets(g.targets().iter().copied().collect()),
    }
}

fn build_objective(g: &LinkGraph, cfg: &JobConfig) -> JobObjective {
    match cfg.objective_kind() {
        ObjectiveKind::Sum => JobObjective::Target(TargetObjective::sum(g.targets())),
        ObjectiveKind::SumSquares => JobObjective::Target(TargetObjective::sum_squares(g.targets())),
        ObjectiveKind::SumExp => JobObjective::Target(TargetObjective::sum_exp(g.targets())),
        ObjectiveKind::Norm => match cfg.algorithm {
            Algorithm::Hots => JobObjective::HotsNorm(hots_normalization(g, cfg.hots_normalization)),
            _ => JobObjective::Norm(NormObjective(cfg.perron_normalization())),
        },
    }
}

fn initial_weights(g: &LinkGraph, cfg: &JobConfig) -> Result<Vec<f64>> {
    let m = g.facultative().len();
    Ok(match (&cfg.weights, cfg.start) {
        (Some(path), _) => parse_weights(g, &read(path)?)?.into_inner(),
        (None, Start::Uniform) => vec![0.5; m],
        (None, Start::Random) => random_weights(m, 0.0, 1.0, cfg.seed),
    })
}

/// Algorithm-specific pieces of a job.
pub trait JobProblem: ProblemAdapter + Sync {
    fn graph(&self) -> &LinkGraph;

    /// Scores at `x` with diagnostics.
    fn rank(&self, x: &[f64], tol: f64) -> Result<Ranking>;

    /// Arc classification at `x`, solved to `tol`.
    fn report(&self, x: &[f64], tol: f64, threshold_tol: f64) -> Result<ThresholdReport>;

    /// Value and facultative gradient from dense direct solves.
    fn dense_evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;

    /// Certificate of the computed solution at `x`.
    fn verify(&self, x: &[f64], tol: f64) -> Result<Verification>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub scores: Vec<f64>,
    pub value: f64,
    /// Perron: `‖Mu − ρu‖∞/ρ`; HOTS: `‖∇θ(p)‖∞`.
    pub residual: f64,
    pub iterations: Option<usize>,
    pub eigenvalue: Option<f64>,
    pub theta: Option<f64>,
    pub flow_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub certified: bool,
    pub bound: Option<CertifiedBound>,
    pub flow: Option<FlowResiduals>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowResiduals {
    pub conservation: f64,
    pub mass: f64,
    pub to_virtual: f64,
    pub from_virtual: f64,
}

fn perron_rank<M: LinearOperator, O: Objective>(
    op: &M,
    obj: &O,
    norm: &Normalization,
    tol: f64,
    cap: usize,
) -> Result<(Ranking, Vec<f64>)> {
    let (rho, u, v) = power_iterate(op, norm, tol, cap)?;
    let mut mu = vec![0.0; u.len()];
    op.apply(&u, &mut mu);
    let residual = mu.iter().zip(&u).map(|(a, b)| (a - rho * b).abs()).fold(0.0, f64::max) / rho;
    Ok((
        Ranking {
            value: obj.value(&u),
            scores: u,
            residual,
            iterations: None,
            eigenvalue: Some(rho),
            theta: None,
            flow_residual: None,
        },
        v,
    ))
}

/// `w` from the bordered system at the dense Perron pair of `m`.
fn dense_perron<O: Objective>(m: &nalgebra::DMatrix<f64>, obj: &O, norm: &Normalization) -> Result<(Vec<f64>, Vec<f64>)> {
    let (rho, u, _) = perron_dense(m)?;
    let s = norm.value(&u);
    let u: Vec<f64> = u.iter().map(|x| x / s).collect();
    let w = solve_bordered(m, rho, &u, &norm.gradient_vec(&u), &obj.gradient_vec(&u))?;
    Ok((u, w))
}

fn perron_verify(m: &nalgebra::DMatrix<f64>, u: &[f64], rho: f64, norm: &Normalization) -> Result<Verification> {
    let bound = certified_eigen_bound(m, u, rho, &norm.gradient_vec(u))?;
    Ok(Verification {
        certified: bound.is_available(),
        bound: Some(bound),
        flow: None,
    })
}

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        return Err(Error::SizeCap { n, cap: DENSE_CAP });
    }
    Ok(())
}

impl<O: Objective> JobProblem for HitsProblem<O> {
    fn graph(&self) -> &LinkGraph {
        HitsProblem::graph(self)
    }

    fn rank(&self, x: &[f64], tol: f64) -> Result<Ranking> {
        let a = self.matrix(x);
        Ok(perron_rank(&HitsOperator { a: &a, xi: self.xi }, &self.objective, &self.normalization, tol, self.cap)?.0)
    }

    fn report(&self, x: &[f64], tol: f64, threshold_tol: f64) -> Result<ThresholdReport> {
        let (s, _, _) = self.solve(x, tol, &self.initial_state())?;
        Ok(self.threshold_report(x, &s, threshold_tol))
    }

    fn dense_evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dense(self.graph().n())?;
        let a = self.matrix(x);
        let m = to_dense(&HitsOperator { a: &a, xi: self.xi });
        let (u, w) = dense_perron(&m, &self.objective, &self.normalization)?;
        let g = crate::hits::hits_chain_gradient(&a, &u, &w);
        Ok((self.objective.value(&u), g.restrict(self.graph().facultative())))
    }

    fn verify(&self, x: &[f64], tol: f64) -> Result<Verification> {
        check_dense(self.graph().n())?;
        let a = self.matrix(x);
        let op = HitsOperator { a: &a, xi: self.xi };
        let (r, _) = perron_rank(&op, &self.objective, &self.normalization, tol, self.cap)?;
        perron_verify(&to_dense(&op), &r.scores, r.eigenvalue.unwrap_or(f64::NAN), &self.normalization)
    }
}

impl<O: Objective> JobProblem for PerronProblem<O> {
    fn graph(&self) -> &LinkGraph {
        PerronProblem::graph(self)
    }

    fn rank(&self, x: &[f64], tol: f64) -> Result<Ranking> {
        let a = self.matrix(x);
        Ok(perron_rank(&Shifted { inner: &a, xi: self.xi }, &self.objective, &self.normalization, tol, self.cap)?.0)
    }

    fn report(&self, x: &[f64], tol: f64, threshold_tol: f64) -> Result<ThresholdReport> {
        let (s, _, g) = self.solve(x, tol, &self.initial_state())?;
        Ok(gradient_report(PerronProblem::graph(self), x, &g.restrict(self.graph().facultative()), &s.u, threshold_tol, self.maximize))
    }

    fn dense_evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dense(self.graph().n())?;
        let a = self.matrix(x);
        let m = to_dense(&Shifted { inner: &a, xi: self.xi });
        let (u, w) = dense_perron(&m, &self.objective, &self.normalization)?;
        let g = Identity.gradient(&u, &w);
        Ok((self.objective.value(&u), g.restrict(self.graph().facultative())))
    }

    fn verify(&self, x: &[f64], tol: f64) -> Result<Verification> {
        check_dense(self.graph().n())?;
        let a = self.matrix(x);
        let op = Shifted { inner: &a, xi: self.xi };
        let (r, _) = perron_rank(&op, &self.objective, &self.normalization, tol, self.cap)?;
        perron_verify(&to_dense(&op), &r.scores, r.eigenvalue.unwrap_or(f64::NAN), &self.normalization)
    }
}

impl<O: Objective> JobProblem for HotsProblem<O> {
    fn graph(&self) -> &LinkGraph {
        HotsProblem::graph(self)
    }

    fn rank(&self, x: &[f64], tol: f64) -> Result<Ranking> {
        let a = self.matrix(x);
        let cfg = HotsConfig { tol, ..self.config.clone() };
        let s = hots::hots_solve(&vec![0.0; a.n()], &a, &cfg)?;
        let flow = hots::primal_flow(&s.p, &a, &cfg)?;
        Ok(Ranking {
            value: self.objective.value(&s.p),
            scores: s.scores(),
            residual: s.residual,
            iterations: Some(s.iterations),
            eigenvalue: None,
            theta: Some(s.theta),
            flow_residual: Some(flow.max_residual()),
        })
    }

    fn report(&self, x: &[f64], tol: f64, threshold_tol: f64) -> Result<ThresholdReport> {
        let pt = self.solve(x, tol, &self.initial_state(), true)?;
        self.threshold_report(x, &pt, threshold_tol)
    }

    fn dense_evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.graph().n();
        check_dense(n)?;
        let a = self.matrix(x);
        let s = hots::hots_solve(&vec![0.0; n], &a, &self.config)?;
        let mut h = nalgebra::DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            h.set_column(j, &nalgebra::DVector::from_vec(hots::hessian_matvec(&s.p, &a, &self.config, &e)?));
            e[j] = 0.0;
        }
        let gf = self.objective.gradient_vec(&s.p);
        let gn = self.config.normalization.gradient(&s.p);
        let fe: f64 = gf.iter().sum();
        let r = nalgebra::DVector::from_iterator(n, (0..n).map(|l| -gf[l] + fe * gn[l]));
        let w = drazin_dense(&h, 0.0)?.transpose() * r;
        let (g, _) = hots::hots_gradient(&s.p, w.as_slice(), &a, &self.config)?;
        Ok((self.objective.value(&s.p), g.restrict(self.graph().facultative())))
    }

    fn verify(&self, x: &[f64], tol: f64) -> Result<Verification> {
        let a = self.matrix(x);
        let cfg = HotsConfig { tol, ..self.config.clone() };
        let s = hots::hots_solve(&vec![0.0; a.n()], &a, &cfg)?;
        let f = hots::primal_flow(&s.p, &a, &cfg)?;
        Ok(Verification {
            certified: f.max_residual() <= 1e-8,
            bound: None,
            flow: Some(FlowResiduals {
                conservation: f.conservation,
                mass: f.mass,
                to_virtual: f.to_virtual_residual,
                from_virtual: f.from_virtual_residual,
            }),
        })
    }
}

/// Classification from a restricted gradient only, ordering pages by score.
pub fn gradient_report(graph: &LinkGraph, x: &[f64], g: &[f64], scores: &[f64], tol: f64, maximize: bool) -> ThresholdReport {
    let arcs = graph
        .facultative()
        .iter()
        .zip(x.iter().zip(g))
        .map(|(&(i, j), (&weight, &gradient))| ArcReport {
            src: i,
            dst: j,
            weight,
            gradient,
            class: Classification::from_gradient(gradient, tol, maximize),
        })
        .collect();
    let mut order: Vec<(usize, f64)> = scores.iter().copied().enumerate().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ThresholdReport {
        pages: Vec::new(),
        scores: order,
        arcs,
    }
}

/// Dense direct solves behind the adapter interface; no inner iterations.
pub struct DenseStrategy<'a, P>(pub &'a P);

impl<P: JobProblem> ProblemAdapter for DenseStrategy<'_, P> {
    type State = ();

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn maximize(&self) -> bool {
        self.0.maximize()
    }

    fn initial_state(&self) {}

    fn evaluate(&self, x: &[f64], _delta: f64, _start: &(), want_gradient: bool) -> Result<Evaluation<()>> {
        let (value, g) = self.0.dense_evaluate(x)?;
        Ok(Evaluation {
            value,
            gradient: want_gradient.then_some(g),
            inner_steps: 0,
            state: (),
        })
    }

    fn heuristic(&self) -> bool {
        self.0.heuristic()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub strategy: &'static str,
    pub skipped: Option<String>,
    pub status: Option<Status>,
    pub value: Option<f64>,
    /// Matrix assemblies (objective evaluations).
    pub assemblies: usize,
    pub inner_steps: usize,
    pub wall_time: f64,
}

impl BenchRow {
    fn from_run(strategy: &'static str, t: Result<Trajectory>, wall: f64) -> Self {
        match t {
            Ok(t) => Self {
                strategy,
                skipped: None,
                status: Some(t.status),
                value: Some(t.value),
                assemblies: t.evaluations,
                inner_steps: t.total_inner_steps,
                wall_time: wall,
            },
            Err(e) => Self::skipped(strategy, e.to_string()),
        }
    }

    fn skipped(strategy: &'static str, why: String) -> Self {
        Self {
            strategy,
            skipped: Some(why),
            status: None,
            value: None,
            assemblies: 0,
            inner_steps: 0,
            wall_time: 0.0,
        }
    }
}

/// Runs the fixed-precision baseline, then the dense strategy (if `n` fits)
/// and the coupled master loop with target the baseline's terminal value
/// (within `1e-6` relative).
pub fn bench<P: JobProblem>(p: &P, x0: &[f64], cfg: &JobConfig) -> Vec<BenchRow> {
    let tol = cfg.master.tol;
    let cap = cfg.master.outer_cap;
    let t0 = Instant::now();
    let fixed = fixed_precision_gradient(x0, p, cfg.eps, tol, cap, &cfg.armijo);
    let wall = t0.elapsed().as_secs_f64();
    let target = fixed.as_ref().ok().map(|t| t.value - t.value.abs() * 1e-6 * if p.maximize() { 1.0 } else { -1.0 });
    let mut rows = vec![BenchRow::from_run("fixed-precision", fixed, wall)];
    let n = p.graph().n();
    rows.push(if n > DENSE_CAP {
        BenchRow::skipped("dense-bordered", format!("skipped (size cap n = {n} > {DENSE_CAP})"))
    } else {
        let t0 = Instant::now();
        let t = fixed_precision_gradient(x0, &DenseStrategy(p), cfg.eps, tol, cap, &cfg.armijo);
        BenchRow::from_run("dense-bordered", t, t0.elapsed().as_secs_f64())
    });
    // the target, not the stationarity test, ends the coupled run
    let mp = MasterParams {
        target: target.or(cfg.master.target),
        tol: if target.is_some() { tol * 1e-3 } else { tol },
        ..cfg.master.clone()
    };
    let t0 = Instant::now();
    let t = master_optimize(x0, p, &mp, &cfg.armijo);
    rows.push(BenchRow::from_run("coupled-master", t, t0.elapsed().as_secs_f64()));
    rows
}

#[derive(Debug, Serialize)]
struct RankSummary<'a> {
    command: CommandKind,
    algorithm: Algorithm,
    n: usize,
    status: &'a str,
    #[serde(flatten)]
    ranking: &'a Ranking,
}

#[derive(Debug, Serialize)]
struct OptimizeSummary {
    command: CommandKind,
    algorithm: Algorithm,
    n: usize,
    facultative: usize,
    status: Status,
    heuristic: bool,
    value: f64,
    level: usize,
    records: usize,
    accepted_steps: usize,
    evaluations: usize,
    total_inner_steps: usize,
    displacement: f64,
    threshold_violations: usize,
    rounded_value: f64,
    rounding_gap: f64,
}

#[derive(Debug, Serialize)]
struct RoundSummary {
    command: CommandKind,
    algorithm: Algorithm,
    relaxed_value: f64,
    rounded_value: f64,
    gap: f64,
    active: usize,
}

#[derive(Debug, Serialize)]
struct BenchSummary<'a> {
    command: CommandKind,
    algorithm: Algorithm,
    n: usize,
    flagged: bool,
    rows: Vec<BenchCounters<'a>>,
}

/// Bench row without timings.
#[derive(Debug, Serialize)]
struct BenchCounters<'a> {
    strategy: &'a str,
    skipped: &'a Option<String>,
    status: Option<Status>,
    value: Option<f64>,
    assemblies: usize,
    inner_steps: usize,
}

#[derive(Debug, Serialize)]
struct VerifySummary<'a> {
    command: CommandKind,
    algorithm: Algorithm,
    #[serde(flatten)]
    verification: &'a Verification,
}

fn scores_text(scores: &[f64]) -> String {
    scores.iter().enumerate().map(|(i, s)| format!("{i} {s:e}\n")).collect()
}

fn dispatch<P: JobProblem>(kind: CommandKind, cfg: &JobConfig, p: &P, x: Vec<f64>) -> std::result::Result<Outcome, Failure> {
    let out = cfg.out.as_deref();
    let emit = |name: &str, text: &str| -> Result<()> {
        match out {
            Some(d) => write(d, name, text),
            None => Ok(()),
        }
    };
    let g = p.graph();
    let n = g.n();
    match kind {
        CommandKind::Rank => {
            let (status, code, message, ranking) = match p.rank(&x, cfg.rank_tol) {
                Ok(r) => ("converged", 0, None, r),
                Err(e @ Error::NonConvergence { .. }) => {
                    let r = Ranking {
                        scores: Vec::new(),
                        value: f64::NAN,
                        residual: match e {
                            Error::NonConvergence { residual, .. } => residual,
                            _ => unreachable!(),
                        },
                        iterations: None,
                        eigenvalue: None,
                        theta: None,
                        flow_residual: None,
                    };
                    ("non-convergence", 2, Some(e.to_string()), r)
                }
                Err(e) => return Err(e.into()),
            };
            emit("scores.txt", &scores_text(&ranking.scores))?;
            let summary = to_json(&RankSummary {
                command: kind,
                algorithm: cfg.algorithm,
                n,
                status,
                ranking: &ranking,
            });
            emit("summary.json", &summary)?;
            Ok(Outcome { code, summary, message })
        }
        CommandKind::Optimize => {
            if g.facultative().is_empty() {
                return Err(Failure {
                    code: 1,
                    message: "nothing to optimize: the graph has no facultative arcs".into(),
                });
            }
            let t = match cfg.strategy {
                Strategy::Master => master_optimize(&x, p, &cfg.master, &cfg.armijo)?,
                Strategy::Fixed => fixed_precision_gradient(&x, p, cfg.eps, cfg.master.tol, cfg.master.outer_cap, &cfg.armijo)?,
            };
            let tol = match cfg.strategy {
                Strategy::Master => cfg.master.inner_tol(t.level),
                Strategy::Fixed => cfg.eps,
            };
            let report = p.report(&t.x, tol, cfg.threshold_tol)?;
            let rounding = round_heuristic(&t.x, p, tol)?;
            let ranking = p.rank(&t.x, cfg.rank_tol)?;
            emit("weights.txt", &serialize_weights(g, &WeightVector::new(t.x.clone())?))?;
            emit("scores.txt", &scores_text(&ranking.scores))?;
            emit("trajectory.jsonl", &t.to_jsonl())?;
            emit("thresholds.json", &to_json(&report))?;
            emit("sweep.json", &to_json(&rounding))?;
            let summary = to_json(&OptimizeSummary {
                command: kind,
                algorithm: cfg.algorithm,
                n,
                facultative: g.facultative().len(),
                status: t.status,
                heuristic: t.heuristic,
                value: t.value,
                level: t.level,
                records: t.records.len(),
                accepted_steps: t.accepted().count(),
                evaluations: t.evaluations,
                total_inner_steps: t.total_inner_steps,
                displacement: t.records.last().map_or(f64::NAN, |r| r.displacement),
                threshold_violations: report.violations(0.0).len(),
                rounded_value: rounding.value,
                rounding_gap: rounding.gap,
            });
            emit("summary.json", &summary)?;
            let (code, message) = if t.status.is_success() {
                (0, None)
            } else {
                (2, Some(format!("optimization stopped with status {:?}", t.status)))
            };
            Ok(Outcome { code, summary, message })
        }
        CommandKind::Round => {
            let r = round_heuristic(&x, p, cfg.eps)?;
            emit("weights.txt", &serialize_weights(g, &WeightVector::new(r.x.clone())?))?;
            emit("sweep.json", &to_json(&r))?;
            let summary = to_json(&RoundSummary {
                command: kind,
                algorithm: cfg.algorithm,
                relaxed_value: r.relaxed_value,
                rounded_value: r.value,
                gap: r.gap,
                active: r.x.iter().filter(|&&v| v > 0.0).count(),
            });
            emit("summary.json", &summary)?;
            Ok(Outcome {
                code: 0,
                summary,
                message: None,
            })
        }
        CommandKind::Bench => {
            let rows = bench(p, &x, cfg);
            let flagged = rows.iter().any(|r| match (&r.skipped, r.status) {
                (Some(s), _) => !s.starts_with("skipped"),
                (None, Some(s)) if r.strategy == "coupled-master" => s != Status::TargetReached,
                (None, s) => !s.is_some_and(Status::is_success),
            });
            emit("bench.json", &to_json(&rows))?;
            let summary = to_json(&BenchSummary {
                command: kind,
                algorithm: cfg.algorithm,
                n,
                flagged,
                rows: rows
                    .iter()
                    .map(|r| BenchCounters {
                        strategy: r.strategy,
                        skipped: &r.skipped,
                        status: r.status,
                        value: r.value,
                        assemblies: r.assemblies,
                        inner_steps: r.inner_steps,
                    })
                    .collect(),
            });
            emit("summary.json", &summary)?;
            let mut table = format!("{:<16} {:>22} {:>10} {:>12} {:>10}\n", "strategy", "objective", "assemblies", "inner steps", "time [s]");
            for r in &rows {
                match &r.skipped {
                    Some(s) => table.push_str(&format!("{:<16} {s}\n", r.strategy)),
                    None => table.push_str(&format!(
                        "{:<16} {:>22.15e} {:>10} {:>12} {:>10.3}\n",
                        r.strategy,
                        r.value.unwrap_or(f64::NAN),
                        r.assemblies,
                        r.inner_steps,
                        r.wall_time
                    )),
                }
            }
            Ok(Outcome {
                code: 0,
                summary: format!("{summary}{table}"),
                message: flagged.then(|| "target objective not reached by every strategy".into()),
            })
        }
        CommandKind::Verify => {
            let v = p.verify(&x, cfg.rank_tol)?;
            let summary = to_json(&VerifySummary {
                command: kind,
                algorithm: cfg.algorithm,
                verification: &v,
            });
            emit("summary.json", &summary)?;
            Ok(Outcome {
                code: if v.certified { 0 } else { 2 },
                message: (!v.certified).then(|| "no certificate for the computed solution".into()),
                summary,
            })
        }
    }
}
