//! The `polarize` command-line tool.
//!
//! Every command prints its primary result to stdout. With `--out DIR` it
//! instead writes all of its files into `DIR` together with a
//! `manifest.json` describing the run.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::control_opinion::{AttackAlgorithm, AttackObjective};
use crate::error::Error;
use crate::metrics::{MetricMatrixKind, MetricRoute};

#[derive(Debug, Parser)]
#[command(name = "polarize", version, about = "Opinion dynamics, polarization and disagreement")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, env = "POLARIZE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write outputs and a manifest into this directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium opinions, optionally with the step-by-step trajectory.
    Simulate(SimulateArgs),
    /// Polarization, disagreement and their index.
    Metrics(MetricsArgs),
    /// Compare a graph that links like-minded nodes with one that links across.
    DemoEcho,
    /// Opinion dynamics with an administrator that re-weights edges.
    Admin(AdminArgs),
    /// Choose nodes whose opinions to push to an extreme.
    Attack(AttackArgs),
    /// Structure and opinion optimization problems.
    #[command(subcommand)]
    Optimize(OptimizeCommand),
    /// Synthetic graphs and opinions.
    #[command(subcommand)]
    Generate(GenerateCommand),
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Edge list: `n=<count>` header then `i,j,w` rows.
    #[arg(long)]
    pub graph: PathBuf,
    /// Opinion CSV with an `index,value` header.
    #[arg(long)]
    pub opinions: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Stop iterating once no opinion moves by more than this.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Also record every step of the iteration, starting from z(0) = s.
    #[arg(long)]
    pub trajectory: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    FromZ,
    FromSbar,
    FromS,
    All,
}

impl RouteArg {
    pub fn routes(self) -> Vec<MetricRoute> {
        match self {
            RouteArg::FromZ => vec![MetricRoute::FromZ],
            RouteArg::FromSbar => vec![MetricRoute::FromSbar],
            RouteArg::FromS => vec![MetricRoute::FromS],
            RouteArg::All => MetricRoute::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Weight of disagreement in the index.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, value_enum, default_value_t = RouteArg::FromZ)]
    pub route: RouteArg,
    /// Also report the average-case conflict risk of the graph.
    #[arg(long)]
    pub acr: bool,
}

#[derive(Debug, Args)]
pub struct AdminArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Relative Frobenius budgets; comma-separated for a sweep.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub epsilon: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub rounds: usize,
    /// Worker threads for the sweep.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    BruteForce,
    Greedy,
    MeanOpinion,
    MaxConnection,
    MaxDegree,
    All,
}

impl AlgorithmArg {
    pub fn algorithms(self) -> Vec<AttackAlgorithm> {
        match self {
            AlgorithmArg::BruteForce => vec![AttackAlgorithm::BruteForce],
            AlgorithmArg::Greedy => vec![AttackAlgorithm::Greedy],
            AlgorithmArg::MeanOpinion => vec![AttackAlgorithm::MeanOpinion],
            AlgorithmArg::MaxConnection => vec![AttackAlgorithm::MaxConnection],
            AlgorithmArg::MaxDegree => vec![AttackAlgorithm::MaxDegree],
            AlgorithmArg::All => AttackAlgorithm::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Polarization,
    Disagreement,
}

impl From<ObjectiveArg> for AttackObjective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Polarization => AttackObjective::Polarization,
            ObjectiveArg::Disagreement => AttackObjective::Disagreement,
        }
    }
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Number of targets.
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Polarization)]
    pub objective: ObjectiveArg,
    /// `all` skips brute force when it would exceed its enumeration limit.
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Greedy)]
    pub algorithm: AlgorithmArg,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    /// Stop once one projected-gradient step moves less than this.
    #[arg(long, default_value_t = 1e-10)]
    pub grad_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Polarization,
    Disagreement,
    Pdi,
}

impl From<KindArg> for MetricMatrixKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Polarization => MetricMatrixKind::Polarization,
            KindArg::Disagreement => MetricMatrixKind::Disagreement,
            KindArg::Pdi => MetricMatrixKind::Pdi,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum OptimizeCommand {
    /// Best graph for given opinions at a fixed total edge weight.
    PdiLaplacian {
        #[arg(long)]
        opinions: PathBuf,
        /// Laplacian trace, twice the total edge weight.
        #[arg(long)]
        m: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Lower the average-case conflict risk within a one-norm edit budget.
    Acr {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = KindArg::Pdi)]
        kind: KindArg,
        /// Entrywise one-norm budget on the adjacency change.
        #[arg(long)]
        k: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Lower internal opinions within a total budget to reduce the index.
    Shift {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphModel {
    Random,
    TwoCommunity,
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpinionDist {
    Uniform,
    PowerLaw,
    TwoCamp,
}

#[derive(Debug, Subcommand)]
pub enum GenerateCommand {
    Graph {
        #[arg(long, value_enum)]
        model: GraphModel,
        #[arg(long)]
        n: usize,
        /// Edge probability for the random model.
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 0.3)]
        p_in: f64,
        #[arg(long, default_value_t = 0.05)]
        p_out: f64,
        /// Edges added per node in the power-law model.
        #[arg(long, default_value_t = 2)]
        attach: usize,
        #[arg(long, default_value_t = 1.0)]
        wlo: f64,
        #[arg(long, default_value_t = 1.0)]
        whi: f64,
    },
    Opinions {
        #[arg(long, value_enum)]
        dist: OpinionDist,
        #[arg(long)]
        n: usize,
        /// Pareto shape for the power-law distribution.
        #[arg(long, default_value_t = 2.0)]
        shape: f64,
        /// Boundary between the two camps.
        #[arg(long, default_value_t = 0.5)]
        split: f64,
    },
}

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("{path}: {source}")]
    Parse { path: String, source: Error },
    #[error("{path}: {message}")]
    Write { path: String, message: String },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } => 2,
            CliError::Write { .. } => 5,
            CliError::Check(_) => 5,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::MalformedLine { .. }
        | Error::NegativeWeight { .. }
        | Error::SelfLoop(_)
        | Error::DuplicateEdge(..) => 2,
        Error::MaxIterationsExceeded(_)
        | Error::NoConvergence(_)
        | Error::NonFiniteObjective
        | Error::SolverFailure(_) => 4,
        Error::BoundViolated { .. } => 5,
        _ => 3,
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
