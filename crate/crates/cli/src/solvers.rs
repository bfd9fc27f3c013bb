use std::time::Instant;

use clap::{Args, ValueEnum};
use impsearch::dp::{solve_1d_until, solve_ordered_until, Instance1D};
use impsearch::exact::solve_exact_until;
use impsearch::heuristics::{
    solve_greedy_until, solve_tsp_dp_until, solve_uniform_with, BeliefUpdate, GreedyConfig, GreedyRule, TspMode,
    UniformParams,
};
use impsearch::{choose_discretization, Deadline, DiscretizationConfig, Error, ExactLimits, Instance, SolveResult};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Dp1d,
    Ordered,
    TspDp,
    Greedy,
    Uniform,
    Exact,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Dp1d => "dp1d",
            SolverKind::Ordered => "ordered",
            SolverKind::TspDp => "tsp-dp",
            SolverKind::Greedy => "greedy",
            SolverKind::Uniform => "uniform",
            SolverKind::Exact => "exact",
        }
    }

    /// Whether the result depends on the discretization `C`.
    pub fn uses_c(self) -> bool {
        matches!(self, SolverKind::Ordered | SolverKind::TspDp)
    }

    pub fn parse_list(text: &str) -> Result<Vec<SolverKind>, CliError> {
        text.split(',')
            .map(|s| SolverKind::from_str(s.trim(), true).map_err(|e| CliError::usage(format!("solver list: {e}"))))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Ratio,
    MarginalGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UpdateArg {
    #[value(name = "eq6-posterior")]
    NoReportPosterior,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TspModeArg {
    Auto,
    Exact,
    Heuristic,
}

/// Options shared by every command that runs a solver.
#[derive(Debug, Clone, Args)]
pub struct SolverOptions {
    /// Greedy selection score.
    #[arg(long, value_enum, default_value_t = RuleArg::Ratio)]
    pub greedy_rule: RuleArg,
    /// Belief used by greedy between picks.
    #[arg(long, value_enum, default_value_t = UpdateArg::NoReportPosterior)]
    pub greedy_update: UpdateArg,
    /// Path ordering used by tsp-dp and uniform.
    #[arg(long, value_enum, default_value_t = TspModeArg::Auto)]
    pub tsp_mode: TspModeArg,
    /// Budget slack factor of the uniform solver.
    #[arg(long, default_value_t = 0.1)]
    pub uniform_epsilon: f64,
    /// Largest instance the exact solver accepts.
    #[arg(long, default_value_t = 10)]
    pub exact_max_points: usize,
}

impl SolverOptions {
    fn greedy(&self) -> GreedyConfig {
        GreedyConfig {
            rule: match self.greedy_rule {
                RuleArg::Ratio => GreedyRule::Ratio,
                RuleArg::MarginalGain => GreedyRule::MarginalGain,
            },
            update: match self.greedy_update {
                UpdateArg::NoReportPosterior => BeliefUpdate::NoReportPosterior,
                UpdateArg::None => BeliefUpdate::None,
            },
        }
    }

    fn tsp_mode(&self) -> TspMode {
        match self.tsp_mode {
            TspModeArg::Auto => TspMode::Auto,
            TspModeArg::Exact => TspMode::Exact,
            TspModeArg::Heuristic => TspMode::Heuristic,
        }
    }
}

/// How the ordered DPs choose `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Discretization {
    Ticks(u64),
    Epsilon(f64),
}

impl Discretization {
    pub fn resolve(self, instance: &Instance) -> Result<DiscretizationConfig, Error> {
        match self {
            Discretization::Ticks(c) => DiscretizationConfig::new(c),
            Discretization::Epsilon(eps) => DiscretizationConfig::new(choose_discretization(instance, eps)?),
        }
    }
}

pub struct Outcome {
    pub result: Result<SolveResult, Error>,
    pub runtime_ms: f64,
}

/// Runs one solver. `order` is a zero-based permutation for `ordered`;
/// without one the points are taken in index order.
pub fn run(
    kind: SolverKind,
    instance: &Instance,
    options: &SolverOptions,
    disc: Discretization,
    order: Option<&[usize]>,
    deadline: &Deadline,
) -> Outcome {
    let start = Instant::now();
    let result = run_inner(kind, instance, options, disc, order, deadline);
    Outcome {
        result,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

fn run_inner(
    kind: SolverKind,
    instance: &Instance,
    options: &SolverOptions,
    disc: Discretization,
    order: Option<&[usize]>,
    deadline: &Deadline,
) -> Result<SolveResult, Error> {
    match kind {
        SolverKind::Dp1d => {
            let (line, sorted) = Instance1D::from_instance(instance)?;
            let mut r = solve_1d_until(&line, deadline)?;
            // map sorted positions back to the caller's labels
            for v in &mut r.schedule.visits {
                v.point = sorted[v.point];
            }
            let mut mapped = SolveResult::new(instance, r.schedule, "dp1d", r.slack)?;
            mapped.params = r.params;
            Ok(mapped)
        }
        SolverKind::Ordered => {
            let identity: Vec<usize> = (0..instance.len()).collect();
            let order = order.unwrap_or(&identity);
            solve_ordered_until(instance, order, disc.resolve(instance)?, deadline)
        }
        SolverKind::TspDp => solve_tsp_dp_until(instance, disc.resolve(instance)?, options.tsp_mode(), deadline),
        SolverKind::Greedy => solve_greedy_until(instance, options.greedy(), deadline),
        SolverKind::Uniform => {
            let params = UniformParams::from_instance(instance, options.uniform_epsilon)?;
            solve_uniform_with(instance, params, options.tsp_mode())
        }
        SolverKind::Exact => {
            let limits = ExactLimits {
                max_points: options.exact_max_points,
                ..ExactLimits::default()
            };
            solve_exact_until(instance, limits, deadline)
        }
    }
}
