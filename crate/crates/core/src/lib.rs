//! Search planning for a searcher with imperfect sensing looking for a
//! stationary target among a finite set of points.
//!
//! Each point has a prior probability of holding the target, a
//! false-negative rate, an optional false-positive rate and an integer
//! search cost. Moving between points takes their Euclidean distance in
//! time. Solvers pick which points to visit, in which order and how often
//! to search each, maximizing the chance of detecting the target within the
//! time budget.
//!
//! - [`model`]: instances, schedules, weights and detection probability.
//! - [`belief`]: posterior beliefs after a sequence of reports.
//! - [`dp`]: exact dynamic programs for points on a line and for a fixed
//!   visiting order.
//! - [`heuristics`]: path-ordering DP, greedy and uniform-prior solvers.
//! - [`exact`]: exhaustive solver for small instances.
//! - [`instances`]: file formats, benchmark conversion, random instances.
//! - [`simulator`]: Monte Carlo execution of schedules.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belief;
pub mod deadline;
pub mod dp;
pub mod error;
pub mod exact;
pub mod heuristics;
pub mod instances;
pub mod model;
pub mod rng;
pub mod simulator;

pub use belief::{
    fast_posterior, one_step_update, posterior_no_false_positive, recursive_posterior, BeliefVector,
    ExecutionTrace, Observation, Report,
};
pub use deadline::Deadline;
pub use dp::{
    choose_discretization, solve_1d, solve_ordered, solve_segment_1d, DiscretizationConfig, DpTableMeta,
    Instance1D,
};
pub use error::{Error, Result};
pub use exact::{solve_exact, verify_reduction, ExactLimits, KnapsackItems};
pub use heuristics::{solve_greedy, solve_tsp_dp, solve_uniform, tsp_order, GreedyConfig, TspMode, UniformParams};
pub use instances::{load_json, save_json, ConversionConfig, InstanceDocument};
pub use model::{
    canonicalize, detection_probability, schedule_weight, validate, Instance, Point, RawSchedule, Schedule,
    SolveResult, Violation, Visit,
};
pub use simulator::{estimate_probability, simulate_once, SimOutcome, SimStats};
