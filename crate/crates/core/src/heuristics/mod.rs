//! Polynomial-time solvers for the general planar problem.

mod greedy;
pub mod tsp;
mod uniform;

pub use greedy::{solve_greedy, solve_greedy_until, BeliefUpdate, GreedyConfig, GreedyRule};
pub use tsp::{tsp_order, TourOrdering, TspMode};
pub use uniform::{allocate_equal, solve_uniform, solve_uniform_with, UniformParams};

use crate::deadline::Deadline;
use crate::dp::{solve_ordered_until, DiscretizationConfig};
use crate::error::{Error, Result};
use crate::model::{Instance, SolveResult};

/// Orders the points along a short open path, then runs the ordered DP on
/// that ordering and on its reverse, keeping the better result.
pub fn solve_tsp_dp(instance: &Instance, config: DiscretizationConfig, mode: TspMode) -> Result<SolveResult> {
    solve_tsp_dp_until(instance, config, mode, &Deadline::none())
}

/// Like [`solve_tsp_dp`]. If time runs out after the forward pass, the
/// timeout error carries the forward result.
pub fn solve_tsp_dp_until(
    instance: &Instance,
    config: DiscretizationConfig,
    mode: TspMode,
    deadline: &Deadline,
) -> Result<SolveResult> {
    let tour = tsp_order(&instance.points, mode)?;
    let forward = solve_ordered_until(instance, &tour.order, config, deadline)?;
    let reversed: Vec<usize> = tour.order.iter().rev().copied().collect();
    let label = |r: SolveResult, direction: &str| {
        let mut r = r
            .with_param("direction", direction)
            .with_param("path_length", tour.path_length)
            .with_param("tsp_mode", format!("{:?}", mode.resolve(instance.len())).to_lowercase());
        r.solver_name = "tsp-dp".to_string();
        r
    };
    match solve_ordered_until(instance, &reversed, config, deadline) {
        Ok(backward) if backward.probability > forward.probability => Ok(label(backward, "reverse")),
        Ok(_) => Ok(label(forward, "forward")),
        Err(Error::TimedOut { .. }) => Err(Error::TimedOut {
            best: Some(Box::new(label(forward, "forward"))),
        }),
        Err(e) => Err(e),
    }
}
