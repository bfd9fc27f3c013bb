use serde::{Deserialize, Serialize};

use crate::belief::posterior_no_false_positive;
use crate::deadline::Deadline;
use crate::error::{Error, Result};
use crate::model::{canonicalize, Instance, RawSchedule, SolveResult, FEASIBILITY_TOL};

/// Score of searching a point next, before dividing by the time it takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GreedyRule {
    /// `beta_i * p_i` with `p` the current belief.
    #[default]
    Ratio,
    /// Exact gain in detection probability of one more search:
    /// `(1 - beta_i) * beta_i^s_i * prior_i`.
    MarginalGain,
}

/// How the belief evolves between picks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BeliefUpdate {
    /// Posterior assuming every search so far reported NO.
    #[default]
    #[serde(rename = "eq6-posterior")]
    NoReportPosterior,
    /// Keep the prior.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub rule: GreedyRule,
    pub update: BeliefUpdate,
}

/// Repeatedly searches the affordable point with the best score per unit
/// of time (search cost plus travel from the current position).
///
/// Ties go to the higher belief per unit time, then to the smaller index.
pub fn solve_greedy(instance: &Instance, config: GreedyConfig) -> Result<SolveResult> {
    solve_greedy_until(instance, config, &Deadline::none())
}

pub fn solve_greedy_until(instance: &Instance, config: GreedyConfig, deadline: &Deadline) -> Result<SolveResult> {
    if instance.has_false_positives() {
        return Err(Error::InvalidArgument("greedy solver assumes no false positives".into()));
    }
    let n = instance.len();
    let beta = &instance.false_negative;
    let mut belief = instance.priors.clone();
    let mut counts = vec![0u64; n];
    let mut remaining = instance.budget;
    let mut position: Option<usize> = None;
    let mut steps = Vec::new();

    let finish = |steps: &[usize]| -> Result<SolveResult> {
        let schedule = canonicalize(instance, &RawSchedule::new(steps.to_vec()))?;
        Ok(SolveResult::new(instance, schedule, "greedy", 0.0)?
            .with_param("rule", format!("{:?}", config.rule).to_lowercase())
            .with_param("update", format!("{:?}", config.update)))
    };

    loop {
        if deadline.expired() {
            return Err(Error::TimedOut {
                best: Some(Box::new(finish(&steps)?)),
            });
        }
        let mut pick: Option<(usize, f64, f64, f64)> = None;
        for i in 0..n {
            let time = instance.search_costs[i] as f64 + position.map_or(0.0, |r| instance.distance(r, i));
            if time > remaining + FEASIBILITY_TOL {
                continue;
            }
            let score = match config.rule {
                GreedyRule::Ratio => beta[i] * belief[i],
                GreedyRule::MarginalGain => {
                    (1.0 - beta[i]) * beta[i].powi(counts[i] as i32) * instance.priors[i]
                }
            } / time;
            let tie = belief[i] / time;
            let better = match pick {
                None => true,
                Some((_, s, t, _)) => score > s || (score == s && tie > t),
            };
            if better {
                pick = Some((i, score, tie, time));
            }
        }
        let Some((i, _, _, time)) = pick else {
            break;
        };
        if position != Some(i) {
            steps.push(i);
        }
        steps.push(i);
        remaining -= time;
        counts[i] += 1;
        position = Some(i);
        if config.update == BeliefUpdate::NoReportPosterior {
            match posterior_no_false_positive(&instance.priors, beta, &counts) {
                Ok(post) => belief = post.mass,
                // every location has been searched out by a perfect searcher
                Err(Error::Contradictory(_)) => break,
                Err(e) => return Err(e),
            }
        }
    }
    finish(&steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Point, Visit};

    fn running_instance(budget: f64) -> Instance {
        Instance::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![0.6, 0.4],
            vec![0.5, 0.5],
            vec![1, 1],
            budget,
        )
        .unwrap()
    }

    #[test]
    fn hand_trace_of_running_example() {
        let r = solve_greedy(&running_instance(3.0), GreedyConfig::default()).unwrap();
        assert_eq!(r.schedule.visits, vec![Visit::new(0, 3)]);
        assert!((r.probability - 0.525).abs() < 1e-15);
    }

    #[test]
    fn unaffordable_first_search() {
        let r = solve_greedy(&running_instance(0.5), GreedyConfig::default()).unwrap();
        assert!(r.schedule.is_empty());
        assert_eq!(r.probability, 0.0);
    }

    #[test]
    fn perfect_searcher_falls_back_to_belief_per_time() {
        let inst = Instance::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            vec![0.2, 0.5, 0.3],
            vec![0.0; 3],
            vec![1, 1, 1],
            3.0,
        )
        .unwrap();
        let r = solve_greedy(&inst, GreedyConfig::default()).unwrap();
        // zero ratios everywhere: v1 on prior, then v2 (posterior 0.6 vs 0.4, same travel)
        assert_eq!(r.schedule.visits[0], Visit::new(1, 1));
        assert_eq!(r.schedule.visits[1], Visit::new(2, 1));
        assert!((r.probability - 0.8).abs() < 1e-15);
    }

    #[test]
    fn stops_once_everything_is_ruled_out() {
        let inst = Instance::new(vec![Point::new(0.0, 0.0)], vec![1.0], vec![0.0], vec![1], 10.0).unwrap();
        let r = solve_greedy(&inst, GreedyConfig::default()).unwrap();
        assert_eq!(r.schedule.visits, vec![Visit::new(0, 1)]);
    }

    #[test]
    fn marginal_gain_rule_and_frozen_belief() {
        let cfg = GreedyConfig {
            rule: GreedyRule::MarginalGain,
            update: BeliefUpdate::None,
        };
        let r = solve_greedy(&running_instance(3.0), cfg).unwrap();
        assert!(r.probability > 0.0);
        assert!(r.violations(&running_instance(3.0), 1e-9).is_empty());
    }

    #[test]
    fn false_positives_rejected() {
        let inst = Instance::with_false_positives(
            vec![Point::new(0.0, 0.0)],
            vec![1.0],
            vec![0.5],
            vec![0.1],
            vec![1],
            3.0,
        )
        .unwrap();
        assert!(solve_greedy(&inst, GreedyConfig::default()).is_err());
    }
}
