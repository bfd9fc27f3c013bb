//! Monte Carlo execution of schedules.
//!
//! A trial draws the target location from the prior, then walks the
//! schedule: every search of the target's point reports YES with
//! probability `1 - beta_i`, every search elsewhere with probability
//! `alpha_i`. Without false positives a YES ends the trial; with them the
//! trial runs to completion and records whether a YES came from the true
//! location.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::{fast_posterior, recursive_posterior, BeliefVector, ExecutionTrace, Observation, Report};
use crate::error::{Error, Result};
use crate::model::{Instance, Schedule};
use crate::rng::stream;

/// Tolerance for the agreement check in [`replay_posterior`].
const REPLAY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub target: usize,
    pub detected: bool,
    /// Zero-based index, among all searches performed, of the first YES at
    /// the target.
    pub detection_step: Option<u64>,
    pub trace: ExecutionTrace,
    pub observations: Vec<Observation>,
    pub elapsed_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub trials: u64,
    pub detections: u64,
    pub p_hat: f64,
    pub std_err: f64,
}

impl SimStats {
    pub fn from_counts(trials: u64, detections: u64) -> Self {
        let p_hat = detections as f64 / trials as f64;
        SimStats {
            trials,
            detections,
            p_hat,
            std_err: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
        }
    }
}

/// Aggregate of many trials: detection statistics and, over the trials that
/// missed, how often the target sat at each point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub stats: SimStats,
    pub miss_targets: Vec<u64>,
}

fn check_schedule(instance: &Instance, schedule: &Schedule) -> Result<()> {
    for v in &schedule.visits {
        if v.point >= instance.len() {
            return Err(Error::IndexOutOfRange { index: v.point, n: instance.len() });
        }
    }
    Ok(())
}

fn sample_target<R: Rng + ?Sized>(priors: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in priors.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver above the cumulative sum
    priors.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

pub fn simulate_once<R: Rng + ?Sized>(instance: &Instance, schedule: &Schedule, rng: &mut R) -> Result<SimOutcome> {
    check_schedule(instance, schedule)?;
    let target = sample_target(&instance.priors, rng);
    let stop_on_yes = !instance.has_false_positives();
    let mut outcome = SimOutcome {
        target,
        detected: false,
        detection_step: None,
        trace: ExecutionTrace::zeros(instance.len()),
        observations: Vec::new(),
        elapsed_time: 0.0,
    };
    let mut step = 0u64;
    let mut prev: Option<usize> = None;
    'visits: for v in &schedule.visits {
        let i = v.point;
        if let Some(p) = prev {
            outcome.elapsed_time += instance.distance(p, i);
        }
        prev = Some(i);
        for _ in 0..v.searches {
            outcome.elapsed_time += instance.search_costs[i] as f64;
            let u: f64 = rng.random();
            let yes = if i == target {
                u >= instance.false_negative[i]
            } else {
                u < instance.false_positive[i]
            };
            let obs = Observation::new(i, if yes { Report::Yes } else { Report::No });
            outcome.trace.record(obs)?;
            outcome.observations.push(obs);
            if yes && i == target && !outcome.detected {
                outcome.detected = true;
                outcome.detection_step = Some(step);
                if stop_on_yes {
                    break 'visits;
                }
            }
            step += 1;
        }
    }
    Ok(outcome)
}

/// Runs `trials` independent trials, trial `k` on stream `k` of `seed`.
pub fn run_trials(instance: &Instance, schedule: &Schedule, trials: u64, seed: u64) -> Result<TrialSummary> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    check_schedule(instance, schedule)?;
    let n = instance.len();
    let (detections, miss_targets) = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let out = simulate_once(instance, schedule, &mut rng)?;
            let mut misses = vec![0u64; n];
            if !out.detected {
                misses[out.target] += 1;
            }
            Ok::<_, Error>((u64::from(out.detected), misses))
        })
        .try_reduce(
            || (0u64, vec![0u64; n]),
            |(d1, mut m1), (d2, m2)| {
                for (a, b) in m1.iter_mut().zip(m2) {
                    *a += b;
                }
                Ok((d1 + d2, m1))
            },
        )?;
    Ok(TrialSummary {
        stats: SimStats::from_counts(trials, detections),
        miss_targets,
    })
}

pub fn estimate_probability(instance: &Instance, schedule: &Schedule, trials: u64, seed: u64) -> Result<SimStats> {
    Ok(run_trials(instance, schedule, trials, seed)?.stats)
}

/// Pearson statistic of `observed` counts against `expected` probabilities,
/// with its degrees of freedom. Cells with zero expectation must be empty
/// and are skipped.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> Result<(f64, usize)> {
    if observed.len() != expected.len() {
        return Err(Error::InvalidArgument("observed and expected lengths differ".into()));
    }
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &e) in observed.iter().zip(expected) {
        let e = e * total as f64;
        if e <= 0.0 {
            if o > 0 {
                return Err(Error::InvalidArgument("count observed in a cell of zero probability".into()));
            }
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    Ok((stat, cells.saturating_sub(1)))
}

/// Posterior after replaying `observations` one by one, cross-checked
/// against the count-based closed form.
pub fn replay_posterior(instance: &Instance, observations: &[Observation]) -> Result<BeliefVector> {
    let alpha = &instance.false_positive;
    let beta = &instance.false_negative;
    let stepwise = recursive_posterior(&instance.priors, observations, alpha, beta)?;
    let trace = ExecutionTrace::from_observations(instance.len(), observations)?;
    let closed = fast_posterior(&instance.priors, &trace, alpha, beta)?;
    let diff = stepwise.max_abs_diff(&closed);
    if diff > REPLAY_TOL {
        return Err(Error::InvalidArgument(format!(
            "stepwise and closed-form posteriors disagree by {diff}"
        )));
    }
    Ok(stepwise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::posterior_no_false_positive;
    use crate::model::{schedule_weight, Point, Visit};
    use rand::seq::SliceRandom;

    fn running() -> Instance {
        Instance::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![0.6, 0.4],
            vec![0.5, 0.5],
            vec![1, 1],
            3.0,
        )
        .unwrap()
    }

    #[test]
    fn perfect_searcher_always_detects() {
        let inst = Instance::new(
            (0..4).map(|i| Point::new(i as f64, 0.0)).collect(),
            vec![0.1, 0.2, 0.3, 0.4],
            vec![0.0; 4],
            vec![1; 4],
            10.0,
        )
        .unwrap();
        let sched = Schedule::new((0..4).map(|i| Visit::new(i, 1)).collect());
        let s = estimate_probability(&inst, &sched, 2000, 1).unwrap();
        assert_eq!(s.detections, 2000);
        assert_eq!(s.std_err, 0.0);
    }

    #[test]
    fn hopeless_searcher_never_detects() {
        let inst = Instance::new(vec![Point::new(0.0, 0.0)], vec![1.0], vec![1.0 - 1e-15], vec![1], 10.0).unwrap();
        let sched = Schedule::new(vec![Visit::new(0, 5)]);
        let s = estimate_probability(&inst, &sched, 5000, 2).unwrap();
        assert_eq!(s.detections, 0);
    }

    #[test]
    fn detections_only_at_the_target() {
        let inst = running();
        let sched = Schedule::new(vec![Visit::new(0, 2), Visit::new(1, 1)]);
        let mut rng = stream(3, 0);
        for _ in 0..500 {
            let out = simulate_once(&inst, &sched, &mut rng).unwrap();
            if let Some(step) = out.detection_step {
                let searched = out.observations[step as usize].point;
                assert_eq!(searched, out.target);
                assert_eq!(out.observations.len() as u64, step + 1);
            } else {
                assert!((out.elapsed_time - schedule_weight(&inst, &sched).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn two_searches_single_point() {
        let inst = Instance::new(vec![Point::new(0.0, 0.0)], vec![1.0], vec![0.5], vec![1], 2.0).unwrap();
        let sched = Schedule::new(vec![Visit::new(0, 2)]);
        let s = estimate_probability(&inst, &sched, 100_000, 42).unwrap();
        assert!((s.p_hat - 0.75).abs() <= 3.0 * s.std_err, "{s:?}");
        assert_eq!(s, estimate_probability(&inst, &sched, 100_000, 42).unwrap());
        let one = estimate_probability(&inst, &sched, 1, 42).unwrap();
        assert!(one.p_hat == 0.0 || one.p_hat == 1.0);
    }

    #[test]
    fn false_alarms_do_not_stop_the_run() {
        let inst = Instance::with_false_positives(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![0.5, 0.5],
            vec![0.3, 0.3],
            vec![0.9, 0.9],
            vec![1, 1],
            10.0,
        )
        .unwrap();
        let sched = Schedule::new(vec![Visit::new(0, 3), Visit::new(1, 3)]);
        let mut rng = stream(8, 0);
        for _ in 0..200 {
            let out = simulate_once(&inst, &sched, &mut rng).unwrap();
            assert_eq!(out.trace.steps(), 6);
            assert!((out.elapsed_time - 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn miss_distribution_matches_the_no_posterior() {
        let inst = running();
        let sched = Schedule::new(vec![Visit::new(0, 2), Visit::new(1, 1)]);
        let summary = run_trials(&inst, &sched, 50_000, 5).unwrap();
        let post = posterior_no_false_positive(&inst.priors, &inst.false_negative, &[2, 1]).unwrap();
        let (stat, dof) = chi_square(&summary.miss_targets, &post.mass).unwrap();
        assert_eq!(dof, 1);
        // 99.99th percentile of chi-square with one degree of freedom
        assert!(stat < 15.14, "chi-square {stat}");
    }

    #[test]
    fn replay_examples() {
        let inst = running();
        let obs = [Observation::no(0), Observation::no(0)];
        let b = replay_posterior(&inst, &obs).unwrap();
        assert!((b.mass[0] - 0.15 / 0.55).abs() < 1e-15);
        assert_eq!(replay_posterior(&inst, &[]).unwrap().mass, inst.priors);

        let even = Instance::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            vec![1, 1],
            3.0,
        )
        .unwrap();
        let b = replay_posterior(&even, &[Observation::no(0)]).unwrap();
        assert!((b.mass[0] - 1.0 / 3.0).abs() < 1e-15 && (b.mass[1] - 2.0 / 3.0).abs() < 1e-15);

        let inst = Instance::with_false_positives(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            vec![0.2, 0.3, 0.5],
            vec![0.4, 0.2, 0.3],
            vec![0.1, 0.05, 0.2],
            vec![1, 1, 1],
            10.0,
        )
        .unwrap();
        let mut obs: Vec<Observation> = [0, 1, 2, 0, 2, 2, 1]
            .iter()
            .enumerate()
            .map(|(k, &i)| if k % 3 == 0 { Observation::yes(i) } else { Observation::no(i) })
            .collect();
        let base = replay_posterior(&inst, &obs).unwrap();
        let mut rng = stream(1, 1);
        for _ in 0..20 {
            obs.shuffle(&mut rng);
            assert!(replay_posterior(&inst, &obs).unwrap().max_abs_diff(&base) < 1e-12);
        }
    }
}
