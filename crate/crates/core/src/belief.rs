//! Posterior beliefs over the target location after executing a schedule.
//!
//! The posterior depends only on how many YES and NO reports each point
//! produced, not on their order. [`fast_posterior`] uses this to evaluate
//! the final belief from the per-point counts with repeated squaring, while
//! [`recursive_posterior`] is the step-by-step Bayes update kept as a
//! reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Report {
    /// The searcher reported the target as present.
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub point: usize,
    pub report: Report,
}

impl Observation {
    pub fn new(point: usize, report: Report) -> Self {
        Observation { point, report }
    }

    pub fn yes(point: usize) -> Self {
        Observation::new(point, Report::Yes)
    }

    pub fn no(point: usize) -> Self {
        Observation::new(point, Report::No)
    }
}

/// Per-point counts of YES and NO reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub yes_counts: Vec<u64>,
    pub no_counts: Vec<u64>,
}

impl ExecutionTrace {
    pub fn new(yes_counts: Vec<u64>, no_counts: Vec<u64>) -> Result<Self> {
        if yes_counts.len() != no_counts.len() {
            return Err(Error::InvalidArgument(format!(
                "trace has {} yes counts but {} no counts",
                yes_counts.len(),
                no_counts.len()
            )));
        }
        Ok(ExecutionTrace { yes_counts, no_counts })
    }

    pub fn zeros(n: usize) -> Self {
        ExecutionTrace {
            yes_counts: vec![0; n],
            no_counts: vec![0; n],
        }
    }

    pub fn from_observations(n: usize, observations: &[Observation]) -> Result<Self> {
        let mut trace = ExecutionTrace::zeros(n);
        for obs in observations {
            trace.record(*obs)?;
        }
        Ok(trace)
    }

    pub fn record(&mut self, obs: Observation) -> Result<()> {
        let n = self.len();
        let slot = match obs.report {
            Report::Yes => self.yes_counts.get_mut(obs.point),
            Report::No => self.no_counts.get_mut(obs.point),
        };
        *slot.ok_or(Error::IndexOutOfRange { index: obs.point, n })? += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.yes_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.yes_counts.is_empty()
    }

    /// Total number of searches recorded.
    pub fn steps(&self) -> u64 {
        self.yes_counts.iter().chain(&self.no_counts).sum()
    }

    /// One observation sequence realizing this trace: all searches of the
    /// first point (YES reports first), then the second point, and so on.
    pub fn to_observations(&self) -> Vec<Observation> {
        let mut out = Vec::with_capacity(self.steps() as usize);
        for i in 0..self.len() {
            out.extend(std::iter::repeat_n(Observation::yes(i), self.yes_counts[i] as usize));
            out.extend(std::iter::repeat_n(Observation::no(i), self.no_counts[i] as usize));
        }
        out
    }
}

/// Posterior probability mass over the points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefVector {
    pub mass: Vec<f64>,
    /// Set once a YES report arrived from a point with no false positives,
    /// which pins the target there with certainty.
    pub collapsed: bool,
}

impl BeliefVector {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidArgument("belief over zero points".into()));
        }
        if let Some((i, p)) = mass.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidArgument(format!("mass[{i}] = {p} is not a probability")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("belief sums to {total}")));
        }
        Ok(BeliefVector { mass, collapsed: false })
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Largest absolute difference between two beliefs of equal length.
    pub fn max_abs_diff(&self, other: &BeliefVector) -> f64 {
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_rates(n: usize, alpha: &[f64], beta: &[f64]) -> Result<()> {
    if alpha.len() != n || beta.len() != n {
        return Err(Error::InvalidArgument(format!(
            "expected {n} error rates, found {} false-positive and {} false-negative",
            alpha.len(),
            beta.len()
        )));
    }
    for (i, &r) in alpha.iter().chain(beta).enumerate() {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidArgument(format!("error rate #{i} = {r} is outside [0, 1)")));
        }
    }
    Ok(())
}

/// Bayes update of `belief` after one search.
pub fn one_step_update(
    belief: &BeliefVector,
    obs: Observation,
    alpha: &[f64],
    beta: &[f64],
) -> Result<BeliefVector> {
    let n = belief.len();
    check_rates(n, alpha, beta)?;
    let i = obs.point;
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let p = &belief.mass;
    let (here, elsewhere) = likelihoods(obs, alpha, beta);
    // mass off point i; equals 1 - p_i for a normalized belief
    let rest: f64 = p.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &q)| q).sum();
    let denom = here * p[i] + elsewhere * rest;
    if !(denom > 0.0) {
        return Err(Error::Contradictory(format!(
            "{:?} report at point {i} has zero probability under the current belief",
            obs.report
        )));
    }
    let mass = p
        .iter()
        .enumerate()
        .map(|(j, &q)| if j == i { here * q / denom } else { elsewhere * q / denom })
        .collect();
    Ok(BeliefVector {
        mass,
        collapsed: belief.collapsed || (obs.report == Report::Yes && alpha[i] == 0.0),
    })
}

/// Likelihood of the report if the target is at the searched point, and if
/// it is elsewhere.
fn likelihoods(obs: Observation, alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let i = obs.point;
    match obs.report {
        Report::Yes => (1.0 - beta[i], alpha[i]),
        Report::No => (beta[i], 1.0 - alpha[i]),
    }
}

/// Applies the update of [`one_step_update`] once per observation, in
/// order, at O(n) each. Masses are carried unnormalized on a
/// mantissa/exponent scale: in plain floats a long run of reports can
/// underflow a hypothesis to zero, from which later reports can never
/// revive it.
pub fn recursive_posterior(
    priors: &[f64],
    observations: &[Observation],
    alpha: &[f64],
    beta: &[f64],
) -> Result<BeliefVector> {
    let n = priors.len();
    BeliefVector::new(priors.to_vec())?;
    check_rates(n, alpha, beta)?;
    let mut mass: Vec<Scaled> = priors.iter().map(|&p| Scaled::from_f64(p)).collect();
    let mut collapsed = false;
    for &obs in observations {
        let i = obs.point;
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let (here, elsewhere) = likelihoods(obs, alpha, beta);
        let (here, elsewhere) = (Scaled::from_f64(here), Scaled::from_f64(elsewhere));
        for (j, m) in mass.iter_mut().enumerate() {
            *m = m.mul(if j == i { here } else { elsewhere });
        }
        if mass.iter().all(|m| m.is_zero()) {
            return Err(Error::Contradictory(format!(
                "{:?} report at point {i} has zero probability under the current belief",
                obs.report
            )));
        }
        collapsed |= obs.report == Report::Yes && alpha[i] == 0.0;
    }
    let mass = Scaled::normalize(&mass).expect("some mass is nonzero");
    Ok(BeliefVector { mass, collapsed })
}

/// Final belief from the per-point report counts.
///
/// With `a_i`/`b_i` the YES/NO counts, point `i` contributes the likelihood
/// `(1-beta_i)^a_i * beta_i^b_i` if the target is there, and
/// `alpha_i^a_i * (1-alpha_i)^b_i` otherwise. The unnormalized posterior of
/// point `i` is its own "present" likelihood times the "absent" likelihood
/// of every other point. Leave-one-out products come from prefix and
/// suffix products, so zero factors need no division. Powers are taken by
/// repeated squaring on a mantissa/exponent pair so long traces neither
/// underflow nor lose relative precision.
pub fn fast_posterior(
    priors: &[f64],
    trace: &ExecutionTrace,
    alpha: &[f64],
    beta: &[f64],
) -> Result<BeliefVector> {
    let n = priors.len();
    BeliefVector::new(priors.to_vec())?;
    check_rates(n, alpha, beta)?;
    if trace.len() != n {
        return Err(Error::InvalidArgument(format!("trace covers {} points, expected {n}", trace.len())));
    }

    let absent: Vec<Scaled> = (0..n)
        .map(|i| {
            Scaled::pow(alpha[i], trace.yes_counts[i]).mul(Scaled::pow(1.0 - alpha[i], trace.no_counts[i]))
        })
        .collect();
    let present = (0..n).map(|i| {
        Scaled::pow(1.0 - beta[i], trace.yes_counts[i]).mul(Scaled::pow(beta[i], trace.no_counts[i]))
    });

    let mut suffix = vec![Scaled::ONE; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1].mul(absent[i]);
    }
    let mut prefix = Scaled::ONE;
    let mut numerators = Vec::with_capacity(n);
    for (i, here) in present.enumerate() {
        numerators.push(prefix.mul(suffix[i + 1]).mul(here).mul(Scaled::from_f64(priors[i])));
        prefix = prefix.mul(absent[i]);
    }

    let mass = Scaled::normalize(&numerators).ok_or_else(|| {
        Error::Contradictory("every location is ruled out by the recorded reports".into())
    })?;
    let collapsed = (0..n).any(|i| trace.yes_counts[i] > 0 && alpha[i] == 0.0);
    Ok(BeliefVector { mass, collapsed })
}

/// Posterior when the searcher has no false positives and every report so
/// far was NO: `beta_i^b_i * p_i`, normalized.
pub fn posterior_no_false_positive(priors: &[f64], beta: &[f64], no_counts: &[u64]) -> Result<BeliefVector> {
    let n = priors.len();
    if beta.len() != n || no_counts.len() != n {
        return Err(Error::InvalidArgument(format!(
            "expected {n} false-negative rates and counts, found {} and {}",
            beta.len(),
            no_counts.len()
        )));
    }
    let numerators: Vec<Scaled> = (0..n)
        .map(|i| Scaled::pow(beta[i], no_counts[i]).mul(Scaled::from_f64(priors[i])))
        .collect();
    let mass = Scaled::normalize(&numerators)
        .ok_or_else(|| Error::Contradictory("every location has been ruled out".into()))?;
    Ok(BeliefVector { mass, collapsed: false })
}

/// `base^exp` by repeated squaring.
pub fn pow_by_squaring(base: f64, exp: u64) -> f64 {
    Scaled::pow(base, exp).to_f64()
}

/// Nonnegative real stored as `mantissa * 2^exponent` with the mantissa in
/// [0.5, 1), or zero.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Scaled {
    mantissa: f64,
    exponent: i64,
}

impl Scaled {
    const ONE: Scaled = Scaled { mantissa: 0.5, exponent: 1 };
    const ZERO: Scaled = Scaled { mantissa: 0.0, exponent: 0 };

    fn from_f64(x: f64) -> Scaled {
        debug_assert!(x >= 0.0 && x.is_finite());
        if x == 0.0 {
            return Scaled::ZERO;
        }
        let (x, bias) = if x < f64::MIN_POSITIVE { (x * 2f64.powi(64), -64) } else { (x, 0) };
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        // rewrite the exponent field so the value lands in [0.5, 1)
        let mantissa = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
        Scaled {
            mantissa,
            exponent: raw_exp - 1022 + bias,
        }
    }

    fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    fn mul(self, other: Scaled) -> Scaled {
        if self.is_zero() || other.is_zero() {
            return Scaled::ZERO;
        }
        let mut mantissa = self.mantissa * other.mantissa;
        let mut exponent = self.exponent + other.exponent;
        if mantissa < 0.5 {
            mantissa *= 2.0;
            exponent -= 1;
        }
        Scaled { mantissa, exponent }
    }

    fn pow(base: f64, mut exp: u64) -> Scaled {
        let mut result = Scaled::ONE;
        let mut square = Scaled::from_f64(base);
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(square);
            }
            exp >>= 1;
            if exp > 0 {
                square = square.mul(square);
            }
        }
        result
    }

    fn to_f64(self) -> f64 {
        self.scaled_by(0)
    }

    /// Value times `2^-shift`, as a float.
    fn scaled_by(self, shift: i64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let e = self.exponent - shift;
        if e < -1100 {
            0.0
        } else if e > 1023 {
            f64::INFINITY
        } else {
            // two steps keep every intermediate power of two representable
            let half = e / 2;
            self.mantissa * 2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
        }
    }

    /// Normalizes to a probability vector; `None` when every entry is zero.
    fn normalize(values: &[Scaled]) -> Option<Vec<f64>> {
        let top = values.iter().filter(|v| !v.is_zero()).map(|v| v.exponent).max()?;
        let floats: Vec<f64> = values.iter().map(|v| v.scaled_by(top)).collect();
        let total: f64 = floats.iter().sum();
        Some(floats.into_iter().map(|x| x / total).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF: [f64; 2] = [0.5, 0.5];

    #[test]
    fn no_report_shifts_mass_away() {
        let b = BeliefVector::new(HALF.to_vec()).unwrap();
        let post = one_step_update(&b, Observation::no(0), &[0.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((post.mass[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((post.mass[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!(!post.collapsed);
    }

    #[test]
    fn yes_report_with_false_positives() {
        let b = BeliefVector::new(HALF.to_vec()).unwrap();
        let post = one_step_update(&b, Observation::yes(0), &[0.1, 0.1], &[0.1, 0.1]).unwrap();
        assert!((post.mass[0] - 0.9).abs() < 1e-15);
        assert!((post.mass[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn yes_without_false_positives_is_conclusive() {
        let b = BeliefVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let post = one_step_update(&b, Observation::yes(1), &[0.0; 3], &[0.4; 3]).unwrap();
        assert_eq!(post.mass, vec![0.0, 1.0, 0.0]);
        assert!(post.collapsed);
    }

    #[test]
    fn long_runs_do_not_underflow_a_hypothesis() {
        // 400 YES at each point: symmetric, though halfway point 1 sits near 1e-800
        let mut obs = vec![Observation::yes(0); 400];
        obs.extend(vec![Observation::yes(1); 400]);
        let rates = [0.01, 0.01];
        let post = recursive_posterior(&HALF, &obs, &rates, &rates).unwrap();
        assert!((post.mass[0] - 0.5).abs() < 1e-12, "{:?}", post.mass);
        let trace = ExecutionTrace::from_observations(2, &obs).unwrap();
        assert!(post.max_abs_diff(&fast_posterior(&HALF, &trace, &rates, &rates).unwrap()) < 1e-12);
    }

    #[test]
    fn impossible_report_is_contradictory() {
        let b = BeliefVector::new(vec![0.0, 1.0]).unwrap();
        let r = one_step_update(&b, Observation::yes(0), &[0.0, 0.0], &[0.5, 0.5]);
        assert!(matches!(r, Err(Error::Contradictory(_))));
    }

    #[test]
    fn recursive_identity_and_single_step() {
        let alpha = [0.1, 0.2];
        let beta = [0.3, 0.4];
        let priors = [0.25, 0.75];
        assert_eq!(recursive_posterior(&priors, &[], &alpha, &beta).unwrap().mass, priors.to_vec());
        let one = recursive_posterior(&priors, &[Observation::yes(1)], &alpha, &beta).unwrap();
        let direct =
            one_step_update(&BeliefVector::new(priors.to_vec()).unwrap(), Observation::yes(1), &alpha, &beta)
                .unwrap();
        assert_eq!(one, direct);
    }

    #[test]
    fn closed_form_matches_worked_example() {
        let trace = ExecutionTrace::new(vec![0, 0], vec![1, 0]).unwrap();
        let post = fast_posterior(&HALF, &trace, &[0.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((post.mass[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((post.mass[1] - 2.0 / 3.0).abs() < 1e-15);

        let empty = fast_posterior(&[0.2, 0.8], &ExecutionTrace::zeros(2), &[0.1, 0.1], &[0.5, 0.5]).unwrap();
        assert!((empty.mass[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn closed_form_handles_zero_false_positive_yes() {
        let trace = ExecutionTrace::new(vec![0, 2, 0], vec![3, 1, 0]).unwrap();
        let post = fast_posterior(&[0.3, 0.3, 0.4], &trace, &[0.0; 3], &[0.5; 3]).unwrap();
        assert_eq!(post.mass, vec![0.0, 1.0, 0.0]);
        assert!(post.collapsed);
    }

    #[test]
    fn closed_form_survives_huge_exponents() {
        let trace = ExecutionTrace::new(vec![0, 0], vec![100_000, 99_999]).unwrap();
        let post = fast_posterior(&HALF, &trace, &[0.0, 0.0], &[0.5, 0.5]).unwrap();
        // one extra miss at point 0 halves its relative weight
        assert!((post.mass[0] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn contradictory_trace_is_reported() {
        // YES at both points without false positives cannot happen
        let trace = ExecutionTrace::new(vec![1, 1], vec![0, 0]).unwrap();
        assert!(matches!(
            fast_posterior(&HALF, &trace, &[0.0, 0.0], &[0.5, 0.5]),
            Err(Error::Contradictory(_))
        ));
    }

    #[test]
    fn no_false_positive_form() {
        let post = posterior_no_false_positive(&HALF, &[0.5, 0.5], &[1, 0]).unwrap();
        assert!((post.mass[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(posterior_no_false_positive(&[0.3, 0.7], &[0.5, 0.5], &[0, 0]).unwrap().mass, vec![0.3, 0.7]);
        let eliminated = posterior_no_false_positive(&[0.2, 0.3, 0.5], &[0.0, 0.5, 0.5], &[1, 0, 0]).unwrap();
        assert_eq!(eliminated.mass[0], 0.0);
        assert!((eliminated.mass[1] - 0.375).abs() < 1e-15);
        assert!(matches!(
            posterior_no_false_positive(&[1.0], &[0.0], &[1]),
            Err(Error::Contradictory(_))
        ));
    }

    #[test]
    fn repeated_squaring() {
        assert_eq!(pow_by_squaring(0.0, 0), 1.0);
        assert_eq!(pow_by_squaring(0.0, 3), 0.0);
        assert_eq!(pow_by_squaring(0.5, 10), 0.5f64.powi(10));
        assert!((pow_by_squaring(0.9, 37) / 0.9f64.powi(37) - 1.0).abs() < 1e-14);
        assert_eq!(pow_by_squaring(0.5, 1074), f64::from_bits(1));
        assert_eq!(pow_by_squaring(0.5, 2000), 0.0);
    }

    #[test]
    fn scaled_roundtrip_including_subnormals() {
        for x in [1.0, 0.75, 3.0e-300, 4.9e-324, 1.0e-310, 123.456] {
            assert_eq!(Scaled::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn trace_from_observations() {
        let obs = [Observation::no(0), Observation::yes(1), Observation::no(0)];
        let t = ExecutionTrace::from_observations(2, &obs).unwrap();
        assert_eq!(t.no_counts, vec![2, 0]);
        assert_eq!(t.yes_counts, vec![0, 1]);
        assert_eq!(t.steps(), 3);
        assert!(ExecutionTrace::from_observations(1, &obs).is_err());
    }
}
