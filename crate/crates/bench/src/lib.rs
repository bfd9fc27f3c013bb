//! Fixed instances for the benchmarks.

use impsearch::instances::{generate_random_at, BetaTransform, BoundingBox, ConversionConfig};
use impsearch::rng::stream;
use impsearch::{ExecutionTrace, Instance};
use rand::Rng;

/// Random planar instance with `n` points in a 10x10 box and budget three
/// times its diameter. The same `(n, index)` always gives the same instance.
pub fn planar(n: usize, index: u64) -> Instance {
    let config = ConversionConfig {
        seed: 2024,
        beta_transform: BetaTransform::rescale_default(),
        ..ConversionConfig::default()
    };
    generate_random_at(n, BoundingBox::square(10.0).expect("valid box"), &config, index).expect("valid instance")
}

/// Same points, budget replaced.
pub fn planar_with_budget(n: usize, index: u64, budget: f64) -> Instance {
    planar(n, index).with_budget(budget)
}

/// Report counts summing to `steps` over `n` points, with error rates.
pub fn trace(n: usize, steps: u64) -> (Vec<f64>, ExecutionTrace, Vec<f64>, Vec<f64>) {
    let mut rng = stream(7, n as u64);
    let (mut yes, mut no) = (vec![0u64; n], vec![0u64; n]);
    for _ in 0..steps {
        let i = rng.random_range(0..n);
        if rng.random_bool(0.3) {
            yes[i] += 1;
        } else {
            no[i] += 1;
        }
    }
    let priors = vec![1.0 / n as f64; n];
    let alpha = (0..n).map(|_| rng.random_range(0.01..0.2)).collect();
    let beta = (0..n).map(|_| rng.random_range(0.05..0.6)).collect();
    (priors, ExecutionTrace::new(yes, no).expect("matching lengths"), alpha, beta)
}
