//! Shared fixtures for the integration suites: a deterministic corpus of
//! randomized models and the small reference networks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skipover::{solve_visit_ratios, NetworkModel, StationSpec, VisitRatios};

pub const CORPUS_SEED: u64 = 0x5eed_cafe;
pub const CORPUS_SIZE: usize = 220;

/// A random irreducible model: 2..=4 stations, capacities 1..=4, service
/// times in [0.1, 10], routing mixing a full random cycle (which guarantees
/// strong connectivity) with uniform noise and self-loops.
pub fn random_model(rng: &mut ChaCha8Rng) -> NetworkModel {
    let m = rng.random_range(2..=4usize);
    let stations = (0..m)
        .map(|i| {
            StationSpec::new(
                format!("s{i}"),
                rng.random_range(1..=4usize),
                rng.random_range(0.1f64..=10.0),
            )
        })
        .collect();

    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut successor = vec![0usize; m];
    for i in 0..m {
        successor[order[i]] = order[(i + 1) % m];
    }

    let routing = (0..m)
        .map(|i| {
            let mut row: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
            row[successor[i]] += m as f64;
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|q| *q /= sum);
            row
        })
        .collect();

    NetworkModel::new(stations, routing).expect("random model is valid by construction")
}

pub fn corpus() -> Vec<(NetworkModel, VisitRatios)> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE)
        .map(|_| {
            let model = random_model(&mut rng);
            let visits = solve_visit_ratios(&model).expect("irreducible by construction");
            (model, visits)
        })
        .collect()
}

/// `a` and `b` agree to within `tol`, relative to the larger magnitude.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub fn rel_dev(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
