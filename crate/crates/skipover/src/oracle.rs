//! Brute-force ground truth by exhaustive state-space enumeration.
//!
//! For desk-scale models the product form can be evaluated directly: list
//! every feasible state, multiply the per-station service functions, sum.
//! The solvers in this crate are validated against these numbers.

use crate::error::{Error, Result};
use crate::model::{NetworkModel, VisitRatios};
use crate::scaled::{pairwise_sum, ScaledValue};

/// Default cap on the number of enumerated states.
pub const DEFAULT_STATE_LIMIT: usize = 10_000_000;

/// One feasible placement of customers over the stations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVector {
    pub counts: Vec<usize>,
}

/// Exhaustive solution: states, product-form weights, normalization constant
/// and exact marginal queue-length distributions.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub states: Vec<StateVector>,
    pub weights: Vec<ScaledValue>,
    pub normalization: ScaledValue,
    /// `marginals[i][k]` = probability of `k` customers at station `i`,
    /// for `k = 0..=min(n, capacity[i])`.
    pub marginals: Vec<Vec<f64>>,
}

/// Number of feasible states: the coefficient of `x^population` in
/// `prod_i (1 + x + ... + x^capacity[i])`. Saturates instead of overflowing,
/// which is enough to enforce a limit.
pub fn feasible_state_count(capacities: &[usize], population: usize) -> u128 {
    let mut coeffs = vec![0u128; population + 1];
    coeffs[0] = 1;
    for &cap in capacities {
        let mut next = vec![0u128; population + 1];
        for (n, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for k in 0..=cap.min(population - n) {
                next[n + k] = next[n + k].saturating_add(c);
            }
        }
        coeffs = next;
    }
    coeffs[population]
}

/// Enumerates every feasible state exactly once.
///
/// States are emitted with earlier stations taking larger counts first, so
/// `capacities = (1, 1), population = 1` yields `[(1, 0), (0, 1)]`.
/// The list is empty iff the population exceeds the capacity sum.
pub fn enumerate_states(
    capacities: &[usize],
    population: usize,
    limit: usize,
) -> Result<Vec<StateVector>> {
    let count = feasible_state_count(capacities, population);
    if count > limit as u128 {
        return Err(Error::SizeLimit {
            states: count,
            limit,
        });
    }
    let mut states = Vec::with_capacity(count as usize);
    let mut current = vec![0usize; capacities.len()];
    // suffix_cap[i] = total capacity of stations i..
    let mut suffix_cap = vec![0usize; capacities.len() + 1];
    for i in (0..capacities.len()).rev() {
        suffix_cap[i] = suffix_cap[i + 1] + capacities[i];
    }
    fill(
        capacities,
        &suffix_cap,
        0,
        population,
        &mut current,
        &mut states,
    );
    Ok(states)
}

fn fill(
    capacities: &[usize],
    suffix_cap: &[usize],
    station: usize,
    remaining: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<StateVector>,
) {
    if station == capacities.len() {
        if remaining == 0 {
            out.push(StateVector {
                counts: current.clone(),
            });
        }
        return;
    }
    let rest = suffix_cap[station + 1];
    if remaining > suffix_cap[station] {
        return;
    }
    let hi = remaining.min(capacities[station]);
    let lo = remaining.saturating_sub(rest);
    for k in (lo..=hi).rev() {
        current[station] = k;
        fill(capacities, suffix_cap, station + 1, remaining - k, current, out);
    }
    current[station] = 0;
}

/// Evaluates the product form over the full state space.
pub fn direct_solution(
    model: &NetworkModel,
    visits: &VisitRatios,
    population: usize,
    limit: usize,
) -> Result<OracleResult> {
    model.check_population(population)?;
    let capacities = model.capacities();
    let states = enumerate_states(&capacities, population, limit)?;

    // Per-station demand powers, shared across states.
    let powers: Vec<Vec<ScaledValue>> = (0..model.station_count())
        .map(|i| {
            let y = ScaledValue::from_f64(visits.demand(i));
            (0..=capacities[i]).map(|k| y.powi(k as u32)).collect()
        })
        .collect();

    let weights: Vec<ScaledValue> = states
        .iter()
        .map(|s| {
            s.counts
                .iter()
                .enumerate()
                .fold(ScaledValue::ONE, |acc, (i, &k)| acc.mul(powers[i][k]))
        })
        .collect();
    let normalization = pairwise_sum(&weights);

    let mut marginals = Vec::with_capacity(model.station_count());
    for i in 0..model.station_count() {
        let k_max = population.min(capacities[i]);
        let mut sums = vec![ScaledValue::ZERO; k_max + 1];
        for (state, &w) in states.iter().zip(&weights) {
            sums[state.counts[i]] = sums[state.counts[i]].add(w);
        }
        marginals.push(sums.iter().map(|s| s.ratio(normalization)).collect());
    }

    Ok(OracleResult {
        states,
        weights,
        normalization,
        marginals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{solve_visit_ratios, StationSpec};
    use approx::assert_relative_eq;

    fn net_a() -> NetworkModel {
        NetworkModel::cycle(vec![
            StationSpec::new("s1", 1, 1.0),
            StationSpec::new("s2", 1, 1.0),
        ])
        .unwrap()
    }

    fn net_b() -> NetworkModel {
        NetworkModel::cycle(vec![
            StationSpec::new("s1", 2, 1.0),
            StationSpec::new("s2", 1, 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn enumerates_two_station_states() {
        let states = enumerate_states(&[1, 1], 1, DEFAULT_STATE_LIMIT).unwrap();
        let counts: Vec<Vec<usize>> = states.into_iter().map(|s| s.counts).collect();
        assert_eq!(counts, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn single_state_at_capacity_sum() {
        let states = enumerate_states(&[2, 1], 3, DEFAULT_STATE_LIMIT).unwrap();
        let counts: Vec<Vec<usize>> = states.into_iter().map(|s| s.counts).collect();
        assert_eq!(counts, vec![vec![2, 1]]);
    }

    #[test]
    fn infeasible_population_is_empty() {
        let states = enumerate_states(&[1, 1], 3, DEFAULT_STATE_LIMIT).unwrap();
        assert!(states.is_empty());
    }

    #[test]
    fn size_limit_enforced() {
        let err = enumerate_states(&[9; 12], 54, 1000).unwrap_err();
        assert!(matches!(err, Error::SizeLimit { .. }));
    }

    #[test]
    fn count_matches_enumeration() {
        let cases: [(&[usize], usize); 4] =
            [(&[1, 1], 1), (&[2, 1], 2), (&[3, 2, 4], 5), (&[1, 2, 3, 4], 6)];
        for (caps, n) in cases {
            let states = enumerate_states(caps, n, DEFAULT_STATE_LIMIT).unwrap();
            assert_eq!(
                states.len() as u128,
                feasible_state_count(caps, n),
                "caps={caps:?} n={n}"
            );
        }
    }

    #[test]
    fn net_a_full_population() {
        let model = net_a();
        let visits = solve_visit_ratios(&model).unwrap();
        let result = direct_solution(&model, &visits, 2, DEFAULT_STATE_LIMIT).unwrap();
        assert_eq!(result.states.len(), 1);
        assert_relative_eq!(result.normalization.to_f64(), 1.0);
        for marginal in &result.marginals {
            assert_eq!(marginal.as_slice(), &[0.0, 1.0]);
        }
    }

    #[test]
    fn net_b_marginals() {
        let model = net_b();
        let visits = solve_visit_ratios(&model).unwrap();
        let result = direct_solution(&model, &visits, 2, DEFAULT_STATE_LIMIT).unwrap();
        // States (2,0) and (1,1): weights 1 and 2.
        assert_eq!(result.states.len(), 2);
        assert_relative_eq!(result.normalization.to_f64(), 3.0);
        assert_relative_eq!(result.marginals[1][0], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(result.marginals[1][1], 2.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn empty_network() {
        let model = net_a();
        let visits = solve_visit_ratios(&model).unwrap();
        let result = direct_solution(&model, &visits, 0, DEFAULT_STATE_LIMIT).unwrap();
        assert_relative_eq!(result.normalization.to_f64(), 1.0);
        for marginal in &result.marginals {
            assert_eq!(marginal.as_slice(), &[1.0]);
        }
    }

    #[test]
    fn marginals_sum_to_one() {
        let model = net_b();
        let visits = solve_visit_ratios(&model).unwrap();
        for n in 0..=3 {
            let result = direct_solution(&model, &visits, n, DEFAULT_STATE_LIMIT).unwrap();
            for marginal in &result.marginals {
                let sum: f64 = marginal.iter().sum();
                assert!((sum - 1.0).abs() < 1e-13, "n={n} sum={sum}");
            }
        }
    }

    #[test]
    fn rejects_population_above_n_max() {
        let model = net_a();
        let visits = solve_visit_ratios(&model).unwrap();
        let err = direct_solution(&model, &visits, 3, DEFAULT_STATE_LIMIT).unwrap_err();
        assert!(matches!(err, Error::InfeasiblePopulation { .. }));
    }
}
