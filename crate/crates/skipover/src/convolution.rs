//! Normalization-constant computation by convolution.
//!
//! `g(n, m)` is the sum of product-form weights over all feasible states of
//! the first `m` stations holding `n` customers; `g(N, M)` normalizes the
//! steady-state probabilities. With finite buffers the load-independent
//! recursion keeps three cases: the empty-population base, an in-column step
//! while the buffer can still grow, and a truncated sum once the buffer is
//! full.
//!
//! [`GSplit`] additionally builds the same constants over station prefixes
//! and suffixes, so that the constant of the network with any single station
//! removed comes out of one extra convolution instead of a full recompute.
//!
//! All tables store [`ScaledValue`]s: the constants grow or shrink
//! geometrically in the population and overflow raw `f64` on large models.

use crate::error::Result;
use crate::model::{NetworkModel, VisitRatios};
use crate::scaled::ScaledValue;

/// The `(N+1) x M` table of normalization constants over station prefixes.
///
/// Column `m` (0-based) holds `g(n, m+1)` for the subnetwork of stations
/// `0..=m`. Entries for populations above the prefix capacity are exact
/// zeros.
#[derive(Debug, Clone)]
pub struct GTable {
    cols: Vec<Vec<ScaledValue>>,
    capacities: Vec<usize>,
    population: usize,
    multiplications: u64,
}

impl GTable {
    /// Runs the convolution for the model at the given population.
    pub fn compute(model: &NetworkModel, visits: &VisitRatios, population: usize) -> GTable {
        GTable::from_demands(visits.demands(), &model.capacities(), population)
    }

    /// Runs the convolution for raw per-station demands and capacities.
    ///
    /// This is the entry point for controlled experiments on subnetworks
    /// (station removal, flow-equivalent aggregates) where the demand vector
    /// is inherited from a larger model rather than solved from a routing
    /// matrix. A demand of exactly `0` describes a station that holds no
    /// customers in steady state.
    pub fn from_demands(demands: &[f64], capacities: &[usize], population: usize) -> GTable {
        convolve(demands, capacities, population, false)
    }

    /// The same table via the subtractive form of the recursion.
    ///
    /// Kept for cross-checking only: the subtraction invites catastrophic
    /// cancellation, so the three-case recursion is what everything else
    /// uses.
    pub fn compute_subtractive(
        model: &NetworkModel,
        visits: &VisitRatios,
        population: usize,
    ) -> GTable {
        convolve(visits.demands(), &model.capacities(), population, true)
    }

    /// Number of stations covered by the table.
    pub fn station_count(&self) -> usize {
        self.cols.len()
    }

    /// Largest population the table was computed for.
    pub fn population_limit(&self) -> usize {
        self.population
    }

    /// `g(n, prefix)` over the first `prefix >= 1` stations.
    ///
    /// Populations above the table range are only answered when they exceed
    /// the total capacity (the constant is an exact zero there).
    pub fn g(&self, n: usize, prefix: usize) -> ScaledValue {
        assert!(
            prefix >= 1 && prefix <= self.cols.len(),
            "prefix {prefix} out of range"
        );
        if n > self.population {
            let n_max: usize = self.capacities.iter().sum();
            assert!(
                n > n_max,
                "population {n} beyond the computed table (limit {})",
                self.population
            );
            return ScaledValue::ZERO;
        }
        self.cols[prefix - 1][n]
    }

    /// `g(n, M)` over the whole network.
    pub fn full(&self, n: usize) -> ScaledValue {
        self.g(n, self.cols.len())
    }

    /// Instrumented count of scaled multiplications spent building the table.
    pub fn multiplications(&self) -> u64 {
        self.multiplications
    }
}

fn convolve(
    demands: &[f64],
    capacities: &[usize],
    population: usize,
    subtractive: bool,
) -> GTable {
    assert_eq!(demands.len(), capacities.len());
    let rows = population + 1;
    let mut muls = 0u64;

    // Virtual empty-network column: g(0, 0) = 1, g(n, 0) = 0.
    let mut prev = vec![ScaledValue::ZERO; rows];
    prev[0] = ScaledValue::ONE;

    let mut cols = Vec::with_capacity(demands.len());
    for (&demand, &cap) in demands.iter().zip(capacities) {
        let y = ScaledValue::from_f64(demand);
        let mut col = vec![ScaledValue::ZERO; rows];
        col[0] = ScaledValue::ONE;
        // Used by the subtractive form: the weight of a full buffer plus one
        // arrival, i.e. the term truncated away from g(n-1, station).
        let y_over = y.powi(cap as u32 + 1);
        for n in 1..rows {
            if n <= cap {
                muls += 1;
                col[n] = prev[n].add(y.mul(col[n - 1]));
            } else if subtractive {
                muls += 2;
                col[n] = prev[n]
                    .add(y.mul(col[n - 1]))
                    .sub(y_over.mul(prev[n - 1 - cap]));
            } else {
                // Truncated sum over the buffer contents, evaluated as a
                // Horner chain over the previous column.
                let mut acc = prev[n - cap];
                for j in (n - cap + 1)..n {
                    muls += 1;
                    acc = acc.mul(y).add(prev[j]);
                }
                muls += 1;
                col[n] = prev[n].add(y.mul(acc));
            }
        }
        prev = col.clone();
        cols.push(col);
    }

    GTable {
        cols,
        capacities: capacities.to_vec(),
        population,
        multiplications: muls,
    }
}

/// Prefix and suffix normalization constants for single-station removal.
///
/// `up` column `j` covers stations `0..=j`; `down` column `j` covers
/// stations `j..M`. Both directions agree on the full network, and the
/// constant of the network without station `i` is one convolution of
/// `up[i-1]` with `down[i+1]`.
#[derive(Debug, Clone)]
pub struct GSplit {
    up: Vec<Vec<ScaledValue>>,
    down: Vec<Vec<ScaledValue>>,
    population: usize,
}

impl GSplit {
    pub fn compute(model: &NetworkModel, visits: &VisitRatios, population: usize) -> GSplit {
        GSplit::from_demands(visits.demands(), &model.capacities(), population)
    }

    pub fn from_demands(demands: &[f64], capacities: &[usize], population: usize) -> GSplit {
        assert_eq!(demands.len(), capacities.len());
        let m = demands.len();
        let rows = population + 1;
        let powers: Vec<Vec<ScaledValue>> = demands
            .iter()
            .zip(capacities)
            .map(|(&d, &cap)| {
                let y = ScaledValue::from_f64(d);
                (0..=cap).map(|k| y.powi(k as u32)).collect()
            })
            .collect();
        let service = |station: usize, k: usize| -> ScaledValue {
            if k <= capacities[station] {
                powers[station][k]
            } else {
                ScaledValue::ZERO
            }
        };

        let mut up: Vec<Vec<ScaledValue>> = Vec::with_capacity(m);
        up.push((0..rows).map(|n| service(0, n)).collect());
        for j in 1..m {
            let col = (0..rows)
                .map(|n| {
                    let mut acc = ScaledValue::ZERO;
                    for k in 0..=n.min(capacities[j]) {
                        acc = acc.add(service(j, k).mul(up[j - 1][n - k]));
                    }
                    acc
                })
                .collect();
            up.push(col);
        }

        let mut down: Vec<Vec<ScaledValue>> = vec![Vec::new(); m];
        down[m - 1] = (0..rows).map(|n| service(m - 1, n)).collect();
        for j in (0..m.saturating_sub(1)).rev() {
            down[j] = (0..rows)
                .map(|n| {
                    let mut acc = ScaledValue::ZERO;
                    for k in 0..=n.min(capacities[j]) {
                        acc = acc.add(service(j, k).mul(down[j + 1][n - k]));
                    }
                    acc
                })
                .collect();
        }

        GSplit {
            up,
            down,
            population,
        }
    }

    pub fn station_count(&self) -> usize {
        self.up.len()
    }

    pub fn population_limit(&self) -> usize {
        self.population
    }

    /// Prefix constant over stations `0..=j`.
    pub fn up(&self, n: usize, j: usize) -> ScaledValue {
        self.up[j][n]
    }

    /// Suffix constant over stations `j..M`.
    pub fn down(&self, n: usize, j: usize) -> ScaledValue {
        self.down[j][n]
    }

    /// `g(n, M)` over the whole network.
    pub fn full(&self, n: usize) -> ScaledValue {
        self.up[self.up.len() - 1][n]
    }

    /// The normalization constants of the network with station `i` removed,
    /// for populations `0..=N`: one convolution of the prefix before `i`
    /// with the suffix after `i`.
    pub fn complement(&self, station: usize) -> Vec<ScaledValue> {
        let m = self.up.len();
        assert!(station < m, "station {station} out of range");
        let rows = self.population + 1;
        if m == 1 {
            let mut out = vec![ScaledValue::ZERO; rows];
            out[0] = ScaledValue::ONE;
            return out;
        }
        if station == 0 {
            return self.down[1].clone();
        }
        if station == m - 1 {
            return self.up[m - 2].clone();
        }
        (0..rows)
            .map(|n| {
                let mut acc = ScaledValue::ZERO;
                for k in 0..=n {
                    acc = acc.add(self.up[station - 1][k].mul(self.down[station + 1][n - k]));
                }
                acc
            })
            .collect()
    }
}

/// Convenience wrapper computing both tables for one model and population.
pub fn compute_tables(
    model: &NetworkModel,
    visits: &VisitRatios,
    population: usize,
) -> Result<(GTable, GSplit)> {
    Ok((
        GTable::compute(model, visits, population),
        GSplit::compute(model, visits, population),
    ))
}
