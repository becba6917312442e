//! Numerically stable MVA by tandem aggregation.
//!
//! Plain MVA recovers the empty-queue probability as `1 - U`, which loses
//! all precision once a station is almost always busy. This variant never
//! subtracts: it solves the network as a chain of two-station tandem models
//! — a flow-equivalent aggregate of the stations seen so far against the
//! next station — where the empty-queue entry comes from a division by the
//! throughput of the shorted station instead of a complement.
//!
//! After the chain is solved, the distributions of the stations hidden
//! inside each aggregate are recovered by mixing them with the aggregate's
//! own distribution, a convex weighted sum that preserves nonnegativity.

use crate::error::Result;
use crate::metrics::StationReport;
use crate::model::{NetworkModel, VisitRatios};

/// Flow-equivalent aggregate of a station prefix.
///
/// `throughputs[k]` is the rate of the covered subnetwork in isolation with
/// `k` customers inside (zero at `k = 0` and above `capacity`), measured at
/// the last covered station. `shorted_throughputs` rescales it by the visit
/// ratio of the next station in the chain; it is empty for the final
/// profile, which covers the whole network and has no next station.
#[derive(Debug, Clone, PartialEq)]
pub struct FesProfile {
    pub station_count: usize,
    pub capacity: usize,
    pub throughputs: Vec<f64>,
    pub shorted_throughputs: Vec<f64>,
}

/// Distributions produced by one aggregation step: the newly joined
/// station's queue-length distribution and the mirrored distribution of the
/// aggregate, both per subnetwork population `0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeDistributions {
    /// `station[n][k]` = probability of `k` customers at the joined station.
    pub station: Vec<Vec<f64>>,
    /// `aggregate[n][k]` = probability of `k` customers inside the aggregate
    /// (the mirror `station[n][n-k]`).
    pub aggregate: Vec<Vec<f64>>,
}

/// One population step of the subtraction-free distribution recursion.
///
/// The empty-queue entry divides by the throughput of the station when
/// shorted with all `n` customers in the rest of the network; when the rest
/// of the network cannot hold them (the shorted throughput is zero), the
/// station cannot be empty and the entry is an exact zero.
pub fn stable_qld_step(
    throughput: f64,
    service_time: f64,
    shorted_throughputs: &[f64],
    prev_dist: &[f64],
    n: usize,
    capacity: usize,
) -> Vec<f64> {
    let mut dist = vec![0.0f64; n.min(capacity) + 1];
    let shorted = shorted_throughputs.get(n).copied().unwrap_or(0.0);
    if shorted > 0.0 {
        dist[0] = throughput * prev_dist[0] / shorted;
    }
    for (k, slot) in dist.iter_mut().enumerate().skip(1) {
        *slot = throughput * service_time * prev_dist.get(k - 1).copied().unwrap_or(0.0);
    }
    dist
}

/// Solves the chain of tandem models for `i = 1..M-1`.
///
/// Returns one [`FesProfile`] per aggregate (the last one covers the whole
/// network, so its throughput sequence is the network throughput of the
/// last station) and one [`CompositeDistributions`] per aggregation step.
pub fn solve_tandem_chain(
    model: &NetworkModel,
    visits: &VisitRatios,
    population: usize,
) -> Result<(Vec<FesProfile>, Vec<CompositeDistributions>)> {
    model.check_population(population)?;
    let m = model.station_count();
    let mut profiles = Vec::with_capacity(m);
    let mut history = Vec::with_capacity(m.saturating_sub(1));

    // Station 0 in isolation.
    let mut aggregate_cap = model.capacity(0);
    let mut x_eq: Vec<f64> = (0..=population)
        .map(|k| {
            if (1..=aggregate_cap).contains(&k) {
                1.0 / model.service_time(0)
            } else {
                0.0
            }
        })
        .collect();

    for next in 1..m {
        let visit_ratio = visits.visit(next) / visits.visit(next - 1);
        let y_eq: Vec<f64> = x_eq.iter().map(|&x| x * visit_ratio).collect();
        profiles.push(FesProfile {
            station_count: next,
            capacity: aggregate_cap,
            throughputs: x_eq.clone(),
            shorted_throughputs: y_eq.clone(),
        });

        let next_cap = model.capacity(next);
        let next_service = model.service_time(next);
        let tandem_cap = aggregate_cap + next_cap;

        let mut station_dists: Vec<Vec<f64>> = vec![vec![1.0]];
        let mut aggregate_dists: Vec<Vec<f64>> = vec![vec![1.0]];
        let mut x_chain = vec![0.0f64; population + 1];

        for n in 1..=population {
            if n > tandem_cap {
                station_dists.push(vec![0.0; n.min(next_cap) + 1]);
                aggregate_dists.push(vec![0.0; n.min(aggregate_cap) + 1]);
                continue;
            }
            let prev = &station_dists[n - 1];

            // Load-dependent waiting time inside the aggregate: an arriving
            // customer sees k-1 ahead of it with the arrival-instant
            // distribution of the remaining n-1 customers.
            let mut wait_aggregate = 0.0f64;
            for k in 1..=n.min(aggregate_cap) {
                let p = prev.get(n - k).copied().unwrap_or(0.0);
                if p > 0.0 {
                    wait_aggregate += k as f64 * p / y_eq[k];
                }
            }
            let mut wait_station = 0.0f64;
            for k in 1..=n.min(next_cap) {
                wait_station += k as f64 * next_service * prev.get(k - 1).copied().unwrap_or(0.0);
            }
            let cycle_time = wait_aggregate + wait_station;
            let x = n as f64 / cycle_time;
            x_chain[n] = x;

            let dist = stable_qld_step(x, next_service, &y_eq, prev, n, next_cap);
            let aggregate: Vec<f64> = (0..=n.min(aggregate_cap))
                .map(|k| dist.get(n - k).copied().unwrap_or(0.0))
                .collect();
            station_dists.push(dist);
            aggregate_dists.push(aggregate);
        }

        history.push(CompositeDistributions {
            station: station_dists,
            aggregate: aggregate_dists,
        });
        x_eq = x_chain;
        aggregate_cap = tandem_cap;
    }

    profiles.push(FesProfile {
        station_count: m,
        capacity: aggregate_cap,
        throughputs: x_eq,
        shorted_throughputs: Vec::new(),
    });
    Ok((profiles, history))
}

/// Mixes a station's subnetwork-conditioned distributions with the
/// distribution of the subnetwork population itself:
/// `new[n][k] = sum_l cond[l][k] * aggregate[n][l]`.
fn mix(conditional: &[Vec<f64>], aggregate: &[Vec<f64>], capacity: usize) -> Vec<Vec<f64>> {
    aggregate
        .iter()
        .enumerate()
        .map(|(n, weights)| {
            (0..=n.min(capacity))
                .map(|k| {
                    weights
                        .iter()
                        .enumerate()
                        .skip(k)
                        .map(|(l, &w)| w * conditional[l].get(k).copied().unwrap_or(0.0))
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Expands the chain history into per-station marginals at every tracked
/// population of the full network: `result[i][n][k]`.
///
/// Each aggregation step re-conditions the distributions of the stations
/// already inside the aggregate by a weighted sum over the aggregate's own
/// population, so after the last step every station is conditioned on the
/// whole network.
pub fn back_propagate(
    history: &[CompositeDistributions],
    capacities: &[usize],
    population: usize,
) -> Vec<Vec<Vec<f64>>> {
    // Station 0 alone: the subnetwork population sits entirely in its buffer.
    let first_cap = capacities[0];
    let mut dists: Vec<Vec<Vec<f64>>> = vec![(0..=population)
        .map(|l| {
            let mut d = vec![0.0; l.min(first_cap) + 1];
            if l <= first_cap {
                d[l] = 1.0;
            }
            d
        })
        .collect()];

    for record in history {
        for (station, dist) in dists.iter_mut().enumerate() {
            *dist = mix(dist, &record.aggregate, capacities[station]);
        }
        dists.push(record.station.clone());
    }
    dists
}

/// The fully solved network: marginals for every station at every
/// population, plus the network throughput sequence.
#[derive(Debug, Clone)]
pub struct StableSolution {
    population: usize,
    capacities: Vec<usize>,
    service_times: Vec<f64>,
    visit_values: Vec<f64>,
    network_throughputs: Vec<f64>,
    distributions: Vec<Vec<Vec<f64>>>,
    profiles: Vec<FesProfile>,
}

/// Runs the tandem chain and the distribution back-propagation.
pub fn solve(
    model: &NetworkModel,
    visits: &VisitRatios,
    population: usize,
) -> Result<StableSolution> {
    let (profiles, history) = solve_tandem_chain(model, visits, population)?;
    let capacities = model.capacities();
    let distributions = back_propagate(&history, &capacities, population);
    let network_throughputs = profiles
        .last()
        .expect("at least one profile")
        .throughputs
        .clone();
    Ok(StableSolution {
        population,
        capacities,
        service_times: model.stations().iter().map(|s| s.service_time).collect(),
        visit_values: visits.values().to_vec(),
        network_throughputs,
        distributions,
        profiles,
    })
}

impl StableSolution {
    pub fn population_limit(&self) -> usize {
        self.population
    }

    pub fn profiles(&self) -> &[FesProfile] {
        &self.profiles
    }

    /// Marginal distribution of station `i` at population `n`.
    pub fn distribution(&self, i: usize, n: usize) -> &[f64] {
        &self.distributions[i][n]
    }

    /// Total throughput of station `i` at population `n`, scaled from the
    /// last station's by the visit ratios.
    pub fn throughput(&self, i: usize, n: usize) -> f64 {
        let last = self.visit_values.len() - 1;
        self.network_throughputs[n] * self.visit_values[i] / self.visit_values[last]
    }

    /// Full report for one station; the empty-queue probability is a stored
    /// value of the stable recursion, never a complement.
    pub fn station_report(&self, i: usize, n: usize) -> StationReport {
        if n == 0 {
            return StationReport::empty(i);
        }
        let cap = self.capacities[i];
        let service = self.service_times[i];
        let x = self.throughput(i, n);
        let prev = &self.distributions[i][n - 1];
        let waiting: f64 = (1..=n.min(cap))
            .map(|k| k as f64 * service * prev.get(k - 1).copied().unwrap_or(0.0))
            .sum();
        let utilization = 1.0 - self.distributions[i][n][0];
        let skipping = if n <= cap { 0.0 } else { x * prev[cap] };
        StationReport {
            station: i,
            population: n,
            distribution: self.distributions[i][n].clone(),
            total_throughput: x,
            productive_throughput: utilization / service,
            skipping_throughput: skipping,
            utilization,
            mean_queue_length: waiting * x,
            mean_waiting_time: waiting,
            stability_flag: None,
        }
    }

    pub fn reports(&self, n: usize) -> Vec<StationReport> {
        (0..self.capacities.len())
            .map(|i| self.station_report(i, n))
            .collect()
    }
}
