//! Network definition, validation and preprocessing.
//!
//! A model is a list of stations (finite buffer capacity, mean exponential
//! service time) tied together by a stochastic routing matrix. Validation
//! happens at construction: a [`NetworkModel`] that exists is well-formed.
//!
//! Visit ratios are the solution of the traffic equations `V = V * Q` pinned
//! to `V[reference] = 1`. The routing matrix has rank `M - 1`, so one balance
//! equation is redundant; it is replaced by the normalization constraint and
//! the resulting full-rank system is solved with partial pivoting.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerance on routing-row sums: deviations within it are renormalized
/// silently, larger ones are rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Residual tolerance for the solved traffic equations, relative to `max V`.
pub const VISIT_RESIDUAL_TOLERANCE: f64 = 1e-10;

/// One service station: a finite input buffer (the slot in service counts)
/// and an exponential server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSpec {
    pub name: String,
    pub capacity: usize,
    pub service_time: f64,
}

impl StationSpec {
    pub fn new(name: impl Into<String>, capacity: usize, service_time: f64) -> StationSpec {
        StationSpec {
            name: name.into(),
            capacity,
            service_time,
        }
    }
}

/// Row-stochastic routing probabilities `q[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingMatrix {
    rows: Vec<Vec<f64>>,
}

impl RoutingMatrix {
    /// Validates shape and stochasticity against the given dimension and
    /// renormalizes rows whose sum is off by at most [`ROW_SUM_TOLERANCE`].
    fn validated(rows: Vec<Vec<f64>>, stations: usize) -> Result<RoutingMatrix> {
        if rows.len() != stations {
            return Err(Error::DimensionMismatch {
                rows: rows.len(),
                cols: rows.first().map_or(0, Vec::len),
                stations,
            });
        }
        let mut rows = rows;
        for (i, row) in rows.iter_mut().enumerate() {
            if row.len() != stations {
                return Err(Error::DimensionMismatch {
                    rows: stations,
                    cols: row.len(),
                    stations,
                });
            }
            if row.iter().any(|&q| !(0.0..=1.0 + ROW_SUM_TOLERANCE).contains(&q)) {
                return Err(Error::NonStochasticRow {
                    row: i,
                    sum: row.iter().sum(),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NonStochasticRow { row: i, sum });
            }
            for q in row.iter_mut() {
                *q /= sum;
            }
        }
        Ok(RoutingMatrix { rows })
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.rows[from]
    }
}

/// A validated closed network: stations, routing and the reference station
/// used to normalize visit ratios. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    stations: Vec<StationSpec>,
    routing: RoutingMatrix,
    reference: usize,
}

impl NetworkModel {
    /// Builds and validates a model with the first station as reference.
    pub fn new(stations: Vec<StationSpec>, routing: Vec<Vec<f64>>) -> Result<NetworkModel> {
        NetworkModel::with_reference(stations, routing, 0)
    }

    /// Builds and validates a model with an explicit reference station.
    pub fn with_reference(
        stations: Vec<StationSpec>,
        routing: Vec<Vec<f64>>,
        reference: usize,
    ) -> Result<NetworkModel> {
        if stations.is_empty() {
            return Err(Error::EmptyModel);
        }
        for (index, s) in stations.iter().enumerate() {
            let reason = if s.capacity < 1 {
                Some("capacity must be at least 1".to_string())
            } else if !(s.service_time > 0.0) || !s.service_time.is_finite() {
                Some(format!(
                    "service time must be positive and finite, got {}",
                    s.service_time
                ))
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(Error::BadStation {
                    index,
                    name: s.name.clone(),
                    reason,
                });
            }
        }
        let routing = RoutingMatrix::validated(routing, stations.len())?;
        if !strongly_connected(&routing) {
            return Err(Error::Reducible);
        }
        if reference >= stations.len() {
            return Err(Error::InvalidReference {
                index: reference,
                stations: stations.len(),
            });
        }
        Ok(NetworkModel {
            stations,
            routing,
            reference,
        })
    }

    /// Convenience constructor for the cyclic network `0 -> 1 -> ... -> 0`.
    pub fn cycle(stations: Vec<StationSpec>) -> Result<NetworkModel> {
        let m = stations.len();
        let routing = (0..m)
            .map(|i| {
                let mut row = vec![0.0; m];
                row[(i + 1) % m] = 1.0;
                row
            })
            .collect();
        NetworkModel::new(stations, routing)
    }

    pub fn stations(&self) -> &[StationSpec] {
        &self.stations
    }

    pub fn station(&self, i: usize) -> &StationSpec {
        &self.stations[i]
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn routing(&self) -> &RoutingMatrix {
        &self.routing
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn capacity(&self, i: usize) -> usize {
        self.stations[i].capacity
    }

    pub fn service_time(&self, i: usize) -> f64 {
        self.stations[i].service_time
    }

    pub fn capacities(&self) -> Vec<usize> {
        self.stations.iter().map(|s| s.capacity).collect()
    }

    /// The largest feasible population: the sum of all buffer capacities.
    pub fn n_max(&self) -> usize {
        self.stations.iter().map(|s| s.capacity).sum()
    }

    /// Rejects populations above [`NetworkModel::n_max`].
    pub fn check_population(&self, population: usize) -> Result<()> {
        let n_max = self.n_max();
        if population > n_max {
            return Err(Error::InfeasiblePopulation {
                population,
                n_max,
            });
        }
        Ok(())
    }
}

/// Both-direction reachability from station 0 over strictly positive entries.
fn strongly_connected(routing: &RoutingMatrix) -> bool {
    let m = routing.dimension();
    let reach = |transpose: bool| {
        let mut seen = vec![false; m];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..m {
                let q = if transpose {
                    routing.entry(j, i)
                } else {
                    routing.entry(i, j)
                };
                if q > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(false) && reach(true)
}

/// Visit ratios `V` (per passage through the reference station) and the
/// service demands `Y[i] = V[i] * S[i]` derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitRatios {
    values: Vec<f64>,
    demands: Vec<f64>,
}

impl VisitRatios {
    /// Assembles visit ratios from already-known values, e.g. when analyzing
    /// a subnetwork with the ratios inherited from the full solution.
    pub fn from_parts(values: Vec<f64>, service_times: &[f64]) -> VisitRatios {
        let demands = values
            .iter()
            .zip(service_times)
            .map(|(v, s)| v * s)
            .collect();
        VisitRatios { values, demands }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn demands(&self) -> &[f64] {
        &self.demands
    }

    pub fn visit(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn demand(&self, i: usize) -> f64 {
        self.demands[i]
    }
}

/// Solves the traffic equations `V = V * Q` with `V[reference] = 1`.
///
/// One balance equation is redundant (the routing matrix has rank `M - 1`);
/// the reference station's equation is replaced by the normalization
/// constraint, which makes the system full-rank and the solution exact at
/// the reference.
pub fn solve_visit_ratios(model: &NetworkModel) -> Result<VisitRatios> {
    let m = model.station_count();
    let routing = model.routing();
    let reference = model.reference();

    // Balance equations transposed: sum_i V[i] * q[i][j] - V[j] = 0.
    let mut a = vec![vec![0.0f64; m]; m];
    let mut b = vec![0.0f64; m];
    for j in 0..m {
        for i in 0..m {
            a[j][i] = routing.entry(i, j);
        }
        a[j][j] -= 1.0;
    }
    a[reference] = vec![0.0; m];
    a[reference][reference] = 1.0;
    b[reference] = 1.0;

    let values = solve_linear(a, b)?;
    if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::SingularSystem);
    }

    // Residual check of the original balance equations.
    let scale = values.iter().cloned().fold(0.0f64, f64::max);
    for j in 0..m {
        if j == reference {
            continue;
        }
        let balance: f64 = (0..m).map(|i| values[i] * routing.entry(i, j)).sum();
        if (balance - values[j]).abs() > VISIT_RESIDUAL_TOLERANCE * scale {
            return Err(Error::SingularSystem);
        }
    }

    let service_times: Vec<f64> = model.stations().iter().map(|s| s.service_time).collect();
    Ok(VisitRatios::from_parts(values, &service_times))
}

/// Gaussian elimination with partial pivoting on a dense system.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let m = b.len();
    let norm = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let tiny = norm * 1e-13 + f64::MIN_POSITIVE;

    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("nonempty pivot range");
        if a[pivot_row][col].abs() < tiny {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..m {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..m {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..m).rev() {
        let mut sum = b[col];
        for k in col + 1..m {
            sum -= a[col][k] * b[k];
        }
        b[col] = sum / a[col][col];
    }
    Ok(b)
}

/// The per-station service function: `1` at `k = 0`, `demand^k` up to the
/// buffer capacity, and `0` above it.
pub fn service_function(demand: f64, capacity: usize, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else if k <= capacity {
        demand.powi(k as i32)
    } else {
        0.0
    }
}
