//! Performance indices derived from the convolution tables.
//!
//! Everything follows from ratios of normalization constants: the marginal
//! queue-length distribution of a station, the total throughput seen by the
//! traffic equations, its split into a productive part (customers actually
//! served) and a skipping part (customers bounced off a full buffer),
//! utilization, mean queue length and — via Little's formula — the mean
//! waiting time.

use crate::convolution::{GSplit, GTable};
use crate::error::{Error, Result};
use crate::model::{NetworkModel, VisitRatios};
use crate::scaled::ScaledValue;
use serde::{Deserialize, Serialize};

/// Per-station indices at one population.
///
/// `stability_flag` is only populated by the plain MVA solver, which is the
/// one algorithm with a known numerically unstable step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationReport {
    pub station: usize,
    pub population: usize,
    /// `distribution[k]` = probability of `k` customers at the station,
    /// `k = 0..=min(population, capacity)`.
    pub distribution: Vec<f64>,
    pub total_throughput: f64,
    pub productive_throughput: f64,
    pub skipping_throughput: f64,
    pub utilization: f64,
    pub mean_queue_length: f64,
    pub mean_waiting_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_flag: Option<bool>,
}

impl StationReport {
    /// The all-zero report of an empty network.
    pub fn empty(station: usize) -> StationReport {
        StationReport {
            station,
            population: 0,
            distribution: vec![1.0],
            total_throughput: 0.0,
            productive_throughput: 0.0,
            skipping_throughput: 0.0,
            utilization: 0.0,
            mean_queue_length: 0.0,
            mean_waiting_time: 0.0,
            stability_flag: None,
        }
    }
}

/// `sum_k k * p[k]`.
pub fn mean_queue_length(distribution: &[f64]) -> f64 {
    distribution
        .iter()
        .enumerate()
        .map(|(k, &p)| k as f64 * p)
        .sum()
}

/// Little's formula `n̄ / X`. The mean over skipping customers counts their
/// (zero) waiting time, which is exactly what dividing the total throughput
/// captures.
pub fn mean_waiting_time(mean_queue_length: f64, total_throughput: f64) -> Result<f64> {
    if total_throughput > 0.0 {
        Ok(mean_queue_length / total_throughput)
    } else if mean_queue_length == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::ZeroThroughput)
    }
}

/// The convolution pipeline for one model and population: both tables plus
/// the per-station removed-network constants, ready to answer index queries
/// for any population up to the computed limit.
#[derive(Debug)]
pub struct ConvolutionAnalysis<'a> {
    model: &'a NetworkModel,
    visits: &'a VisitRatios,
    gtable: GTable,
    gsplit: GSplit,
    complements: Vec<Vec<ScaledValue>>,
}

impl<'a> ConvolutionAnalysis<'a> {
    pub fn new(
        model: &'a NetworkModel,
        visits: &'a VisitRatios,
        population: usize,
    ) -> ConvolutionAnalysis<'a> {
        let gtable = GTable::compute(model, visits, population);
        let gsplit = GSplit::compute(model, visits, population);
        let complements = (0..model.station_count())
            .map(|i| gsplit.complement(i))
            .collect();
        ConvolutionAnalysis {
            model,
            visits,
            gtable,
            gsplit,
            complements,
        }
    }

    pub fn model(&self) -> &NetworkModel {
        self.model
    }

    pub fn gtable(&self) -> &GTable {
        &self.gtable
    }

    pub fn gsplit(&self) -> &GSplit {
        &self.gsplit
    }

    /// Normalization constants of the network with station `i` removed.
    pub fn complement(&self, i: usize) -> &[ScaledValue] {
        &self.complements[i]
    }

    fn check(&self, n: usize) -> Result<()> {
        self.model.check_population(n)?;
        assert!(
            n <= self.gtable.population_limit(),
            "population {n} beyond the computed analysis (limit {})",
            self.gtable.population_limit()
        );
        Ok(())
    }

    /// Demand power `Y_i^k`, zero above the buffer capacity.
    fn service(&self, i: usize, k: usize) -> ScaledValue {
        if k > self.model.capacity(i) {
            ScaledValue::ZERO
        } else {
            ScaledValue::from_f64(self.visits.demand(i)).powi(k as u32)
        }
    }

    /// Marginal queue-length distribution `p_i(k, n)` for
    /// `k = 0..=min(n, capacity)`.
    pub fn queue_length_distribution(&self, i: usize, n: usize) -> Result<Vec<f64>> {
        self.check(n)?;
        let g_n = self.gtable.full(n);
        let comp = &self.complements[i];
        Ok((0..=n.min(self.model.capacity(i)))
            .map(|k| self.service(i, k).mul(comp[n - k]).ratio(g_n))
            .collect())
    }

    /// Total throughput `X_i(n) = V_i * g(n-1) / g(n)`; zero at `n = 0`.
    pub fn total_throughput(&self, i: usize, n: usize) -> Result<f64> {
        self.check(n)?;
        if n == 0 {
            return Ok(0.0);
        }
        Ok(self.visits.visit(i) * self.gtable.full(n - 1).ratio(self.gtable.full(n)))
    }

    /// Utilization: `X_i * S_i` while the buffer cannot fill, the complement
    /// of the empty-queue probability afterwards. The empty-queue probability
    /// comes straight out of the convolution, not from a complement, so the
    /// final subtraction is safe.
    pub fn utilization(&self, i: usize, n: usize) -> Result<f64> {
        self.check(n)?;
        if n == 0 {
            return Ok(0.0);
        }
        if n <= self.model.capacity(i) {
            Ok(self.total_throughput(i, n)? * self.model.service_time(i))
        } else {
            let empty = self.complements[i][n].ratio(self.gtable.full(n));
            Ok(1.0 - empty)
        }
    }

    /// Productive throughput via `U_i / S_i`, the cheaper and numerically
    /// cleaner route. [`ConvolutionAnalysis::productive_throughput_sum`] is
    /// the direct summation form; both must agree.
    pub fn productive_throughput(&self, i: usize, n: usize) -> Result<f64> {
        Ok(self.utilization(i, n)? / self.model.service_time(i))
    }

    /// Productive throughput by the truncated summation over the removed
    /// network: `(V_i / g(n)) * sum_{h=0}^{C_i-1} Y_i^h g^[-i](n-1-h)`.
    /// Reference form, used for cross-checking the `U_i / S_i` route.
    pub fn productive_throughput_sum(&self, i: usize, n: usize) -> Result<f64> {
        self.check(n)?;
        if n == 0 {
            return Ok(0.0);
        }
        let cap = self.model.capacity(i);
        if n <= cap {
            return self.total_throughput(i, n);
        }
        let comp = &self.complements[i];
        let y = ScaledValue::from_f64(self.visits.demand(i));
        // Horner over h = 0..cap-1 of Y^h * comp[n-1-h].
        let mut acc = comp[n - cap];
        for j in (n - cap + 1)..n {
            acc = acc.mul(y).add(comp[j]);
        }
        Ok(self.visits.visit(i) * acc.ratio(self.gtable.full(n)))
    }

    /// Skipping throughput: zero while the buffer cannot fill, and
    /// `V_i * Y_i^{C_i} * g^[-i](n-1-C_i) / g(n)` afterwards.
    pub fn skipping_throughput(&self, i: usize, n: usize) -> Result<f64> {
        self.check(n)?;
        let cap = self.model.capacity(i);
        if n <= cap {
            return Ok(0.0);
        }
        let weight = self.service(i, cap).mul(self.complements[i][n - 1 - cap]);
        Ok(self.visits.visit(i) * weight.ratio(self.gtable.full(n)))
    }

    /// Full per-station report at population `n`.
    pub fn station_report(&self, i: usize, n: usize) -> Result<StationReport> {
        self.check(n)?;
        if n == 0 {
            return Ok(StationReport::empty(i));
        }
        let distribution = self.queue_length_distribution(i, n)?;
        let total_throughput = self.total_throughput(i, n)?;
        let utilization = self.utilization(i, n)?;
        let nbar = mean_queue_length(&distribution);
        Ok(StationReport {
            station: i,
            population: n,
            mean_waiting_time: mean_waiting_time(nbar, total_throughput)?,
            mean_queue_length: nbar,
            productive_throughput: utilization / self.model.service_time(i),
            skipping_throughput: self.skipping_throughput(i, n)?,
            utilization,
            total_throughput,
            distribution,
            stability_flag: None,
        })
    }

    /// Reports for every station at population `n`.
    pub fn reports(&self, n: usize) -> Result<Vec<StationReport>> {
        (0..self.model.station_count())
            .map(|i| self.station_report(i, n))
            .collect()
    }
}
