//! Python bindings for the skipover solver.
//!
//! Exposes model construction, the three solution algorithms, the
//! verification harness and raw normalization constants. Build the cdylib
//! with `cargo build -p skipover-py --release` and import the resulting
//! shared library as `skipover_py` (see `python/smoke_test.py`).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use skipover::cli::verify_model;
use skipover::metrics::{ConvolutionAnalysis, StationReport};
use skipover::model::{solve_visit_ratios, NetworkModel, StationSpec, VisitRatios};
use skipover::{mva, oracle, stable_mva};

fn value_err(e: skipover::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Per-station performance indices at one population.
#[pyclass(frozen, name = "StationReport", module = "skipover_py")]
struct PyStationReport {
    inner: StationReport,
    name: String,
}

#[pymethods]
impl PyStationReport {
    #[getter]
    fn station(&self) -> usize {
        self.inner.station
    }

    #[getter]
    fn name(&self) -> &str {
        &self.name
    }

    #[getter]
    fn population(&self) -> usize {
        self.inner.population
    }

    /// Queue-length probabilities for `k = 0..=min(population, capacity)`.
    #[getter]
    fn distribution(&self) -> Vec<f64> {
        self.inner.distribution.clone()
    }

    #[getter]
    fn total_throughput(&self) -> f64 {
        self.inner.total_throughput
    }

    #[getter]
    fn productive_throughput(&self) -> f64 {
        self.inner.productive_throughput
    }

    #[getter]
    fn skipping_throughput(&self) -> f64 {
        self.inner.skipping_throughput
    }

    #[getter]
    fn utilization(&self) -> f64 {
        self.inner.utilization
    }

    #[getter]
    fn mean_queue_length(&self) -> f64 {
        self.inner.mean_queue_length
    }

    #[getter]
    fn mean_waiting_time(&self) -> f64 {
        self.inner.mean_waiting_time
    }

    /// Only populated by the `mva` method.
    #[getter]
    fn stability_flag(&self) -> Option<bool> {
        self.inner.stability_flag
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("station", self.inner.station)?;
        d.set_item("name", &self.name)?;
        d.set_item("population", self.inner.population)?;
        d.set_item("distribution", self.inner.distribution.clone())?;
        d.set_item("total_throughput", self.inner.total_throughput)?;
        d.set_item("productive_throughput", self.inner.productive_throughput)?;
        d.set_item("skipping_throughput", self.inner.skipping_throughput)?;
        d.set_item("utilization", self.inner.utilization)?;
        d.set_item("mean_queue_length", self.inner.mean_queue_length)?;
        d.set_item("mean_waiting_time", self.inner.mean_waiting_time)?;
        d.set_item("stability_flag", self.inner.stability_flag)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "StationReport(station={}, name='{}', population={}, X={:.6}, U={:.6})",
            self.inner.station,
            self.name,
            self.inner.population,
            self.inner.total_throughput,
            self.inner.utilization,
        )
    }
}

/// A validated closed network with finite buffers and skip-over routing.
#[pyclass(frozen, name = "NetworkModel", module = "skipover_py")]
struct PyNetworkModel {
    model: NetworkModel,
    visits: VisitRatios,
}

impl PyNetworkModel {
    fn build(stations: Vec<(String, usize, f64)>, routing: Vec<Vec<f64>>, reference: usize) -> PyResult<Self> {
        let specs = stations
            .into_iter()
            .map(|(name, capacity, service_time)| StationSpec::new(name, capacity, service_time))
            .collect();
        let model = NetworkModel::with_reference(specs, routing, reference).map_err(value_err)?;
        let visits = solve_visit_ratios(&model).map_err(value_err)?;
        Ok(PyNetworkModel { model, visits })
    }

    fn wrap_reports(&self, reports: Vec<StationReport>) -> Vec<PyStationReport> {
        reports
            .into_iter()
            .map(|inner| PyStationReport {
                name: self.model.station(inner.station).name.clone(),
                inner,
            })
            .collect()
    }

    fn reports_for(
        &self,
        method: &str,
        populations: &[usize],
    ) -> PyResult<Vec<PyStationReport>> {
        let max_population = populations.iter().copied().max().unwrap_or(0);
        self.model.check_population(max_population).map_err(value_err)?;
        let mut rows = Vec::new();
        match method {
            "convolution" => {
                let analysis = ConvolutionAnalysis::new(&self.model, &self.visits, max_population);
                for &n in populations {
                    rows.extend(analysis.reports(n).map_err(value_err)?);
                }
            }
            "mva" => {
                let states = mva::run(&self.model, &self.visits, max_population).map_err(value_err)?;
                for &n in populations {
                    if n == 0 {
                        rows.extend((0..self.model.station_count()).map(|i| {
                            let mut r = StationReport::empty(i);
                            r.stability_flag = Some(false);
                            r
                        }));
                    } else {
                        rows.extend(states[n - 1].reports());
                    }
                }
            }
            "stable-mva" | "stable_mva" => {
                let solution =
                    stable_mva::solve(&self.model, &self.visits, max_population).map_err(value_err)?;
                for &n in populations {
                    rows.extend(solution.reports(n));
                }
            }
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown method '{other}': expected convolution, mva or stable-mva"
                )))
            }
        }
        Ok(self.wrap_reports(rows))
    }
}

#[pymethods]
impl PyNetworkModel {
    /// `stations` is a list of `(name, capacity, service_time)` tuples and
    /// `routing` a row-stochastic matrix over the same indices.
    #[new]
    #[pyo3(signature = (stations, routing, reference = 0))]
    fn new(
        stations: Vec<(String, usize, f64)>,
        routing: Vec<Vec<f64>>,
        reference: usize,
    ) -> PyResult<Self> {
        PyNetworkModel::build(stations, routing, reference)
    }

    /// The cyclic network `0 -> 1 -> ... -> 0`.
    #[staticmethod]
    fn cycle(stations: Vec<(String, usize, f64)>) -> PyResult<Self> {
        let m = stations.len();
        let routing = (0..m)
            .map(|i| {
                let mut row = vec![0.0; m];
                row[(i + 1) % m] = 1.0;
                row
            })
            .collect();
        PyNetworkModel::build(stations, routing, 0)
    }

    #[getter]
    fn station_count(&self) -> usize {
        self.model.station_count()
    }

    /// Largest feasible population (the sum of the buffer capacities).
    #[getter]
    fn n_max(&self) -> usize {
        self.model.n_max()
    }

    #[getter]
    fn station_names(&self) -> Vec<String> {
        self.model.stations().iter().map(|s| s.name.clone()).collect()
    }

    #[getter]
    fn capacities(&self) -> Vec<usize> {
        self.model.capacities()
    }

    #[getter]
    fn service_times(&self) -> Vec<f64> {
        self.model.stations().iter().map(|s| s.service_time).collect()
    }

    #[getter]
    fn visit_ratios(&self) -> Vec<f64> {
        self.visits.values().to_vec()
    }

    #[getter]
    fn demands(&self) -> Vec<f64> {
        self.visits.demands().to_vec()
    }

    /// Solve at one population; returns one report per station.
    #[pyo3(signature = (population, method = "convolution"))]
    fn solve(&self, population: usize, method: &str) -> PyResult<Vec<PyStationReport>> {
        self.reports_for(method, &[population])
    }

    /// Solve the population range `start..=stop` in one recursive pass.
    #[pyo3(signature = (start, stop, method = "convolution"))]
    fn sweep(&self, start: usize, stop: usize, method: &str) -> PyResult<Vec<PyStationReport>> {
        if start < 1 || start > stop {
            return Err(PyValueError::new_err(format!(
                "invalid sweep range {start}..{stop}: need 1 <= start <= stop"
            )));
        }
        let populations: Vec<usize> = (start..=stop).collect();
        self.reports_for(method, &populations)
    }

    /// Run all three solvers plus the enumeration oracle and report the
    /// worst deviation per index family.
    #[pyo3(signature = (population, tolerance = 1e-9))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        population: usize,
        tolerance: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let summary = verify_model(
            &self.model,
            &self.visits,
            population,
            tolerance,
            oracle::DEFAULT_STATE_LIMIT,
        )
        .map_err(value_err)?;
        let lines = summary
            .lines
            .iter()
            .map(|l| {
                let d = PyDict::new(py);
                d.set_item("family", l.family)?;
                d.set_item("comparison", l.comparison)?;
                d.set_item("deviation", l.deviation)?;
                d.set_item("within", l.within)?;
                d.set_item("exempted", l.exempted)?;
                Ok(d)
            })
            .collect::<PyResult<Vec<_>>>()?;
        let out = PyDict::new(py);
        out.set_item("population", summary.population)?;
        out.set_item("tolerance", summary.tolerance)?;
        out.set_item("passed", summary.passed)?;
        out.set_item("mva_exempted", summary.mva_exempted)?;
        out.set_item("lines", lines)?;
        Ok(out)
    }

    /// Normalization constants `g(n)` for `n = 0..=population` as floats
    /// (saturating to `inf` outside `f64` range; see the `log2` variant).
    fn normalization_constants(&self, population: usize) -> Vec<f64> {
        let table = skipover::convolution::GTable::compute(&self.model, &self.visits, population);
        (0..=population).map(|n| table.full(n).to_f64()).collect()
    }

    /// `log2(g(n))`, exact in range even when `g(n)` itself overflows.
    fn log2_normalization_constants(&self, population: usize) -> Vec<f64> {
        let table = skipover::convolution::GTable::compute(&self.model, &self.visits, population);
        (0..=population)
            .map(|n| {
                let g = table.full(n);
                if g.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    g.mantissa().log2() + g.exponent() as f64
                }
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkModel(stations={}, n_max={}, reference={})",
            self.model.station_count(),
            self.model.n_max(),
            self.model.reference(),
        )
    }
}

#[pymodule]
fn skipover_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetworkModel>()?;
    m.add_class::<PyStationReport>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
