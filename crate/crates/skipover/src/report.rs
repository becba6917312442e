//! Model-file and report-document schemas.
//!
//! A model file is one JSON document: station list, routing matrix, optional
//! reference station (by name or zero-based index). A report document echoes
//! the model, identifies the solver, and carries one [`StationReport`] per
//! requested (population, station) pair. Field names and nesting are fixed;
//! identical invocations serialize identically apart from the timing field.

use crate::error::{Error, Result};
use crate::metrics::StationReport;
use crate::model::{solve_visit_ratios, NetworkModel, StationSpec, VisitRatios};
use serde::{Deserialize, Serialize};

/// Reference station designator accepted in model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StationRef {
    Index(usize),
    Name(String),
}

/// The on-disk model schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub stations: Vec<StationSpec>,
    pub routing: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<StationRef>,
}

impl ModelFile {
    pub fn from_model(model: &NetworkModel) -> ModelFile {
        ModelFile {
            stations: model.stations().to_vec(),
            routing: (0..model.station_count())
                .map(|i| model.routing().row(i).to_vec())
                .collect(),
            reference: Some(StationRef::Index(model.reference())),
        }
    }

    /// Validates into a [`NetworkModel`], resolving a named reference.
    pub fn into_model(self) -> Result<NetworkModel> {
        let reference = match &self.reference {
            None => 0,
            Some(StationRef::Index(i)) => *i,
            Some(StationRef::Name(name)) => self
                .stations
                .iter()
                .position(|s| &s.name == name)
                .ok_or_else(|| Error::UnknownReference(name.clone()))?,
        };
        NetworkModel::with_reference(self.stations, self.routing, reference)
    }
}

/// Solver identity recorded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub method: String,
    pub version: String,
}

/// Echo of the solved model, including the derived visit ratios and demands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationEcho {
    pub name: String,
    pub capacity: usize,
    pub service_time: f64,
    pub visit_ratio: f64,
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEcho {
    pub stations: Vec<StationEcho>,
    pub reference: usize,
    pub population_limit: usize,
}

impl ModelEcho {
    pub fn new(model: &NetworkModel, visits: &VisitRatios) -> ModelEcho {
        ModelEcho {
            stations: model
                .stations()
                .iter()
                .enumerate()
                .map(|(i, s)| StationEcho {
                    name: s.name.clone(),
                    capacity: s.capacity,
                    service_time: s.service_time,
                    visit_ratio: visits.visit(i),
                    demand: visits.demand(i),
                })
                .collect(),
            reference: model.reference(),
            population_limit: model.n_max(),
        }
    }
}

/// The machine-readable output of `solve` and `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub solver: SolverInfo,
    pub model: ModelEcho,
    pub reports: Vec<StationReport>,
    pub timing_ms: f64,
}

impl ReportDocument {
    pub fn new(
        method: &str,
        model: &NetworkModel,
        visits: &VisitRatios,
        reports: Vec<StationReport>,
        timing_ms: f64,
    ) -> ReportDocument {
        ReportDocument {
            solver: SolverInfo {
                method: method.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            model: ModelEcho::new(model, visits),
            reports,
            timing_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Fixed column order; the distribution is one space-separated field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "population,station,name,total_throughput,productive_throughput,\
             skipping_throughput,utilization,mean_queue_length,mean_waiting_time,\
             stability_flag,distribution\n",
        );
        for r in &self.reports {
            let flag = match r.stability_flag {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            };
            let dist = r
                .distribution
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},\"{}\"\n",
                r.population,
                r.station,
                csv_field(&self.model.stations[r.station].name),
                r.total_throughput,
                r.productive_throughput,
                r.skipping_throughput,
                r.utilization,
                r.mean_queue_length,
                r.mean_waiting_time,
                flag,
                dist,
            ));
        }
        out
    }

    /// Human-readable table, 12 significant digits.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "method: {}   population limit: {}\n",
            self.solver.method, self.model.population_limit
        );
        out.push_str(&format!(
            "{:<4} {:<12} {:>4} {:>18} {:>18} {:>18} {:>18} {:>18} {:>18}{}\n",
            "n",
            "station",
            "cap",
            "throughput",
            "productive",
            "skipping",
            "utilization",
            "queue_length",
            "waiting_time",
            if self.solver.method == "mva" {
                "  flag"
            } else {
                ""
            },
        ));
        for r in &self.reports {
            let echo = &self.model.stations[r.station];
            let flag = match r.stability_flag {
                Some(true) => "  !".to_string(),
                Some(false) => "   ".to_string(),
                None => String::new(),
            };
            out.push_str(&format!(
                "{:<4} {:<12} {:>4} {:>18} {:>18} {:>18} {:>18} {:>18} {:>18}{}\n",
                r.population,
                echo.name,
                echo.capacity,
                sig12(r.total_throughput),
                sig12(r.productive_throughput),
                sig12(r.skipping_throughput),
                sig12(r.utilization),
                sig12(r.mean_queue_length),
                sig12(r.mean_waiting_time),
                flag,
            ));
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Table => self.to_table(),
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

/// Output formats of the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Solves the model's visit ratios (shared by the CLI and the bindings).
pub fn prepare(model: &NetworkModel) -> Result<VisitRatios> {
    solve_visit_ratios(model)
}
