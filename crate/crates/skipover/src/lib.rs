//! Analytic solver for closed, single-class queueing networks whose stations
//! have finite buffers and skip-over routing.
//!
//! A customer that arrives at a station with a full buffer does not queue
//! there: it is immediately rerouted according to the routing matrix. Under
//! exponential service these networks keep a product-form steady state, and
//! all performance indices can be computed exactly from normalization
//! constants.
//!
//! The crate offers three interchangeable solution algorithms plus a
//! brute-force enumeration oracle:
//!
//! - [`convolution`] — the normalization-constant recursion, in overflow-safe
//!   scaled arithmetic, including the dual-direction split tables used to
//!   remove one station at a time.
//! - [`mva`] — an extended Mean Value Analysis recursion over the population,
//!   with explicit detection of the numerical instability of its
//!   complement-based empty-queue probability.
//! - [`stable_mva`] — a subtraction-free MVA variant that aggregates the
//!   network into a chain of two-station tandem models and stays accurate up
//!   to the maximum feasible population.
//! - [`oracle`] — exhaustive state-space enumeration for desk-scale ground
//!   truth.
//!
//! Performance indices (queue-length distributions, total/productive/skipping
//! throughput, utilization, mean queue length, mean waiting time) are derived
//! in [`metrics`]. The `skipover` binary exposes `solve`, `sweep` and
//! `verify` commands over JSON model files; see [`cli`] and [`report`].

pub mod cli;
pub mod convolution;
mod error;
pub mod metrics;
pub mod model;
pub mod mva;
pub mod oracle;
pub mod report;
pub mod scaled;
pub mod stable_mva;

pub use error::{Error, Result};
pub use metrics::{ConvolutionAnalysis, StationReport};
pub use model::{solve_visit_ratios, NetworkModel, RoutingMatrix, StationSpec, VisitRatios};
pub use scaled::ScaledValue;
