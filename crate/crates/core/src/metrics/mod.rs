//! Model selection and evaluation: silhouette scores, histogram
//! Jensen–Shannon divergence, trajectory variables and loss-of-separation
//! counting.

mod histogram;
mod separation;
mod silhouette;
mod variables;

pub use histogram::{freedman_diaconis_edges, js_divergence, shared_histograms, Histogram};
pub use separation::{loss_of_separation, CountingUnit, SeparationConfig, SeparationReport};
pub use silhouette::{silhouette_score, silhouette_sweep, SilhouetteSweep};
pub use variables::{extract_variables, TrajectoryVariables, VARIABLE_NAMES};
