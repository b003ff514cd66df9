//! Terminal-airspace arrival trajectory modeling: ingestion and
//! segmentation of surveillance tracks, deviation vectors against flight
//! procedures, Gaussian-mixture training with low-rank covariances, and
//! generation of single trajectories and multi-aircraft traffic scenes.

pub mod error;
pub mod ingest;
pub mod kmeans;
pub mod linalg;
pub mod metrics;
pub mod mixture;
pub mod multi_model;
pub mod preprocess;
pub mod procedures;
pub mod rng;
pub mod single_model;
pub mod synthetic;
pub mod trajectory;
pub mod units;

pub use error::{Error, Result};
pub use ingest::{AirspaceConfig, EnuPoint, EnuTrack, Flight, FlightClass, TrackPoint};
pub use mixture::{GaussianComponent, MixtureModel, SegmentKind};
pub use preprocess::{DeviationVector, SegmentedArrival};
pub use procedures::{ProceduralTrajectory, Procedure, ProcedureKind, Waypoint};
