//! Output file names inside the run directory.

pub const NOMINAL_CANDIDATES: &str = "nominal_candidates.toml";
pub const NOMINAL_PATHS: &str = "nominal_paths.toml";
pub const REVIEW_REPORT: &str = "review_report.json";

pub const RADAR_VECTOR_DATA: &str = "radar_vector.csv";
pub const FINAL_APPROACH_DATA: &str = "final_approach.csv";
pub const ARRIVAL_DATA: &str = "arrival.csv";
pub const ASSIGNMENTS: &str = "assignments.csv";
pub const EXCLUSIONS: &str = "exclusions.csv";
pub const INGEST_REPORT: &str = "ingest_report.json";

pub const SELECTION: &str = "selection.json";

pub const SINGLE_MODEL: &str = "single_model.json";
pub const TRAIN_LOG: &str = "train_log.json";
pub const PAIRWISE_MODEL: &str = "pairwise_model.json";
pub const TRAIN_PAIRWISE_LOG: &str = "train_pairwise_log.json";

pub const TRAJECTORIES: &str = "trajectories.csv";
pub const SCENES: &str = "scenes.csv";
pub const INDEPENDENT_SCENES: &str = "scenes_independent.csv";

pub const EVALUATION: &str = "evaluation.json";
