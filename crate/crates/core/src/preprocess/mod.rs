//! From tracks to fixed-length model inputs: segmentation, procedure
//! assignment, resampling and deviation vectors.

mod dataset;
mod deviation;
mod dtw;
mod pchip;
mod segment;

pub use dataset::{
    column_names, read_matrix, sidecar_path, write_matrix, DatasetMeta, DeviationDataset, RowMeta, DATASET_FORMAT,
};
pub use deviation::{
    adjusted_transit_time, build_deviation_vector, deviation_dim, reconstruct_trajectory,
    DeviationVector,
};
pub use dtw::{assign_procedure, dtw_distance};
pub use pchip::{pchip_resample, Pchip};
pub use segment::{distance_to_polyline, overlapping_segments, segment_trajectory, OverlapSegments, SegmentedArrival};

/// Default resampled lengths for the two flight stages.
pub const DEFAULT_FINAL_APPROACH_LEN: usize = 150;
pub const DEFAULT_RADAR_VECTOR_LEN: usize = 350;
