//! Pairwise models over successive arrivals and correlated N-aircraft
//! traffic scenes assembled from them.

mod assemble;
mod pairs;
mod scene;

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use assemble::{assemble_scene_params, BlockSource, SceneParams};
pub use pairs::{arrival_procedural, extract_pairs, ArrivalRecord, PairwiseSample, DEFAULT_WINDOW_S};
pub use scene::{
    generate_independent_scene, generate_scene, read_scenes, write_scenes, SceneTrajectory, TrafficScene,
    MAX_DELTA_ATTEMPTS,
};

use crate::error::{Error, Result};
use crate::mixture::io::ModelDoc;
use crate::mixture::{EmOptions, MixtureModel, SegmentKind};
use crate::preprocess::deviation_dim;
use crate::rng::Rng;
use crate::single_model::{train_segment, SegmentReport};

pub const PAIRWISE_FORMAT: &str = "termtraj-pairwise/1";

/// Ordered procedure pair `(first arrival, second arrival)`.
pub type ProcedurePair = (String, String);

/// Pairwise mixtures per procedure combination over
/// `[τ⁽¹⁾, δ¹², τ⁽²⁾]`, each `τ` of dimension `3 * length + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseModels {
    pub length: usize,
    pub models: BTreeMap<ProcedurePair, MixtureModel>,
}

impl PairwiseModels {
    pub fn tau_dim(&self) -> usize {
        deviation_dim(self.length)
    }

    pub fn get(&self, a: &str, b: &str) -> Result<&MixtureModel> {
        self.models
            .get(&(a.to_string(), b.to_string()))
            .ok_or_else(|| Error::MissingModel(a.to_string(), b.to_string()))
    }

    /// One draw from the marginal of `δ` under the `(a, b)` model.
    pub fn sample_delta(&self, a: &str, b: &str, rng: &mut Rng) -> Result<f64> {
        let model = self.get(a, b)?;
        let c = &model.components[model.sample_component(rng)];
        let i = self.tau_dim();
        let var = c.cov_factor.row(i).norm_squared() + c.noise_var;
        Ok(c.mean[i] + var.sqrt() * rng.sample::<f64, _>(StandardNormal))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseReport {
    pub trained: Vec<(ProcedurePair, SegmentReport)>,
    /// Groups below the sample minimum, with their sizes.
    pub skipped: Vec<(ProcedurePair, usize)>,
}

/// Fit one mixture per procedure combination. Groups with fewer than
/// `min_samples` rows (default `5 * k`) are skipped with a warning.
pub fn train_pairwise(
    groups: &BTreeMap<ProcedurePair, DMatrix<f64>>,
    length: usize,
    k: usize,
    rank: usize,
    min_samples: Option<usize>,
    opts: &EmOptions,
    rng: &mut Rng,
) -> Result<(PairwiseModels, PairwiseReport)> {
    let dim = 2 * deviation_dim(length) + 1;
    let min = min_samples.unwrap_or(5 * k);
    let mut models = BTreeMap::new();
    let mut report = PairwiseReport {
        trained: Vec::new(),
        skipped: Vec::new(),
    };
    for (key, data) in groups {
        if data.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: data.ncols(),
            });
        }
        if data.nrows() < min.max(1) {
            log::warn!(
                "skipping procedure pair ({}, {}): {} samples, need {min}",
                key.0,
                key.1,
                data.nrows()
            );
            report.skipped.push((key.clone(), data.nrows()));
            continue;
        }
        let (model, seg) = train_segment(data, k, rank, SegmentKind::Pairwise, opts, rng)?;
        models.insert(key.clone(), model);
        report.trained.push((key.clone(), seg));
    }
    Ok((
        PairwiseModels { length, models },
        report,
    ))
}

#[derive(Serialize, Deserialize)]
struct PairEntry {
    first: String,
    second: String,
    model: ModelDoc,
}

#[derive(Serialize, Deserialize)]
struct PairwiseDoc {
    format: String,
    length: usize,
    models: Vec<PairEntry>,
}

impl PairwiseModels {
    pub fn to_json(&self) -> String {
        let doc = PairwiseDoc {
            format: PAIRWISE_FORMAT.into(),
            length: self.length,
            models: self
                .models
                .iter()
                .map(|((a, b), m)| PairEntry {
                    first: a.clone(),
                    second: b.clone(),
                    model: ModelDoc::from_model(m),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PairwiseDoc = serde_json::from_str(text).map_err(|e| Error::Parse(format!("pairwise model file: {e}")))?;
        if doc.format != PAIRWISE_FORMAT {
            return Err(Error::Parse(format!("unsupported model format `{}`", doc.format)));
        }
        let dim = 2 * deviation_dim(doc.length) + 1;
        let mut models = BTreeMap::new();
        for e in doc.models {
            let m = e.model.into_model()?;
            if m.dimension != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: m.dimension,
                });
            }
            models.insert((e.first, e.second), m);
        }
        Ok(PairwiseModels {
            length: doc.length,
            models,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
