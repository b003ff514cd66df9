use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{GaussianComponent, MixtureModel, SegmentKind};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "termtraj-mixture/1";

#[derive(Serialize, Deserialize)]
struct ComponentDoc {
    weight: f64,
    mean: Vec<f64>,
    rank: usize,
    /// Row-major `n × rank`.
    cov_factor: Vec<f64>,
    noise_var: f64,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct ModelDoc {
    format: String,
    segment_kind: SegmentKind,
    dimension: usize,
    k: usize,
    components: Vec<ComponentDoc>,
}

impl ModelDoc {
    pub(crate) fn from_model(model: &MixtureModel) -> Self {
        ModelDoc {
            format: MODEL_FORMAT.to_string(),
            segment_kind: model.segment_kind,
            dimension: model.dimension,
            k: model.k(),
            components: model
                .components
                .iter()
                .map(|c| ComponentDoc {
                    weight: c.weight,
                    mean: c.mean.as_slice().to_vec(),
                    rank: c.rank(),
                    cov_factor: c.cov_factor.transpose().as_slice().to_vec(),
                    noise_var: c.noise_var,
                })
                .collect(),
        }
    }

    pub(crate) fn into_model(self) -> Result<MixtureModel> {
        if self.format != MODEL_FORMAT {
            return Err(Error::Parse(format!("unsupported model format `{}`", self.format)));
        }
        if self.components.len() != self.k {
            return Err(Error::Parse(format!("model declares {} components, has {}", self.k, self.components.len())));
        }
        let n = self.dimension;
        let components = self
            .components
            .into_iter()
            .map(|c| {
                if c.mean.len() != n || c.cov_factor.len() != n * c.rank {
                    return Err(Error::Parse("component shape does not match model dimension".into()));
                }
                Ok(GaussianComponent {
                    weight: c.weight,
                    mean: DVector::from_vec(c.mean),
                    cov_factor: DMatrix::from_row_slice(n, c.rank, &c.cov_factor),
                    noise_var: c.noise_var,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let model = MixtureModel {
            components,
            dimension: n,
            segment_kind: self.segment_kind,
        };
        model.validate()?;
        Ok(model)
    }
}

pub fn model_to_json(model: &MixtureModel) -> String {
    serde_json::to_string(&ModelDoc::from_model(model)).expect("model serializes")
}

pub fn model_from_json(text: &str) -> Result<MixtureModel> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    doc.into_model()
}

pub fn write_model(path: impl AsRef<Path>, model: &MixtureModel) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<MixtureModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
