//! Deviation-vector dataset files: a CSV matrix (one row per flight,
//! `3T + 2` columns) with a JSON sidecar describing the rows.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::SegmentKind;

pub const DATASET_FORMAT: &str = "termtraj-deviations/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMeta {
    pub flight_id: String,
    pub procedure: String,
    /// Absolute time of the last track point (landing time).
    pub arrival_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format: String,
    pub segment: SegmentKind,
    /// Points per trajectory.
    pub length: usize,
    pub rows: Vec<RowMeta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationDataset {
    pub meta: DatasetMeta,
    pub data: DMatrix<f64>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Column labels: `t,d,dx1,dy1,dz1,...`.
pub fn column_names(length: usize) -> Vec<String> {
    let mut names = vec!["t".to_string(), "d".to_string()];
    for i in 1..=length {
        names.push(format!("dx{i}"));
        names.push(format!("dy{i}"));
        names.push(format!("dz{i}"));
    }
    names
}

impl DeviationDataset {
    pub fn new(segment: SegmentKind, length: usize, rows: Vec<(RowMeta, Vec<f64>)>) -> Result<Self> {
        let dim = 3 * length + 2;
        let mut data = DMatrix::zeros(rows.len(), dim);
        let mut meta_rows = Vec::with_capacity(rows.len());
        for (i, (meta, v)) in rows.into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Dimension { expected: dim, got: v.len() });
            }
            data.row_mut(i).copy_from_slice(&v);
            meta_rows.push(meta);
        }
        Ok(DeviationDataset {
            meta: DatasetMeta {
                format: DATASET_FORMAT.into(),
                segment,
                length,
                rows: meta_rows,
            },
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_matrix(path, &column_names(self.meta.length), &self.data)?;
        let json = serde_json::to_string_pretty(&self.meta).expect("serializable");
        fs::write(sidecar_path(path), json + "\n").map_err(|e| Error::io(sidecar_path(path), e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let side = sidecar_path(path);
        let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let meta: DatasetMeta =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", side.display())))?;
        if meta.format != DATASET_FORMAT {
            return Err(Error::Parse(format!("unknown dataset format `{}`", meta.format)));
        }
        let data = read_matrix(path, 3 * meta.length + 2)?;
        if data.nrows() != meta.rows.len() {
            return Err(Error::Parse(format!(
                "{}: {} rows but sidecar lists {}",
                path.display(),
                data.nrows(),
                meta.rows.len()
            )));
        }
        Ok(DeviationDataset { meta, data })
    }
}

/// Write a numeric matrix as CSV with a header row. Values use the
/// shortest representation that round-trips.
pub fn write_matrix(path: &Path, header: &[String], data: &DMatrix<f64>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let err = |e: csv::Error| Error::Parse(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(err)?;
    for row in data.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: &Path, ncols: usize) -> Result<DMatrix<f64>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(std::io::BufReader::new(file));
    let mut values = Vec::new();
    let mut nrows = 0;
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if rec.len() != ncols {
            return Err(Error::Dimension { expected: ncols, got: rec.len() });
        }
        for f in rec.iter() {
            values.push(
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("{}: bad number `{f}`", path.display())))?,
            );
        }
        nrows += 1;
    }
    Ok(DMatrix::from_row_slice(nrows, ncols, &values))
}
