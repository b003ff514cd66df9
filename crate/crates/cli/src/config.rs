//! Run configuration: one flat TOML table. Relative paths are taken from
//! the directory holding the configuration file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use termtraj::metrics::CountingUnit;
use termtraj::AirspaceConfig;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct Settings {
    /// Track file (`id,time,lat,lon,alt`).
    pub tracks: Option<PathBuf>,
    /// Radar-vector nominal paths; defaults to the file written by
    /// `review-paths`.
    pub procedures: Option<PathBuf>,
    /// Procedure file holding the instrument approach.
    pub iap: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,

    pub t_v: usize,
    pub t_f: usize,
    pub n_overlap: usize,
    pub t_pair: usize,
    /// Horizontal distance to the approach path that counts as established.
    pub segment_threshold_nm: f64,
    pub proximity_nm: f64,
    pub default_speed_kts: f64,

    pub k_grid: Vec<usize>,
    pub rank_grid: Vec<usize>,
    pub k_rv: Option<usize>,
    pub k_fa: Option<usize>,
    pub rank_rv: Option<usize>,
    pub rank_fa: Option<usize>,
    pub em_max_iter: usize,
    pub em_tol: f64,

    pub pair_window_s: f64,
    pub pair_k: usize,
    pub pair_rank: Option<usize>,
    pub pair_min_samples: Option<usize>,

    pub review_k: usize,
    pub n_trajectories: usize,
    pub n_scenes: usize,
    pub scene_aircraft: usize,
    /// Fixed procedure sequence for every scene; drawn by frequency when
    /// absent.
    pub scene_procedures: Option<Vec<String>>,

    pub actual: Option<PathBuf>,
    pub synthetic: Option<PathBuf>,
    pub horizontal_min_nm: f64,
    pub vertical_min_ft: f64,
    pub los_unit: CountingUnit,
    /// Common resampling step for evaluation; 0 keeps the recorded samples.
    pub eval_step_s: f64,

    #[serde(flatten)]
    pub unknown: BTreeMap<String, toml::Value>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tracks: None,
            procedures: None,
            iap: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
            threads: None,
            t_v: 60,
            t_f: 40,
            n_overlap: 10,
            t_pair: 20,
            segment_threshold_nm: 0.5,
            proximity_nm: 0.5,
            default_speed_kts: 140.0,
            k_grid: vec![2, 3, 4, 5, 6],
            rank_grid: vec![1, 2, 5, 10, 20, 40],
            k_rv: None,
            k_fa: None,
            rank_rv: None,
            rank_fa: None,
            em_max_iter: 200,
            em_tol: 1e-6,
            pair_window_s: 180.0,
            pair_k: 1,
            pair_rank: None,
            pair_min_samples: None,
            review_k: 5,
            n_trajectories: 1000,
            n_scenes: 100,
            scene_aircraft: 3,
            scene_procedures: None,
            actual: None,
            synthetic: None,
            horizontal_min_nm: 3.0,
            vertical_min_ft: 1000.0,
            los_unit: CountingUnit::Event,
            eval_step_s: 5.0,
            unknown: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub airspace: AirspaceConfig,
    pub settings: Settings,
}

impl RunConfig {
    pub fn from_str(text: &str, base: &Path) -> CliResult<Self> {
        let airspace = AirspaceConfig::from_config_str(text).map_err(|e| CliError::usage(e.to_string()))?;
        airspace.validate().map_err(|e| CliError::usage(e.to_string()))?;
        let mut settings: Settings = toml::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))?;
        for key in AIRSPACE_KEYS {
            settings.unknown.remove(*key);
        }
        if let Some(key) = settings.unknown.keys().next() {
            return Err(CliError::usage(format!("config: unknown key `{key}`")));
        }
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                *path = base.join(&*path);
            }
        };
        resolve(&mut settings.tracks);
        resolve(&mut settings.procedures);
        resolve(&mut settings.iap);
        resolve(&mut settings.actual);
        resolve(&mut settings.synthetic);
        settings.out_dir = base.join(&settings.out_dir);
        let cfg = RunConfig { airspace, settings };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_str(&text, base)
    }

    fn validate(&self) -> CliResult<()> {
        let s = &self.settings;
        let counts = [
            ("t_v", s.t_v),
            ("t_f", s.t_f),
            ("n_overlap", s.n_overlap),
            ("t_pair", s.t_pair),
            ("em_max_iter", s.em_max_iter),
            ("pair_k", s.pair_k),
            ("review_k", s.review_k),
            ("scene_aircraft", s.scene_aircraft),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(CliError::usage(format!("config: `{name}` must be positive")));
        }
        if s.t_v < 2 || s.t_f < 2 || s.t_pair < 2 {
            return Err(CliError::usage("config: segment lengths must be at least 2"));
        }
        if s.n_overlap > s.t_v || s.n_overlap >= s.t_f {
            return Err(CliError::usage("config: n_overlap must be at most t_v and below t_f"));
        }
        if s.k_grid.is_empty() || s.rank_grid.is_empty() {
            return Err(CliError::usage("config: k_grid and rank_grid must be nonempty"));
        }
        if s.k_grid.iter().any(|&k| k < 2) {
            return Err(CliError::usage("config: k_grid values must be at least 2"));
        }
        for (name, v) in [("k_rv", s.k_rv), ("k_fa", s.k_fa), ("pair_min_samples", s.pair_min_samples)] {
            if v == Some(0) {
                return Err(CliError::usage(format!("config: `{name}` must be positive")));
            }
        }
        if s.threads == Some(0) {
            return Err(CliError::usage("config: `threads` must be positive"));
        }
        let positive = [
            ("segment_threshold_nm", s.segment_threshold_nm),
            ("proximity_nm", s.proximity_nm),
            ("default_speed_kts", s.default_speed_kts),
            ("em_tol", s.em_tol),
            ("pair_window_s", s.pair_window_s),
            ("horizontal_min_nm", s.horizontal_min_nm),
            ("vertical_min_ft", s.vertical_min_ft),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(CliError::usage(format!("config: `{name}` must be positive")));
        }
        if !(s.eval_step_s >= 0.0) {
            return Err(CliError::usage("config: `eval_step_s` must not be negative"));
        }
        Ok(())
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.settings.out_dir.join(name)
    }

    pub fn tracks(&self) -> CliResult<&Path> {
        required(&self.settings.tracks, "tracks")
    }

    pub fn iap(&self) -> CliResult<&Path> {
        required(&self.settings.iap, "iap")
    }

    pub fn procedures(&self) -> PathBuf {
        self.settings.procedures.clone().unwrap_or_else(|| self.out(crate::files::NOMINAL_PATHS))
    }
}

const AIRSPACE_KEYS: &[&str] = &[
    "origin_lat",
    "origin_lon",
    "origin_alt_ft",
    "radius_nm",
    "landing_ceiling_ft",
    "landing_radius_nm",
    "min_range_change_nm",
];

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> CliResult<&'a Path> {
    p.as_deref().ok_or_else(|| CliError::usage(format!("config: `{key}` is required for this command")))
}
