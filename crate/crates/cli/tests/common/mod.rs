//! Synthetic corpora on disk and a handle for running the binary on them.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use termtraj::ingest::write_tracks;
use termtraj::procedures::write_procedures;
use termtraj::rng::substream;
use termtraj::synthetic::{generate_corpus, CorpusOptions, SyntheticWorld};

pub struct Corpus {
    pub train: usize,
    pub held_out: usize,
    pub persistence: f64,
    /// Extra config lines appended after the defaults below.
    pub extra: String,
}

impl Corpus {
    pub fn small() -> Self {
        Corpus {
            train: 300,
            held_out: 150,
            persistence: 0.0,
            extra: "t_v = 20\nt_f = 15\nn_overlap = 5\nt_pair = 8\nk_grid = [2, 3]\nrank_grid = [2, 5]\n\
                    n_trajectories = 100\nn_scenes = 20\n"
                .into(),
        }
    }
}

pub struct Workspace {
    pub dir: TempDir,
}

impl Workspace {
    pub fn new(c: &Corpus) -> Self {
        let dir = tempfile::tempdir().expect("temp dir");
        let world = SyntheticWorld::standard();
        for (name, arrivals, stream) in [("tracks.csv", c.train, "corpus"), ("heldout.csv", c.held_out, "heldout")] {
            let opts = CorpusOptions {
                arrivals,
                departures: arrivals / 10,
                overflights: arrivals / 10,
                flow_persistence: c.persistence,
                ..Default::default()
            };
            let flights = generate_corpus(&world, &opts, &mut substream(7, stream)).expect("corpus");
            write_tracks(BufWriter::new(File::create(dir.path().join(name)).unwrap()), &flights).unwrap();
        }
        write_procedures(dir.path().join("iap.toml"), &[world.iap.clone()]).unwrap();
        let a = &world.airspace;
        let config = format!(
            "origin_lat = {}\norigin_lon = {}\norigin_alt_ft = {}\n\
             tracks = \"tracks.csv\"\niap = \"iap.toml\"\nactual = \"heldout.csv\"\nout_dir = \"out\"\nseed = 1\n{}",
            a.origin_lat, a.origin_lon, a.origin_alt_ft, c.extra
        );
        fs::write(dir.path().join("config.toml"), config).unwrap();
        Workspace { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join("out").join(name)
    }

    /// Run the binary with `--config config.toml` followed by `args`.
    pub fn run(&self, args: &[&str]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_termtraj"));
        cmd.current_dir(self.dir.path()).arg("--config").arg("config.toml").args(args);
        cmd.output().expect("spawn termtraj")
    }

    pub fn run_ok(&self, args: &[&str]) -> Output {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "termtraj {args:?} failed ({:?}): {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    /// Every file under `out/`, by name.
    pub fn outputs(&self) -> BTreeMap<String, Vec<u8>> {
        snapshot(&self.dir.path().join("out"))
    }

    pub fn json(&self, name: &str) -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(self.out(name)).unwrap()).unwrap()
    }
}

pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    if let Ok(entries) = fs::read_dir(dir) {
        for e in entries.flatten() {
            if e.path().is_file() {
                files.insert(e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap());
            }
        }
    }
    files
}

/// The command sequence of a full run.
pub const PIPELINE: &[&[&str]] = &[
    &["review-paths", "--k", "3"],
    &["ingest"],
    &["select"],
    &["train"],
    &["generate"],
    &["train-pairwise"],
    &["generate-scenes"],
    &["generate-scenes", "--independent"],
    &["evaluate"],
];
