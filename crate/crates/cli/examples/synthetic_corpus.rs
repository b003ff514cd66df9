//! Write a synthetic corpus and a ready-to-run configuration.
//!
//! ```text
//! cargo run --release --example synthetic_corpus -- demo 2000 1000 0.8
//! termtraj --config demo/config.toml review-paths --k 3
//! ```

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use termtraj::ingest::write_tracks;
use termtraj::procedures::write_procedures;
use termtraj::rng::substream;
use termtraj::synthetic::{generate_corpus, CorpusOptions, SyntheticWorld};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "demo".into());
    let train: usize = args.next().map_or(Ok(2000), |s| s.parse())?;
    let held_out: usize = args.next().map_or(Ok(1000), |s| s.parse())?;
    // chance that an arrival keeps the speed flow of the one ahead
    let persistence: f64 = args.next().map_or(Ok(0.8), |s| s.parse())?;
    let dir = Path::new(&dir);
    fs::create_dir_all(dir)?;
    let world = SyntheticWorld::standard();
    for (name, arrivals, stream) in [("tracks.csv", train, "corpus"), ("heldout.csv", held_out, "heldout")] {
        let opts = CorpusOptions {
            arrivals,
            departures: arrivals / 10,
            overflights: arrivals / 10,
            flow_persistence: persistence,
            ..Default::default()
        };
        let flights = generate_corpus(&world, &opts, &mut substream(7, stream))?;
        write_tracks(BufWriter::new(File::create(dir.join(name))?), &flights)?;
    }
    write_procedures(dir.join("iap.toml"), &[world.iap.clone()])?;
    let a = &world.airspace;
    fs::write(
        dir.join("config.toml"),
        format!(
            "origin_lat = {}\norigin_lon = {}\norigin_alt_ft = {}\n\
             tracks = \"tracks.csv\"\niap = \"iap.toml\"\nactual = \"heldout.csv\"\nout_dir = \"out\"\n\
             seed = 1\nt_v = 60\nt_f = 40\nn_overlap = 10\nt_pair = 20\n\
             k_grid = [2, 3, 4]\nrank_grid = [2, 5, 10, 20]\n",
            a.origin_lat, a.origin_lon, a.origin_alt_ft
        ),
    )?;
    Ok(())
}
