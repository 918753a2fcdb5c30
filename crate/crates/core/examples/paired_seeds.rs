//! Paired RaEM on/off runs (plus uniform-radius variants) over several
//! seeds, sharing the stage-1 rounds between variants of one seed.
//!
//! cargo run --release --example paired_seeds -- [seeds] [config.toml]

use std::path::PathBuf;
use std::time::Instant;

use raem::pipeline::{finish, ExperimentConfig, Session};

fn main() -> raem::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map(|s| s.parse().expect("seed count")).unwrap_or(3);
    let base = match args.next() {
        Some(p) => ExperimentConfig::load(&PathBuf::from(p))?,
        None => ExperimentConfig::from_toml(include_str!("../configs/standard_room.toml"))?,
    };
    let radii = [0.1, 0.5, 1.0, 2.0];
    println!("seed,off,on,{}", radii.map(|r| format!("uniform_{r}")).join(","));
    for seed in 0..seeds {
        let start = Instant::now();
        let config = ExperimentConfig { seed, ..base.clone() };
        let mut shared = Session::start(config)?;
        shared.run_next_stage()?;
        let mut row = vec![
            finish(&mut shared.branch(false, None)).mean_w2,
            finish(&mut shared.branch(true, None)).mean_w2,
        ];
        for r in radii {
            row.push(finish(&mut shared.branch(true, Some(r))).mean_w2);
        }
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
        println!("{seed},{}  ({:.0} s)", cells.join(","), start.elapsed().as_secs_f64());
    }
    Ok(())
}
