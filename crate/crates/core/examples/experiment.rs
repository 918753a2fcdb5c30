//! Runs the full acquisition protocol once and writes the report.
//!
//! cargo run --release --example experiment -- [config.toml] [out_dir]

use std::path::PathBuf;
use std::time::Instant;

use raem::pipeline::{emit_report, run_experiment, ExperimentConfig};

fn main() -> raem::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = match args.next() {
        Some(p) => ExperimentConfig::load(&PathBuf::from(p))?,
        None => ExperimentConfig::from_toml(include_str!("../configs/standard_room.toml"))?,
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "experiment_out".into()));

    let start = Instant::now();
    let report = run_experiment(&config)?;
    println!("finished in {:.1} s, valid = {}", start.elapsed().as_secs_f64(), report.valid);
    if let Some(f) = &report.failure {
        println!("failure: {f}");
        return Ok(());
    }
    println!("{} Gaussians, {} training iterations", report.gaussians, report.training_iterations);
    for s in &report.selections {
        println!(
            "round {:2} stage {} candidate {:3} eig {:.4e} masked {:?}",
            s.round, s.stage, s.candidate, s.eig, s.masked_gaussians
        );
    }
    for m in &report.waypoints {
        println!(
            "waypoint {:2}: perceived N({:.3}, {:.3}) truth N({:.3}, {:.4}) W2 {:.4}",
            m.waypoint, m.perceived.mean, m.perceived.std, m.ground_truth.mean, m.ground_truth.std, m.w2
        );
    }
    println!("mean W2 {:.4}, max W2 {:.4}", report.mean_w2, report.max_w2);
    let files = emit_report(&report, &out)?;
    println!("wrote {} files under {}", files.len(), out.display());
    Ok(())
}
