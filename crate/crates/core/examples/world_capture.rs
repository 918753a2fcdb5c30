//! Builds a synthetic room, captures one RGB-D view and samples the
//! ground-truth surface cloud.
//!
//! cargo run --example world_capture -- [seed] [out_dir]

use std::path::PathBuf;

use raem::world::{build_world, capture_rgbd, ground_truth_point_cloud, CaptureSettings, WorldRecipe};
use raem::{Camera, Pose, Vec3};

fn main() -> raem::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "world_capture_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| raem::Error::io(&out, e))?;

    let recipe = WorldRecipe {
        random_obstacles: 4,
        ..WorldRecipe::default()
    };
    let world = build_world(&recipe, seed)?;
    println!("{} primitives, {} obstacles", world.primitives.len(), world.obstacles().count());

    let camera = Camera::with_fov(128, 90f64.to_radians())?;
    let pose = Pose::look_at(Vec3::new(1.0, 1.0, 1.5), Vec3::new(5.0, 5.0, 0.5), Vec3::z());
    let image = capture_rgbd(&world, &pose, &camera, &CaptureSettings::default());
    let (lo, hi) = image.depth.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &d| (a.min(d), b.max(d)));
    println!("depth range {lo:.3} .. {hi:.3} m");
    image.write_ppm(&out.join("view.ppm"))?;
    image.write_depth_grid(&out.join("view_depth.txt"))?;

    let cloud = ground_truth_point_cloud(&world, 50.0, 1e-3, seed)?;
    println!("{} ground-truth surface points", cloud.len());
    println!("wrote {}", out.display());
    Ok(())
}
