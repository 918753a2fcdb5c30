//! Renders a small Gaussian scene and writes the RGB image and depth grid.
//!
//! cargo run --example render -- [out_dir]

use std::path::PathBuf;

use raem::splat::{render, RenderSettings};
use raem::{Camera, IsotropicGaussian, Pose, SceneModel, Vec3};

fn main() -> raem::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "render_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| raem::Error::io(&out, e))?;

    let scene = SceneModel::new(vec![
        IsotropicGaussian::new(Vec3::new(-0.4, 0.0, 3.0), 0.5, 0.9, [0.9, 0.2, 0.2])?,
        IsotropicGaussian::new(Vec3::new(0.4, 0.1, 3.5), 0.6, 0.8, [0.2, 0.8, 0.3])?,
        IsotropicGaussian::new(Vec3::new(0.0, -0.3, 2.5), 0.35, 0.95, [0.2, 0.3, 0.9])?,
    ]);
    let camera = Camera::with_fov(96, 60f64.to_radians())?;
    let settings = RenderSettings {
        far: 5.0,
        ..RenderSettings::default()
    };
    let output = render(&scene, &Pose::identity(), &camera, &settings);
    let covered = output.per_pixel_weight_sum.iter().filter(|&&w| w > 0.5).count();
    println!("{covered} of {} pixels more than half covered", camera.pixel_count());
    output.image.write_ppm(&out.join("render.ppm"))?;
    output.image.write_depth_grid(&out.join("render_depth.txt"))?;
    println!("wrote {}", out.display());
    Ok(())
}
