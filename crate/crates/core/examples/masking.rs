//! Risk profile along a path and the masked subset of a random scene.
//!
//! cargo run --example masking -- [beta1] [beta2]

use rand::Rng;
use raem::mask::{mask_environment, masking_radius, risk_profile, MaskParams};
use raem::risk::ConfidenceLevel;
use raem::{IsotropicGaussian, Path, SceneModel, Vec3};

fn main() -> raem::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>().ok());
    let beta1 = args.next().flatten().unwrap_or(1.0);
    let beta2 = args.next().flatten().unwrap_or(1.0);
    let params = MaskParams::new(beta1, beta2, ConfidenceLevel::new(0.1)?)?;

    let mut rng = raem::rng::stream(7, 0);
    let gaussians = (0..300)
        .map(|_| {
            let mu = Vec3::new(rng.random_range(0.0..6.0), rng.random_range(-1.5..1.5), rng.random_range(0.0..2.0));
            IsotropicGaussian::new(mu, rng.random_range(0.02..0.2), 0.8, [0.5; 3])
        })
        .collect::<raem::Result<Vec<_>>>()?;
    let scene = SceneModel::new(gaussians);
    let path = Path::straight(Vec3::new(0.0, 0.0, 0.3), Vec3::new(6.0, 0.0, 0.3), 10)?;

    let profile = risk_profile(&path, &scene, &params);
    println!("{:>3} {:>10} {:>8} {:>8}", "k", "alpha", "r_mask", "argmin");
    for (k, e) in profile.entries.iter().enumerate() {
        println!("{k:3} {:10.4} {:8.4} {:>8}", e.alpha, e.r_mask, e.argmin.map_or("-".into(), |i| i.to_string()));
    }
    let masked = mask_environment(&scene, &path, &profile)?;
    println!("masked {} of {} Gaussians", masked.len(), scene.len());
    println!("radius at alpha = 0: {:.4}", masking_radius(0.0, &params));
    Ok(())
}
