//! Scores a ring of candidate views with and without a parameter mask
//! and reports the next best view under each.
//!
//! cargo run --release --example nbv_selection

use raem::fisher::{
    accumulate_training_fisher, score_candidates, CandidateSet, FisherOptions, ParameterMask, DEFAULT_LAMBDA,
};
use raem::scene::PARAMS_PER_GAUSSIAN;
use raem::splat::RenderSettings;
use raem::{Camera, IsotropicGaussian, Pose, SceneModel, Vec3};

fn main() -> raem::Result<()> {
    let mut gaussians = Vec::new();
    for i in 0..8 {
        let x = i as f64 * 0.25 - 1.0;
        gaussians.push(IsotropicGaussian::new(Vec3::new(x, -1.0, 0.0), 0.12, 0.8, [0.7, 0.4, 0.3])?);
        gaussians.push(IsotropicGaussian::new(Vec3::new(x, 1.0, 0.0), 0.12, 0.8, [0.3, 0.4, 0.7])?);
    }
    let scene = SceneModel::new(gaussians);
    let camera = Camera::with_fov(32, 70f64.to_radians())?;
    let options = FisherOptions {
        settings: RenderSettings {
            far: 8.0,
            ..RenderSettings::default()
        },
        ..FisherOptions::default()
    };

    let train_views = vec![(Pose::look_at(Vec3::new(0.0, -4.0, 0.5), Vec3::new(0.0, -1.0, 0.0), Vec3::z()), camera)];
    let train = accumulate_training_fisher(&scene, &train_views, DEFAULT_LAMBDA, &options);

    let poses = (0..12)
        .map(|i| {
            let a = i as f64 * std::f64::consts::TAU / 12.0;
            Pose::look_at(Vec3::new(4.0 * a.cos(), 4.0 * a.sin(), 0.5), Vec3::zeros(), Vec3::z())
        })
        .collect();
    let candidates = CandidateSet::new(poses, 2);

    let mask = ParameterMask {
        selected: (0..scene.len())
            .filter(|i| i % 2 == 1)
            .flat_map(|i| i * PARAMS_PER_GAUSSIAN..(i + 1) * PARAMS_PER_GAUSSIAN)
            .collect(),
    };
    let scores = score_candidates(&candidates, &camera, &scene, &train, Some(&mask), &options)?;
    for s in &scores {
        let t = s.pose.translation();
        println!(
            "{:2} at ({:+.2}, {:+.2}) eig {:.4e} masked {:.4e}",
            s.index,
            t.x,
            t.y,
            s.eig_unmasked,
            s.eig_masked.unwrap_or(0.0)
        );
    }
    let best = |masked: bool| {
        raem::fisher::argmax_lowest_index(scores.iter().map(|s| s.score(masked))).expect("nonempty")
    };
    println!("next best view unmasked: {:?}", best(false));
    println!("next best view masked to the far row: {:?}", best(true));
    Ok(())
}
