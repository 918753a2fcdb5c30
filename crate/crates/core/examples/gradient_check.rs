//! Compares the analytic loss gradient with central differences.
//!
//! cargo run --release --example gradient_check -- [seed]

use rand::Rng;
use raem::splat::{loss_and_gradient, render, RenderSettings};
use raem::{Camera, IsotropicGaussian, Pose, SceneModel, Vec3};

fn main() -> raem::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut rng = raem::rng::stream(seed, 0);
    let mut random_scene = |n: usize| {
        let gs = (0..n)
            .map(|_| {
                let mu = Vec3::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6), rng.random_range(2.0..4.0));
                let color = [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)];
                IsotropicGaussian::new(mu, rng.random_range(0.1..0.3), rng.random_range(0.3..0.9), color)
            })
            .collect::<raem::Result<Vec<_>>>()?;
        Ok::<_, raem::Error>(SceneModel::new(gs))
    };
    let target = random_scene(6)?;
    let scene = random_scene(6)?;

    let camera = Camera::with_fov(32, 60f64.to_radians())?;
    let settings = RenderSettings {
        far: 6.0,
        ..RenderSettings::default()
    };
    let pose = Pose::identity();
    let observed = render(&target, &pose, &camera, &settings).image;
    let gamma = 0.5;
    let (loss, grad) = loss_and_gradient(&scene, &pose, &camera, &observed, gamma, &settings)?;
    println!("loss {loss:.6}");

    let params = scene.to_params();
    let h = 1e-5;
    let eval = |p: &[f64]| -> raem::Result<f64> {
        let s = SceneModel::from_params(p)?;
        Ok(loss_and_gradient(&s, &pose, &camera, &observed, gamma, &settings)?.0)
    };
    let mut worst: f64 = 0.0;
    for j in 0..params.len() {
        let (mut plus, mut minus) = (params.clone(), params.clone());
        plus[j] += h;
        minus[j] -= h;
        let fd = (eval(&plus)? - eval(&minus)?) / (2.0 * h);
        let err = (fd - grad[j]).abs() / grad[j].abs().max(1e-6);
        worst = worst.max(err);
        println!("{j:3} analytic {:+.6e} fd {fd:+.6e} rel {err:.2e}", grad[j]);
    }
    println!("worst relative error {worst:.2e} (L1 kinks can spike single coordinates)");
    Ok(())
}
