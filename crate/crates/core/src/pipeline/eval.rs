use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::risk::{distance_distribution, waypoint_worst_case_risk, ConfidenceLevel, DistanceDistribution};
use crate::scene::SceneModel;

/// Distance law of the Gaussian with the smallest AVaR at `p`.
pub fn closest_perceived_distribution(
    scene: &SceneModel,
    p: &Vec3,
    eps: &ConfidenceLevel,
) -> Result<DistanceDistribution> {
    let worst = waypoint_worst_case_risk(p, scene, eps);
    let i = worst.argmin.ok_or(Error::EmptyScene)?;
    Ok(distance_distribution(p, &scene.gaussians()[i]))
}

/// Type-2 Wasserstein distance between two normals.
pub fn wasserstein2(a: &DistanceDistribution, b: &DistanceDistribution) -> f64 {
    (a.mean - b.mean).hypot(a.std - b.std)
}
