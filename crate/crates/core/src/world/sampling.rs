use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::CandidateSet;
use crate::geometry::{Path, Pose, Vec3};
use crate::risk::{average_value_at_risk, ConfidenceLevel, DistanceDistribution};
use crate::rng;

use super::GroundTruthWorld;

/// Ground-truth surface sample `N(position, sigma_hat^2 I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthPoint {
    pub position: Vec3,
    pub sigma_hat: f64,
}

/// Uniform samples over every primitive face, `samples_per_area` per m² in
/// expectation (stochastic rounding of `area * density`).
pub fn ground_truth_point_cloud(
    world: &GroundTruthWorld,
    samples_per_area: f64,
    sigma_hat: f64,
    seed: u64,
) -> Result<Vec<GroundTruthPoint>> {
    if !(samples_per_area > 0.0) {
        return Err(Error::InvalidArgument("sample density must be positive".into()));
    }
    if !(sigma_hat > 0.0) {
        return Err(Error::InvalidArgument("sigma_hat must be positive".into()));
    }
    let mut rng = rng::stream(seed, rng::streams::GT_CLOUD);
    let mut cloud = Vec::new();
    for prim in &world.primitives {
        let ext = prim.max - prim.min;
        for axis in 0..3 {
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            let area = ext[a] * ext[b];
            for side in [prim.min[axis], prim.max[axis]] {
                let expected = area * samples_per_area;
                let n = expected.floor() as usize + usize::from(rng.random::<f64>() < expected.fract());
                for _ in 0..n {
                    let mut p = Vec3::zeros();
                    p[axis] = side;
                    p[a] = prim.min[a] + ext[a] * rng.random::<f64>();
                    p[b] = prim.min[b] + ext[b] * rng.random::<f64>();
                    cloud.push(GroundTruthPoint {
                        position: p,
                        sigma_hat,
                    });
                }
            }
        }
    }
    Ok(cloud)
}

/// Plain-text `x y z sigma` lines.
pub fn write_xyz<W: Write>(cloud: &[GroundTruthPoint], mut out: W) -> std::io::Result<()> {
    for p in cloud {
        writeln!(out, "{} {} {} {}", p.position.x, p.position.y, p.position.z, p.sigma_hat)?;
    }
    Ok(())
}

/// Distribution of the ground-truth point with the smallest AVaR at `p`.
pub fn closest_gt_distribution(
    cloud: &[GroundTruthPoint],
    p: &Vec3,
    eps: &ConfidenceLevel,
) -> Result<DistanceDistribution> {
    let mut best: Option<(f64, DistanceDistribution)> = None;
    for g in cloud {
        let d = DistanceDistribution {
            mean: (g.position - p).norm(),
            std: g.sigma_hat,
        };
        let a = average_value_at_risk(&d, eps);
        if best.is_none_or(|(b, _)| a < b) {
            best = Some((a, d));
        }
    }
    best.map(|(_, d)| d).ok_or(Error::EmptyCloud)
}

/// Candidate-generation stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Positions uniform in the union of balls around the waypoints; cameras
    /// look at the nearest waypoint.
    AlongPath,
    /// Positions uniform in one ball around the explored center; cameras
    /// look at the center.
    AroundCenter,
}

impl Stage {
    pub fn label(&self) -> u8 {
        match self {
            Stage::AlongPath => 1,
            Stage::AroundCenter => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateRequest {
    pub stage: Stage,
    pub count: usize,
    pub radius: f64,
    pub seed: u64,
}

fn uniform_in_ball(rng: &mut impl Rng, center: &Vec3, radius: f64) -> Vec3 {
    let dir = loop {
        let v = Vec3::from_fn(|_, _| StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-12 {
            break v / n;
        }
    };
    center + dir * (radius * rng.random::<f64>().cbrt())
}

/// Samples `request.count` camera poses. `accept` filters positions (for
/// instance to free space); rejected draws are redrawn.
pub fn sample_candidate_poses(
    request: &CandidateRequest,
    path: &Path,
    explored_center: &Vec3,
    accept: Option<&dyn Fn(&Vec3) -> bool>,
) -> Result<CandidateSet> {
    if request.count == 0 || !(request.radius >= 0.0) {
        return Err(Error::InvalidArgument("candidate count and radius must be positive".into()));
    }
    let mut rng = rng::stream(request.seed, rng::streams::CANDIDATES);
    let waypoints = path.waypoints();
    let r = request.radius;
    let max_draws = request.count * 10_000;
    let mut poses = Vec::with_capacity(request.count);
    let mut draws = 0;
    while poses.len() < request.count {
        draws += 1;
        if draws > max_draws {
            return Err(Error::InvalidArgument(format!(
                "only {} of {} candidates passed the filter",
                poses.len(),
                request.count
            )));
        }
        let (position, target) = match request.stage {
            Stage::AlongPath => {
                let k = rng.random_range(0..waypoints.len());
                let x = uniform_in_ball(&mut rng, &waypoints[k], r);
                // accept with 1/multiplicity so overlapping balls stay uniform
                let cover = waypoints.iter().filter(|w| (x - *w).norm() <= r).count().max(1);
                if cover > 1 && rng.random_range(0..cover) != 0 {
                    continue;
                }
                let nearest = waypoints
                    .iter()
                    .min_by(|a, b| (x - *a).norm().total_cmp(&(x - *b).norm()))
                    .expect("path is nonempty");
                (x, *nearest)
            }
            Stage::AroundCenter => (uniform_in_ball(&mut rng, explored_center, r), *explored_center),
        };
        if let Some(f) = accept {
            if !f(&position) {
                continue;
            }
        }
        poses.push(Pose::look_at(position, target, Vec3::z()));
    }
    Ok(CandidateSet::new(poses, request.stage.label()))
}

/// Filter that keeps candidate cameras in free space with `margin` meters of room.
pub fn free_space_filter(world: &GroundTruthWorld, margin: f64) -> impl Fn(&Vec3) -> bool + '_ {
    move |p| world.is_free(p, margin)
}
