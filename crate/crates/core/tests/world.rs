mod common;

use common::*;
use rand::Rng;
use raem::geometry::{Camera, Mat3};
use raem::risk::{average_value_at_risk, ConfidenceLevel, DistanceDistribution};
use raem::world::{
    build_world, capture_rgbd, closest_gt_distribution, ground_truth_point_cloud, sample_candidate_poses, BoxSpec,
    CandidateRequest, CaptureSettings, GroundTruthPoint, GroundTruthWorld, Primitive, Stage, WorldRecipe,
};
use raem::{Path, Pose, Vec3};

fn five_obstacles() -> WorldRecipe {
    WorldRecipe {
        random_obstacles: 5,
        corridor_clearance: 0.5,
        ..WorldRecipe::default()
    }
}

/// Distance from a point to a box, written per axis.
fn point_box_distance(p: &Vec3, b: &Primitive) -> f64 {
    let mut s = 0.0;
    for a in 0..3 {
        let d = if p[a] < b.min[a] {
            b.min[a] - p[a]
        } else if p[a] > b.max[a] {
            p[a] - b.max[a]
        } else {
            0.0
        };
        s += d * d;
    }
    s.sqrt()
}

/// Nearest entry distance over all primitives, testing each of the six
/// face planes of every box.
fn brute_force_depth(world: &GroundTruthWorld, origin: &Vec3, dir: &Vec3) -> Option<f64> {
    let mut best: Option<f64> = None;
    for b in &world.primitives {
        for axis in 0..3 {
            if dir[axis] == 0.0 {
                continue;
            }
            for plane in [b.min[axis], b.max[axis]] {
                let t = (plane - origin[axis]) / dir[axis];
                if t <= 1e-9 {
                    continue;
                }
                let hit = origin + dir * t;
                let inside = (0..3).all(|a| a == axis || (hit[a] >= b.min[a] - 1e-12 && hit[a] <= b.max[a] + 1e-12));
                if inside && best.is_none_or(|x| t < x) {
                    best = Some(t);
                }
            }
        }
    }
    best
}

fn camera() -> Camera {
    Camera::with_fov(24, 90f64.to_radians()).unwrap()
}

#[test]
fn corridor_clearance_holds_for_many_seeds() {
    let recipe = five_obstacles();
    let path = recipe.payload_path().unwrap();
    let w = path.waypoints();
    for seed in 0..100 {
        let world = build_world(&recipe, seed).unwrap();
        assert_eq!(world.obstacles().count(), 5);
        for b in world.obstacles() {
            for s in w.windows(2) {
                for i in 0..=4000 {
                    let p = s[0] + (s[1] - s[0]) * (i as f64 / 4000.0);
                    assert!(point_box_distance(&p, b) >= recipe.corridor_clearance - 1e-9, "seed {seed}");
                }
            }
        }
    }
}

#[test]
fn capture_depths_match_brute_force() {
    let recipe = five_obstacles();
    let cam = camera();
    let settings = CaptureSettings::default();
    let size = Vec3::from(recipe.room_size);
    let diagonal = size.norm();
    let mut r = rng(41);
    for seed in 0..10 {
        let world = build_world(&recipe, seed).unwrap();
        let eye = loop {
            let e = Vec3::new(r.random_range(0.2..9.8), r.random_range(0.2..9.8), r.random_range(0.2..2.8));
            if world.is_free(&e, 0.05) {
                break e;
            }
        };
        let target = Vec3::new(r.random_range(0.0..10.0), r.random_range(0.0..10.0), r.random_range(0.0..3.0));
        let pose = Pose::look_at(eye, target, Vec3::z());
        let img = capture_rgbd(&world, &pose, &cam, &settings);
        for v in 0..cam.height {
            for u in 0..cam.width {
                let idx = img.index(u, v);
                let depth = img.depth[idx];
                assert!(depth.is_finite() && depth > 0.0 && depth <= diagonal, "{depth}");
                let dir_cam = cam.ray_direction(&cam.pixel_center(u, v));
                let dir = pose.rotation() * dir_cam;
                let t = brute_force_depth(&world, &eye, &dir).expect("closed room");
                assert!((depth - t * dir_cam.z).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn wall_depth_equals_plane_distance() {
    let world = build_world(&WorldRecipe::default(), 0).unwrap();
    let cam = camera();
    for (x, y, z) in [(2.0, 5.0, 1.5), (7.25, 3.0, 1.0), (9.0, 8.0, 2.0)] {
        let eye = Vec3::new(x, y, z);
        let pose = Pose::look_at(eye, eye + Vec3::x(), Vec3::z());
        let img = capture_rgbd(&world, &pose, &cam, &CaptureSettings::default());
        let center = img.index(cam.width / 2, cam.height / 2);
        assert!((img.depth[center] - (10.0 - x)).abs() < 1e-9);
        for (p, d) in img.depth.iter().enumerate() {
            let (u, v) = (p % cam.width, p / cam.width);
            let dir = pose.rotation() * cam.ray_direction(&cam.pixel_center(u, v));
            let hit = eye + dir * ((10.0 - x) / dir.x);
            if hit.y > 0.0 && hit.y < 10.0 && hit.z > 0.0 && hit.z < 3.0 {
                assert!((d - (10.0 - x)).abs() < 1e-9, "pixel {p}: {d}");
            }
        }
    }
}

fn transform_world(world: &GroundTruthWorld, rot: &Mat3, shift: &Vec3) -> GroundTruthWorld {
    let map = |p: &Vec3| rot * p + shift;
    let primitives = world
        .primitives
        .iter()
        .map(|b| {
            let (a, c) = (map(&b.min), map(&b.max));
            Primitive {
                min: a.inf(&c),
                max: a.sup(&c),
                ..*b
            }
        })
        .collect();
    let (a, c) = (map(&world.bounds_min), map(&world.bounds_max));
    let (ia, ic) = (map(&world.interior_min), map(&world.interior_max));
    GroundTruthWorld {
        primitives,
        bounds_min: a.inf(&c),
        bounds_max: a.sup(&c),
        interior_min: ia.inf(&ic),
        interior_max: ia.sup(&ic),
    }
}

#[test]
fn capture_is_pose_equivariant() {
    let world = build_world(&five_obstacles(), 3).unwrap();
    let cam = camera();
    let settings = CaptureSettings::default();
    let rot = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let shift = Vec3::new(2.0, -3.0, 0.5);
    let moved = transform_world(&world, &rot, &shift);
    let moved_settings = CaptureSettings {
        light_direction: rot * settings.light_direction,
        ..settings
    };
    let pose = Pose::look_at(Vec3::new(1.0, 2.0, 1.2), Vec3::new(6.0, 7.0, 0.5), Vec3::z());
    let moved_pose = Pose::new(rot * pose.rotation(), rot * pose.translation() + shift).unwrap();
    let a = capture_rgbd(&world, &pose, &cam, &settings);
    let b = capture_rgbd(&moved, &moved_pose, &cam, &moved_settings);
    for p in 0..cam.pixel_count() {
        assert!((a.depth[p] - b.depth[p]).abs() < 1e-9);
        for k in 0..3 {
            assert!((a.rgb[p][k] - b.rgb[p][k]).abs() < 1e-9);
        }
    }
}

#[test]
fn cloud_density_on_unit_cube() {
    let recipe = WorldRecipe {
        enclosed: false,
        fixed_obstacles: vec![BoxSpec {
            min: [0.0, 0.0, 0.0],
            max: [1.0, 1.0, 1.0],
            color: [0.5; 3],
        }],
        path: vec![[3.0, 3.0, 0.5]],
        ..WorldRecipe::default()
    };
    let world = build_world(&recipe, 0).unwrap();
    let cloud = ground_truth_point_cloud(&world, 100.0, 1e-3, 5).unwrap();
    let on_face = cloud.iter().filter(|p| p.position.x == 0.0).count();
    assert!((on_face as f64 - 100.0).abs() <= 30.0, "{on_face}");
    let total_area = 6.0;
    assert!((cloud.len() as f64 - 100.0 * total_area).abs() <= 3.0 * (600f64).sqrt());
    for p in &cloud {
        let on_surface = (0..3).any(|a| p.position[a] == 0.0 || p.position[a] == 1.0);
        let inside = (0..3).all(|a| (0.0..=1.0).contains(&p.position[a]));
        assert!(on_surface && inside);
        assert_eq!(p.sigma_hat, 1e-3);
    }
    assert_eq!(cloud, ground_truth_point_cloud(&world, 100.0, 1e-3, 5).unwrap());
}

#[test]
fn stage_one_candidates_stay_near_path() {
    let path = Path::straight(Vec3::new(1.0, 1.0, 0.3), Vec3::new(9.0, 9.0, 0.3), 10).unwrap();
    let request = CandidateRequest {
        stage: Stage::AlongPath,
        count: 250,
        radius: 2.0,
        seed: 9,
    };
    let set = sample_candidate_poses(&request, &path, &Vec3::zeros(), None).unwrap();
    assert_eq!(set.len(), 250);
    assert!(set.stages.iter().all(|s| *s == 1));
    for pose in &set.poses {
        let t = pose.translation();
        let nearest = path
            .waypoints()
            .iter()
            .min_by(|a, b| (t - *a).norm().total_cmp(&(t - *b).norm()))
            .unwrap();
        assert!((t - nearest).norm() <= 2.0 + 1e-12);
        let forward = pose.rotation().column(2).into_owned();
        assert!((forward - (nearest - t).normalize()).norm() < 1e-9);
    }
    assert_eq!(set, sample_candidate_poses(&request, &path, &Vec3::zeros(), None).unwrap());
}

#[test]
fn stage_two_centroid_near_center() {
    let path = Path::new(vec![Vec3::zeros()]).unwrap();
    let center = Vec3::new(4.0, 5.0, 1.0);
    for seed in 0..5 {
        let request = CandidateRequest {
            stage: Stage::AroundCenter,
            count: 250,
            radius: 2.0,
            seed,
        };
        let set = sample_candidate_poses(&request, &path, &center, None).unwrap();
        let centroid = set.poses.iter().map(|p| *p.translation()).sum::<Vec3>() / 250.0;
        assert!((centroid - center).norm() <= 0.2);
        assert!(set.poses.iter().all(|p| (p.translation() - center).norm() <= 2.0 + 1e-12));
    }
}

#[test]
fn closest_gt_matches_exhaustive_scan() {
    let eps = ConfidenceLevel::new(0.1).unwrap();
    let mut r = rng(42);
    for _ in 0..20 {
        let cloud: Vec<GroundTruthPoint> = (0..300)
            .map(|_| GroundTruthPoint {
                position: Vec3::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)),
                sigma_hat: r.random_range(1e-3..0.3),
            })
            .collect();
        let p = Vec3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), 0.0);
        let best = cloud
            .iter()
            .map(|g| DistanceDistribution::new((g.position - p).norm(), g.sigma_hat).unwrap())
            .min_by(|a, b| average_value_at_risk(a, &eps).total_cmp(&average_value_at_risk(b, &eps)))
            .unwrap();
        assert_eq!(closest_gt_distribution(&cloud, &p, &eps).unwrap(), best);

        let equal: Vec<GroundTruthPoint> = cloud.iter().map(|g| GroundTruthPoint { sigma_hat: 1e-3, ..*g }).collect();
        let nearest = equal.iter().map(|g| (g.position - p).norm()).fold(f64::INFINITY, f64::min);
        assert_eq!(closest_gt_distribution(&equal, &p, &eps).unwrap().mean, nearest);
    }
    assert!(closest_gt_distribution(&[], &Vec3::zeros(), &eps).is_err());
}
