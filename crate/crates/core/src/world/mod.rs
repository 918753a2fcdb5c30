//! Synthetic ground-truth rooms: axis-aligned boxes for walls and
//! obstacles, a ray-cast RGB-D sensor, surface point clouds and the
//! candidate-view samplers.

mod raycast;
mod sampling;

pub use raycast::{capture_rgbd, intersect_box, CaptureSettings, Hit, Ray};
pub use sampling::{
    free_space_filter,
    closest_gt_distribution, ground_truth_point_cloud, sample_candidate_poses, write_xyz,
    CandidateRequest, GroundTruthPoint, Stage,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Path, Vec3};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Wall,
    Obstacle,
}

/// Axis-aligned box with a diffuse color.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub min: Vec3,
    pub max: Vec3,
    pub color: [f64; 3],
    pub kind: PrimitiveKind,
}

impl Primitive {
    pub fn contains(&self, p: &Vec3, margin: f64) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] - margin && p[a] <= self.max[a] + margin)
    }

    /// Euclidean distance from `p` to the box (0 inside).
    pub fn distance(&self, p: &Vec3) -> f64 {
        let d = Vec3::from_fn(|a, _| (self.min[a] - p[a]).max(0.0).max(p[a] - self.max[a]));
        d.norm()
    }
}

/// Immutable ground-truth environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthWorld {
    pub primitives: Vec<Primitive>,
    pub bounds_min: Vec3,
    pub bounds_max: Vec3,
    /// Free interior of the room, used to keep candidate cameras inside.
    pub interior_min: Vec3,
    pub interior_max: Vec3,
}

impl GroundTruthWorld {
    pub fn obstacles(&self) -> impl Iterator<Item = &Primitive> {
        self.primitives.iter().filter(|p| p.kind == PrimitiveKind::Obstacle)
    }

    pub fn walls(&self) -> impl Iterator<Item = &Primitive> {
        self.primitives.iter().filter(|p| p.kind == PrimitiveKind::Wall)
    }

    /// True when `p` is inside the room interior and at least `margin` away
    /// from every obstacle and wall.
    pub fn is_free(&self, p: &Vec3, margin: f64) -> bool {
        (0..3).all(|a| p[a] >= self.interior_min[a] + margin && p[a] <= self.interior_max[a] - margin)
            && self.primitives.iter().all(|b| !b.contains(p, margin))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world serializes")
    }
}

/// A fixed box placed verbatim by a recipe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub color: [f64; 3],
}

/// Scene recipe: room shell, placed and random obstacles, and the payload path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldRecipe {
    /// Interior extent; the room spans `[0, size]` on each axis.
    pub room_size: [f64; 3],
    pub wall_thickness: f64,
    /// Without walls every ray that misses an obstacle escapes to the far plane.
    pub enclosed: bool,
    /// Floor, ceiling, then the -x, +x, -y, +y walls.
    pub wall_colors: [[f64; 3]; 6],
    pub fixed_obstacles: Vec<BoxSpec>,
    pub random_obstacles: usize,
    pub obstacle_min_size: [f64; 3],
    pub obstacle_max_size: [f64; 3],
    /// Minimum distance from random obstacles to the path polyline.
    pub corridor_clearance: f64,
    pub max_attempts: usize,
    pub path: Vec<[f64; 3]>,
}

impl Default for WorldRecipe {
    fn default() -> Self {
        Self {
            room_size: [10.0, 10.0, 3.0],
            wall_thickness: 0.1,
            enclosed: true,
            wall_colors: [
                [0.55, 0.45, 0.35],
                [0.9, 0.9, 0.85],
                [0.75, 0.6, 0.6],
                [0.6, 0.75, 0.6],
                [0.6, 0.6, 0.8],
                [0.8, 0.75, 0.55],
            ],
            fixed_obstacles: Vec::new(),
            random_obstacles: 0,
            obstacle_min_size: [0.3, 0.3, 0.3],
            obstacle_max_size: [1.0, 1.0, 1.2],
            corridor_clearance: 0.3,
            max_attempts: 1_000,
            path: vec![[1.0, 1.0, 0.3], [9.0, 9.0, 0.3]],
        }
    }
}

const OBSTACLE_PALETTE: [[f64; 3]; 6] = [
    [0.85, 0.25, 0.2],
    [0.2, 0.5, 0.85],
    [0.25, 0.7, 0.3],
    [0.9, 0.75, 0.15],
    [0.6, 0.3, 0.7],
    [0.15, 0.65, 0.65],
];

impl WorldRecipe {
    pub fn payload_path(&self) -> Result<Path> {
        Path::new(self.path.iter().map(|p| Vec3::from(*p)).collect())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    fn validate(&self) -> Result<()> {
        if self.room_size.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument("room size must be positive".into()));
        }
        if !(self.wall_thickness > 0.0) {
            return Err(Error::InvalidArgument("wall thickness must be positive".into()));
        }
        if (0..3).any(|a| {
            !(self.obstacle_min_size[a] > 0.0 && self.obstacle_min_size[a] <= self.obstacle_max_size[a])
        }) {
            return Err(Error::InvalidArgument("obstacle size range is invalid".into()));
        }
        Ok(())
    }
}

/// Deterministic world for `(recipe, seed)`.
///
/// Random obstacles stand on the floor and are rejection-sampled until they
/// keep `corridor_clearance` from the path; running out of attempts is an
/// infeasible-recipe error.
pub fn build_world(recipe: &WorldRecipe, seed: u64) -> Result<GroundTruthWorld> {
    recipe.validate()?;
    let size = Vec3::from(recipe.room_size);
    let t = recipe.wall_thickness;
    let mut primitives = Vec::new();
    if recipe.enclosed {
        let (lo, hi) = (Vec3::repeat(-t), size + Vec3::repeat(t));
        let slabs = [
            (Vec3::new(lo.x, lo.y, -t), Vec3::new(hi.x, hi.y, 0.0)),
            (Vec3::new(lo.x, lo.y, size.z), Vec3::new(hi.x, hi.y, hi.z)),
            (Vec3::new(-t, lo.y, lo.z), Vec3::new(0.0, hi.y, hi.z)),
            (Vec3::new(size.x, lo.y, lo.z), Vec3::new(hi.x, hi.y, hi.z)),
            (Vec3::new(lo.x, -t, lo.z), Vec3::new(hi.x, 0.0, hi.z)),
            (Vec3::new(lo.x, size.y, lo.z), Vec3::new(hi.x, hi.y, hi.z)),
        ];
        for ((min, max), color) in slabs.into_iter().zip(recipe.wall_colors) {
            primitives.push(Primitive {
                min,
                max,
                color,
                kind: PrimitiveKind::Wall,
            });
        }
    }
    for b in &recipe.fixed_obstacles {
        primitives.push(Primitive {
            min: Vec3::from(b.min),
            max: Vec3::from(b.max),
            color: b.color,
            kind: PrimitiveKind::Obstacle,
        });
    }

    let path = recipe.payload_path()?;
    let mut rng = rng::stream(seed, rng::streams::WORLD);
    let mut placed = 0;
    let mut attempts = 0;
    while placed < recipe.random_obstacles {
        if attempts >= recipe.max_attempts {
            return Err(Error::InfeasibleRecipe(format!(
                "placed {placed} of {} obstacles in {attempts} attempts",
                recipe.random_obstacles
            )));
        }
        attempts += 1;
        let dims = Vec3::from_fn(|a, _| rng.random_range(recipe.obstacle_min_size[a]..=recipe.obstacle_max_size[a]));
        if dims.x > size.x || dims.y > size.y || dims.z > size.z {
            continue;
        }
        let x = rng.random_range(0.0..=(size.x - dims.x));
        let y = rng.random_range(0.0..=(size.y - dims.y));
        let color = OBSTACLE_PALETTE[rng.random_range(0..OBSTACLE_PALETTE.len())];
        let candidate = Primitive {
            min: Vec3::new(x, y, 0.0),
            max: Vec3::new(x + dims.x, y + dims.y, dims.z),
            color,
            kind: PrimitiveKind::Obstacle,
        };
        if box_path_distance(&candidate, &path) >= recipe.corridor_clearance {
            primitives.push(candidate);
            placed += 1;
        }
    }
    if primitives.is_empty() {
        return Err(Error::InfeasibleRecipe("the world has no primitives".into()));
    }

    let mut bounds_min = Vec3::repeat(f64::INFINITY);
    let mut bounds_max = Vec3::repeat(f64::NEG_INFINITY);
    for p in &primitives {
        bounds_min = bounds_min.inf(&p.min);
        bounds_max = bounds_max.sup(&p.max);
    }
    let (interior_min, interior_max) = if recipe.enclosed {
        (Vec3::zeros(), size)
    } else {
        (bounds_min, bounds_max)
    };
    Ok(GroundTruthWorld {
        primitives,
        bounds_min,
        bounds_max,
        interior_min,
        interior_max,
    })
}

/// Distance between a box and the path polyline.
///
/// Along one segment the distance to a convex set is convex, so a golden
/// section search finds the minimum.
pub fn box_path_distance(b: &Primitive, path: &Path) -> f64 {
    let w = path.waypoints();
    if w.len() == 1 {
        return b.distance(&w[0]);
    }
    w.windows(2)
        .map(|s| {
            let f = |t: f64| b.distance(&(s[0] + (s[1] - s[0]) * t));
            let g = 0.618_033_988_749_895;
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..80 {
                let m1 = hi - g * (hi - lo);
                let m2 = lo + g * (hi - lo);
                if f(m1) <= f(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0))
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_room_has_six_walls() {
        let w = build_world(&WorldRecipe::default(), 1).unwrap();
        assert_eq!(w.walls().count(), 6);
        assert_eq!(w.obstacles().count(), 0);
    }

    #[test]
    fn deterministic_for_seed() {
        let r = WorldRecipe {
            random_obstacles: 5,
            ..WorldRecipe::default()
        };
        assert_eq!(build_world(&r, 7).unwrap(), build_world(&r, 7).unwrap());
        assert_ne!(build_world(&r, 7).unwrap(), build_world(&r, 8).unwrap());
    }

    #[test]
    fn infeasible_recipe_reported() {
        let r = WorldRecipe {
            room_size: [2.0, 2.0, 2.0],
            random_obstacles: 3,
            obstacle_min_size: [1.5, 1.5, 1.0],
            obstacle_max_size: [1.9, 1.9, 1.5],
            corridor_clearance: 1.0,
            path: vec![[1.0, 1.0, 0.3]],
            max_attempts: 50,
            ..WorldRecipe::default()
        };
        assert!(matches!(build_world(&r, 0), Err(Error::InfeasibleRecipe(_))));
    }

    #[test]
    fn box_distance_helpers() {
        let b = Primitive {
            min: Vec3::new(1.0, 1.0, 0.0),
            max: Vec3::new(2.0, 2.0, 1.0),
            color: [0.5; 3],
            kind: PrimitiveKind::Obstacle,
        };
        assert_eq!(b.distance(&Vec3::new(1.5, 1.5, 0.5)), 0.0);
        assert!((b.distance(&Vec3::new(0.0, 1.5, 0.5)) - 1.0).abs() < 1e-15);
        let path = Path::new(vec![Vec3::new(0.0, 0.0, 0.5), Vec3::new(3.0, 0.0, 0.5)]).unwrap();
        assert!((box_path_distance(&b, &path) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recipe_parses_from_toml() {
        let r = WorldRecipe::from_toml(
            "room_size = [4.0, 3.0, 2.5]\nrandom_obstacles = 2\npath = [[0.5, 0.5, 0.3], [3.5, 2.5, 0.3]]\n",
        )
        .unwrap();
        assert_eq!(r.room_size, [4.0, 3.0, 2.5]);
        assert_eq!(r.random_obstacles, 2);
        assert!(WorldRecipe::from_toml("bogus_key = 1").is_err());
    }
}
