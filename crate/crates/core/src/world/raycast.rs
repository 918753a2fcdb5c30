use crate::error::{Error, Result};
use crate::geometry::{Camera, Pose, Vec3};
use crate::image::{RgbdImage, DEFAULT_FAR_SENTINEL};

use super::{GroundTruthWorld, Primitive};

/// Ray `origin + t * direction` with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    direction: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidArgument("ray direction must be nonzero".into()));
        }
        Ok(Self {
            origin,
            direction: direction / n,
        })
    }

    pub fn direction(&self) -> &Vec3 {
        &self.direction
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    /// Outward normal of the face that was entered.
    pub normal: Vec3,
}

/// Slab-method entry intersection. Rays starting inside the box do not hit it.
pub fn intersect_box(ray: &Ray, b: &Primitive) -> Option<Hit> {
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    let mut enter_axis = 0;
    for a in 0..3 {
        let o = ray.origin[a];
        let d = ray.direction[a];
        if d == 0.0 {
            if o < b.min[a] || o > b.max[a] {
                return None;
            }
            continue;
        }
        let (mut t0, mut t1) = ((b.min[a] - o) / d, (b.max[a] - o) / d);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_enter {
            t_enter = t0;
            enter_axis = a;
        }
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return None;
        }
    }
    if !(t_enter > 1e-9) {
        return None;
    }
    let mut normal = Vec3::zeros();
    normal[enter_axis] = -ray.direction[enter_axis].signum();
    Some(Hit { t: t_enter, normal })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureSettings {
    pub background: [f64; 3],
    pub far: f64,
    /// Direction toward the light.
    pub light_direction: Vec3,
    pub ambient: f64,
}

impl Default for CaptureSettings {
    fn default() -> Self {
        Self {
            background: [0.5; 3],
            far: DEFAULT_FAR_SENTINEL,
            light_direction: Vec3::new(0.4, 0.25, 1.0).normalize(),
            ambient: 0.3,
        }
    }
}

/// Ray-casts one RGB-D frame from the camera at `pose` (camera-to-world).
///
/// Color is the diffuse color scaled by `ambient + (1 - ambient) max(0, n.l)`;
/// depth is the camera-frame z of the nearest hit, or `far` on a miss.
pub fn capture_rgbd(
    world: &GroundTruthWorld,
    pose: &Pose,
    camera: &Camera,
    settings: &CaptureSettings,
) -> RgbdImage {
    let mut image = RgbdImage::for_camera(camera, settings.background, settings.far);
    let rot = pose.rotation();
    for v in 0..camera.height {
        for u in 0..camera.width {
            let dir_cam = camera.ray_direction(&camera.pixel_center(u, v));
            let ray = Ray {
                origin: *pose.translation(),
                direction: rot * dir_cam,
            };
            let nearest = world
                .primitives
                .iter()
                .filter_map(|b| intersect_box(&ray, b).map(|h| (h, b)))
                .min_by(|a, b| a.0.t.total_cmp(&b.0.t));
            if let Some((hit, prim)) = nearest {
                let idx = image.index(u, v);
                let depth = hit.t * dir_cam.z;
                if depth < settings.far {
                    let lambert = hit.normal.dot(&settings.light_direction).max(0.0);
                    let shade = settings.ambient + (1.0 - settings.ambient) * lambert;
                    image.rgb[idx] = prim.color.map(|c| (c * shade).clamp(0.0, 1.0));
                    image.depth[idx] = depth;
                }
            }
        }
    }
    image
}
