//! Rigid transforms, the pinhole camera and waypoint paths.
//!
//! Camera frames follow the usual vision convention: +z looks forward,
//! +x points right and +y points down in the image. A [`Pose`] maps
//! camera-frame points into the world.

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;
pub type Mat3 = Matrix3<f64>;

const ORTHO_TOL: f64 = 1e-9;

/// Rigid transform `x -> rotation * x + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    rotation: Mat3,
    translation: Vec3,
}

impl Pose {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        let gram = rotation.transpose() * rotation;
        if (gram - Mat3::identity()).abs().max() > ORTHO_TOL {
            return Err(Error::InvalidArgument("rotation is not orthonormal".into()));
        }
        if (rotation.determinant() - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvalidArgument("rotation has determinant != 1".into()));
        }
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("translation is not finite".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation,
        }
    }

    /// Rotation by `angle` radians about the unit `axis`, followed by `translation`.
    pub fn from_axis_angle(axis: Vec3, angle: f64, translation: Vec3) -> Self {
        let axis = nalgebra::Unit::new_normalize(axis);
        let rotation = *nalgebra::Rotation3::from_axis_angle(&axis, angle).matrix();
        Self {
            rotation,
            translation,
        }
    }

    /// Camera-to-world pose of a camera at `eye` looking at `target`.
    ///
    /// `up` is the world direction that should appear upward in the image. When
    /// `eye == target` the camera looks along +x; when the view direction is
    /// parallel to `up` a secondary up vector is used.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3) -> Self {
        let mut forward = target - eye;
        if forward.norm() < 1e-12 {
            forward = Vec3::x();
        }
        let forward = forward.normalize();
        let mut right = forward.cross(&up);
        if right.norm() < 1e-9 {
            right = forward.cross(&Vec3::y());
            if right.norm() < 1e-9 {
                right = forward.cross(&Vec3::x());
            }
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let rotation = Mat3::from_columns(&[right, down, forward]);
        Self {
            rotation,
            translation: eye,
        }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn transform_point(&self, point: &Vec3) -> Vec3 {
        self.rotation * point + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Pose) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }
}

/// Free-function form of [`Pose::transform_point`].
pub fn se3_transform_point(pose: &Pose, point: &Vec3) -> Vec3 {
    pose.transform_point(point)
}

/// Pinhole intrinsics. Pixel `(u, v)` has its center at `(u + 0.5, v + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "focal lengths must be positive (fx = {fx}, fy = {fy})"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("image size must be positive".into()));
        }
        if !(0.0..width as f64).contains(&cx) || !(0.0..height as f64).contains(&cy) {
            return Err(Error::InvalidArgument(format!(
                "principal point ({cx}, {cy}) outside a {width}x{height} image"
            )));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Square image with the principal point at the image center and the
    /// given horizontal field of view in radians.
    pub fn with_fov(size: usize, fov: f64) -> Result<Self> {
        let f = size as f64 / (2.0 * (fov / 2.0).tan());
        let c = size as f64 / 2.0;
        Self::new(f, f, c, c, size, size)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn pixel_center(&self, u: usize, v: usize) -> Vec2 {
        Vec2::new(u as f64 + 0.5, v as f64 + 0.5)
    }

    pub fn project(&self, point: &Vec3) -> Result<(Vec2, f64)> {
        project_point(self, point)
    }

    /// Camera-frame point seen at `pixel` with camera-frame depth `depth`.
    pub fn unproject(&self, pixel: &Vec2, depth: f64) -> Vec3 {
        Vec3::new(
            (pixel.x - self.cx) * depth / self.fx,
            (pixel.y - self.cy) * depth / self.fy,
            depth,
        )
    }

    /// Unit camera-frame direction through `pixel`.
    pub fn ray_direction(&self, pixel: &Vec2) -> Vec3 {
        self.unproject(pixel, 1.0).normalize()
    }

    /// Same intrinsics at `1/factor` of the resolution.
    pub fn downscaled(&self, factor: usize) -> Result<Self> {
        let k = factor as f64;
        Self::new(
            self.fx / k,
            self.fy / k,
            self.cx / k,
            self.cy / k,
            self.width / factor,
            self.height / factor,
        )
    }
}

/// Pinhole projection of a camera-frame point: `(pixel, depth)`.
pub fn project_point(camera: &Camera, point: &Vec3) -> Result<(Vec2, f64)> {
    if point.z <= 0.0 {
        return Err(Error::BehindCamera { z: point.z });
    }
    let pixel = Vec2::new(
        camera.fx * point.x / point.z + camera.cx,
        camera.fy * point.y / point.z + camera.cy,
    );
    Ok((pixel, point.z))
}

/// Ordered payload-robot waypoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    waypoints: Vec<Vec3>,
}

impl Path {
    pub fn new(waypoints: Vec<Vec3>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::InvalidArgument("a path needs at least one waypoint".into()));
        }
        if waypoints.iter().any(|w| !w.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidArgument("waypoints must be finite".into()));
        }
        Ok(Self { waypoints })
    }

    /// `count` evenly spaced waypoints on the segment `start -> end`.
    pub fn straight(start: Vec3, end: Vec3, count: usize) -> Result<Self> {
        let pts = match count {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n)
                .map(|k| start + (end - start) * (k as f64 / (n - 1) as f64))
                .collect(),
        };
        Self::new(pts)
    }

    pub fn waypoints(&self) -> &[Vec3] {
        &self.waypoints
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// `count` points spaced evenly by arc length along the polyline,
    /// keeping both ends.
    pub fn resampled(&self, count: usize) -> Result<Self> {
        let w = &self.waypoints;
        let lengths: Vec<f64> = w.windows(2).map(|s| (s[1] - s[0]).norm()).collect();
        let total: f64 = lengths.iter().sum();
        if count < 2 || total == 0.0 {
            return Self::new(w.iter().copied().take(count.max(1).min(w.len())).collect());
        }
        let mut out = Vec::with_capacity(count);
        let (mut seg, mut start) = (0, 0.0);
        for k in 0..count {
            let s = total * k as f64 / (count - 1) as f64;
            while seg + 1 < lengths.len() && s > start + lengths[seg] {
                start += lengths[seg];
                seg += 1;
            }
            let t = if lengths[seg] > 0.0 {
                ((s - start) / lengths[seg]).clamp(0.0, 1.0)
            } else {
                0.0
            };
            out.push(w[seg] + (w[seg + 1] - w[seg]) * t);
        }
        Self::new(out)
    }

    /// Minimum distance from `point` to the polyline through the waypoints.
    pub fn distance_to_polyline(&self, point: &Vec3) -> f64 {
        let w = &self.waypoints;
        if w.len() == 1 {
            return (point - w[0]).norm();
        }
        w.windows(2)
            .map(|seg| segment_distance(point, &seg[0], &seg[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn resample_l_shaped_path() {
        let path = Path::new(vec![Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0), Vec3::new(2.0, 2.0, 0.0)]).unwrap();
        let r = path.resampled(5).unwrap();
        let expect = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 1.0], [2.0, 2.0]];
        for (p, e) in r.waypoints().iter().zip(expect) {
            assert!(close(p, &Vec3::new(e[0], e[1], 0.0), 1e-12), "{p:?}");
        }
        assert_eq!(r.len(), 5);
    }

    #[test]
    fn transform_identity_translation_rotation() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(se3_transform_point(&Pose::identity(), &p), p);

        let t = Pose::from_translation(Vec3::new(0.0, 0.0, 5.0));
        assert_eq!(t.transform_point(&Vec3::zeros()), Vec3::new(0.0, 0.0, 5.0));

        let r = Pose::from_axis_angle(Vec3::z(), FRAC_PI_2, Vec3::zeros());
        assert!(close(&r.transform_point(&Vec3::x()), &Vec3::y(), 1e-12));
    }

    #[test]
    fn project_examples() {
        let cam = Camera::new(100.0, 100.0, 128.0, 128.0, 256, 256).unwrap();
        let (px, d) = project_point(&cam, &Vec3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!((px.x, px.y, d), (128.0, 128.0, 2.0));
        let (px, _) = project_point(&cam, &Vec3::new(1.0, 0.0, 2.0)).unwrap();
        assert_eq!(px.x, 178.0);
        assert!(matches!(
            project_point(&cam, &Vec3::new(0.0, 0.0, -1.0)),
            Err(Error::BehindCamera { .. })
        ));
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(Camera::new(0.0, 1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(Camera::new(1.0, 1.0, 4.0, 1.0, 4, 4).is_err());
        assert!(Pose::new(Mat3::identity() * 2.0, Vec3::zeros()).is_err());
        let reflect = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(Pose::new(reflect, Vec3::zeros()).is_err());
        assert!(Path::new(vec![]).is_err());
    }

    #[test]
    fn look_at_points_forward_axis_at_target() {
        let eye = Vec3::new(1.0, 2.0, 0.5);
        let target = Vec3::new(3.0, -1.0, 1.0);
        let pose = Pose::look_at(eye, target, Vec3::z());
        assert!(Pose::new(*pose.rotation(), *pose.translation()).is_ok());
        let in_cam = pose.inverse().transform_point(&target);
        assert!(in_cam.x.abs() < 1e-12 && in_cam.y.abs() < 1e-12 && in_cam.z > 0.0);
        // world up projects to image up (negative camera y)
        let up_cam = pose.rotation().transpose() * Vec3::z();
        assert!(up_cam.y < 0.0);

        let degenerate = Pose::look_at(eye, eye, Vec3::z());
        assert!(close(&(degenerate.rotation() * Vec3::z()), &Vec3::x(), 1e-12));
        let vertical = Pose::look_at(eye, eye + Vec3::z(), Vec3::z());
        assert!(Pose::new(*vertical.rotation(), eye).is_ok());
    }

    fn arb_pose() -> impl Strategy<Value = Pose> {
        (
            prop::array::uniform3(-1.0f64..1.0),
            -3.2f64..3.2,
            prop::array::uniform3(-10.0f64..10.0),
        )
            .prop_filter("axis must be nonzero", |(a, _, _)| {
                Vec3::from(*a).norm() > 1e-3
            })
            .prop_map(|(a, ang, t)| Pose::from_axis_angle(Vec3::from(a), ang, Vec3::from(t)))
    }

    proptest! {
        #[test]
        fn transform_preserves_distances(
            pose in arb_pose(),
            a in prop::array::uniform3(-10.0f64..10.0),
            b in prop::array::uniform3(-10.0f64..10.0),
        ) {
            let (a, b) = (Vec3::from(a), Vec3::from(b));
            let d0 = (a - b).norm();
            let d1 = (pose.transform_point(&a) - pose.transform_point(&b)).norm();
            prop_assert!((d0 - d1).abs() <= 1e-9);
        }

        #[test]
        fn unproject_inverts_project(
            x in -3.0f64..3.0, y in -3.0f64..3.0, z in 0.05f64..20.0,
        ) {
            let cam = Camera::new(120.0, 110.0, 64.0, 60.0, 128, 120).unwrap();
            let p = Vec3::new(x, y, z);
            let (px, d) = project_point(&cam, &p).unwrap();
            prop_assert!(close(&cam.unproject(&px, d), &p, 1e-9));
        }

        #[test]
        fn pose_inverse_round_trip(pose in arb_pose(), a in prop::array::uniform3(-10.0f64..10.0)) {
            let a = Vec3::from(a);
            prop_assert!(close(&pose.inverse().transform_point(&pose.transform_point(&a)), &a, 1e-9));
        }
    }
}
