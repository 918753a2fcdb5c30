//! Isotropic Gaussian splatting.
//!
//! Every Gaussian projects to an isotropic screen-space footprint of radius
//! `r = sigma * fx / z`. Its opacity at pixel `u` is
//! `rho = opacity * exp(-|u - m|^2 / (2 r^2))`, truncated at `3 r`. Pixels
//! composite the depth-sorted contributions front to back with a unit
//! sample interval, so each splat has alpha `1 - exp(-rho)`.

mod backward;
mod composite;
mod raster;

pub use backward::{
    loss_and_gradient, loss_gradient, reconstruction_loss, render_jacobian_diag, JacobianOptions,
};
pub use composite::{composite_pixel, Composite, PixelContribution, PixelSample};
pub use raster::{render, RenderOutput};

use crate::geometry::{Camera, Pose, Vec2, Vec3};
use crate::image::DEFAULT_FAR_SENTINEL;
use crate::scene::IsotropicGaussian;

/// Centers closer than this (camera-frame z, meters) are culled.
pub const NEAR_PLANE: f64 = 0.01;
/// Footprint support in screen radii.
pub const SUPPORT_RADII: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSettings {
    pub background: [f64; 3],
    pub far: f64,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            background: [0.5; 3],
            far: DEFAULT_FAR_SENTINEL,
        }
    }
}

/// Screen-space footprint of one Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedGaussian {
    pub pixel_mean: Vec2,
    pub screen_radius: f64,
    pub depth: f64,
    pub source_index: usize,
}

/// Projects `g` into the camera at `pose` (camera-to-world). `None` when culled.
pub fn project_gaussian(
    g: &IsotropicGaussian,
    source_index: usize,
    pose: &Pose,
    camera: &Camera,
) -> Option<ProjectedGaussian> {
    project_with_view(g, source_index, &pose.inverse(), camera)
}

pub(crate) fn project_with_view(
    g: &IsotropicGaussian,
    source_index: usize,
    view: &Pose,
    camera: &Camera,
) -> Option<ProjectedGaussian> {
    let pc: Vec3 = view.transform_point(&g.mu);
    if pc.z <= NEAR_PLANE {
        return None;
    }
    let (pixel_mean, depth) = camera.project(&pc).ok()?;
    Some(ProjectedGaussian {
        pixel_mean,
        screen_radius: g.sigma() * camera.fx / depth,
        depth,
        source_index,
    })
}

/// Splat opacity `rho` at `pixel`; exactly zero beyond the support cutoff.
pub fn splat_opacity(pg: &ProjectedGaussian, opacity: f64, pixel: &Vec2) -> f64 {
    let d2 = (pixel - pg.pixel_mean).norm_squared();
    let r2 = pg.screen_radius * pg.screen_radius;
    if d2 > SUPPORT_RADII * SUPPORT_RADII * r2 {
        return 0.0;
    }
    opacity * (-d2 / (2.0 * r2)).exp()
}
