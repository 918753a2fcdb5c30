use crate::geometry::{Camera, Mat3, Pose, Vec2, Vec3};
use crate::image::RgbdImage;
use crate::scene::SceneModel;

use super::{project_with_view, RenderSettings, SUPPORT_RADII};

/// Rendered RGB-D image plus per-pixel accumulated alpha `1 - T_final`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub image: RgbdImage,
    pub per_pixel_weight_sum: Vec<f64>,
}

/// A projected Gaussian with everything the per-pixel loops need.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Splat {
    pub source: usize,
    pub mean: Vec2,
    pub radius: f64,
    pub inv_r2: f64,
    pub depth: f64,
    pub opacity: f64,
    pub color: [f64; 3],
    /// d(pixel mean)/d(world mu), one row per image axis.
    pub dmean_dmu: [Vec3; 2],
    /// d(z)/d(world mu).
    pub dz_dmu: Vec3,
}

/// Depth-sorted splats and, per pixel, the indices of the splats whose
/// support covers the pixel center (front to back).
pub(crate) struct Raster {
    pub splats: Vec<Splat>,
    pub offsets: Vec<usize>,
    pub entries: Vec<u32>,
    pub width: usize,
}

impl Raster {
    pub fn build(scene: &SceneModel, pose: &Pose, camera: &Camera) -> Self {
        let view = pose.inverse();
        let rot: &Mat3 = view.rotation();
        let mut splats: Vec<Splat> = scene
            .gaussians()
            .iter()
            .enumerate()
            .filter_map(|(i, g)| {
                let pg = project_with_view(g, i, &view, camera)?;
                let pc = view.transform_point(&g.mu);
                let z = pc.z;
                // rows of d(pixel)/d(camera point), rotated back to world
                let du = Vec3::new(camera.fx / z, 0.0, -camera.fx * pc.x / (z * z));
                let dv = Vec3::new(0.0, camera.fy / z, -camera.fy * pc.y / (z * z));
                Some(Splat {
                    source: i,
                    mean: pg.pixel_mean,
                    radius: pg.screen_radius,
                    inv_r2: 1.0 / (pg.screen_radius * pg.screen_radius),
                    depth: z,
                    opacity: g.opacity(),
                    color: g.color(),
                    dmean_dmu: [rot.transpose() * du, rot.transpose() * dv],
                    dz_dmu: rot.row(2).transpose(),
                })
            })
            .collect();
        splats.sort_by(|a, b| a.depth.total_cmp(&b.depth).then(a.source.cmp(&b.source)));

        let (w, h) = (camera.width, camera.height);
        let bounds: Vec<Option<(usize, usize, usize, usize)>> =
            splats.iter().map(|s| pixel_bounds(s, w, h)).collect();
        let covers = |s: &Splat, u: usize, v: usize| {
            let d = Vec2::new(u as f64 + 0.5, v as f64 + 0.5) - s.mean;
            d.norm_squared() * s.inv_r2 <= SUPPORT_RADII * SUPPORT_RADII
        };

        let mut counts = vec![0usize; w * h + 1];
        for (s, b) in splats.iter().zip(&bounds) {
            if let Some((u0, u1, v0, v1)) = *b {
                for v in v0..=v1 {
                    for u in u0..=u1 {
                        if covers(s, u, v) {
                            counts[v * w + u + 1] += 1;
                        }
                    }
                }
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let offsets = counts;
        let mut cursor = offsets.clone();
        let mut entries = vec![0u32; offsets[w * h]];
        for (k, (s, b)) in splats.iter().zip(&bounds).enumerate() {
            if let Some((u0, u1, v0, v1)) = *b {
                for v in v0..=v1 {
                    for u in u0..=u1 {
                        if covers(s, u, v) {
                            let p = v * w + u;
                            entries[cursor[p]] = k as u32;
                            cursor[p] += 1;
                        }
                    }
                }
            }
        }
        Self {
            splats,
            offsets,
            entries,
            width: w,
        }
    }

    pub fn pixel_entries(&self, p: usize) -> &[u32] {
        &self.entries[self.offsets[p]..self.offsets[p + 1]]
    }

    pub fn pixel_center(&self, p: usize) -> Vec2 {
        Vec2::new((p % self.width) as f64 + 0.5, (p / self.width) as f64 + 0.5)
    }
}

/// Inclusive pixel index bounds of the support disc, `None` when off-screen.
fn pixel_bounds(s: &Splat, w: usize, h: usize) -> Option<(usize, usize, usize, usize)> {
    let ext = SUPPORT_RADII * s.radius;
    let lo_u = (s.mean.x - ext - 0.5).ceil();
    let hi_u = (s.mean.x + ext - 0.5).floor();
    let lo_v = (s.mean.y - ext - 0.5).ceil();
    let hi_v = (s.mean.y + ext - 0.5).floor();
    if hi_u < 0.0 || hi_v < 0.0 || lo_u > (w - 1) as f64 || lo_v > (h - 1) as f64 {
        return None;
    }
    if !(lo_u <= hi_u && lo_v <= hi_v) {
        return None;
    }
    Some((
        lo_u.max(0.0) as usize,
        hi_u.min((w - 1) as f64) as usize,
        lo_v.max(0.0) as usize,
        hi_v.min((h - 1) as f64) as usize,
    ))
}

/// Per-pixel forward state reused by the backward passes.
#[derive(Default)]
pub(crate) struct PixelState {
    /// (splat index, rho, exp(-rho), transmittance before)
    pub terms: Vec<(usize, f64, f64, f64)>,
    pub color: [f64; 3],
    pub depth: f64,
    pub t_final: f64,
}

impl PixelState {
    pub fn evaluate(&mut self, raster: &Raster, p: usize, settings: &RenderSettings) {
        self.terms.clear();
        let px = raster.pixel_center(p);
        let mut color = [0.0; 3];
        let mut depth = 0.0;
        let mut t = 1.0;
        for &k in raster.pixel_entries(p) {
            let s = &raster.splats[k as usize];
            let rho = s.opacity * (-0.5 * (px - s.mean).norm_squared() * s.inv_r2).exp();
            let keep = (-rho).exp();
            let w = t * (1.0 - keep);
            color[0] += w * s.color[0];
            color[1] += w * s.color[1];
            color[2] += w * s.color[2];
            depth += w * s.depth;
            self.terms.push((k as usize, rho, keep, t));
            t *= keep;
        }
        for (c, b) in color.iter_mut().zip(settings.background) {
            *c += t * b;
        }
        self.color = color;
        self.depth = depth + t * settings.far;
        self.t_final = t;
    }
}

/// Renders RGB, depth and accumulated weight for the camera at `pose`
/// (camera-to-world).
pub fn render(scene: &SceneModel, pose: &Pose, camera: &Camera, settings: &RenderSettings) -> RenderOutput {
    let raster = Raster::build(scene, pose, camera);
    let n = camera.pixel_count();
    let mut image = RgbdImage::for_camera(camera, settings.background, settings.far);
    let mut weights = vec![0.0; n];
    let mut state = PixelState::default();
    for p in 0..n {
        state.evaluate(&raster, p, settings);
        image.rgb[p] = state.color;
        image.depth[p] = state.depth;
        weights[p] = 1.0 - state.t_final;
    }
    RenderOutput {
        image,
        per_pixel_weight_sum: weights,
    }
}
