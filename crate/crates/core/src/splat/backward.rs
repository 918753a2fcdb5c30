//! L1 reconstruction loss, its analytic gradient, and the per-view diagonal
//! of `J^T J` for the rendered image.
//!
//! All derivatives are taken with respect to the flat parameter layout of
//! [`SceneModel`] (log-sigma and logit-opacity coordinates).

use crate::error::{Error, Result};
use crate::geometry::{Camera, Pose, Vec3};
use crate::image::RgbdImage;
use crate::scene::{
    SceneModel, COLOR_OFFSET, LOGIT_OPACITY_OFFSET, LOG_SIGMA_OFFSET, MU_OFFSET,
    PARAMS_PER_GAUSSIAN,
};

use super::raster::{PixelState, Raster, Splat};
use super::RenderSettings;

/// L1 subgradient with `sign(0) = 0`.
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_dims(a: &RgbdImage, b: &RgbdImage) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: b.dims(),
            actual: a.dims(),
        });
    }
    Ok(())
}

/// Mean over pixels of `|C - C_obs|_1 + gamma |d - d_obs|`; observed no-hit
/// pixels are left out of the depth term.
pub fn reconstruction_loss(rendered: &RgbdImage, observed: &RgbdImage, gamma: f64) -> Result<f64> {
    check_dims(rendered, observed)?;
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
    }
    let n = rendered.rgb.len();
    let mut total = 0.0;
    for p in 0..n {
        let (c, o) = (rendered.rgb[p], observed.rgb[p]);
        total += (c[0] - o[0]).abs() + (c[1] - o[1]).abs() + (c[2] - o[2]).abs();
        if !observed.is_far(p) {
            total += gamma * (rendered.depth[p] - observed.depth[p]).abs();
        }
    }
    Ok(total / n as f64)
}

/// Derivatives of `rho` for one (pixel, splat) pair.
struct RhoDerivs {
    mu: Vec3,
    log_sigma: f64,
    logit_opacity: f64,
}

#[inline]
fn rho_derivs(s: &Splat, rho: f64, px: &crate::geometry::Vec2) -> RhoDerivs {
    let d = px - s.mean;
    let d2 = d.norm_squared() * s.inv_r2;
    let via_mean = (s.dmean_dmu[0] * d.x + s.dmean_dmu[1] * d.y) * (rho * s.inv_r2);
    // r = sigma fx / z, so moving along z also rescales the footprint
    let via_radius = s.dz_dmu * (-rho * d2 / s.depth);
    RhoDerivs {
        mu: via_mean + via_radius,
        log_sigma: rho * d2,
        logit_opacity: rho * (1.0 - s.opacity),
    }
}

/// Loss and its gradient with respect to the flat parameter vector.
pub fn loss_and_gradient(
    scene: &SceneModel,
    pose: &Pose,
    camera: &Camera,
    observed: &RgbdImage,
    gamma: f64,
    settings: &RenderSettings,
) -> Result<(f64, Vec<f64>)> {
    observed.check_matches(camera)?;
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
    }
    let raster = Raster::build(scene, pose, camera);
    let n = camera.pixel_count();
    let inv_n = 1.0 / n as f64;
    let mut grad = vec![0.0; scene.param_count()];
    let mut loss = 0.0;
    let mut state = PixelState::default();

    for p in 0..n {
        state.evaluate(&raster, p, settings);
        let obs = observed.rgb[p];
        let mut lam_c = [0.0; 3];
        for ch in 0..3 {
            let r = state.color[ch] - obs[ch];
            loss += r.abs();
            lam_c[ch] = sign(r) * inv_n;
        }
        let mut lam_d = 0.0;
        if !observed.is_far(p) {
            let r = state.depth - observed.depth[p];
            loss += gamma * r.abs();
            lam_d = gamma * sign(r) * inv_n;
        }
        if lam_c == [0.0; 3] && lam_d == 0.0 {
            continue;
        }

        let px = raster.pixel_center(p);
        let mut rest_c = settings.background.map(|b| b * state.t_final);
        let mut rest_d = settings.far * state.t_final;
        for &(k, rho, keep, t) in state.terms.iter().rev() {
            let s = &raster.splats[k];
            let t_next = t * keep;
            let w = t - t_next;
            let mut dl_drho = lam_d * (t_next * s.depth - rest_d);
            for ch in 0..3 {
                dl_drho += lam_c[ch] * (t_next * s.color[ch] - rest_c[ch]);
                rest_c[ch] += w * s.color[ch];
            }
            rest_d += w * s.depth;

            let base = s.source * PARAMS_PER_GAUSSIAN;
            let dr = rho_derivs(s, rho, &px);
            let g_mu = dr.mu * dl_drho + s.dz_dmu * (lam_d * w);
            for j in 0..3 {
                grad[base + MU_OFFSET + j] += g_mu[j];
                grad[base + COLOR_OFFSET + j] += lam_c[j] * w;
            }
            grad[base + LOG_SIGMA_OFFSET] += dl_drho * dr.log_sigma;
            grad[base + LOGIT_OPACITY_OFFSET] += dl_drho * dr.logit_opacity;
        }
    }
    Ok((loss * inv_n, grad))
}

pub fn loss_gradient(
    scene: &SceneModel,
    pose: &Pose,
    camera: &Camera,
    observed: &RgbdImage,
    gamma: f64,
    settings: &RenderSettings,
) -> Result<Vec<f64>> {
    loss_and_gradient(scene, pose, camera, observed, gamma, settings).map(|(_, g)| g)
}

/// Which rendered channels enter the Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JacobianOptions {
    /// When set, depth derivatives are included with this weight on their squares.
    pub depth_weight: Option<f64>,
}

/// `diag(J^T J)` where `J` is the Jacobian of the rendered image (RGB, and
/// optionally weighted depth) with respect to the flat parameters.
pub fn render_jacobian_diag(
    scene: &SceneModel,
    pose: &Pose,
    camera: &Camera,
    settings: &RenderSettings,
    options: &JacobianOptions,
) -> Vec<f64> {
    let raster = Raster::build(scene, pose, camera);
    let mut diag = vec![0.0; scene.param_count()];
    let mut state = PixelState::default();
    let wd = options.depth_weight.unwrap_or(0.0);

    for p in 0..camera.pixel_count() {
        if raster.pixel_entries(p).is_empty() {
            continue;
        }
        state.evaluate(&raster, p, settings);
        let px = raster.pixel_center(p);
        let mut rest_c = settings.background.map(|b| b * state.t_final);
        let mut rest_d = settings.far * state.t_final;
        for &(k, rho, keep, t) in state.terms.iter().rev() {
            let s = &raster.splats[k];
            let t_next = t * keep;
            let w = t - t_next;
            let mut g2 = 0.0;
            for ch in 0..3 {
                let g = t_next * s.color[ch] - rest_c[ch];
                g2 += g * g;
                rest_c[ch] += w * s.color[ch];
            }
            let gd = t_next * s.depth - rest_d;
            rest_d += w * s.depth;

            let base = s.source * PARAMS_PER_GAUSSIAN;
            let dr = rho_derivs(s, rho, &px);
            let scalar = g2 + wd * gd * gd;
            for j in 0..3 {
                let m = dr.mu[j];
                let mut v = g2 * m * m;
                if wd > 0.0 {
                    let jd = gd * m + w * s.dz_dmu[j];
                    v += wd * jd * jd;
                }
                diag[base + MU_OFFSET + j] += v;
                diag[base + COLOR_OFFSET + j] += w * w;
            }
            diag[base + LOG_SIGMA_OFFSET] += scalar * dr.log_sigma * dr.log_sigma;
            diag[base + LOGIT_OPACITY_OFFSET] += scalar * dr.logit_opacity * dr.logit_opacity;
        }
    }
    diag
}
