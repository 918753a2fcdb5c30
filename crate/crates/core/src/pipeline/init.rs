use crate::geometry::{Camera, Pose};
use crate::image::RgbdImage;
use crate::scene::IsotropicGaussian;

/// Pixels sampled on a `stride` grid, offset to the middle of each cell.
fn grid(camera: &Camera, stride: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let off = stride / 2;
    (off..camera.height)
        .step_by(stride)
        .flat_map(move |v| (off..camera.width).step_by(stride).map(move |u| (u, v)))
}

/// Seeds one Gaussian per sampled pixel with a valid depth.
///
/// Centers are the back-projected pixel centers, colors are the observed
/// RGB, and `sigma = depth / fx * stride / 2` so neighboring footprints
/// touch.
pub fn unproject_init(
    obs: &RgbdImage,
    pose: &Pose,
    camera: &Camera,
    stride: usize,
    init_opacity: f64,
) -> Vec<IsotropicGaussian> {
    unproject_where(obs, pose, camera, stride, init_opacity, |_| true)
}

/// Like [`unproject_init`] but only for pixels whose rendered weight is
/// below `threshold`, i.e. parts of the view the scene does not yet cover.
pub fn unproject_uncovered(
    obs: &RgbdImage,
    pose: &Pose,
    camera: &Camera,
    stride: usize,
    init_opacity: f64,
    weight_sum: &[f64],
    threshold: f64,
) -> Vec<IsotropicGaussian> {
    unproject_where(obs, pose, camera, stride, init_opacity, |idx| weight_sum[idx] < threshold)
}

fn unproject_where(
    obs: &RgbdImage,
    pose: &Pose,
    camera: &Camera,
    stride: usize,
    init_opacity: f64,
    keep: impl Fn(usize) -> bool,
) -> Vec<IsotropicGaussian> {
    let stride = stride.max(1);
    grid(camera, stride)
        .filter_map(|(u, v)| {
            let idx = obs.index(u, v);
            let depth = obs.depth[idx];
            if obs.is_far(idx) || !(depth > 0.0) || !keep(idx) {
                return None;
            }
            let local = camera.unproject(&camera.pixel_center(u, v), depth);
            let sigma = depth / camera.fx * stride as f64 / 2.0;
            IsotropicGaussian::new(pose.transform_point(&local), sigma, init_opacity, obs.rgb[idx]).ok()
        })
        .collect()
}
