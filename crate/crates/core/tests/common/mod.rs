#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use raem::geometry::Camera;
use raem::risk::DistanceDistribution;
use raem::{IsotropicGaussian, Pose, SceneModel, Vec3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_camera() -> Camera {
    Camera::new(16.0, 16.0, 8.0, 8.0, 16, 16).unwrap()
}

/// Up to `max` Gaussians in front of an identity camera, sized so that
/// each covers a few pixels of a 16x16 image.
pub fn random_scene(rng: &mut impl Rng, max: usize) -> SceneModel {
    let n = rng.random_range(1..=max);
    let gaussians = (0..n)
        .map(|_| {
            let z = rng.random_range(1.5..4.0);
            let mu = Vec3::new(rng.random_range(-0.35..0.35) * z, rng.random_range(-0.35..0.35) * z, z);
            let sigma = rng.random_range(0.08..0.3) * z / 4.0;
            let color = [rng.random(), rng.random(), rng.random()];
            IsotropicGaussian::new(mu, sigma, rng.random_range(0.2..0.9), color).unwrap()
        })
        .collect();
    SceneModel::new(gaussians)
}

pub fn identity_pose() -> Pose {
    Pose::identity()
}

/// Standard normal density and CDF computed without the crate's special
/// functions (the CDF via composite Simpson on the density).
pub fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + rec(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    // fixed panels first so narrow features on long intervals are not skipped
    let panels = ((b - a).abs() / 0.5).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * width, a + (i + 1) as f64 * width);
            let (fa, fb) = (f(lo), f(hi));
            let (whole, m, fm) = simpson(f, lo, fa, hi, fb);
            rec(f, lo, fa, hi, fb, whole, m, fm, tol / panels as f64, 50)
        })
        .sum()
}

/// Standard normal CDF by quadrature of the density.
pub fn cdf_by_quadrature(z: f64) -> f64 {
    if z < 0.0 {
        adaptive_simpson(&phi, -40.0, z, 1e-14)
    } else {
        0.5 + adaptive_simpson(&phi, 0.0, z, 1e-14)
    }
}

/// Lower epsilon-quantile of N(mu, sigma^2) by bisection on the CDF oracle.
pub fn quantile_by_bisection(d: &DistanceDistribution, eps: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf_by_quadrature(mid) < eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    d.mean + d.std * 0.5 * (lo + hi)
}

/// `(1/eps) * integral_{-inf}^{VaR} z f(z) dz` evaluated by adaptive
/// quadrature in standardized coordinates.
pub fn tail_mean_by_quadrature(d: &DistanceDistribution, eps: f64) -> f64 {
    let zq = (quantile_by_bisection(d, eps) - d.mean) / d.std;
    let integrand = |t: f64| (d.mean + d.std * t) * phi(t);
    adaptive_simpson(&integrand, -40.0, zq, 1e-13) / eps
}

/// Exact W2 between sample sets by sorting (quantile coupling).
pub fn empirical_w2(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let n = a.len() as f64;
    (a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n).sqrt()
}

use raem::image::RgbdImage;
use raem::scene::PARAMS_PER_GAUSSIAN;
use raem::splat::{project_gaussian, reconstruction_loss, render, splat_opacity, RenderSettings, SUPPORT_RADII};

/// Per-pixel front-to-back composite written out directly from the
/// compositing sums, without the crate's rasterizer.
pub fn reference_render(scene: &SceneModel, pose: &Pose, camera: &Camera, settings: &RenderSettings) -> (RgbdImage, Vec<f64>) {
    let mut img = RgbdImage::for_camera(camera, settings.background, settings.far);
    let mut weights = vec![0.0; camera.pixel_count()];
    let projected: Vec<_> = scene
        .gaussians()
        .iter()
        .enumerate()
        .filter_map(|(i, g)| project_gaussian(g, i, pose, camera).map(|p| (p, g)))
        .collect();
    for v in 0..camera.height {
        for u in 0..camera.width {
            let px = camera.pixel_center(u, v);
            let mut terms: Vec<(f64, usize, f64, [f64; 3])> = projected
                .iter()
                .map(|(p, g)| (p.depth, p.source_index, splat_opacity(p, g.opacity(), &px), g.color()))
                .filter(|t| t.2 > 0.0)
                .collect();
            terms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut t = 1.0;
            let mut c = [0.0; 3];
            let mut d = 0.0;
            for (depth, _, rho, color) in terms {
                let a = 1.0 - (-rho).exp();
                for k in 0..3 {
                    c[k] += t * a * color[k];
                }
                d += t * a * depth;
                t *= (-rho).exp();
            }
            let idx = img.index(u, v);
            for k in 0..3 {
                img.rgb[idx][k] = c[k] + t * settings.background[k];
            }
            img.depth[idx] = d + t * settings.far;
            weights[idx] = 1.0 - t;
        }
    }
    (img, weights)
}

/// Random observation with residuals well away from zero almost surely.
pub fn random_observation(rng: &mut impl Rng, camera: &Camera) -> RgbdImage {
    let mut img = RgbdImage::for_camera(camera, [0.0; 3], 100.0);
    for p in 0..camera.pixel_count() {
        img.rgb[p] = [rng.random(), rng.random(), rng.random()];
        img.depth[p] = if rng.random::<f64>() < 0.1 { 100.0 } else { rng.random_range(1.0..6.0) };
    }
    img
}

fn with_param(scene: &SceneModel, j: usize, value: f64) -> SceneModel {
    let mut p = scene.to_params();
    p[j] = value;
    SceneModel::from_params(&p).unwrap()
}

/// Number of (pixel, Gaussian) pairs inside the support disc; changes when
/// a perturbation moves a pixel center across the cutoff circle.
fn support_count(scene: &SceneModel, pose: &Pose, camera: &Camera) -> usize {
    let mut n = 0;
    for (i, g) in scene.gaussians().iter().enumerate() {
        if let Some(p) = project_gaussian(g, i, pose, camera) {
            for v in 0..camera.height {
                for u in 0..camera.width {
                    let d2 = (camera.pixel_center(u, v) - p.pixel_mean).norm_squared();
                    if d2 <= SUPPORT_RADII * SUPPORT_RADII * p.screen_radius * p.screen_radius {
                        n += 1;
                    }
                }
            }
        }
    }
    n
}

fn residual_signs(rendered: &RgbdImage, observed: &RgbdImage) -> Vec<(i8, f64)> {
    let mut out = Vec::new();
    for p in 0..rendered.rgb.len() {
        for k in 0..3 {
            let r = rendered.rgb[p][k] - observed.rgb[p][k];
            out.push((r.signum() as i8, r.abs()));
        }
        if !observed.is_far(p) {
            let r = rendered.depth[p] - observed.depth[p];
            out.push((r.signum() as i8, r.abs()));
        }
    }
    out
}

/// Whether coordinate `j` sits next to an L1 kink or a support cutoff
/// within `h`: some residual is below `threshold` or changes sign, or the
/// support coverage differs between the two perturbed scenes, or a color
/// step would leave [0, 1].
pub fn near_kink(
    scene: &SceneModel,
    j: usize,
    h: f64,
    pose: &Pose,
    camera: &Camera,
    observed: &RgbdImage,
    settings: &RenderSettings,
    threshold: f64,
) -> bool {
    let x = scene.to_params()[j];
    if hits_color_clamp(j, x, h) {
        return true;
    }
    let (plus, minus) = (with_param(scene, j, x + h), with_param(scene, j, x - h));
    if support_count(&plus, pose, camera) != support_count(&minus, pose, camera) {
        return true;
    }
    let sp = residual_signs(&render(&plus, pose, camera, settings).image, observed);
    let sm = residual_signs(&render(&minus, pose, camera, settings).image, observed);
    let s0 = residual_signs(&render(scene, pose, camera, settings).image, observed);
    sp.iter()
        .zip(&sm)
        .zip(&s0)
        .any(|((a, b), c)| a.0 != b.0 || a.0 != c.0 || c.1 < threshold)
}

/// Central finite difference of the loss in coordinate `j`.
pub fn fd_loss(scene: &SceneModel, j: usize, h: f64, pose: &Pose, camera: &Camera, observed: &RgbdImage, gamma: f64, settings: &RenderSettings) -> f64 {
    let x = scene.to_params()[j];
    let f = |s: &SceneModel| reconstruction_loss(&render(s, pose, camera, settings).image, observed, gamma).unwrap();
    (f(&with_param(scene, j, x + h)) - f(&with_param(scene, j, x - h))) / (2.0 * h)
}

/// Dense Jacobian of the rendered RGB (and optionally depth) image by
/// central differences; returns `J[j][pixel*channels + c]`.
pub fn dense_jacobian(scene: &SceneModel, pose: &Pose, camera: &Camera, settings: &RenderSettings, h: f64, with_depth: bool) -> Vec<Vec<f64>> {
    let flatten = |img: &RgbdImage| -> Vec<f64> {
        let mut v = Vec::new();
        for p in 0..img.rgb.len() {
            v.extend_from_slice(&img.rgb[p]);
            if with_depth {
                v.push(img.depth[p]);
            }
        }
        v
    };
    let params = scene.to_params();
    (0..params.len())
        .map(|j| {
            let plus = flatten(&render(&with_param(scene, j, params[j] + h), pose, camera, settings).image);
            let minus = flatten(&render(&with_param(scene, j, params[j] - h), pose, camera, settings).image);
            plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        })
        .collect()
}

/// Coordinates whose FD column crosses a support cutoff or a color clamp.
pub fn cutoff_adjacent(scene: &SceneModel, j: usize, h: f64, pose: &Pose, camera: &Camera) -> bool {
    let x = scene.to_params()[j];
    hits_color_clamp(j, x, h)
        || support_count(&with_param(scene, j, x + h), pose, camera) != support_count(&with_param(scene, j, x - h), pose, camera)
}

/// Colors are clamped to [0, 1] when read back from the flat vector.
fn hits_color_clamp(j: usize, x: f64, h: f64) -> bool {
    j % PARAMS_PER_GAUSSIAN >= raem::scene::COLOR_OFFSET && (x - h < 0.0 || x + h > 1.0)
}

pub fn gaussian_of(j: usize) -> usize {
    j / PARAMS_PER_GAUSSIAN
}

pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Fourth-order dense Jacobian: Richardson combination of central
/// differences at `h` and `h / 2`. Columns whose step would cross a
/// support cutoff are redone with a smaller step.
pub fn dense_jacobian_richardson(scene: &SceneModel, pose: &Pose, camera: &Camera, settings: &RenderSettings, h: f64) -> Vec<Vec<f64>> {
    let params = scene.to_params();
    let image = |j: usize, x: f64| -> Vec<f64> {
        let img = render(&with_param(scene, j, x), pose, camera, settings).image;
        img.rgb.iter().flatten().copied().collect()
    };
    (0..params.len())
        .map(|j| {
            let mut step = h;
            for _ in 0..4 {
                if !cutoff_adjacent(scene, j, step, pose, camera) {
                    break;
                }
                step /= 10.0;
            }
            let x = params[j];
            let central = |s: f64| -> Vec<f64> {
                image(j, x + s).iter().zip(image(j, x - s)).map(|(a, b)| (a - b) / (2.0 * s)).collect()
            };
            let (coarse, fine) = (central(step), central(step / 2.0));
            coarse.iter().zip(&fine).map(|(a, b)| (4.0 * b - a) / 3.0).collect()
        })
        .collect()
}

/// Whether some pair of Gaussians can swap depth order under a move of `h`
/// in any coordinate.
pub fn depth_order_fragile(scene: &SceneModel, pose: &Pose, h: f64) -> bool {
    let inv = pose.inverse();
    let z: Vec<f64> = scene.gaussians().iter().map(|g| inv.transform_point(&g.mu).z).collect();
    z.iter().enumerate().any(|(i, a)| z[i + 1..].iter().any(|b| (a - b).abs() < 4.0 * h))
}
