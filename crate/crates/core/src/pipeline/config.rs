use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Camera, Path, Pose, Vec3};
use crate::mask::{MaskParams, RiskDriver};
use crate::risk::ConfidenceLevel;
use crate::world::{Stage, WorldRecipe};

use super::train::TrainConfig;

/// One candidate-generation stage of the acquisition loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub kind: Stage,
    /// Views selected (and captured) in this stage.
    pub views: usize,
    /// Fresh candidate pool size per selection.
    pub candidates: usize,
    pub radius: f64,
}

/// Fixed first view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewSpec {
    pub eye: [f64; 3],
    pub target: [f64; 3],
}

impl ViewSpec {
    pub fn pose(&self) -> Pose {
        Pose::look_at(Vec3::from(self.eye), Vec3::from(self.target), Vec3::z())
    }
}

/// Everything that determines an experiment run. Loaded from TOML; missing
/// keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Resample the recipe's path polyline to this many waypoints.
    pub path_waypoints: Option<usize>,
    pub eps: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub r_max: Option<f64>,
    pub lambda: f64,
    pub raem: bool,
    pub risk_driver: RiskDriver,
    /// Replace the risk-driven radii by one radius for every waypoint.
    pub uniform_radius: Option<f64>,
    /// Square image side in pixels.
    pub resolution: usize,
    /// Horizontal field of view in degrees.
    pub fov_deg: f64,
    /// Pixel stride of the unprojection grid.
    pub stride: usize,
    pub init_opacity: f64,
    /// New views only seed Gaussians where the rendered weight is below this.
    pub weight_threshold: f64,
    /// Depth composited behind the last Gaussian when rendering the model.
    pub render_far: f64,
    /// Background color composited behind the last Gaussian.
    pub render_background: [f64; 3],
    /// Depth channel weight in the Fisher Jacobian; `None` scores RGB only.
    pub fisher_depth_weight: Option<f64>,
    /// Candidates are scored on a camera downscaled by this factor.
    pub score_downscale: usize,
    /// Candidates closer than this to a wall or obstacle are redrawn.
    pub candidate_margin: f64,
    /// Ground-truth surface samples per square meter.
    pub gt_density: f64,
    pub sigma_hat: f64,
    pub initial_view: ViewSpec,
    pub stages: Vec<StageConfig>,
    pub train: TrainConfig,
    pub world: WorldRecipe,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            path_waypoints: Some(10),
            eps: 0.1,
            beta1: 0.2,
            beta2: 1.0,
            r_max: None,
            lambda: crate::fisher::DEFAULT_LAMBDA,
            raem: true,
            risk_driver: RiskDriver::Avar,
            uniform_radius: None,
            resolution: 256,
            fov_deg: 90.0,
            stride: 4,
            init_opacity: 0.7,
            weight_threshold: 0.5,
            render_far: crate::image::DEFAULT_FAR_SENTINEL,
            render_background: [0.5; 3],
            fisher_depth_weight: None,
            score_downscale: 1,
            candidate_margin: 0.2,
            gt_density: 400.0,
            sigma_hat: 1e-3,
            initial_view: ViewSpec {
                eye: [0.5, 0.5, 1.5],
                target: [5.0, 5.0, 0.5],
            },
            stages: vec![
                StageConfig {
                    kind: Stage::AlongPath,
                    views: 5,
                    candidates: 250,
                    radius: 2.0,
                },
                StageConfig {
                    kind: Stage::AroundCenter,
                    views: 5,
                    candidates: 250,
                    radius: 2.0,
                },
            ],
            train: TrainConfig::default(),
            world: WorldRecipe::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        ConfidenceLevel::new(self.eps)?;
        self.mask_params()?;
        if !(self.lambda > 0.0) {
            return bad("lambda must be positive");
        }
        if self.uniform_radius.is_some_and(|r| !(r >= 0.0)) {
            return bad("uniform radius must be >= 0");
        }
        if self.resolution == 0 || self.stride == 0 || self.score_downscale == 0 {
            return bad("resolution, stride and score_downscale must be >= 1");
        }
        if self.resolution % self.score_downscale != 0 {
            return bad("score_downscale must divide the resolution");
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return bad("fov_deg must lie in (0, 180)");
        }
        if !(self.init_opacity > 0.0 && self.init_opacity < 1.0) {
            return bad("init_opacity must lie in (0, 1)");
        }
        if !(self.gt_density > 0.0 && self.sigma_hat > 0.0) {
            return bad("gt_density and sigma_hat must be positive");
        }
        if !(self.render_far >= 0.0) || self.render_background.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad("render_far must be >= 0 and the background inside [0, 1]");
        }
        if !(self.candidate_margin >= 0.0) {
            return bad("candidate_margin must be >= 0");
        }
        if self.fisher_depth_weight.is_some_and(|w| !(w >= 0.0)) {
            return bad("fisher_depth_weight must be >= 0");
        }
        for s in &self.stages {
            if s.views > 0 && s.candidates == 0 {
                return bad("a stage that selects views needs candidates");
            }
            if !(s.radius >= 0.0) {
                return bad("stage radius must be >= 0");
            }
        }
        self.train.validate()?;
        self.path()?;
        Ok(())
    }

    /// Total captured views: the initial one plus every stage budget.
    pub fn view_budget(&self) -> usize {
        1 + self.stages.iter().map(|s| s.views).sum::<usize>()
    }

    pub fn confidence(&self) -> Result<ConfidenceLevel> {
        ConfidenceLevel::new(self.eps)
    }

    pub fn mask_params(&self) -> Result<MaskParams> {
        let p = MaskParams::new(self.beta1, self.beta2, ConfidenceLevel::new(self.eps)?)?;
        Ok(match self.r_max {
            Some(r) => p.with_r_max(r),
            None => p,
        })
    }

    pub fn path(&self) -> Result<Path> {
        let path = self.world.payload_path()?;
        match self.path_waypoints {
            Some(n) => path.resampled(n),
            None => Ok(path),
        }
    }

    pub fn render_settings(&self) -> crate::splat::RenderSettings {
        crate::splat::RenderSettings {
            background: self.render_background,
            far: self.render_far,
        }
    }

    pub fn camera(&self) -> Result<Camera> {
        Camera::with_fov(self.resolution, self.fov_deg.to_radians())
    }
}
