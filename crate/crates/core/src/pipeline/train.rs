//! Gradient training of the Gaussian scene against RGB-D observations.
//!
//! The update is Adam (first and second moment, `beta1 = 0.9`) with a fixed
//! step size per parameter group. Steps alternate between the newest
//! observation and a uniformly drawn one from the whole set.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Camera, Pose};
use crate::image::RgbdImage;
use crate::rng;
use crate::scene::{
    SceneModel, COLOR_OFFSET, LOGIT_OPACITY_OFFSET, LOG_SIGMA_OFFSET, PARAMS_PER_GAUSSIAN,
};
use crate::splat::{loss_and_gradient, reconstruction_loss, render, RenderSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub iterations_per_view: usize,
    pub lr_position: f64,
    pub lr_log_sigma: f64,
    pub lr_logit_opacity: f64,
    pub lr_color: f64,
    pub momentum: f64,
    pub second_moment: f64,
    /// Depth-loss weight.
    pub gamma: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations_per_view: 60,
            lr_position: 1e-3,
            lr_log_sigma: 1e-3,
            lr_logit_opacity: 5e-3,
            lr_color: 2.5e-3,
            momentum: 0.9,
            second_moment: 0.999,
            gamma: 0.5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations_per_view == 0 {
            return Err(Error::InvalidArgument("iterations_per_view must be >= 1".into()));
        }
        let lrs = [self.lr_position, self.lr_log_sigma, self.lr_logit_opacity, self.lr_color];
        if lrs.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument("step sizes must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) || !(0.0..1.0).contains(&self.second_moment) {
            return Err(Error::InvalidArgument("moment decay rates must lie in [0, 1)".into()));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidArgument("gamma must be >= 0".into()));
        }
        Ok(())
    }

    fn step_size(&self, coord: usize) -> f64 {
        match coord % PARAMS_PER_GAUSSIAN {
            0..=2 => self.lr_position,
            LOG_SIGMA_OFFSET => self.lr_log_sigma,
            LOGIT_OPACITY_OFFSET => self.lr_logit_opacity,
            _ => self.lr_color,
        }
    }
}

/// One RGB-D frame with the camera pose it was taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub image: RgbdImage,
    pub pose: Pose,
    /// Loss of this view the first time it was trained on.
    initial_loss: Option<f64>,
}

impl Observation {
    pub fn new(image: RgbdImage, pose: Pose) -> Self {
        Self {
            image,
            pose,
            initial_loss: None,
        }
    }
}

/// Owns the mutable scene and optimizer state.
#[derive(Debug, Clone)]
pub struct Trainer {
    scene: SceneModel,
    params: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
    steps: u64,
    observations: Vec<Observation>,
    camera: Camera,
    settings: RenderSettings,
    config: TrainConfig,
    rng: ChaCha8Rng,
    iterations_run: usize,
}

impl Trainer {
    pub fn new(scene: SceneModel, camera: Camera, settings: RenderSettings, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let params = scene.to_params();
        let n = params.len();
        Ok(Self {
            scene,
            params,
            first: vec![0.0; n],
            second: vec![0.0; n],
            steps: 0,
            observations: Vec::new(),
            camera,
            settings,
            rng: rng::stream(config.seed, rng::streams::TRAINING),
            config,
            iterations_run: 0,
        })
    }

    pub fn scene(&self) -> &SceneModel {
        &self.scene
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn iterations_run(&self) -> usize {
        self.iterations_run
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn add_gaussians(&mut self, gaussians: impl IntoIterator<Item = crate::scene::IsotropicGaussian>) {
        self.scene.extend(gaussians);
        self.params = self.scene.to_params();
        let n = self.params.len();
        self.first.resize(n, 0.0);
        self.second.resize(n, 0.0);
    }

    pub fn add_observation(&mut self, image: RgbdImage, pose: Pose) -> Result<()> {
        image.check_matches(&self.camera)?;
        self.observations.push(Observation::new(image, pose));
        Ok(())
    }

    /// Mean loss over every observation.
    pub fn total_loss(&self) -> Result<f64> {
        total_loss(&self.scene, &self.observations, &self.camera, &self.settings, self.config.gamma)
    }

    /// Runs `iterations_per_view` steps. Returns the per-step losses.
    pub fn train_round(&mut self) -> Result<Vec<f64>> {
        if self.observations.is_empty() {
            return Err(Error::InvalidArgument("no observations to train on".into()));
        }
        let mut losses = Vec::with_capacity(self.config.iterations_per_view);
        for i in 0..self.config.iterations_per_view {
            let n = self.observations.len();
            let pick = if i % 2 == 0 { n - 1 } else { self.rng.random_range(0..n) };
            losses.push(self.step(pick)?);
        }
        Ok(losses)
    }

    fn step(&mut self, pick: usize) -> Result<f64> {
        let obs = &self.observations[pick];
        let (loss, grad) = loss_and_gradient(
            &self.scene,
            &obs.pose,
            &self.camera,
            &obs.image,
            self.config.gamma,
            &self.settings,
        )?;
        match obs.initial_loss {
            None => self.observations[pick].initial_loss = Some(loss),
            Some(initial) if loss > 10.0 * initial && loss > 1e-12 => {
                return Err(Error::Diverged { loss, initial });
            }
            Some(_) => {}
        }

        self.steps += 1;
        let (b1, b2) = (self.config.momentum, self.config.second_moment);
        let c1 = 1.0 - b1.powi(self.steps as i32);
        let c2 = 1.0 - b2.powi(self.steps as i32);
        for (j, g) in grad.iter().enumerate() {
            self.first[j] = b1 * self.first[j] + (1.0 - b1) * g;
            self.second[j] = b2 * self.second[j] + (1.0 - b2) * g * g;
            let m = self.first[j] / c1;
            let v = self.second[j] / c2;
            self.params[j] -= self.config.step_size(j) * m / (v.sqrt() + 1e-12);
        }
        for block in self.params.chunks_mut(PARAMS_PER_GAUSSIAN) {
            for c in &mut block[COLOR_OFFSET..COLOR_OFFSET + 3] {
                *c = c.clamp(0.0, 1.0);
            }
            block[LOG_SIGMA_OFFSET] = block[LOG_SIGMA_OFFSET].clamp(-20.0, 5.0);
            block[LOGIT_OPACITY_OFFSET] = block[LOGIT_OPACITY_OFFSET].clamp(-40.0, 40.0);
        }
        self.scene = SceneModel::from_params(&self.params)?;
        self.iterations_run += 1;
        Ok(loss)
    }
}

/// Mean reconstruction loss of `scene` over `observations`.
pub fn total_loss(
    scene: &SceneModel,
    observations: &[Observation],
    camera: &Camera,
    settings: &RenderSettings,
    gamma: f64,
) -> Result<f64> {
    if observations.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for o in observations {
        let r = render(scene, &o.pose, camera, settings);
        sum += reconstruction_loss(&r.image, &o.image, gamma)?;
    }
    Ok(sum / observations.len() as f64)
}

/// Trains `scene` on all `observations` for `iterations_per_view` steps per
/// observation, adding them one at a time.
pub fn train_scene(
    scene: SceneModel,
    observations: &[(RgbdImage, Pose)],
    camera: &Camera,
    settings: &RenderSettings,
    config: &TrainConfig,
) -> Result<SceneModel> {
    if observations.is_empty() {
        return Err(Error::InvalidArgument("train_scene needs at least one observation".into()));
    }
    let mut trainer = Trainer::new(scene, *camera, *settings, config.clone())?;
    for (image, pose) in observations {
        trainer.add_observation(image.clone(), *pose)?;
        trainer.train_round()?;
    }
    Ok(trainer.scene)
}
