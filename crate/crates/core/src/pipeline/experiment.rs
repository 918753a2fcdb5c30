//! The staged acquisition loop and its evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{
    accumulate_training_fisher, argmax_lowest_index, score_candidates, CandidateScore, CandidateSet,
    FisherDiagonal, FisherOptions, ParameterMask,
};
use crate::geometry::{Camera, Path, Pose, Vec3};
use crate::image::RgbdImage;
use crate::mask::{mask_environment, risk_profile_with_driver, RiskEntry, RiskProfile};
use crate::risk::{ConfidenceLevel, DistanceDistribution};
use crate::rng;
use crate::scene::{SceneModel, PARAMS_PER_GAUSSIAN};
use crate::splat::{render, JacobianOptions, RenderSettings};
use crate::world::{
    build_world, capture_rgbd, closest_gt_distribution, free_space_filter, ground_truth_point_cloud,
    sample_candidate_poses, CandidateRequest, CaptureSettings, GroundTruthPoint, GroundTruthWorld, Stage,
};

use super::config::{ExperimentConfig, StageConfig};
use super::eval::{closest_perceived_distribution, wasserstein2};
use super::init::{unproject_init, unproject_uncovered};
use super::train::Trainer;

/// Everything computed to pick one view.
#[derive(Debug, Clone)]
pub struct RoundPlan {
    pub round: usize,
    pub stage: Stage,
    pub pool: CandidateSet,
    pub scores: Vec<CandidateScore>,
    pub profile: RiskProfile,
    pub mask: Option<ParameterMask>,
    pub uncertainty: UncertaintyPoint,
    /// Index into `pool` of the selected candidate.
    pub best: usize,
    /// Score it was selected by.
    pub eig: f64,
}

/// One captured RGB-D frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CapturedView {
    /// 0 for the fixed initial view, otherwise the stage label.
    pub stage: u8,
    pub pose: Pose,
    pub image: RgbdImage,
}

/// One next-best-view decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub round: usize,
    pub stage: u8,
    pub candidate: usize,
    /// Score the selection maximized (masked when the mask was active).
    pub eig: f64,
    pub eig_unmasked: f64,
    pub eig_masked: Option<f64>,
    pub masked_gaussians: Option<usize>,
    pub position: [f64; 3],
}

/// Risk profile of the scene when a round started.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskSnapshot {
    pub round: usize,
    pub entries: Vec<RiskEntry>,
}

/// Mean posterior variance proxy `1/H_j` over the masked coordinates (all
/// coordinates when no mask is active) at the start of a round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyPoint {
    pub round: usize,
    pub coordinates: usize,
    pub mean_inverse_fisher: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointMetric {
    pub waypoint: usize,
    pub position: Vec3,
    pub perceived: DistanceDistribution,
    pub ground_truth: DistanceDistribution,
    pub w2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub seed: u64,
    pub raem: bool,
    pub waypoints: Vec<WaypointMetric>,
    pub mean_w2: f64,
    pub max_w2: f64,
    pub selections: Vec<Selection>,
    pub risk_history: Vec<RiskSnapshot>,
    pub uncertainty: Vec<UncertaintyPoint>,
    pub views: Vec<CapturedView>,
    pub training_iterations: usize,
    pub gaussians: usize,
    /// Final reconstructed scene.
    pub scene: SceneModel,
    pub valid: bool,
    /// Set when `valid` is false.
    pub failure: Option<String>,
}

/// State of a running experiment. Cloning a session branches it, which is
/// how paired variants share the rounds before they differ.
#[derive(Debug, Clone)]
pub struct Session {
    config: ExperimentConfig,
    world: GroundTruthWorld,
    path: Path,
    cloud: Vec<GroundTruthPoint>,
    camera: Camera,
    score_camera: Camera,
    settings: RenderSettings,
    capture: CaptureSettings,
    trainer: Trainer,
    views: Vec<CapturedView>,
    selections: Vec<Selection>,
    risk_history: Vec<RiskSnapshot>,
    uncertainty: Vec<UncertaintyPoint>,
    round: usize,
    stage_done: usize,
}

impl Session {
    /// Builds the world, captures the fixed view and trains on it.
    pub fn start(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let world = build_world(&config.world, config.seed)?;
        let path = config.path()?;
        let cloud = ground_truth_point_cloud(&world, config.gt_density, config.sigma_hat, config.seed)?;
        let camera = config.camera()?;
        let score_camera = camera.downscaled(config.score_downscale)?;
        let settings = config.render_settings();
        let capture = CaptureSettings::default();
        let mut train = config.train.clone();
        train.seed = rng::derive(config.seed, rng::streams::TRAINING);
        let mut trainer = Trainer::new(SceneModel::empty(), camera, settings, train)?;

        let pose = config.initial_view.pose();
        let image = capture_rgbd(&world, &pose, &camera, &capture);
        trainer.add_gaussians(unproject_init(&image, &pose, &camera, config.stride, config.init_opacity));
        if trainer.scene().is_empty() {
            return Err(Error::InvalidArgument("the initial view sees no surface".into()));
        }
        trainer.add_observation(image.clone(), pose)?;
        trainer.train_round()?;

        Ok(Self {
            config,
            world,
            path,
            cloud,
            camera,
            score_camera,
            settings,
            capture,
            trainer,
            views: vec![CapturedView { stage: 0, pose, image }],
            selections: Vec::new(),
            risk_history: Vec::new(),
            uncertainty: Vec::new(),
            round: 0,
            stage_done: 0,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn world(&self) -> &GroundTruthWorld {
        &self.world
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn scene(&self) -> &SceneModel {
        self.trainer.scene()
    }

    pub fn camera(&self) -> &Camera {
        &self.camera
    }

    pub fn ground_truth_cloud(&self) -> &[GroundTruthPoint] {
        &self.cloud
    }

    pub fn views(&self) -> &[CapturedView] {
        &self.views
    }

    /// Number of stages already run.
    pub fn stages_done(&self) -> usize {
        self.stage_done
    }

    /// Branches with different masking settings. Only rounds not yet run
    /// see the change.
    pub fn branch(&self, raem: bool, uniform_radius: Option<f64>) -> Self {
        let mut s = self.clone();
        s.config.raem = raem;
        s.config.uniform_radius = uniform_radius;
        s
    }

    /// Runs the next configured stage. Returns false when none are left.
    pub fn run_next_stage(&mut self) -> Result<bool> {
        let Some(stage) = self.config.stages.get(self.stage_done).cloned() else {
            return Ok(false);
        };
        for _ in 0..stage.views {
            let plan = self.plan_round(&stage)?;
            self.commit(plan)?;
        }
        self.stage_done += 1;
        Ok(true)
    }

    pub fn run_remaining(&mut self) -> Result<()> {
        while self.run_next_stage()? {}
        Ok(())
    }

    fn fisher_options(&self) -> FisherOptions {
        FisherOptions {
            settings: self.settings,
            jacobian: JacobianOptions {
                depth_weight: self.config.fisher_depth_weight,
            },
        }
    }

    /// Scores a fresh candidate pool for the next round of `stage` without
    /// changing the session.
    pub fn plan_round(&self, stage: &StageConfig) -> Result<RoundPlan> {
        let round = self.round;
        let scene = self.trainer.scene();
        let center = scene.centroid().ok_or(Error::EmptyScene)?;
        let request = CandidateRequest {
            stage: stage.kind,
            count: stage.candidates,
            radius: stage.radius,
            seed: rng::derive(self.config.seed, rng::streams::CANDIDATES + round as u64),
        };
        let accept = free_space_filter(&self.world, self.config.candidate_margin);
        let pool = sample_candidate_poses(&request, &self.path, &center, Some(&accept))?;

        let options = self.fisher_options();
        let train_views: Vec<(Pose, Camera)> = self.views.iter().map(|v| (v.pose, self.score_camera)).collect();
        let fisher = accumulate_training_fisher(scene, &train_views, self.config.lambda, &options);

        let params = self.config.mask_params()?;
        let mut profile = risk_profile_with_driver(&self.path, scene, &params, self.config.risk_driver);
        if let Some(r) = self.config.uniform_radius {
            profile = profile.with_uniform_radius(r);
        }
        let mask = if self.config.raem && stage.kind == Stage::AroundCenter {
            let masked = mask_environment(scene, &self.path, &profile)?;
            Some(ParameterMask::from_masked_scene(&masked))
        } else {
            None
        };
        let uncertainty = uncertainty_point(round, &fisher, mask.as_ref());
        let scores = score_candidates(&pool, &self.score_camera, scene, &fisher, mask.as_ref(), &options)?;
        // an empty mask scores every candidate 0; fall back to the unmasked gain
        let use_mask = mask.as_ref().is_some_and(|m| !m.selected.is_empty());
        let (best, eig) = argmax_lowest_index(scores.iter().map(|s| s.score(use_mask))).ok_or(Error::EmptyPool)?;
        Ok(RoundPlan {
            round,
            stage: stage.kind,
            pool,
            scores,
            profile,
            mask,
            uncertainty,
            best,
            eig,
        })
    }

    /// Captures the planned view, seeds Gaussians where the model does not
    /// cover it yet, and trains.
    fn commit(&mut self, plan: RoundPlan) -> Result<()> {
        let pose = plan.pool.poses[plan.best];
        let t = pose.translation();
        let chosen = &plan.scores[plan.best];
        self.risk_history.push(RiskSnapshot {
            round: plan.round,
            entries: plan.profile.entries,
        });
        self.uncertainty.push(plan.uncertainty);
        self.selections.push(Selection {
            round: plan.round,
            stage: plan.stage.label(),
            candidate: plan.best,
            eig: plan.eig,
            eig_unmasked: chosen.eig_unmasked,
            eig_masked: chosen.eig_masked,
            masked_gaussians: plan.mask.as_ref().map(|m| m.selected.len() / PARAMS_PER_GAUSSIAN),
            position: [t.x, t.y, t.z],
        });

        let image = capture_rgbd(&self.world, &pose, &self.camera, &self.capture);
        let rendered = render(self.trainer.scene(), &pose, &self.camera, &self.settings);
        self.trainer.add_gaussians(unproject_uncovered(
            &image,
            &pose,
            &self.camera,
            self.config.stride,
            self.config.init_opacity,
            &rendered.per_pixel_weight_sum,
            self.config.weight_threshold,
        ));
        self.trainer.add_observation(image.clone(), pose)?;
        self.trainer.train_round()?;
        self.views.push(CapturedView {
            stage: plan.stage.label(),
            pose,
            image,
        });
        self.round += 1;
        Ok(())
    }

    /// Per-waypoint W2 of the current scene.
    pub fn evaluate(&self) -> Result<Vec<WaypointMetric>> {
        evaluate_scene(self.trainer.scene(), &self.path, &self.cloud, &self.config.confidence()?)
    }

    /// Evaluates and packages the session. Evaluation errors produce an
    /// invalid report.
    pub fn report(&self) -> ExperimentReport {
        match self.evaluate() {
            Ok(waypoints) => self.package(waypoints, None),
            Err(e) => self.package(Vec::new(), Some(e.to_string())),
        }
    }

    fn package(&self, waypoints: Vec<WaypointMetric>, failure: Option<String>) -> ExperimentReport {
        let (mean_w2, max_w2) = aggregate(&waypoints);
        ExperimentReport {
            seed: self.config.seed,
            raem: self.config.raem,
            waypoints,
            mean_w2,
            max_w2,
            selections: self.selections.clone(),
            risk_history: self.risk_history.clone(),
            uncertainty: self.uncertainty.clone(),
            views: self.views.clone(),
            training_iterations: self.trainer.iterations_run(),
            gaussians: self.trainer.scene().len(),
            scene: self.trainer.scene().clone(),
            valid: failure.is_none(),
            failure,
        }
    }
}

/// Per-waypoint W2 between the perceived and ground-truth closest
/// distance laws.
pub fn evaluate_scene(
    scene: &SceneModel,
    path: &Path,
    cloud: &[GroundTruthPoint],
    eps: &ConfidenceLevel,
) -> Result<Vec<WaypointMetric>> {
    path.waypoints()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let perceived = closest_perceived_distribution(scene, p, eps)?;
            let ground_truth = closest_gt_distribution(cloud, p, eps)?;
            Ok(WaypointMetric {
                waypoint: k,
                position: *p,
                perceived,
                ground_truth,
                w2: wasserstein2(&perceived, &ground_truth),
            })
        })
        .collect()
}

fn aggregate(waypoints: &[WaypointMetric]) -> (f64, f64) {
    if waypoints.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = waypoints.iter().map(|w| w.w2).sum::<f64>() / waypoints.len() as f64;
    let max = waypoints.iter().map(|w| w.w2).fold(0.0, f64::max);
    (mean, max)
}

fn uncertainty_point(round: usize, fisher: &FisherDiagonal, mask: Option<&ParameterMask>) -> UncertaintyPoint {
    let (sum, n) = match mask {
        Some(m) => (m.selected.iter().map(|&j| 1.0 / fisher.entries[j]).sum::<f64>(), m.selected.len()),
        None => (fisher.entries.iter().map(|h| 1.0 / h).sum(), fisher.entries.len()),
    };
    UncertaintyPoint {
        round,
        coordinates: n,
        mean_inverse_fisher: if n == 0 { 0.0 } else { sum / n as f64 },
    }
}

fn invalid_report(config: &ExperimentConfig, failure: String) -> ExperimentReport {
    ExperimentReport {
        seed: config.seed,
        raem: config.raem,
        waypoints: Vec::new(),
        mean_w2: f64::NAN,
        max_w2: f64::NAN,
        selections: Vec::new(),
        risk_history: Vec::new(),
        uncertainty: Vec::new(),
        views: Vec::new(),
        training_iterations: 0,
        gaussians: 0,
        scene: SceneModel::empty(),
        valid: false,
        failure: Some(failure),
    }
}

/// Runs the whole protocol. A bad configuration is an error; a failure
/// during the run yields a partial report with `valid == false`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut session = match Session::start(config.clone()) {
        Ok(s) => s,
        Err(e) => return Ok(invalid_report(config, e.to_string())),
    };
    Ok(finish(&mut session))
}

/// Runs the remaining stages of `session` and reports.
pub fn finish(session: &mut Session) -> ExperimentReport {
    match session.run_remaining() {
        Ok(()) => session.report(),
        Err(e) => {
            let mut r = session.report();
            r.valid = false;
            r.failure = Some(e.to_string());
            r
        }
    }
}
