//! Fisher-information view scoring.
//!
//! The NLL Hessian of a view is approximated by the diagonal of `J^T J`
//! of the rendered image (unit measurement noise). Training views add up,
//! a prior `lambda` keeps the diagonal invertible, and a candidate view is
//! scored by `sum_j h_j / H_j` over the (optionally masked) coordinates.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{Camera, Pose};
use crate::mask::MaskedScene;
use crate::scene::{SceneModel, PARAMS_PER_GAUSSIAN};
use crate::splat::{render_jacobian_diag, JacobianOptions, RenderSettings};

/// Default log-prior regularizer.
pub const DEFAULT_LAMBDA: f64 = 0.1;

/// Diagonal Hessian of the training set, `lambda` already included.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherDiagonal {
    pub entries: Vec<f64>,
    pub lambda: f64,
}

impl FisherDiagonal {
    pub fn prior(len: usize, lambda: f64) -> Self {
        Self {
            entries: vec![lambda; len],
            lambda,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add_view(&mut self, diag: &[f64]) {
        for (e, d) in self.entries.iter_mut().zip(diag) {
            *e += d;
        }
    }
}

/// Rendering options shared by every Fisher computation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FisherOptions {
    pub settings: RenderSettings,
    pub jacobian: JacobianOptions,
}

/// Pool of candidate camera poses with a stage label per pose.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    pub poses: Vec<Pose>,
    pub stages: Vec<u8>,
}

impl CandidateSet {
    pub fn new(poses: Vec<Pose>, stage: u8) -> Self {
        let stages = vec![stage; poses.len()];
        Self { poses, stages }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Parameter coordinates that take part in a masked score (ascending).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParameterMask {
    pub selected: Vec<usize>,
}

impl ParameterMask {
    pub fn from_masked_scene(masked: &MaskedScene) -> Self {
        let selected = masked
            .indices
            .iter()
            .flat_map(|&i| (i * PARAMS_PER_GAUSSIAN)..((i + 1) * PARAMS_PER_GAUSSIAN))
            .collect();
        Self { selected }
    }

    pub fn all(param_count: usize) -> Self {
        Self {
            selected: (0..param_count).collect(),
        }
    }
}

/// Sum of per-view Jacobian diagonals plus `lambda`.
pub fn accumulate_training_fisher(
    scene: &SceneModel,
    train_views: &[(Pose, Camera)],
    lambda: f64,
    options: &FisherOptions,
) -> FisherDiagonal {
    let mut fisher = FisherDiagonal::prior(scene.param_count(), lambda);
    for (pose, camera) in train_views {
        fisher.add_view(&render_jacobian_diag(
            scene,
            pose,
            camera,
            &options.settings,
            &options.jacobian,
        ));
    }
    fisher
}

/// Trace score `sum_j h_j / H_j` for a candidate diagonal `h`.
pub fn trace_score(candidate_diag: &[f64], train: &FisherDiagonal, mask: Option<&ParameterMask>) -> f64 {
    match mask {
        Some(m) => m
            .selected
            .iter()
            .map(|&j| candidate_diag[j] / train.entries[j])
            .sum(),
        None => candidate_diag
            .iter()
            .zip(&train.entries)
            .map(|(h, big_h)| h / big_h)
            .sum(),
    }
}

fn check_fisher(scene: &SceneModel, train: &FisherDiagonal) -> Result<()> {
    if train.len() != scene.param_count() {
        return Err(Error::InvalidArgument(format!(
            "Fisher diagonal has {} entries for {} parameters",
            train.len(),
            scene.param_count()
        )));
    }
    if train.entries.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("Fisher diagonal must be positive".into()));
    }
    Ok(())
}

pub fn expected_information_gain(
    candidate: &Pose,
    camera: &Camera,
    scene: &SceneModel,
    train: &FisherDiagonal,
    mask: Option<&ParameterMask>,
    options: &FisherOptions,
) -> Result<f64> {
    check_fisher(scene, train)?;
    let h = render_jacobian_diag(scene, candidate, camera, &options.settings, &options.jacobian);
    Ok(trace_score(&h, train, mask))
}

/// Per-candidate scores, with and without the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub index: usize,
    pub stage: u8,
    pub pose: Pose,
    pub eig_unmasked: f64,
    pub eig_masked: Option<f64>,
}

impl CandidateScore {
    pub fn score(&self, masked: bool) -> f64 {
        if masked {
            self.eig_masked.unwrap_or(self.eig_unmasked)
        } else {
            self.eig_unmasked
        }
    }
}

/// Scores every candidate once; the masked column is filled when `mask` is given.
pub fn score_candidates(
    candidates: &CandidateSet,
    camera: &Camera,
    scene: &SceneModel,
    train: &FisherDiagonal,
    mask: Option<&ParameterMask>,
    options: &FisherOptions,
) -> Result<Vec<CandidateScore>> {
    check_fisher(scene, train)?;
    Ok(candidates
        .poses
        .iter()
        .enumerate()
        .map(|(index, pose)| {
            let h = render_jacobian_diag(scene, pose, camera, &options.settings, &options.jacobian);
            CandidateScore {
                index,
                stage: candidates.stages.get(index).copied().unwrap_or(0),
                pose: *pose,
                eig_unmasked: trace_score(&h, train, None),
                eig_masked: mask.map(|m| trace_score(&h, train, Some(m))),
            }
        })
        .collect())
}

/// Index of the largest score; the lowest index wins ties.
pub fn argmax_lowest_index(scores: impl IntoIterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((i, s)),
        }
    }
    best
}

/// Candidate maximizing the (masked, when given) information gain.
pub fn select_next_best_view(
    candidates: &CandidateSet,
    camera: &Camera,
    scene: &SceneModel,
    train: &FisherDiagonal,
    mask: Option<&ParameterMask>,
    options: &FisherOptions,
) -> Result<(usize, f64)> {
    if candidates.is_empty() {
        return Err(Error::EmptyPool);
    }
    let scores = score_candidates(candidates, camera, scene, train, mask, options)?;
    Ok(argmax_lowest_index(scores.iter().map(|s| s.score(mask.is_some()))).expect("nonempty pool"))
}

/// CSV with columns `candidate,stage,x,y,z,dir_x,dir_y,dir_z,eig_unmasked,eig_masked`.
pub fn write_scores_csv<W: Write>(scores: &[CandidateScore], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "candidate", "stage", "x", "y", "z", "dir_x", "dir_y", "dir_z", "eig_unmasked", "eig_masked",
    ])?;
    for s in scores {
        let t = s.pose.translation();
        let f = s.pose.rotation().column(2);
        w.write_record([
            s.index.to_string(),
            s.stage.to_string(),
            t.x.to_string(),
            t.y.to_string(),
            t.z.to_string(),
            f[0].to_string(),
            f[1].to_string(),
            f[2].to_string(),
            s.eig_unmasked.to_string(),
            s.eig_masked.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax_lowest_index([1.0, 3.0, 3.0, 2.0]), Some((1, 3.0)));
        assert_eq!(argmax_lowest_index([0.0, 0.0]), Some((0, 0.0)));
        assert_eq!(argmax_lowest_index(std::iter::empty()), None);
    }

    #[test]
    fn trace_score_uniform_prior() {
        let h = [1.0, 2.0, 0.0, 4.0];
        let prior = FisherDiagonal::prior(4, 0.1);
        assert!((trace_score(&h, &prior, None) - 70.0).abs() < 1e-12);
        let m = ParameterMask { selected: vec![1, 3] };
        assert!((trace_score(&h, &prior, Some(&m)) - 60.0).abs() < 1e-12);
        assert_eq!(trace_score(&h, &prior, Some(&ParameterMask::all(4))), trace_score(&h, &prior, None));
    }

    #[test]
    fn parameter_mask_layout() {
        let m = ParameterMask::from_masked_scene(&MaskedScene { indices: vec![0, 2] });
        assert_eq!(m.selected, vec![0, 1, 2, 3, 4, 5, 6, 7, 16, 17, 18, 19, 20, 21, 22, 23]);
    }
}
