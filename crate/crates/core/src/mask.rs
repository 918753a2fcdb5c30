//! Risk-aware environment masking: per-waypoint masking radii from the
//! worst-case collision risk and the subset of Gaussians inside the union
//! of the resulting balls.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Path;
use crate::risk::{waypoint_worst_case_mean, waypoint_worst_case_risk, ConfidenceLevel};
use crate::scene::SceneModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: ConfidenceLevel,
    /// Optional upper bound on the radius for scenes with very negative risk.
    pub r_max: Option<f64>,
}

impl MaskParams {
    pub fn new(beta1: f64, beta2: f64, epsilon: ConfidenceLevel) -> Result<Self> {
        if !(beta1 > 0.0 && beta2 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beta1 and beta2 must be positive (got {beta1}, {beta2})"
            )));
        }
        Ok(Self {
            beta1,
            beta2,
            epsilon,
            r_max: None,
        })
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = Some(r_max);
        self
    }
}

/// Which per-Gaussian statistic drives `alpha_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskDriver {
    /// Average value-at-risk of the signed distance.
    #[default]
    Avar,
    /// Expected signed distance.
    Mean,
}

/// `beta1 * exp(-beta2 * alpha)`, zero for `alpha = +inf`.
pub fn masking_radius(alpha: f64, params: &MaskParams) -> f64 {
    if alpha == f64::INFINITY {
        return 0.0;
    }
    let r = params.beta1 * (-params.beta2 * alpha).exp();
    match params.r_max {
        Some(cap) => r.min(cap),
        None => r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEntry {
    pub alpha: f64,
    pub r_mask: f64,
    pub argmin: Option<usize>,
}

/// Per-waypoint risk and masking radius.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RiskProfile {
    pub entries: Vec<RiskEntry>,
}

impl RiskProfile {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.r_mask)
    }

    /// Same risks with every radius replaced by `radius`.
    pub fn with_uniform_radius(&self, radius: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| RiskEntry {
                    r_mask: radius,
                    ..*e
                })
                .collect(),
        }
    }

    /// CSV with columns `k,alpha,r_mask,argmin`; an empty argmin means an empty scene.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "alpha", "r_mask", "argmin"])?;
        for (k, e) in self.entries.iter().enumerate() {
            w.write_record([
                k.to_string(),
                e.alpha.to_string(),
                e.r_mask.to_string(),
                e.argmin.map(|i| i.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

pub fn risk_profile(path: &Path, scene: &SceneModel, params: &MaskParams) -> RiskProfile {
    risk_profile_with_driver(path, scene, params, RiskDriver::Avar)
}

pub fn risk_profile_with_driver(
    path: &Path,
    scene: &SceneModel,
    params: &MaskParams,
    driver: RiskDriver,
) -> RiskProfile {
    let entries = path
        .waypoints()
        .iter()
        .map(|p| {
            let worst = match driver {
                RiskDriver::Avar => waypoint_worst_case_risk(p, scene, &params.epsilon),
                RiskDriver::Mean => waypoint_worst_case_mean(p, scene),
            };
            RiskEntry {
                alpha: worst.alpha,
                r_mask: masking_radius(worst.alpha, params),
                argmin: worst.argmin,
            }
        })
        .collect();
    RiskProfile { entries }
}

/// Indices (ascending) of the Gaussians kept by the mask.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MaskedScene {
    pub indices: Vec<usize>,
}

impl MaskedScene {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// Keeps Gaussian `i` iff its mean lies in some closed ball `B(p_k, r_mask(k))`.
pub fn mask_environment(
    scene: &SceneModel,
    path: &Path,
    profile: &RiskProfile,
) -> Result<MaskedScene> {
    if profile.len() != path.len() {
        return Err(Error::InvalidArgument(format!(
            "risk profile has {} entries for {} waypoints",
            profile.len(),
            path.len()
        )));
    }
    let balls: Vec<_> = path
        .waypoints()
        .iter()
        .zip(profile.radii())
        .filter(|(_, r)| *r > 0.0)
        .map(|(p, r)| (*p, r * r))
        .collect();
    let indices = scene
        .gaussians()
        .iter()
        .enumerate()
        .filter(|(_, g)| balls.iter().any(|(p, r2)| (g.mu - p).norm_squared() <= *r2))
        .map(|(i, _)| i)
        .collect();
    Ok(MaskedScene { indices })
}
