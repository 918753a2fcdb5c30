//! Collision risk between a waypoint and Gaussian-distributed scene points.
//!
//! The signed distance from a waypoint `p` to a Gaussian point `x` is the
//! projection of `x - p` onto the unit vector toward the mean. It is normal,
//! so its value-at-risk and average value-at-risk (lower tail) are closed
//! form.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scene::{AnisotropicGaussian, IsotropicGaussian, SceneModel};
use crate::special::inv_erf;

/// Accepted range for the confidence level; `exp(iota^2)` overflows near 0.
pub const MIN_EPSILON: f64 = 1e-6;
pub const MAX_EPSILON: f64 = 1.0 - 1e-6;

/// Normal law `N(mean, std^2)` of a signed distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceDistribution {
    pub mean: f64,
    pub std: f64,
}

impl DistanceDistribution {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !(std >= 0.0) || !mean.is_finite() || !std.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "invalid distance distribution N({mean}, {std}^2)"
            )));
        }
        Ok(Self { mean, std })
    }
}

/// Confidence level epsilon of the lower tail.
///
/// Caches `iota = erf^-1(2 eps - 1)` and the tail factor
/// `kappa = 1 / (sqrt(2 pi) eps exp(iota^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceLevel {
    epsilon: f64,
    iota: f64,
    kappa: f64,
}

impl ConfidenceLevel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(MIN_EPSILON..=MAX_EPSILON).contains(&epsilon) {
            return Err(Error::Domain(format!(
                "confidence level must lie in [{MIN_EPSILON}, {MAX_EPSILON}], got {epsilon}"
            )));
        }
        let iota = inv_erf(2.0 * epsilon - 1.0)?;
        let kappa = 1.0 / ((2.0 * PI).sqrt() * epsilon * (iota * iota).exp());
        Ok(Self {
            epsilon,
            iota,
            kappa,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn iota(&self) -> f64 {
        self.iota
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Cutoff distance `d_s` of the level-set risk representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetParams {
    d_s: f64,
}

impl LevelSetParams {
    pub fn new(d_s: f64) -> Result<Self> {
        if !(d_s > 0.0 && d_s.is_finite()) {
            return Err(Error::InvalidArgument(format!("cutoff must be positive, got {d_s}")));
        }
        Ok(Self { d_s })
    }

    pub fn cutoff(&self) -> f64 {
        self.d_s
    }
}

/// Signed-distance law for an isotropic Gaussian: `N(|mu - p|, sigma^2)`.
///
/// When `p` coincides with the mean every direction gives `N(0, sigma^2)`.
pub fn distance_distribution(p: &Vec3, g: &IsotropicGaussian) -> DistanceDistribution {
    DistanceDistribution {
        mean: (g.mu - p).norm(),
        std: g.sigma(),
    }
}

/// Signed-distance law for a full-covariance Gaussian: variance `u^T Sigma u`.
pub fn distance_distribution_anisotropic(
    p: &Vec3,
    g: &AnisotropicGaussian,
) -> Result<DistanceDistribution> {
    let offset = g.mu - p;
    let mean = offset.norm();
    if mean < 1e-9 {
        return Err(Error::DegenerateDirection);
    }
    let u = offset / mean;
    let variance = (u.transpose() * g.covariance() * u)[(0, 0)];
    Ok(DistanceDistribution {
        mean,
        std: variance.max(0.0).sqrt(),
    })
}

/// Lower-tail epsilon-quantile of the distance.
pub fn value_at_risk(d: &DistanceDistribution, eps: &ConfidenceLevel) -> f64 {
    SQRT_2 * d.std * eps.iota + d.mean
}

/// Mean of the distance conditioned below its value-at-risk.
pub fn average_value_at_risk(d: &DistanceDistribution, eps: &ConfidenceLevel) -> f64 {
    d.mean - d.std * eps.kappa
}

/// Worst-case (smallest) AVaR over a scene at one waypoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCaseRisk {
    /// `+inf` for an empty scene.
    pub alpha: f64,
    pub argmin: Option<usize>,
}

pub fn waypoint_worst_case_risk(
    p: &Vec3,
    scene: &SceneModel,
    eps: &ConfidenceLevel,
) -> WorstCaseRisk {
    worst_case_by(p, scene, |d| average_value_at_risk(d, eps))
}

/// Same reduction with the expected distance as the risk driver.
pub fn waypoint_worst_case_mean(p: &Vec3, scene: &SceneModel) -> WorstCaseRisk {
    worst_case_by(p, scene, |d| d.mean)
}

fn worst_case_by(
    p: &Vec3,
    scene: &SceneModel,
    measure: impl Fn(&DistanceDistribution) -> f64,
) -> WorstCaseRisk {
    let mut best = WorstCaseRisk {
        alpha: f64::INFINITY,
        argmin: None,
    };
    for (i, g) in scene.gaussians().iter().enumerate() {
        let v = measure(&distance_distribution(p, g));
        // strict comparison keeps the lowest index on ties
        if v < best.alpha || best.argmin.is_none() {
            best = WorstCaseRisk {
                alpha: v,
                argmin: Some(i),
            };
        }
    }
    best
}

/// Level-set risk in `[0, +inf]`: 0 is safe, `+inf` means the AVaR
/// indicates a collision, and in between `AVaR = d_s / (1 + risk)`.
pub fn level_set_risk(
    d: &DistanceDistribution,
    eps: &ConfidenceLevel,
    ls: &LevelSetParams,
) -> f64 {
    let (mu, sigma, ds, kappa) = (d.mean, d.std, ls.d_s, eps.kappa);
    if sigma == 0.0 {
        return if mu >= ds {
            0.0
        } else if mu > 0.0 {
            ds / mu - 1.0
        } else {
            f64::INFINITY
        };
    }
    if (mu - ds) / sigma >= kappa {
        0.0
    } else if mu / sigma <= kappa {
        f64::INFINITY
    } else {
        ds / (mu - kappa * sigma) - 1.0
    }
}
