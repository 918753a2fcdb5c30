//! Scene primitives and the flat parameter layout used by training and
//! Fisher accumulation.
//!
//! Each isotropic Gaussian occupies [`PARAMS_PER_GAUSSIAN`] consecutive
//! coordinates: `mu (3), ln(sigma), logit(opacity), color (3)`. Scale and
//! opacity are stored in those unconstrained coordinates, so reading a
//! scene out of its flat vector and back is exact.

use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mat3, Vec3};

pub const PARAMS_PER_GAUSSIAN: usize = 8;
pub const MU_OFFSET: usize = 0;
pub const LOG_SIGMA_OFFSET: usize = 3;
pub const LOGIT_OPACITY_OFFSET: usize = 4;
pub const COLOR_OFFSET: usize = 5;

/// Largest stored logit; `sigmoid(40)` rounds to exactly 1.0.
const LOGIT_CAP: f64 = 40.0;

pub const SCENE_FORMAT_VERSION: u32 = 1;

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln().min(LOGIT_CAP)
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Isotropic 3D Gaussian `N(mu, sigma^2 I)` with opacity and diffuse color.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicGaussian {
    pub mu: Vec3,
    log_sigma: f64,
    logit_opacity: f64,
    color: [f64; 3],
}

impl IsotropicGaussian {
    pub fn new(mu: Vec3, sigma: f64, opacity: f64, color: [f64; 3]) -> Result<Self> {
        if !mu.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("mean must be finite".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        if !(opacity > 0.0 && opacity <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "opacity must lie in (0, 1], got {opacity}"
            )));
        }
        if color.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidArgument(format!("color {color:?} outside [0, 1]")));
        }
        Ok(Self {
            mu,
            log_sigma: sigma.ln(),
            logit_opacity: logit(opacity),
            color,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.log_sigma.exp()
    }

    pub fn opacity(&self) -> f64 {
        sigmoid(self.logit_opacity)
    }

    pub fn color(&self) -> [f64; 3] {
        self.color
    }

    pub fn log_sigma(&self) -> f64 {
        self.log_sigma
    }

    pub fn logit_opacity(&self) -> f64 {
        self.logit_opacity
    }

    fn write_params(&self, out: &mut [f64]) {
        out[MU_OFFSET..MU_OFFSET + 3].copy_from_slice(self.mu.as_slice());
        out[LOG_SIGMA_OFFSET] = self.log_sigma;
        out[LOGIT_OPACITY_OFFSET] = self.logit_opacity;
        out[COLOR_OFFSET..COLOR_OFFSET + 3].copy_from_slice(&self.color);
    }

    /// Reads one Gaussian back from its block of the flat vector. Colors are
    /// clamped into `[0, 1]` and the logit is capped, so any finite block
    /// yields a valid Gaussian.
    fn read_params(block: &[f64]) -> Self {
        let c = |k: usize| block[COLOR_OFFSET + k].clamp(0.0, 1.0);
        Self {
            mu: Vec3::new(block[0], block[1], block[2]),
            log_sigma: block[LOG_SIGMA_OFFSET],
            logit_opacity: block[LOGIT_OPACITY_OFFSET].min(LOGIT_CAP),
            color: [c(0), c(1), c(2)],
        }
    }
}

/// Gaussian with a full covariance; only used for risk evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropicGaussian {
    pub mu: Vec3,
    covariance: Mat3,
}

impl AnisotropicGaussian {
    pub fn new(mu: Vec3, covariance: Mat3) -> Result<Self> {
        if (covariance - covariance.transpose()).abs().max() > 1e-12 {
            return Err(Error::InvalidArgument("covariance is not symmetric".into()));
        }
        if covariance.cholesky().is_none() {
            return Err(Error::InvalidArgument("covariance is not positive definite".into()));
        }
        Ok(Self { mu, covariance })
    }

    pub fn covariance(&self) -> &Mat3 {
        &self.covariance
    }
}

/// Ordered collection of isotropic Gaussians.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SceneModel {
    gaussians: Vec<IsotropicGaussian>,
}

impl SceneModel {
    pub fn new(gaussians: Vec<IsotropicGaussian>) -> Self {
        Self { gaussians }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn gaussians(&self) -> &[IsotropicGaussian] {
        &self.gaussians
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    pub fn extend(&mut self, more: impl IntoIterator<Item = IsotropicGaussian>) {
        self.gaussians.extend(more);
    }

    pub fn param_count(&self) -> usize {
        self.gaussians.len() * PARAMS_PER_GAUSSIAN
    }

    /// Flat parameter vector `w`.
    pub fn to_params(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.param_count()];
        for (g, block) in self.gaussians.iter().zip(w.chunks_mut(PARAMS_PER_GAUSSIAN)) {
            g.write_params(block);
        }
        w
    }

    pub fn from_params(params: &[f64]) -> Result<Self> {
        if params.len() % PARAMS_PER_GAUSSIAN != 0 {
            return Err(Error::InvalidArgument(format!(
                "parameter vector length {} is not a multiple of {PARAMS_PER_GAUSSIAN}",
                params.len()
            )));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        Ok(Self {
            gaussians: params
                .chunks(PARAMS_PER_GAUSSIAN)
                .map(IsotropicGaussian::read_params)
                .collect(),
        })
    }

    /// Centroid of the Gaussian means, `None` for an empty scene.
    pub fn centroid(&self) -> Option<Vec3> {
        if self.is_empty() {
            return None;
        }
        let sum: Vec3 = self.gaussians.iter().map(|g| g.mu).sum();
        Some(sum / self.len() as f64)
    }

    pub fn to_document(&self) -> SceneDocument {
        SceneDocument {
            format_version: SCENE_FORMAT_VERSION,
            gaussians: self
                .gaussians
                .iter()
                .map(|g| GaussianRecord {
                    mu: [g.mu.x, g.mu.y, g.mu.z],
                    sigma: g.sigma(),
                    opacity: g.opacity(),
                    color: g.color,
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &SceneDocument) -> Result<Self> {
        if doc.format_version != SCENE_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported scene format version {}",
                doc.format_version
            )));
        }
        let gaussians = doc
            .gaussians
            .iter()
            .map(|r| IsotropicGaussian::new(Vec3::from(r.mu), r.sigma, r.opacity, r.color))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { gaussians })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("scene document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &FsPath) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Serialized form of a [`SceneModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    pub format_version: u32,
    pub gaussians: Vec<GaussianRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianRecord {
    pub mu: [f64; 3],
    pub sigma: f64,
    pub opacity: f64,
    pub color: [f64; 3],
}
