//! Risk-aware next-best-view selection over isotropic Gaussian scenes.
//!
//! The crate reconstructs a scene of isotropic 3D Gaussians from RGB-D
//! views, scores the collision risk of a payload path with the closed-form
//! average value-at-risk of the signed distance to every Gaussian, masks
//! the scene to the Gaussians near risky waypoints and ranks candidate
//! camera views by the Fisher-information gain on that subset.
//!
//! Module map:
//! - [`geometry`], [`image`], [`scene`]: poses, cameras, RGB-D images and
//!   the Gaussian scene with its flat parameter layout.
//! - [`risk`]: signed-distance laws, VaR / AVaR, worst-case waypoint risk.
//! - [`mask`]: masking radii and the masked subset of the scene.
//! - [`splat`]: forward renderer, L1 loss, gradient, Jacobian diagonal.
//! - [`fisher`]: training Fisher diagonal, information gain, view selection.
//! - [`world`]: synthetic rooms, ray-cast capture, candidate sampling.
//! - [`pipeline`]: training, the staged acquisition loop and evaluation.

pub mod error;
pub mod fisher;
pub mod geometry;
pub mod image;
pub mod mask;
pub mod pipeline;
pub mod risk;
pub mod rng;
pub mod scene;
pub mod special;
pub mod splat;
pub mod world;

pub use error::{Error, Result};
pub use geometry::{Camera, Path, Pose, Vec3};
pub use image::RgbdImage;
pub use scene::{IsotropicGaussian, SceneModel};
