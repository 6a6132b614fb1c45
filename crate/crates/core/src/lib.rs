//! Anti-symmetric basis maps for representing anti-symmetric functions as
//! odd functions of a fixed feature vector.
//!
//! The map `eta: (R^d)^n -> R^m` concatenates projected Vandermonde factors
//! `phi` with their products against multi-symmetric power sums `psi`. It is
//! anti-symmetric, vanishes exactly on particle collisions and separates
//! distinct orbits, so any continuous anti-symmetric `f` factors as
//! `f = g ∘ eta` with `g` odd.
//!
//! Geometry, feature evaluation and Jacobians are generic over [`Scalar`]
//! (`f32`, `f64`); the certifiers and the odd-model fitter work in `f64`.

pub mod calculus;
pub mod configuration;
pub mod error;
pub mod export;
pub mod features;
pub mod geometry;
pub mod perm;
pub mod represent;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use configuration::{DomainBox, ParticleConfiguration};
pub use error::{Error, Result};
pub use features::{eval_eta, eval_eta_batch, eval_phi, eval_psi, FeatureMapSpec, FeatureVector, SpecRef};
pub use geometry::{build_projection_set, find_separating_projection, ProjectionMode, ProjectionSet};
pub use perm::Permutation;
pub use scalar::Scalar;

/// Double-precision feature map.
pub type FeatureMap = FeatureMapSpec<f64>;
/// Single-precision feature map.
pub type FeatureMapF32 = FeatureMapSpec<f32>;
pub type Configuration = ParticleConfiguration<f64>;
pub type ConfigurationF32 = ParticleConfiguration<f32>;
pub type Projections = ProjectionSet<f64>;
pub type Features = FeatureVector<f64>;
pub type Domain = DomainBox<f64>;
