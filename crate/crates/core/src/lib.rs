//! Feature-agnostic dense-correspondence and keypoint toolkit.
//!
//! Dense features arrive through a file-based feature-grid interface (e.g.
//! exported convolutional-layer activations) or from the built-in dense
//! gradient-orientation descriptor. On top of those grids the crate
//! provides:
//!
//! - [`gridgeom`]: receptive-field geometry arithmetic and the DCFG grid
//!   container,
//! - [`descriptors`]: the dense descriptor, cosine matching, and exact kNN,
//! - [`flow`]: MRF flow alignment by min-sum belief propagation with
//!   generalized squared-Euclidean distance-transform messages, warping, and
//!   keypoint transfer,
//! - [`parts`]: linear-SVM keypoint classification and sliding-window
//!   keypoint prediction with a Gaussian location prior,
//! - [`evalviz`]: PCK evaluation, response histograms, and patch-level
//!   visualizations.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below pin the two concrete instantiations. Grid files store `f32`
//! payloads; optimization defaults to `f64`.

pub mod descriptors;
pub mod error;
pub mod evalviz;
pub mod flow;
pub mod gridgeom;
pub mod imgutil;
pub mod parts;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Feature grid in the on-disk payload type.
pub type FeatureGrid32 = gridgeom::FeatureGrid<f32>;
/// Feature grid in the default in-memory optimization type.
pub type FeatureGrid64 = gridgeom::FeatureGrid<f64>;
/// Energy decomposition in the on-disk type.
pub type Energy64 = flow::EnergyBreakdown<f64>;
/// Linear model in the on-disk type.
pub type LinearModel64 = parts::LinearModel<f64>;
