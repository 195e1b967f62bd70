//! Fuzzy-entropy face similarity.
//!
//! Two frontal faces, each given as named landmarks plus a face outline,
//! are compared by
//!
//! * the Shannon entropy of every distance feature measured on both faces,
//!   mapped through a fuzzy membership kernel and averaged into `beta`;
//! * the overlap `alpha` of the two rasterized silhouettes on a shared
//!   canvas;
//! * the similarity `delta = 100 (beta K + alpha (1 - K))`, where `K` is
//!   trained online from genuine pairs ([`calibration`]).
//!
//! The numeric kernels are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
mod error;
pub mod features;
pub mod formats;
pub mod fuzzymath;
pub mod geometry;
mod scalar;
pub mod scoring;
pub mod silhouette;
pub mod synthbench;

pub use calibration::{solve_t, CalibrationSample, CalibrationState};
pub use error::{Error, Result};
pub use features::{extract_features, pair_features, FaceInput, FeaturePair, FeatureSet, FeatureVector};
pub use fuzzymath::{eval_membership, shannon_entropy, MembershipKernel};
pub use geometry::Point;
pub use scalar::Real;
pub use scoring::{aggregate_beta, compare, feature_membership, similarity_delta, MatchReport, ScoringConfig};
pub use silhouette::{compute_alpha, mask_subtract, normalize_pair, rasterize, AlphaMode, BinaryMask, Canvas};
pub use synthbench::{evaluate, generate_population, EvalReport, LabeledFace, PopulationConfig};

pub type Kernel = MembershipKernel<f64>;
pub type Config = ScoringConfig<f64>;
pub type Report = MatchReport<f64>;
pub type Calibration = CalibrationState<f64>;
pub type Sample = CalibrationSample<f64>;

pub type Kernel32 = MembershipKernel<f32>;
pub type Config32 = ScoringConfig<f32>;
pub type Report32 = MatchReport<f32>;
pub type Calibration32 = CalibrationState<f32>;
