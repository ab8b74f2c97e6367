//! Facial expression recognition from landmark-anchored local regions.
//!
//! The pipeline: 68 facial landmarks define polygonal regions
//! ([`geometry`]); each region contributes a 59-bin uniform LBP histogram
//! ([`lbp`]) and/or seven normalized central moments of its mask
//! ([`moments`]); the concatenated, min-max scaled vectors ([`features`])
//! train one-vs-all RBF SVMs solved with SMO ([`svm`]). [`eval`] runs
//! stratified cross-validation and grid search, [`selection`] grows region
//! subsets greedily, and [`model`] stores trained classifiers.

mod codec;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod image;
pub mod landmarks;
pub mod lbp;
pub mod manifest;
pub mod model;
pub mod moments;
pub mod selection;
pub mod svm;
pub mod synth;

pub use error::{Error, Result};
pub use eval::{cross_validate, grid_search, stratified_kfold, ConfusionMatrix, CvResult, FoldAssignment};
pub use features::{extract_features, FeatureKinds, FeatureTable, FeatureVector, RegionSource, ScalingStats};
pub use geometry::{build_regions, partition_grid, RegionMask, RegionScheme};
pub use image::{load_grayscale_image, Image};
pub use landmarks::{parse_landmarks, LandmarkSet, Point};
pub use lbp::lbp_histogram;
pub use manifest::{load_manifest, DatasetManifest};
pub use model::SavedModel;
pub use moments::normalized_central_moments;
pub use selection::{greedy_forward_select, rank_single_regions, SelectionTrace};
pub use svm::{train_binary_smo, train_multiclass_ova, BinaryModel, SvmModel, TrainParams};
