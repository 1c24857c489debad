//! Banzhaf data valuation for k-nearest-neighbor classifiers.
//!
//! The crate computes, for every training point, the Banzhaf value of the
//! hard-label kNN utility game induced by a test point: exactly (brute-force
//! enumeration and three counting dynamic programs) or approximately
//! (coalition and permutation sampling). Values from many test points are
//! averaged into one score per training point, and the [`apps`] module turns
//! those scores into point-removal, data-selection and mislabel-detection
//! experiments.
//!
//! Every exact engine returns an [`ExactValueVector`]: signed big-integer
//! numerators over the common denominator `2^(n-1)`, indexed by original
//! training-point id.

pub mod apps;
pub mod bench;
pub mod count;
pub mod dp;
pub mod error;
pub mod exec;
pub mod io;
pub mod mc;
pub mod model;
pub mod oracle;
pub mod run;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{
    average_over_tests, decompose_multiclass, discretize_weights, evaluate_knn_accuracy,
    prepare_game, BinarySubgame, Dataset, DistanceMetric, ExactValueVector, GameSpec, LabeledPoint,
    PreparedGame, TiePolicy, WeightScheme,
};
