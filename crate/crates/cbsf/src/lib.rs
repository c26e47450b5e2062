//! Group recommendation over sparse explicit feedback.
//!
//! The pipeline: load a rating matrix (and optionally a trust graph), split
//! it per user into train/test, score all user pairs with a configurable
//! similarity measure (cosine, Jaccard, TAJ, UASim, UASIMJ, or the combined
//! CBS), pick neighborhoods by raw score (KNN) or TOPSIS closeness, predict
//! missing ratings with mean-centered neighborhood CF, build a group
//! candidate set from per-member top-N lists enriched by Borda count, and
//! aggregate member preferences with a Choquet integral over rating-derived
//! fuzzy capacities. [`metrics`] covers accuracy, satisfaction, fairness,
//! and the trust-aware novelty measures.

pub mod dataset;
pub mod error;
pub mod group;
pub mod metrics;
pub mod neighbors;
pub mod predictor;
pub mod similarity;

pub use error::{Error, Result};
