//! Feature ranking and classification pipeline for retinal fundus images:
//! image preprocessing, candidate-region extraction, region/pixel feature
//! tables, ranking (F-score, correlation, mRMR), tree and neighbor
//! classifiers, and the split/rank/sweep evaluation harness.

pub mod error;
pub mod evalkit;
pub mod features;
pub mod learners;
pub mod pipeline;
pub mod prep;
pub mod ranking;
pub mod raster;
pub mod regions;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
pub use features::FeatureProfile;
pub use table::{FeatureTable, SampleSource};
