//! Scoring functions: the classifier side of a derived test.
//!
//! Any model that maps an object to a real score (higher meaning class 1)
//! can feed the p-value estimators. The built-in scorer is a logistic model
//! over normality-sensitive sample features.

mod features;
mod model;

pub use features::{extract_features, FeatureVector, ObjectSample, FEATURE_COUNT, FEATURE_NAMES};
pub use model::{train_on_features, train_scorer, Hyperparams, ScorerModel, TrainingMeta, TrainingReport};

use crate::error::Result;
use crate::pvalue::Score;

/// Something that assigns a real score to an object.
pub trait Scorer<T: ?Sized> {
    fn score(&self, object: &T) -> Result<Score>;
}

impl Scorer<ObjectSample> for ScorerModel {
    fn score(&self, object: &ObjectSample) -> Result<Score> {
        ScorerModel::score(self, object)
    }
}
