use crate::classical::{ad_to_normal, ks_distance_to_normal};
use crate::error::{Error, Result};
use crate::moments::{standardized_sorted, Moments};

pub const FEATURE_COUNT: usize = 6;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "n",
    "skewness_sq",
    "excess_kurtosis",
    "studentized_range",
    "ks_distance",
    "ad_statistic",
];

/// A sample drawn from one distribution: the object the normality classifier
/// sees.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectSample(Vec<f64>);

impl ObjectSample {
    pub const MIN_LEN: usize = 3;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < Self::MIN_LEN {
            return Err(Error::InsufficientSampleSize {
                needed: Self::MIN_LEN,
                given: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("sample contains non-finite values".into()));
        }
        Ok(ObjectSample(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for ObjectSample {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Normality-sensitive summary of a sample. Every entry except the size is
/// unchanged by `x -> a + b x` with `b > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn as_array(&self) -> &[f64; FEATURE_COUNT] {
        &self.0
    }
}

pub fn extract_features(sample: &ObjectSample) -> Result<FeatureVector> {
    let xs = sample.values();
    let m = Moments::of_nondegenerate(xs)?;
    let z = standardized_sorted(xs, &m);
    let skew = m.skewness();
    let range = z[z.len() - 1] - z[0];
    Ok(FeatureVector([
        xs.len() as f64,
        skew * skew,
        m.kurtosis() - 3.0,
        range,
        ks_distance_to_normal(&z),
        ad_to_normal(&z),
    ]))
}
