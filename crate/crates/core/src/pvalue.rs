//! Classification p-values estimated from held-out calibration scores.
//!
//! For a query score `s`, the class-0 p-value is the fraction of class-0
//! calibration scores that are `>= s`, and the class-1 p-value is the fraction
//! of class-1 calibration scores that are `<= s`. Both vectors are kept sorted
//! so each estimate is a single binary search.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// A finite classifier score. Higher values favor class 1.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Score(f64);

impl Score {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Score(value))
        } else {
            Err(Error::NonFiniteScore(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Score {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Score::new(value)
    }
}

/// Binary class label. Class 1 is the positive class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Negative,
    Positive,
}

impl Class {
    pub fn from_u8(label: u8) -> Result<Self> {
        match label {
            0 => Ok(Class::Negative),
            1 => Ok(Class::Positive),
            other => Err(Error::InvalidArgument(format!(
                "class label must be 0 or 1, got {other}"
            ))),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Class::Negative => 0,
            Class::Positive => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Class::Negative => Class::Positive,
            Class::Positive => Class::Negative,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

impl FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Class::Negative),
            "1" => Ok(Class::Positive),
            other => Err(Error::InvalidArgument(format!(
                "class label must be 0 or 1, got {other:?}"
            ))),
        }
    }
}

/// How a p-value is estimated from the calibration pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorMode {
    /// Count over the whole pool.
    Full,
    /// Count over a fresh subsample of `min_calibration_size(alpha)` scores.
    Subsample,
    /// Mean count over bootstrap resamples of the pool.
    Bootstrap,
}

impl fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorMode::Full => "full",
            EstimatorMode::Subsample => "subsample",
            EstimatorMode::Bootstrap => "bootstrap",
        })
    }
}

impl FromStr for EstimatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(EstimatorMode::Full),
            "subsample" => Ok(EstimatorMode::Subsample),
            "bootstrap" => Ok(EstimatorMode::Bootstrap),
            other => Err(Error::InvalidArgument(format!(
                "mode must be full, subsample or bootstrap, got {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PValueEstimate {
    pub value: f64,
    pub target_class: Class,
    pub mode: EstimatorMode,
    /// Number of calibration scores consulted per estimate.
    pub n_used: usize,
}

/// Held-out scores split by class, each sorted ascending.
///
/// Immutable once built; share freely across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationSet {
    class0: Vec<f64>,
    class1: Vec<f64>,
    provenance: String,
}

impl CalibrationSet {
    /// Builds a calibration set from unsorted per-class scores. Either vector
    /// may be empty; estimates for an empty class fail with `EmptyCalibration`.
    pub fn new(
        mut class0: Vec<f64>,
        mut class1: Vec<f64>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        for &v in class0.iter().chain(class1.iter()) {
            if !v.is_finite() {
                return Err(Error::NonFiniteScore(v));
            }
        }
        class0.sort_by(f64::total_cmp);
        class1.sort_by(f64::total_cmp);
        Ok(CalibrationSet {
            class0,
            class1,
            provenance: provenance.into(),
        })
    }

    pub fn from_labeled<I>(scores: I, provenance: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Class)>,
    {
        let mut class0 = Vec::new();
        let mut class1 = Vec::new();
        for (score, class) in scores {
            match class {
                Class::Negative => class0.push(score),
                Class::Positive => class1.push(score),
            }
        }
        CalibrationSet::new(class0, class1, provenance)
    }

    pub fn scores(&self, class: Class) -> &[f64] {
        match class {
            Class::Negative => &self.class0,
            Class::Positive => &self.class1,
        }
    }

    pub fn len(&self, class: Class) -> usize {
        self.scores(class).len()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    fn pool(&self, class: Class) -> Result<&[f64]> {
        let pool = self.scores(class);
        if pool.is_empty() {
            Err(Error::EmptyCalibration(class))
        } else {
            Ok(pool)
        }
    }

    /// Fraction of class-0 calibration scores `>= s`.
    pub fn estimate_p0(&self, s: Score) -> Result<PValueEstimate> {
        self.estimate(Class::Negative, s)
    }

    /// Fraction of class-1 calibration scores `<= s`.
    pub fn estimate_p1(&self, s: Score) -> Result<PValueEstimate> {
        self.estimate(Class::Positive, s)
    }

    pub fn estimate(&self, class: Class, s: Score) -> Result<PValueEstimate> {
        let pool = self.pool(class)?;
        let count = sorted_tail_count(pool, class, s.value());
        Ok(PValueEstimate {
            value: count as f64 / pool.len() as f64,
            target_class: class,
            mode: EstimatorMode::Full,
            n_used: pool.len(),
        })
    }

    /// Estimates on a uniform subsample, drawn without replacement, of exactly
    /// `min_calibration_size(alpha)` scores of the target class.
    pub fn estimate_subsample<R: Rng + ?Sized>(
        &self,
        s: Score,
        class: Class,
        alpha: f64,
        rng: &mut R,
    ) -> Result<PValueEstimate> {
        let required = min_calibration_size(alpha)?;
        let pool = self.scores(class);
        if pool.len() < required {
            return Err(Error::InsufficientCalibration {
                required,
                available: pool.len(),
            });
        }
        let picked = index::sample(rng, pool.len(), required);
        let count = picked
            .iter()
            .filter(|&i| counts_toward(class, pool[i], s.value()))
            .count();
        Ok(PValueEstimate {
            value: count as f64 / required as f64,
            target_class: class,
            mode: EstimatorMode::Subsample,
            n_used: required,
        })
    }

    /// Mean of the count estimator over `reps` resamples drawn with
    /// replacement, each the size of the pool.
    pub fn estimate_bootstrap<R: Rng + ?Sized>(
        &self,
        s: Score,
        class: Class,
        reps: usize,
        rng: &mut R,
    ) -> Result<PValueEstimate> {
        if reps == 0 {
            return Err(Error::InvalidArgument(
                "bootstrap needs at least one resample".into(),
            ));
        }
        let pool = self.pool(class)?;
        let n = pool.len();
        let mut total = 0.0;
        for _ in 0..reps {
            let count = (0..n)
                .filter(|_| counts_toward(class, pool[rng.random_range(0..n)], s.value()))
                .count();
            total += count as f64 / n as f64;
        }
        Ok(PValueEstimate {
            value: total / reps as f64,
            target_class: class,
            mode: EstimatorMode::Bootstrap,
            n_used: n,
        })
    }
}

/// Whether a calibration score contributes to the class's p-value at query
/// `s`. Ties count.
#[inline]
pub(crate) fn counts_toward(class: Class, calib: f64, s: f64) -> bool {
    match class {
        Class::Negative => calib >= s,
        Class::Positive => calib <= s,
    }
}

/// Number of scores in an ascending slice that count toward the p-value.
#[inline]
pub(crate) fn sorted_tail_count(sorted: &[f64], class: Class, s: f64) -> usize {
    match class {
        Class::Negative => sorted.len() - sorted.partition_point(|&x| x < s),
        Class::Positive => sorted.partition_point(|&x| x <= s),
    }
}

pub(crate) fn check_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(alpha))
    }
}

/// Smallest pool size `n` with `n > 1/alpha`.
pub fn min_calibration_size(alpha: f64) -> Result<usize> {
    check_level(alpha)?;
    Ok((1.0 / alpha).floor() as usize + 1)
}

/// Lower bound on the probability that the empirical p-value function stays
/// within `epsilon` of the true one everywhere, for a pool of size `n`.
pub fn dkw_band(n: u64, epsilon: f64) -> f64 {
    (1.0 - 2.0 * (-2.0 * n as f64 * epsilon * epsilon).exp()).max(0.0)
}

/// Smallest pool size whose `dkw_band` reaches `confidence`.
pub fn dkw_required_n(epsilon: f64, confidence: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    check_level(confidence)?;
    let approx = ((2.0 / (1.0 - confidence)).ln() / (2.0 * epsilon * epsilon)).ceil();
    let mut n = (approx as u64).max(1);
    // The closed form can land one off after rounding; settle it against the band.
    while n > 1 && dkw_band(n - 1, epsilon) >= confidence {
        n -= 1;
    }
    while dkw_band(n, epsilon) < confidence {
        n += 1;
    }
    Ok(n)
}
