//! Derived tests: a classifier turned into `1{p_c(x) <= alpha}`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::pvalue::{check_level, min_calibration_size, CalibrationSet, Class, EstimatorMode, PValueEstimate, Score};

/// A test that bounds one class-conditional error rate by `alpha`.
///
/// `target_class = Positive` rejects class 1 when `p1 <= alpha` and so bounds
/// the false-negative rate; `target_class = Negative` accepts class 1 when
/// `p0 <= alpha` and so bounds the false-positive rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedTest {
    target_class: Class,
    alpha: f64,
    mode: EstimatorMode,
    bootstrap_reps: usize,
    seed: u64,
}

impl DerivedTest {
    pub fn new(target_class: Class, alpha: f64, mode: EstimatorMode) -> Result<Self> {
        check_level(alpha)?;
        Ok(DerivedTest {
            target_class,
            alpha,
            mode,
            bootstrap_reps: 200,
            seed: 0,
        })
    }

    pub fn with_bootstrap_reps(mut self, reps: usize) -> Result<Self> {
        if reps == 0 {
            return Err(Error::InvalidArgument(
                "bootstrap needs at least one resample".into(),
            ));
        }
        self.bootstrap_reps = reps;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn target_class(&self) -> Class {
        self.target_class
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mode(&self) -> EstimatorMode {
        self.mode
    }

    pub fn bootstrap_reps(&self) -> usize {
        self.bootstrap_reps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Checks that `cal` can serve this test.
    pub fn check_calibration(&self, cal: &CalibrationSet) -> Result<()> {
        let available = cal.len(self.target_class);
        if available == 0 {
            return Err(Error::EmptyCalibration(self.target_class));
        }
        if self.mode == EstimatorMode::Subsample {
            let required = min_calibration_size(self.alpha)?;
            if available < required {
                return Err(Error::InsufficientCalibration {
                    required,
                    available,
                });
            }
        }
        Ok(())
    }

    pub fn pvalue<R: Rng + ?Sized>(
        &self,
        cal: &CalibrationSet,
        s: Score,
        rng: &mut R,
    ) -> Result<PValueEstimate> {
        match self.mode {
            EstimatorMode::Full => cal.estimate(self.target_class, s),
            EstimatorMode::Subsample => cal.estimate_subsample(s, self.target_class, self.alpha, rng),
            EstimatorMode::Bootstrap => {
                cal.estimate_bootstrap(s, self.target_class, self.bootstrap_reps, rng)
            }
        }
    }

    /// Label implied by a p-value of the target class. The boundary is inclusive.
    pub fn label_for(&self, pvalue: f64) -> Class {
        let reject = pvalue <= self.alpha;
        match (self.target_class, reject) {
            (Class::Positive, true) => Class::Negative,
            (Class::Positive, false) => Class::Positive,
            (Class::Negative, true) => Class::Positive,
            (Class::Negative, false) => Class::Negative,
        }
    }

    pub fn decide<R: Rng + ?Sized>(
        &self,
        cal: &CalibrationSet,
        s: Score,
        rng: &mut R,
    ) -> Result<Decision> {
        let pvalue = self.pvalue(cal, s, rng)?;
        Ok(Decision {
            label: self.label_for(pvalue.value),
            pvalue,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub label: Class,
    pub pvalue: PValueEstimate,
}
