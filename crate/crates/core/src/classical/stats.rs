use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::moments::{standardized_sorted, std_normal_cdf, Moments};

/// Classical tests of normality used as baselines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormalityTest {
    JarqueBera,
    Lilliefors,
    AndersonDarling,
}

impl NormalityTest {
    pub const ALL: [NormalityTest; 3] = [
        NormalityTest::JarqueBera,
        NormalityTest::Lilliefors,
        NormalityTest::AndersonDarling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NormalityTest::JarqueBera => "JB",
            NormalityTest::Lilliefors => "LF",
            NormalityTest::AndersonDarling => "AD",
        }
    }

    pub fn min_n(self) -> usize {
        match self {
            NormalityTest::Lilliefors => 4,
            NormalityTest::JarqueBera | NormalityTest::AndersonDarling => 8,
        }
    }

    pub fn statistic(self, sample: &[f64]) -> Result<f64> {
        match self {
            NormalityTest::JarqueBera => jarque_bera_statistic(sample),
            NormalityTest::Lilliefors => lilliefors_statistic(sample),
            NormalityTest::AndersonDarling => anderson_darling_statistic(sample),
        }
    }
}

impl fmt::Display for NormalityTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormalityTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "JB" => Ok(NormalityTest::JarqueBera),
            "LF" => Ok(NormalityTest::Lilliefors),
            "AD" => Ok(NormalityTest::AndersonDarling),
            other => Err(Error::InvalidArgument(format!("unknown test {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub pvalue: f64,
    pub test: NormalityTest,
    pub n: usize,
}

fn check_len(sample: &[f64], needed: usize) -> Result<()> {
    if sample.len() < needed {
        return Err(Error::InsufficientSampleSize {
            needed,
            given: sample.len(),
        });
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("sample contains non-finite values".into()));
    }
    Ok(())
}

/// `n/6 * (S^2 + (K - 3)^2 / 4)` with biased moment estimators.
pub fn jarque_bera_statistic(sample: &[f64]) -> Result<f64> {
    check_len(sample, NormalityTest::JarqueBera.min_n())?;
    let m = Moments::of_nondegenerate(sample)?;
    let s = m.skewness();
    let k = m.kurtosis() - 3.0;
    Ok(m.n as f64 / 6.0 * (s * s + k * k / 4.0))
}

/// Kolmogorov-Smirnov distance to the normal with the sample's mean and
/// standard deviation.
pub fn lilliefors_statistic(sample: &[f64]) -> Result<f64> {
    check_len(sample, NormalityTest::Lilliefors.min_n())?;
    let m = Moments::of_nondegenerate(sample)?;
    Ok(ks_distance_to_normal(&standardized_sorted(sample, &m)))
}

pub(crate) fn ks_distance_to_normal(z_sorted: &[f64]) -> f64 {
    let n = z_sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &z) in z_sorted.iter().enumerate() {
        let f = std_normal_cdf(z);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d.clamp(0.0, 1.0)
}

/// Anderson-Darling A² against the normal with the sample's mean and
/// standard deviation.
pub fn anderson_darling_statistic(sample: &[f64]) -> Result<f64> {
    check_len(sample, NormalityTest::AndersonDarling.min_n())?;
    let m = Moments::of_nondegenerate(sample)?;
    Ok(ad_to_normal(&standardized_sorted(sample, &m)))
}

pub(crate) fn ad_to_normal(z_sorted: &[f64]) -> f64 {
    let n = z_sorted.len();
    let ln_cdf = |z: f64| std_normal_cdf(z).max(f64::MIN_POSITIVE).ln();
    let sum: f64 = (0..n)
        .map(|i| {
            let w = (2 * i + 1) as f64;
            // ln(1 - F(z)) evaluated as ln F(-z) to keep the upper tail accurate
            w * (ln_cdf(z_sorted[i]) + ln_cdf(-z_sorted[n - 1 - i]))
        })
        .sum();
    (-(n as f64) - sum / n as f64).max(0.0)
}
