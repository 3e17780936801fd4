//! Sample moments shared by the feature extractor, the classical tests and
//! the samplers' checks.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Mean and biased central moments of order 2 to 4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Moments {
        let n = xs.len();
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        Moments {
            n,
            mean,
            m2: m2 / nf,
            m3: m3 / nf,
            m4: m4 / nf,
        }
    }

    /// Fails on samples whose spread is zero relative to their magnitude.
    pub fn of_nondegenerate(xs: &[f64]) -> Result<Moments> {
        let m = Moments::of(xs);
        let scale = xs.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(f64::MIN_POSITIVE);
        if !(m.m2 > (scale * 1e-12).powi(2)) {
            return Err(Error::DegenerateSample);
        }
        Ok(m)
    }

    /// `m3 / m2^1.5`
    pub fn skewness(&self) -> f64 {
        self.m3 / self.m2.powf(1.5)
    }

    /// `m4 / m2^2` (equals 3 for the normal distribution).
    pub fn kurtosis(&self) -> f64 {
        self.m4 / (self.m2 * self.m2)
    }

    /// Standard deviation with the `n - 1` divisor.
    pub fn sample_sd(&self) -> f64 {
        (self.m2 * self.n as f64 / (self.n as f64 - 1.0)).sqrt()
    }
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Values standardized with the sample mean and `n - 1` standard deviation,
/// sorted ascending.
pub fn standardized_sorted(xs: &[f64], m: &Moments) -> Vec<f64> {
    let sd = m.sample_sd();
    let mut z: Vec<f64> = xs.iter().map(|&x| (x - m.mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    z
}
