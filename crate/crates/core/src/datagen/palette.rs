//! The non-normal alternatives used for power studies, in four groups by
//! support and shape.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution, Exp, Gamma, Gumbel, LogNormal, Normal, StudentT, Weibull};

use super::pearson::{MomentSpec, PearsonSampler};
use crate::error::{Error, Result};
use crate::scoring::ObjectSample;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    /// Symmetric, support on the whole line.
    G1,
    /// Asymmetric, support on the whole line.
    G2,
    /// Support on (0, ∞).
    G3,
    /// Support on (0, 1).
    G4,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::G1, Group::G2, Group::G3, Group::G4];
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G1" => Ok(Group::G1),
            "G2" => Ok(Group::G2),
            "G3" => Ok(Group::G3),
            "G4" => Ok(Group::G4),
            other => Err(Error::InvalidArgument(format!("unknown group {other:?}"))),
        }
    }
}

/// A distribution family with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistributionSpec {
    Normal { mean: f64, sd: f64 },
    Pearson(MomentSpec),
    StudentT { df: f64 },
    Logistic { location: f64, scale: f64 },
    Laplace { location: f64, scale: f64 },
    Gumbel { location: f64, scale: f64 },
    Exponential { rate: f64 },
    Gamma { scale: f64, shape: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Weibull { scale: f64, shape: f64 },
    Uniform { low: f64, high: f64 },
    Beta { a: f64, b: f64 },
}

fn dist_err<E: fmt::Display>(e: E) -> Error {
    Error::InvalidArgument(format!("distribution parameters: {e}"))
}

impl DistributionSpec {
    pub fn label(&self) -> String {
        use DistributionSpec::*;
        match *self {
            Normal { mean, sd } => format!("N({mean},{sd})"),
            Pearson(s) => format!("Pearson({},{},{},{})", s.mean, s.variance, s.skewness, s.kurtosis),
            StudentT { df } => format!("t({df})"),
            Logistic { location, scale } => format!("logistic({location},{scale})"),
            Laplace { location, scale } => format!("Laplace({location},{scale})"),
            Gumbel { location, scale } => format!("Gumbel({location},{scale})"),
            Exponential { rate } => format!("Exp({rate})"),
            Gamma { scale, shape } => format!("Gamma({scale},{shape})"),
            LogNormal { mu, sigma } => format!("LN({mu},{sigma})"),
            Weibull { scale, shape } => format!("W({scale},{shape})"),
            Uniform { low, high } => format!("U[{low},{high}]"),
            Beta { a, b } => format!("B({a},{b})"),
        }
    }

    /// Draws `n` i.i.d. values.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<ObjectSample> {
        use DistributionSpec as D;
        fn draw<R: Rng + ?Sized, T: Distribution<f64>>(d: T, rng: &mut R, n: usize) -> Vec<f64> {
            (0..n).map(|_| d.sample(rng)).collect()
        }
        let values = match *self {
            D::Normal { mean, sd } => draw(Normal::new(mean, sd).map_err(dist_err)?, rng, n),
            D::Pearson(spec) => PearsonSampler::new(spec)?.sample_n(rng, n)?,
            D::StudentT { df } => draw(StudentT::new(df).map_err(dist_err)?, rng, n),
            D::Logistic { location, scale } => (0..n)
                .map(|_| {
                    let u: f64 = open_unit(rng);
                    location + scale * (u / (1.0 - u)).ln()
                })
                .collect(),
            D::Laplace { location, scale } => (0..n)
                .map(|_| {
                    let u = open_unit(rng) - 0.5;
                    location - scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
                })
                .collect(),
            D::Gumbel { location, scale } => draw(Gumbel::new(location, scale).map_err(dist_err)?, rng, n),
            D::Exponential { rate } => draw(Exp::new(rate).map_err(dist_err)?, rng, n),
            D::Gamma { scale, shape } => draw(Gamma::new(shape, scale).map_err(dist_err)?, rng, n),
            D::LogNormal { mu, sigma } => draw(LogNormal::new(mu, sigma).map_err(dist_err)?, rng, n),
            D::Weibull { scale, shape } => draw(Weibull::new(scale, shape).map_err(dist_err)?, rng, n),
            D::Uniform { low, high } => {
                if !(low < high) {
                    return Err(dist_err("uniform needs low < high"));
                }
                (0..n).map(|_| low + (high - low) * open_unit(rng)).collect()
            }
            D::Beta { a, b } => draw(Beta::new(a, b).map_err(dist_err)?, rng, n),
        };
        ObjectSample::new(values)
    }
}

/// Uniform on the open interval (0, 1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// The alternatives of one group. Gumbel is (location, scale); Gamma and
/// Weibull are (scale, shape); lognormal is (log-mean, log-sd).
pub fn palette(group: Group) -> Vec<DistributionSpec> {
    use DistributionSpec as D;
    match group {
        Group::G1 => vec![
            D::StudentT { df: 1.0 },
            D::StudentT { df: 3.0 },
            D::Logistic { location: 0.0, scale: 1.0 },
            D::Laplace { location: 0.0, scale: 1.0 },
        ],
        Group::G2 => vec![
            D::Gumbel { location: 0.0, scale: 1.0 },
            D::Gumbel { location: 0.0, scale: 2.0 },
            D::Gumbel { location: 0.0, scale: 0.5 },
        ],
        Group::G3 => vec![
            D::Exponential { rate: 1.0 },
            D::Gamma { scale: 1.0, shape: 2.0 },
            D::Gamma { scale: 1.0, shape: 0.5 },
            D::LogNormal { mu: 0.0, sigma: 1.0 },
            D::LogNormal { mu: 0.0, sigma: 2.0 },
            D::LogNormal { mu: 0.0, sigma: 0.5 },
            D::Weibull { scale: 1.0, shape: 0.5 },
            D::Weibull { scale: 1.0, shape: 2.0 },
        ],
        Group::G4 => vec![
            D::Uniform { low: 0.0, high: 1.0 },
            D::Beta { a: 2.0, b: 2.0 },
            D::Beta { a: 0.5, b: 0.5 },
            D::Beta { a: 3.0, b: 1.5 },
            D::Beta { a: 2.0, b: 1.0 },
        ],
    }
}
