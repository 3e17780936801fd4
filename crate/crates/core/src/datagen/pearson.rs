//! Pearson-system distributions indexed by their first four moments.
//!
//! Work happens in standardized units (mean 0, variance 1) with positive
//! skewness; negative skewness mirrors the draw, and the final affine map
//! restores the requested mean and variance. In those units the density
//! satisfies
//!
//! ```text
//! f'(x) / f(x) = -(x + b1) / (b0 + b1 x + b2 x²)
//! b0 = (4β2 - 3β1) / D,  b1 = γ (β2 + 3) / D,  b2 = (2β2 - 3β1 - 6) / D
//! D  = 10β2 - 12β1 - 18
//! ```
//!
//! with `γ` the skewness, `β1 = γ²` and `β2` the kurtosis.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal, StudentT};

use crate::error::{Error, Result};
use crate::scoring::ObjectSample;

const SYMMETRY_TOL: f64 = 1e-9;
const BOUNDARY_TOL: f64 = 1e-9;

/// Proposals allowed per accepted Type IV draw.
pub const REJECTION_BUDGET: usize = 1000;

/// First four moments: mean, variance, signed skewness and (non-excess)
/// kurtosis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentSpec {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl MomentSpec {
    pub fn new(mean: f64, variance: f64, skewness: f64, kurtosis: f64) -> Result<Self> {
        let spec = MomentSpec {
            mean,
            variance,
            skewness,
            kurtosis,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn beta1(&self) -> f64 {
        self.skewness * self.skewness
    }

    fn check(&self) -> Result<()> {
        let finite = [self.mean, self.variance, self.skewness, self.kurtosis]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.variance > 0.0) || !(self.kurtosis > self.beta1() + 1.0) {
            return Err(Error::InfeasibleMoments {
                beta1: self.beta1(),
                kurtosis: self.kurtosis,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PearsonType {
    Normal,
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

impl fmt::Display for PearsonType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PearsonType::Normal => "normal",
            PearsonType::I => "I",
            PearsonType::II => "II",
            PearsonType::III => "III",
            PearsonType::IV => "IV",
            PearsonType::V => "V",
            PearsonType::VI => "VI",
            PearsonType::VII => "VII",
        })
    }
}

/// Pearson criterion `κ = β1 (β2 + 3)² / (4 (4β2 - 3β1) (2β2 - 3β1 - 6))`.
pub fn kappa(beta1: f64, beta2: f64) -> f64 {
    beta1 * (beta2 + 3.0).powi(2) / (4.0 * (4.0 * beta2 - 3.0 * beta1) * (2.0 * beta2 - 3.0 * beta1 - 6.0))
}

pub fn pearson_type(spec: &MomentSpec) -> Result<PearsonType> {
    spec.check()?;
    let b1 = spec.beta1();
    let b2 = spec.kurtosis;
    if spec.skewness.abs() < SYMMETRY_TOL {
        return Ok(if (b2 - 3.0).abs() < BOUNDARY_TOL {
            PearsonType::Normal
        } else if b2 < 3.0 {
            PearsonType::II
        } else {
            PearsonType::VII
        });
    }
    let line = 2.0 * b2 - 3.0 * b1 - 6.0;
    if line.abs() < BOUNDARY_TOL {
        return Ok(PearsonType::III);
    }
    let k = kappa(b1, b2);
    Ok(if k < 0.0 {
        PearsonType::I
    } else if (k - 1.0).abs() < BOUNDARY_TOL {
        PearsonType::V
    } else if k < 1.0 {
        PearsonType::IV
    } else {
        PearsonType::VI
    })
}

/// Standardized-unit shape, drawn with positive skew.
#[derive(Clone, Copy, Debug)]
enum Shape {
    Normal,
    /// Beta(p, q) standardized by its own mean and sd.
    Beta { dist: Beta<f64>, mean: f64, sd: f64 },
    /// Gamma(k) standardized.
    Gamma { dist: Gamma<f64>, shape: f64 },
    /// `A tan(t) - shift` with `t` on (-π/2, π/2) having density
    /// proportional to `cos(t)^(2m-2) exp(-ν t)`.
    TypeIV { exponent: f64, nu: f64, log_peak: f64, scale: f64, shift: f64 },
    /// `origin + scale / G`, G ~ Gamma(shape).
    InverseGamma { dist: Gamma<f64>, scale: f64, origin: f64 },
    /// `origin + width * G1 / G2`.
    BetaPrime { num: Gamma<f64>, den: Gamma<f64>, width: f64, origin: f64 },
    /// Student t scaled to unit variance.
    StudentT { dist: StudentT<f64>, factor: f64 },
}

/// Draws from the Pearson distribution matching a [`MomentSpec`].
#[derive(Clone, Copy, Debug)]
pub struct PearsonSampler {
    spec: MomentSpec,
    kind: PearsonType,
    shape: Shape,
    sign: f64,
    sd: f64,
}

fn dist_err<E: fmt::Display>(e: E) -> Error {
    Error::InvalidArgument(format!("distribution parameters: {e}"))
}

impl PearsonSampler {
    pub fn new(spec: MomentSpec) -> Result<Self> {
        let kind = pearson_type(&spec)?;
        let g = spec.skewness.abs();
        let beta1 = g * g;
        let beta2 = spec.kurtosis;
        let shape = match kind {
            PearsonType::Normal => Shape::Normal,
            PearsonType::I | PearsonType::II => {
                let r = 6.0 * (beta2 - beta1 - 1.0) / (6.0 + 3.0 * beta1 - 2.0 * beta2);
                let spread = if beta1 == 0.0 {
                    0.0
                } else {
                    (r + 2.0) * g / ((r + 2.0).powi(2) * beta1 + 16.0 * (r + 1.0)).sqrt()
                };
                // the smaller parameter goes first for positive skew
                let p = 0.5 * r * (1.0 - spread);
                let q = 0.5 * r * (1.0 + spread);
                Shape::Beta {
                    dist: Beta::new(p, q).map_err(dist_err)?,
                    mean: p / r,
                    sd: (p * q / (r * r * (r + 1.0))).sqrt(),
                }
            }
            PearsonType::III => {
                let k = 4.0 / beta1;
                Shape::Gamma {
                    dist: Gamma::new(k, 1.0).map_err(dist_err)?,
                    shape: k,
                }
            }
            PearsonType::VII => {
                let nu = 4.0 + 6.0 / (beta2 - 3.0);
                Shape::StudentT {
                    dist: StudentT::new(nu).map_err(dist_err)?,
                    factor: ((nu - 2.0) / nu).sqrt(),
                }
            }
            PearsonType::IV | PearsonType::V | PearsonType::VI => {
                let d = 10.0 * beta2 - 12.0 * beta1 - 18.0;
                let c0 = (4.0 * beta2 - 3.0 * beta1) / d;
                let c1 = g * (beta2 + 3.0) / d;
                let c2 = (2.0 * beta2 - 3.0 * beta1 - 6.0) / d;
                match kind {
                    PearsonType::IV => {
                        let half_width = (c0 / c2 - c1 * c1 / (4.0 * c2 * c2)).sqrt();
                        let m = 1.0 / (2.0 * c2);
                        let nu = c1 * (2.0 * c2 - 1.0) / (2.0 * c2 * c2 * half_width);
                        let exponent = 2.0 * m - 2.0;
                        let t_mode = (-nu / exponent).atan();
                        let log_peak = exponent * t_mode.cos().ln() - nu * t_mode;
                        Shape::TypeIV {
                            exponent,
                            nu,
                            log_peak,
                            scale: half_width,
                            shift: c1 / (2.0 * c2),
                        }
                    }
                    PearsonType::V => {
                        let origin = -c1 / (2.0 * c2);
                        Shape::InverseGamma {
                            dist: Gamma::new(1.0 / c2 - 1.0, 1.0).map_err(dist_err)?,
                            scale: c1 * (1.0 - 2.0 * c2) / (2.0 * c2 * c2),
                            origin,
                        }
                    }
                    _ => {
                        let disc = (c1 * c1 - 4.0 * c0 * c2).sqrt();
                        let near = (-c1 + disc) / (2.0 * c2);
                        let far = (-c1 - disc) / (2.0 * c2);
                        let width = near - far;
                        let e_near = -(near + c1) / (c2 * width);
                        Shape::BetaPrime {
                            num: Gamma::new(e_near + 1.0, 1.0).map_err(dist_err)?,
                            den: Gamma::new(1.0 / c2 - 1.0, 1.0).map_err(dist_err)?,
                            width,
                            origin: near,
                        }
                    }
                }
            }
        };
        Ok(PearsonSampler {
            spec,
            kind,
            shape,
            sign: if spec.skewness < 0.0 { -1.0 } else { 1.0 },
            sd: spec.variance.sqrt(),
        })
    }

    pub fn kind(&self) -> PearsonType {
        self.kind
    }

    pub fn spec(&self) -> &MomentSpec {
        &self.spec
    }

    /// One draw in standardized units with positive skew.
    fn standard<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(match self.shape {
            Shape::Normal => StandardNormal.sample(rng),
            Shape::Beta { dist, mean, sd } => (dist.sample(rng) - mean) / sd,
            Shape::Gamma { dist, shape } => (dist.sample(rng) - shape) / shape.sqrt(),
            Shape::StudentT { dist, factor } => dist.sample(rng) * factor,
            Shape::InverseGamma { dist, scale, origin } => origin + scale / dist.sample(rng),
            Shape::BetaPrime { num, den, width, origin } => {
                origin + width * num.sample(rng) / den.sample(rng)
            }
            Shape::TypeIV {
                exponent,
                nu,
                log_peak,
                scale,
                shift,
            } => {
                // uniform angle = Cauchy proposal on the original axis
                for _ in 0..REJECTION_BUDGET {
                    let t = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
                    let log_target = exponent * t.cos().ln() - nu * t;
                    let u: f64 = rng.random();
                    if u.ln() <= log_target - log_peak {
                        return Ok(scale * t.tan() - shift);
                    }
                }
                return Err(Error::RejectionBudgetExceeded(REJECTION_BUDGET));
            }
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(self.spec.mean + self.sd * self.sign * self.standard(rng)?)
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

pub fn sample_pearson<R: Rng + ?Sized>(rng: &mut R, spec: MomentSpec, n: usize) -> Result<ObjectSample> {
    ObjectSample::new(PearsonSampler::new(spec)?.sample_n(rng, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Moments;
    use crate::rng::stream;

    /// Classifies by the roots of b0 + b1 x + b2 x², independent of κ.
    fn root_oracle(beta1: f64, beta2: f64) -> PearsonType {
        let g = beta1.sqrt();
        // roots of the quadratic do not depend on the common denominator
        let (c0, c1, c2) = (4.0 * beta2 - 3.0 * beta1, g * (beta2 + 3.0), 2.0 * beta2 - 3.0 * beta1 - 6.0);
        if c1 == 0.0 {
            return if c2 == 0.0 {
                PearsonType::Normal
            } else if beta2 < 3.0 {
                PearsonType::II
            } else {
                PearsonType::VII
            };
        }
        if c2 == 0.0 {
            return PearsonType::III;
        }
        let disc = c1 * c1 - 4.0 * c0 * c2;
        if disc < 0.0 {
            return PearsonType::IV;
        }
        let r1 = (-c1 + disc.sqrt()) / (2.0 * c2);
        let r2 = (-c1 - disc.sqrt()) / (2.0 * c2);
        if r1 * r2 < 0.0 {
            PearsonType::I
        } else {
            PearsonType::VI
        }
    }

    fn spec(skew: f64, kurt: f64) -> MomentSpec {
        MomentSpec::new(0.0, 1.0, skew, kurt).unwrap()
    }

    #[test]
    fn named_points() {
        assert_eq!(pearson_type(&spec(0.0, 3.0)).unwrap(), PearsonType::Normal);
        assert_eq!(pearson_type(&spec(0.0, 4.2)).unwrap(), PearsonType::VII);
        assert_eq!(pearson_type(&spec(0.0, 2.0)).unwrap(), PearsonType::II);
        assert_eq!(pearson_type(&spec(1.0, 4.5)).unwrap(), PearsonType::III);
        let t = pearson_type(&spec(1.0, 4.2)).unwrap();
        assert_eq!(t, root_oracle(1.0, 4.2));
        assert_eq!(t, PearsonType::I);
    }

    #[test]
    fn criterion_agrees_with_root_oracle() {
        for i in 1..=40 {
            for j in 0..=60 {
                let beta1 = i as f64 * 0.1;
                let beta2 = beta1 + 1.05 + j as f64 * 0.23;
                let kind = pearson_type(&spec(beta1.sqrt(), beta2)).unwrap();
                if kind == PearsonType::III || kind == PearsonType::V {
                    continue;
                }
                assert_eq!(kind, root_oracle(beta1, beta2), "β1={beta1} β2={beta2}");
            }
        }
    }

    #[test]
    fn infeasible_moments_rejected() {
        assert!(matches!(MomentSpec::new(0.0, 1.0, 1.0, 2.0), Err(Error::InfeasibleMoments { .. })));
        assert!(MomentSpec::new(0.0, 0.0, 0.0, 3.0).is_err());
        let bad = MomentSpec {
            mean: 0.0,
            variance: 1.0,
            skewness: 2.0,
            kurtosis: 4.5,
        };
        assert!(pearson_type(&bad).is_err());
        assert!(PearsonSampler::new(bad).is_err());
    }

    /// Pooled moments of `total` draws against the spec, with 4σ bands
    /// estimated from the spread across batches.
    fn check_moments(s: MomentSpec, seed: u64, total: usize) {
        let sampler = PearsonSampler::new(s).unwrap();
        let batches = 50;
        let per = total / batches;
        let mut rng = stream(seed, 0);
        let mut stats = Vec::new();
        let mut all = Vec::with_capacity(total);
        for _ in 0..batches {
            let xs = sampler.sample_n(&mut rng, per).unwrap();
            let m = Moments::of(&xs);
            stats.push([m.mean, m.m2, m.skewness(), m.kurtosis()]);
            all.extend(xs);
        }
        let pooled = Moments::of(&all);
        let got = [pooled.mean, pooled.m2, pooled.skewness(), pooled.kurtosis()];
        let want = [s.mean, s.variance, s.skewness, s.kurtosis];
        for k in 0..4 {
            let mean_b = stats.iter().map(|v| v[k]).sum::<f64>() / batches as f64;
            let var_b = stats.iter().map(|v| (v[k] - mean_b).powi(2)).sum::<f64>() / (batches - 1) as f64;
            let se = (var_b / batches as f64).sqrt();
            assert!(
                (got[k] - want[k]).abs() < 4.0 * se + 1e-12,
                "{:?} moment {k}: got {} want {} (se {se})",
                sampler.kind(),
                got[k],
                want[k]
            );
        }
    }

    #[test]
    fn moments_match_for_every_type() {
        let v_kurt = {
            // β2 with κ = 1 at β1 = 1, by bisection on the criterion
            let (mut lo, mut hi) = (4.51, 30.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if kappa(1.0, mid) > 1.0 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            0.5 * (lo + hi)
        };
        let cases = [
            (MomentSpec::new(0.0, 1.0, 0.0, 3.0).unwrap(), PearsonType::Normal),
            (MomentSpec::new(2.0, 3.0, 1.0, 4.2).unwrap(), PearsonType::I),
            (MomentSpec::new(-1.0, 0.5, -0.8, 3.0).unwrap(), PearsonType::I),
            (MomentSpec::new(0.0, 2.0, 0.0, 2.0).unwrap(), PearsonType::II),
            (MomentSpec::new(1.0, 1.0, 1.0, 4.5).unwrap(), PearsonType::III),
            (MomentSpec::new(0.0, 1.0, 0.5f64.sqrt(), 5.0).unwrap(), PearsonType::IV),
            (MomentSpec::new(0.0, 1.0, -(0.5f64.sqrt()), 5.0).unwrap(), PearsonType::IV),
            (MomentSpec::new(0.0, 1.0, 1.0, v_kurt).unwrap(), PearsonType::V),
            (MomentSpec::new(3.0, 4.0, 1.0, 4.6).unwrap(), PearsonType::VI),
            (MomentSpec::new(0.0, 1.0, 0.0, 4.0).unwrap(), PearsonType::VII),
        ];
        for (i, (s, kind)) in cases.into_iter().enumerate() {
            assert_eq!(pearson_type(&s).unwrap(), kind, "{s:?}");
            check_moments(s, 100 + i as u64, 1_000_000);
        }
    }

    #[test]
    fn t5_has_kurtosis_nine() {
        let s = MomentSpec::new(0.0, 1.0, 0.0, 9.0).unwrap();
        let sampler = PearsonSampler::new(s).unwrap();
        assert_eq!(sampler.kind(), PearsonType::VII);
        assert!(matches!(sampler.shape, Shape::StudentT { .. }));
        let mut rng = stream(8, 0);
        let xs = sampler.sample_n(&mut rng, 1_000_000).unwrap();
        let m = Moments::of(&xs);
        assert!((m.m2 - 1.0).abs() < 0.02, "{}", m.m2);
        // the kurtosis estimator of t(5) has no finite variance; allow a wide band
        assert!((m.kurtosis() - 3.0 - 6.0).abs() < 2.0, "{}", m.kurtosis());
    }

    #[test]
    fn gaussian_point_samples_standard_normal() {
        let s = MomentSpec::new(0.0, 1.0, 0.0, 3.0).unwrap();
        let mut rng = stream(2, 0);
        let xs = sample_pearson(&mut rng, s, 20_000).unwrap();
        let m = Moments::of(xs.values());
        assert!(m.mean.abs() < 4.0 / (20_000f64).sqrt());
    }

    #[test]
    fn extreme_type_iv_exhausts_budget() {
        // next to the Gaussian point b2 is tiny, so the angle density is a narrow spike
        let s = MomentSpec::new(0.0, 1.0, 1e-3, 3.0 + 1e-5).unwrap();
        let sampler = PearsonSampler::new(s).unwrap();
        assert_eq!(sampler.kind(), PearsonType::IV);
        let mut rng = stream(1, 0);
        let failures = (0..50).filter(|_| sampler.sample(&mut rng).is_err()).count();
        assert!(failures > 0);
        assert!(failures < 50 || matches!(sampler.sample(&mut rng), Err(Error::RejectionBudgetExceeded(1000))));
    }
}
