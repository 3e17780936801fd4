use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::palette::{palette, DistributionSpec, Group};
use super::pearson::{MomentSpec, PearsonSampler};
use crate::error::{Error, Result};
use crate::pvalue::Class;
use crate::rng::{derive_seed, stream, StreamRng};
use crate::scoring::ObjectSample;

/// Draws μ and σ uniformly from the given ranges, then `n` normal values.
pub fn sample_normal<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    mu_range: (f64, f64),
    sigma_range: (f64, f64),
) -> Result<ObjectSample> {
    if !(sigma_range.0 > 0.0 && sigma_range.0 <= sigma_range.1) || !(mu_range.0 <= mu_range.1) {
        return Err(Error::InvalidArgument(format!(
            "bad ranges mu {mu_range:?} sigma {sigma_range:?}"
        )));
    }
    let mu = uniform_in(rng, mu_range);
    let sigma = uniform_in(rng, sigma_range);
    let dist = Normal::new(mu, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    ObjectSample::new((0..n).map(|_| dist.sample(rng)).collect())
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Sizes, counts and parameter ranges for an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub train_per_class: usize,
    pub calib_per_class: usize,
    pub eval_per_class: usize,
    pub mu_range: (f64, f64),
    pub sigma_range: (f64, f64),
    /// Range of the squared skewness of non-normal moment specs.
    pub beta1_range: (f64, f64),
    /// Kurtosis is drawn from (β1 + gap, max].
    pub kurtosis_gap: f64,
    pub kurtosis_max: f64,
    pub mean_range: (f64, f64),
    pub variance_range: (f64, f64),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sizes: (1..=10).map(|k| 10 * k).collect(),
            train_per_class: 20_000,
            calib_per_class: 10_000,
            eval_per_class: 10_000,
            mu_range: (-10.0, 10.0),
            sigma_range: (0.1, 10.0),
            beta1_range: (0.0, 4.0),
            kurtosis_gap: 1.2,
            kurtosis_max: 15.0,
            mean_range: (-5.0, 5.0),
            variance_range: (0.25, 4.0),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bins = self.sizes.len();
        if bins == 0 || self.sizes.iter().any(|n| !(ObjectSample::MIN_LEN..=MAX_SAMPLE_LEN).contains(n)) {
            return Err(Error::InvalidArgument(format!("bad size grid {:?}", self.sizes)));
        }
        for (name, count) in [
            ("train_per_class", self.train_per_class),
            ("calib_per_class", self.calib_per_class),
            ("eval_per_class", self.eval_per_class),
        ] {
            if count == 0 || count % bins != 0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {count} must be a positive multiple of the {bins} size bins"
                )));
            }
        }
        if !(self.kurtosis_gap > 1.0) || !(self.kurtosis_max > self.beta1_range.1 + self.kurtosis_gap) {
            return Err(Error::InvalidArgument("kurtosis range is empty or infeasible".into()));
        }
        if !(self.variance_range.0 > 0.0) || !(self.beta1_range.0 >= 0.0) {
            return Err(Error::InvalidArgument("bad moment ranges".into()));
        }
        Ok(())
    }

    /// Flat `key=value` lines.
    pub fn to_kv(&self) -> String {
        let sizes: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        let pair = |(a, b): (f64, f64)| format!("{a:e},{b:e}");
        [
            format!("sizes={}", sizes.join(",")),
            format!("train_per_class={}", self.train_per_class),
            format!("calib_per_class={}", self.calib_per_class),
            format!("eval_per_class={}", self.eval_per_class),
            format!("mu_range={}", pair(self.mu_range)),
            format!("sigma_range={}", pair(self.sigma_range)),
            format!("beta1_range={}", pair(self.beta1_range)),
            format!("kurtosis_gap={:e}", self.kurtosis_gap),
            format!("kurtosis_max={:e}", self.kurtosis_max),
            format!("mean_range={}", pair(self.mean_range)),
            format!("variance_range={}", pair(self.variance_range)),
        ]
        .join("\n")
            + "\n"
    }

    /// Parses `key=value` lines; missing keys keep their defaults.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| Error::InvalidArgument(format!("config line {}: {m}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key=value: {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let real = |s: &str| s.trim().parse::<f64>().map_err(|_| err(format!("bad number {s:?}")));
            let count = |s: &str| s.trim().parse::<usize>().map_err(|_| err(format!("bad count {s:?}")));
            let pair = |s: &str| -> Result<(f64, f64)> {
                let (a, b) = s.split_once(',').ok_or_else(|| err(format!("expected lo,hi: {s:?}")))?;
                Ok((real(a)?, real(b)?))
            };
            match key {
                "sizes" => cfg.sizes = value.split(',').map(count).collect::<Result<_>>()?,
                "train_per_class" => cfg.train_per_class = count(value)?,
                "calib_per_class" => cfg.calib_per_class = count(value)?,
                "eval_per_class" => cfg.eval_per_class = count(value)?,
                "mu_range" => cfg.mu_range = pair(value)?,
                "sigma_range" => cfg.sigma_range = pair(value)?,
                "beta1_range" => cfg.beta1_range = pair(value)?,
                "kurtosis_gap" => cfg.kurtosis_gap = real(value)?,
                "kurtosis_max" => cfg.kurtosis_max = real(value)?,
                "mean_range" => cfg.mean_range = pair(value)?,
                "variance_range" => cfg.variance_range = pair(value)?,
                _ => {}
            }
        }
        Ok(cfg)
    }
}

pub const MAX_SAMPLE_LEN: usize = 100;

/// Moments drawn from the configured ranges; the sign of the skewness is a
/// fair coin.
pub fn random_moment_spec<R: Rng + ?Sized>(rng: &mut R, cfg: &ExperimentConfig) -> Result<MomentSpec> {
    let beta1 = uniform_in(rng, cfg.beta1_range);
    let kurtosis = uniform_in(rng, (beta1 + cfg.kurtosis_gap, cfg.kurtosis_max));
    let skew = if rng.random::<bool>() { beta1.sqrt() } else { -beta1.sqrt() };
    MomentSpec::new(
        uniform_in(rng, cfg.mean_range),
        uniform_in(rng, cfg.variance_range),
        skew,
        // the upper end is inclusive in intent; the open draw never matters
        kurtosis,
    )
}

/// A non-normal sample from a random Pearson distribution. Specs whose
/// Type IV sampler exhausts its budget are redrawn.
pub fn sample_random_pearson<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &ExperimentConfig,
    n: usize,
) -> Result<ObjectSample> {
    loop {
        let sampler = PearsonSampler::new(random_moment_spec(rng, cfg)?)?;
        match sampler.sample_n(rng, n) {
            Ok(values) => match ObjectSample::new(values) {
                Ok(sample) if crate::moments::Moments::of_nondegenerate(sample.values()).is_ok() => {
                    return Ok(sample)
                }
                _ => continue,
            },
            Err(Error::RejectionBudgetExceeded(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Calib,
    Eval,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Calib, Split::Eval];
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Calib => "calib",
            Split::Eval => "eval",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "calib" => Ok(Split::Calib),
            "eval" => Ok(Split::Eval),
            other => Err(Error::InvalidArgument(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SampleGroup {
    Normal,
    Pearson,
    Palette(Group),
}

impl SampleGroup {
    pub fn label(self) -> Class {
        match self {
            SampleGroup::Normal => Class::Positive,
            _ => Class::Negative,
        }
    }
}

impl fmt::Display for SampleGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleGroup::Normal => f.write_str("normal"),
            SampleGroup::Pearson => f.write_str("pearson"),
            SampleGroup::Palette(g) => write!(f, "{g}"),
        }
    }
}

impl FromStr for SampleGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(SampleGroup::Normal),
            "pearson" => Ok(SampleGroup::Pearson),
            other => Ok(SampleGroup::Palette(other.parse()?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub split: Split,
    pub group: SampleGroup,
    pub label: Class,
    pub sample: ObjectSample,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledSampleSet {
    pub samples: Vec<LabeledSample>,
}

impl LabeledSampleSet {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &LabeledSample> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn count(&self, split: Split, label: Class) -> usize {
        self.split(split).filter(|s| s.label == label).count()
    }
}

fn split_tag(split: Split) -> u64 {
    match split {
        Split::Train => 1,
        Split::Calib => 2,
        Split::Eval => 3,
    }
}

/// Train, calibration and evaluation splits with equal class counts and the
/// same number of samples in every size bin. Each (split, class, size) cell
/// has its own generator stream, so cells can be generated in parallel and
/// the output depends only on `seed` and `config`.
pub fn generate_experiment(seed: u64, config: &ExperimentConfig) -> Result<LabeledSampleSet> {
    use rayon::prelude::*;

    config.validate()?;
    let mut cells = Vec::new();
    for split in Split::ALL {
        let per_class = match split {
            Split::Train => config.train_per_class,
            Split::Calib => config.calib_per_class,
            Split::Eval => config.eval_per_class,
        };
        for group in [SampleGroup::Normal, SampleGroup::Pearson] {
            for &n in &config.sizes {
                cells.push((split, group, n, per_class / config.sizes.len()));
            }
        }
    }
    let generated: Vec<Vec<LabeledSample>> = cells
        .into_par_iter()
        .map(|(split, group, n, count)| {
            let tag = split_tag(split) << 32 | ((group == SampleGroup::Normal) as u64) << 16 | n as u64;
            let mut rng: StreamRng = stream(derive_seed(seed, tag), 0);
            (0..count)
                .map(|_| {
                    let sample = match group {
                        SampleGroup::Normal => sample_normal(&mut rng, n, config.mu_range, config.sigma_range)?,
                        _ => sample_random_pearson(&mut rng, config, n)?,
                    };
                    Ok(LabeledSample {
                        split,
                        group,
                        label: group.label(),
                        sample,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(LabeledSampleSet {
        samples: generated.into_iter().flatten().collect(),
    })
}

/// Evaluation samples from every palette distribution of the given groups,
/// `per_distribution` at each size.
pub fn generate_palette_set(
    seed: u64,
    groups: &[Group],
    sizes: &[usize],
    per_distribution: usize,
) -> Result<LabeledSampleSet> {
    use rayon::prelude::*;

    let mut cells = Vec::new();
    for &group in groups {
        for (d, spec) in palette(group).into_iter().enumerate() {
            for &n in sizes {
                cells.push((group, d, spec, n));
            }
        }
    }
    let generated: Vec<Vec<LabeledSample>> = cells
        .into_par_iter()
        .map(|(group, d, spec, n): (Group, usize, DistributionSpec, usize)| {
            let tag = 4 << 32 | (group as u64) << 24 | (d as u64) << 16 | n as u64;
            let mut rng = stream(derive_seed(seed, tag), 0);
            (0..per_distribution)
                .map(|_| {
                    Ok(LabeledSample {
                        split: Split::Eval,
                        group: SampleGroup::Palette(group),
                        label: Class::Negative,
                        sample: spec.sample(&mut rng, n)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(LabeledSampleSet {
        samples: generated.into_iter().flatten().collect(),
    })
}

/// Counts per (split, label, n), used by tests and manifests.
pub fn bin_counts(set: &LabeledSampleSet) -> BTreeMap<(Split, u8, usize), usize> {
    let mut out = BTreeMap::new();
    for s in &set.samples {
        *out.entry((s.split, s.label.as_u8(), s.sample.len())).or_insert(0) += 1;
    }
    out
}
