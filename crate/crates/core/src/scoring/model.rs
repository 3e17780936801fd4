//! Logistic scorer over normalized sample features, trained with mini-batch
//! gradient descent on binary cross-entropy. An epoch that raises the full
//! training loss is undone and repeated with half the learning rate, so the
//! recorded losses never increase.
//!
//! Text format (`save` / `load`), one value per line:
//!
//! ```text
//! # pvclass logistic scorer
//! <weight for feature 0>
//! ...
//! <weight for feature 5>
//! <bias>
//! <mean 0> <sd 0>
//! ...
//! <mean 5> <sd 5>
//! seed=<u64>
//! epochs=<usize>
//! learning_rate=<f64>
//! batch_size=<usize>
//! train_accuracy=<f64>
//! ```
//!
//! Reals are written in shortest round-trip form so loading reproduces the
//! model bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;

use super::features::{extract_features, FeatureVector, ObjectSample, FEATURE_COUNT};
use crate::error::{Error, Result};
use crate::pvalue::{Class, Score};
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.1,
            epochs: 200,
            batch_size: 256,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub train_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScorerModel {
    /// One weight per feature, then the bias.
    weights: [f64; FEATURE_COUNT + 1],
    means: [f64; FEATURE_COUNT],
    sds: [f64; FEATURE_COUNT],
    meta: TrainingMeta,
}

#[derive(Clone, Debug)]
pub struct TrainingReport {
    /// Mean cross-entropy on the training set after each epoch.
    pub epoch_losses: Vec<f64>,
    pub train_accuracy: f64,
    /// Epochs rejected for raising the loss; each halved the learning rate.
    pub halvings: usize,
    pub final_learning_rate: f64,
}

/// Rejected epochs allowed before training is declared diverged.
const MAX_HALVINGS: usize = 30;

impl ScorerModel {
    pub fn from_parts(
        weights: [f64; FEATURE_COUNT + 1],
        means: [f64; FEATURE_COUNT],
        sds: [f64; FEATURE_COUNT],
        meta: TrainingMeta,
    ) -> Result<Self> {
        if sds.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument(
                "normalization scales must be positive".into(),
            ));
        }
        if weights.iter().chain(means.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("model parameters must be finite".into()));
        }
        Ok(ScorerModel {
            weights,
            means,
            sds,
            meta,
        })
    }

    pub fn weights(&self) -> &[f64; FEATURE_COUNT + 1] {
        &self.weights
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    fn normalize(&self, f: &FeatureVector) -> [f64; FEATURE_COUNT] {
        std::array::from_fn(|k| (f.0[k] - self.means[k]) / self.sds[k])
    }

    /// Pre-threshold logit. Higher means more likely class 1.
    pub fn score_features(&self, f: &FeatureVector) -> f64 {
        logit(&self.weights, &self.normalize(f))
    }

    pub fn score(&self, sample: &ObjectSample) -> Result<Score> {
        Score::new(self.score_features(&extract_features(sample)?))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# pvclass logistic scorer\n");
        for w in self.weights {
            let _ = writeln!(out, "{w:e}");
        }
        for k in 0..FEATURE_COUNT {
            let _ = writeln!(out, "{:e} {:e}", self.means[k], self.sds[k]);
        }
        let m = &self.meta;
        let _ = writeln!(out, "seed={}", m.seed);
        let _ = writeln!(out, "epochs={}", m.epochs);
        let _ = writeln!(out, "learning_rate={:e}", m.learning_rate);
        let _ = writeln!(out, "batch_size={}", m.batch_size);
        let _ = writeln!(out, "train_accuracy={:e}", m.train_accuracy);
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Format {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(0, format!("missing {what}")));
        let real = |(line, s): (usize, &str)| -> Result<f64> {
            s.parse().map_err(|_| bad(line, format!("not a number: {s:?}")))
        };

        let mut weights = [0.0; FEATURE_COUNT + 1];
        for w in weights.iter_mut() {
            *w = real(next("weight")?)?;
        }
        let mut means = [0.0; FEATURE_COUNT];
        let mut sds = [0.0; FEATURE_COUNT];
        for k in 0..FEATURE_COUNT {
            let (line, s) = next("normalization constants")?;
            let mut parts = s.split_whitespace();
            let (Some(m), Some(sd), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad(line, "expected `<mean> <sd>`".into()));
            };
            means[k] = real((line, m))?;
            sds[k] = real((line, sd))?;
        }

        let mut meta = TrainingMeta {
            seed: 0,
            epochs: 0,
            learning_rate: 0.0,
            batch_size: 0,
            train_accuracy: 0.0,
        };
        while let Ok((line, s)) = next("metadata") {
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| bad(line, format!("expected key=value, got {s:?}")))?;
            let parse_err = || bad(line, format!("bad value for {key}: {value:?}"));
            match key.trim() {
                "seed" => meta.seed = value.trim().parse().map_err(|_| parse_err())?,
                "epochs" => meta.epochs = value.trim().parse().map_err(|_| parse_err())?,
                "learning_rate" => meta.learning_rate = real((line, value.trim()))?,
                "batch_size" => meta.batch_size = value.trim().parse().map_err(|_| parse_err())?,
                "train_accuracy" => meta.train_accuracy = real((line, value.trim()))?,
                _ => {}
            }
        }
        ScorerModel::from_parts(weights, means, sds, meta)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        ScorerModel::from_text(&std::fs::read_to_string(path)?, path)
    }
}

fn logit(weights: &[f64; FEATURE_COUNT + 1], z: &[f64; FEATURE_COUNT]) -> f64 {
    let mut acc = weights[FEATURE_COUNT];
    for k in 0..FEATURE_COUNT {
        acc += weights[k] * z[k];
    }
    acc
}

/// `-[y ln σ(t) + (1-y) ln(1-σ(t))]`, written to avoid overflow.
fn cross_entropy(t: f64, positive: bool) -> f64 {
    let softplus = |x: f64| if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    if positive {
        softplus(-t)
    } else {
        softplus(t)
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Trains on labeled samples; class 1 (normal) gets the higher scores.
pub fn train_scorer(
    train_set: &[(ObjectSample, Class)],
    hyper: Hyperparams,
    seed: u64,
) -> Result<(ScorerModel, TrainingReport)> {
    let feats = train_set
        .iter()
        .map(|(s, c)| Ok((extract_features(s)?, *c)))
        .collect::<Result<Vec<_>>>()?;
    train_on_features(&feats, hyper, seed)
}

pub fn train_on_features(
    data: &[(FeatureVector, Class)],
    hyper: Hyperparams,
    seed: u64,
) -> Result<(ScorerModel, TrainingReport)> {
    if hyper.epochs == 0 || hyper.batch_size == 0 || !(hyper.learning_rate > 0.0) {
        return Err(Error::InvalidArgument(format!("bad hyperparameters {hyper:?}")));
    }
    let positives = data.iter().filter(|(_, c)| *c == Class::Positive).count();
    if positives == 0 || positives == data.len() {
        return Err(Error::DegenerateLabels);
    }

    let n = data.len() as f64;
    let mut means = [0.0; FEATURE_COUNT];
    let mut sds = [0.0; FEATURE_COUNT];
    for k in 0..FEATURE_COUNT {
        means[k] = data.iter().map(|(f, _)| f.0[k]).sum::<f64>() / n;
        let var = data.iter().map(|(f, _)| (f.0[k] - means[k]).powi(2)).sum::<f64>() / n;
        // constant features are left unscaled
        sds[k] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let rows: Vec<([f64; FEATURE_COUNT], bool)> = data
        .iter()
        .map(|(f, c)| {
            let mut z = [0.0; FEATURE_COUNT];
            for k in 0..FEATURE_COUNT {
                z[k] = (f.0[k] - means[k]) / sds[k];
            }
            (z, *c == Class::Positive)
        })
        .collect();

    let full_loss = |w: &[f64; FEATURE_COUNT + 1]| {
        rows.iter().map(|(z, y)| cross_entropy(logit(w, z), *y)).sum::<f64>() / n
    };

    let mut rng = stream(seed, 0);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut w = [0.0; FEATURE_COUNT + 1];
    let mut previous = full_loss(&w);
    let mut epoch_losses = Vec::with_capacity(hyper.epochs);
    let mut rate = hyper.learning_rate;
    let mut halvings = 0;
    let mut epoch = 0;
    while epoch < hyper.epochs {
        let saved = w;
        order.shuffle(&mut rng);
        for batch in order.chunks(hyper.batch_size) {
            let mut grad = [0.0; FEATURE_COUNT + 1];
            for &i in batch {
                let (z, y) = &rows[i];
                let err = sigmoid(logit(&w, z)) - if *y { 1.0 } else { 0.0 };
                for k in 0..FEATURE_COUNT {
                    grad[k] += err * z[k];
                }
                grad[FEATURE_COUNT] += err;
            }
            let step = rate / batch.len() as f64;
            for (wk, gk) in w.iter_mut().zip(grad) {
                *wk -= step * gk;
            }
        }
        let current = full_loss(&w);
        if !current.is_finite() || current > previous {
            // reject the epoch and retry it with half the step
            if halvings == MAX_HALVINGS {
                return Err(Error::TrainingDiverged {
                    epoch,
                    previous,
                    current,
                });
            }
            w = saved;
            rate /= 2.0;
            halvings += 1;
            continue;
        }
        epoch_losses.push(current);
        previous = current;
        epoch += 1;
    }

    let correct = rows
        .iter()
        .filter(|(z, y)| (logit(&w, z) >= 0.0) == *y)
        .count();
    let train_accuracy = correct as f64 / n;
    let model = ScorerModel::from_parts(
        w,
        means,
        sds,
        TrainingMeta {
            seed,
            epochs: hyper.epochs,
            learning_rate: hyper.learning_rate,
            batch_size: hyper.batch_size,
            train_accuracy,
        },
    )?;
    Ok((
        model,
        TrainingReport {
            epoch_losses,
            train_accuracy,
            halvings,
            final_learning_rate: rate,
        },
    ))
}
