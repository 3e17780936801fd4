use std::collections::BTreeMap;

use rayon::prelude::*;

use super::metrics::{rates, ConfusionCounts, RateReport};
use crate::classical::{NormalityTest, NullTables};
use crate::datagen::{LabeledSample, SampleGroup};
use crate::decision::{Decision, DerivedTest};
use crate::error::{Error, Result};
use crate::pvalue::{CalibrationSet, Class, Score};
use crate::rng::stream;

/// Decisions for a batch of scores. Object `i` uses generator stream `i + 1`
/// of the test's seed, so the result does not depend on scheduling.
pub fn decide_all(test: &DerivedTest, cal: &CalibrationSet, scores: &[Score]) -> Result<Vec<Decision>> {
    test.check_calibration(cal)?;
    scores
        .par_iter()
        .enumerate()
        .map(|(i, &s)| test.decide(cal, s, &mut stream(test.seed(), i as u64 + 1)))
        .collect()
}

pub fn evaluate_test(test: &DerivedTest, cal: &CalibrationSet, scored: &[(Score, Class)]) -> Result<RateReport> {
    let scores: Vec<Score> = scored.iter().map(|x| x.0).collect();
    let decisions = decide_all(test, cal, &scores)?;
    let mut c = ConfusionCounts::default();
    for (d, (_, y)) in decisions.iter().zip(scored) {
        c.record(d.label, *y);
    }
    rates(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    pub report: RateReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCurve {
    pub target_class: Class,
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    /// Whether the controlled error rate never decreases as α grows.
    pub fn is_monotone(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[0].report.target_rate(self.target_class) <= w[1].report.target_rate(self.target_class))
    }
}

/// Builds a test per α with `factory` and evaluates it on `scored`.
pub fn alpha_sweep<F>(factory: F, cal: &CalibrationSet, scored: &[(Score, Class)], alpha_grid: &[f64]) -> Result<SweepCurve>
where
    F: Fn(f64) -> Result<DerivedTest>,
{
    if alpha_grid.is_empty() || alpha_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("alpha grid must be nonempty and increasing".into()));
    }
    let mut points = Vec::with_capacity(alpha_grid.len());
    let mut target = None;
    for &alpha in alpha_grid {
        let test = factory(alpha)?;
        if *target.get_or_insert(test.target_class()) != test.target_class() {
            return Err(Error::InvalidArgument("factory changed the target class".into()));
        }
        points.push(SweepPoint {
            alpha,
            report: evaluate_test(&test, cal, scored)?,
        });
    }
    Ok(SweepCurve {
        target_class: target.expect("grid is nonempty"),
        points,
    })
}

/// A method that labels a sample normal (1) or non-normal (0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Derived,
    Classical(NormalityTest),
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Derived => f.write_str("derived"),
            Method::Classical(t) => f.write_str(t.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerCell {
    pub rejected: u64,
    pub total: u64,
}

impl PowerCell {
    /// Fraction of samples labeled non-normal.
    pub fn rate(&self) -> f64 {
        self.rejected as f64 / self.total as f64
    }

    pub fn variance(&self) -> f64 {
        let p = self.rate();
        p * (1.0 - p) / self.total as f64
    }
}

/// Rejection rates keyed by (group, method, n). For non-normal groups the
/// rate is the power; for the normal group it is the false negative rate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PowerTable {
    pub alpha: f64,
    pub cells: BTreeMap<(SampleGroup, Method, usize), PowerCell>,
}

impl PowerTable {
    pub fn series(&self, group: SampleGroup, method: Method) -> Vec<(usize, PowerCell)> {
        self.cells
            .iter()
            .filter(|((g, m, _), _)| *g == group && *m == method)
            .map(|((_, _, n), c)| (*n, *c))
            .collect()
    }

    /// Pooled rate over all sizes of one (group, method).
    pub fn pooled(&self, group: SampleGroup, method: Method) -> Option<PowerCell> {
        let s = self.series(group, method);
        if s.is_empty() {
            return None;
        }
        Some(s.iter().fold(PowerCell { rejected: 0, total: 0 }, |a, (_, c)| PowerCell {
            rejected: a.rejected + c.rejected,
            total: a.total + c.total,
        }))
    }
}

/// Rejection rates of the derived test and of the classical baselines at the
/// derived test's α. `scores[i]` must be the score of `samples[i]`.
pub fn power_by_group(
    test: &DerivedTest,
    cal: &CalibrationSet,
    samples: &[LabeledSample],
    scores: &[Score],
    baselines: Option<&NullTables>,
) -> Result<PowerTable> {
    if samples.len() != scores.len() {
        return Err(Error::LengthMismatch(samples.len(), scores.len()));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples to evaluate".into()));
    }
    let decisions = decide_all(test, cal, scores)?;
    let mut table = PowerTable {
        alpha: test.alpha(),
        cells: BTreeMap::new(),
    };
    let mut bump = |key: (SampleGroup, Method, usize), rejected: bool| {
        let cell = table.cells.entry(key).or_insert(PowerCell { rejected: 0, total: 0 });
        cell.total += 1;
        cell.rejected += rejected as u64;
    };
    for (s, d) in samples.iter().zip(&decisions) {
        bump((s.group, Method::Derived, s.sample.len()), d.label == Class::Negative);
    }
    if let Some(nulls) = baselines {
        let classical: Vec<[bool; 3]> = samples
            .par_iter()
            .map(|s| {
                let mut out = [false; 3];
                for (slot, t) in out.iter_mut().zip(NormalityTest::ALL) {
                    *slot = nulls.rejects(t, s.sample.values(), test.alpha())?;
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for (s, r) in samples.iter().zip(classical) {
            for (t, rejected) in NormalityTest::ALL.into_iter().zip(r) {
                bump((s.group, Method::Classical(t), s.sample.len()), rejected);
            }
        }
    }
    Ok(table)
}

/// Weighted least-squares style trend of rate against n with a binomial
/// standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrendReport {
    pub slope: f64,
    pub slope_se: f64,
    /// Passes when the slope is not significantly negative (above −3 SE).
    pub pass: bool,
}

pub fn trend(series: &[(usize, PowerCell)]) -> Result<TrendReport> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("trend needs at least two sizes".into()));
    }
    let k = series.len() as f64;
    let n_bar = series.iter().map(|(n, _)| *n as f64).sum::<f64>() / k;
    let sxx: f64 = series.iter().map(|(n, _)| (*n as f64 - n_bar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("trend needs distinct sizes".into()));
    }
    let slope = series.iter().map(|(n, c)| (*n as f64 - n_bar) * c.rate()).sum::<f64>() / sxx;
    // rates at 0 or 1 get the variance of one success or failure
    let var: f64 = series
        .iter()
        .map(|(n, c)| {
            let v = c.variance().max(1.0 / (c.total as f64).powi(2));
            (*n as f64 - n_bar).powi(2) * v
        })
        .sum::<f64>()
        / (sxx * sxx);
    let slope_se = var.sqrt();
    Ok(TrendReport {
        slope,
        slope_se,
        pass: slope >= -3.0 * slope_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pvalue::EstimatorMode;
    use crate::rng::stream;
    use rand::Rng;

    fn uniform_cal(n: usize, seed: u64) -> (CalibrationSet, Vec<(Score, Class)>) {
        let mut rng = stream(seed, 0);
        // class 0 ~ U(0, 1), class 1 ~ U(0.5, 1.5)
        let c0: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let c1: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
        let cal = CalibrationSet::new(c0, c1, "test").unwrap();
        let eval = (0..2 * n)
            .map(|i| {
                let class = if i % 2 == 0 { Class::Negative } else { Class::Positive };
                let off = if class == Class::Positive { 0.5 } else { 0.0 };
                (Score::new(off + rng.random::<f64>()).unwrap(), class)
            })
            .collect();
        (cal, eval)
    }

    #[test]
    fn sweep_controls_both_rates_and_is_monotone() {
        let (cal, eval) = uniform_cal(20_000, 1);
        let grid = [0.01, 0.05, 0.1];
        for target in [Class::Negative, Class::Positive] {
            let curve = alpha_sweep(|a| DerivedTest::new(target, a, EstimatorMode::Full), &cal, &eval, &grid).unwrap();
            assert!(curve.is_monotone());
            for p in &curve.points {
                let rate = p.report.target_rate(target);
                let sd = (2.0 * p.alpha * (1.0 - p.alpha) / 20_000.0).sqrt();
                assert!((rate - p.alpha).abs() < 4.0 * sd, "{target} {} {rate}", p.alpha);
                assert!(p.report.identity_holds());
            }
        }
    }

    #[test]
    fn single_point_grid() {
        let (cal, eval) = uniform_cal(100, 2);
        let curve = alpha_sweep(|a| DerivedTest::new(Class::Positive, a, EstimatorMode::Full), &cal, &eval, &[0.2]).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert!(alpha_sweep(|a| DerivedTest::new(Class::Positive, a, EstimatorMode::Full), &cal, &eval, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn randomized_modes_are_reproducible() {
        let (cal, eval) = uniform_cal(500, 3);
        let scores: Vec<Score> = eval.iter().map(|x| x.0).collect();
        for mode in [EstimatorMode::Subsample, EstimatorMode::Bootstrap] {
            let test = DerivedTest::new(Class::Positive, 0.1, mode).unwrap().with_seed(7);
            let a = decide_all(&test, &cal, &scores).unwrap();
            let b = decide_all(&test, &cal, &scores).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn trend_detects_direction() {
        let up: Vec<(usize, PowerCell)> = (1..=10)
            .map(|k| (10 * k, PowerCell { rejected: 50 * k as u64, total: 1000 }))
            .collect();
        let t = trend(&up).unwrap();
        assert!(t.slope > 0.0 && t.pass);
        let down: Vec<(usize, PowerCell)> = (1..=10)
            .map(|k| (10 * k, PowerCell { rejected: 1000 - 50 * k as u64, total: 1000 }))
            .collect();
        assert!(!trend(&down).unwrap().pass);
    }
}
