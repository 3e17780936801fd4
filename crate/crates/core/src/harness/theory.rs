//! Monte-Carlo and exhaustive checks of the estimator guarantees.
//!
//! Scores are drawn from U(0, 1), for which the class-1 p-value at `x` is `x`.
//! All bands are computed from the trial counts actually used.

use rand::Rng;

use crate::error::{Error, Result};
use crate::pvalue::{dkw_band, min_calibration_size, CalibrationSet, Class, Score};
use crate::rng::{partitioned, DEFAULT_PARTITIONS};

/// Asymptotic 1% critical value of the one-sample KS distance with
/// Stephens' finite-sample correction.
pub fn ks_critical_1pct(m: usize) -> f64 {
    let r = (m as f64).sqrt();
    1.62762 / (r + 0.12 + 0.11 / r)
}

/// Sup distance between the empirical CDF of `sorted` and the U(0, 1) CDF.
pub fn ks_uniform(sorted: &[f64]) -> f64 {
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| ((i + 1) as f64 / m - u).max(u - i as f64 / m))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformityReport {
    pub queries: usize,
    pub calibration_size: usize,
    pub ks: f64,
    pub critical: f64,
    pub pass: bool,
}

/// KS distance of the p-values of `queries` (drawn from class `class`) to
/// U(0, 1). Ties in the scores make the p-values conservative, so a failure
/// is expected for degenerate score distributions.
pub fn verify_uniformity(cal: &CalibrationSet, class: Class, queries: &[f64]) -> Result<UniformityReport> {
    if queries.len() < 1000 {
        return Err(Error::InvalidArgument(format!(
            "uniformity check needs at least 1000 queries, got {}",
            queries.len()
        )));
    }
    let mut p = queries
        .iter()
        .map(|&q| Ok(cal.estimate(class, Score::new(q)?)?.value))
        .collect::<Result<Vec<f64>>>()?;
    p.sort_by(f64::total_cmp);
    let ks = ks_uniform(&p);
    let critical = ks_critical_1pct(p.len());
    Ok(UniformityReport {
        queries: p.len(),
        calibration_size: cal.len(class),
        ks,
        critical,
        pass: ks <= critical,
    })
}

/// Calibration and query scores both from U(0, 1).
pub fn uniformity_experiment(calibration_size: usize, queries: usize, seed: u64) -> Result<UniformityReport> {
    let mut rng = crate::rng::stream(seed, 0);
    let pool: Vec<f64> = (0..calibration_size).map(|_| rng.random()).collect();
    let cal = CalibrationSet::new(Vec::new(), pool, "uniform")?;
    let q: Vec<f64> = (0..queries).map(|_| rng.random()).collect();
    verify_uniformity(&cal, Class::Positive, &q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem3Report {
    pub alpha: f64,
    pub pool_size: usize,
    pub trials: usize,
    pub hits: u64,
    pub frequency: f64,
    /// α + 3·sqrt(α(1 − α)/trials).
    pub bound: f64,
    /// P(p̂ ≤ α) for continuous scores: (⌊α n⌋ + 1)/(n + 1).
    pub exact: f64,
    pub pass: bool,
}

fn exact_level(alpha: f64, n: usize) -> f64 {
    let k = (alpha * n as f64 + 1e-12).floor();
    (k + 1.0) / (n as f64 + 1.0)
}

fn bound(alpha: f64, trials: usize) -> f64 {
    alpha + 3.0 * (alpha * (1.0 - alpha) / trials as f64).sqrt()
}

/// Fresh-pool protocol: every trial draws a pool of `min_calibration_size(α)`
/// class-1 scores and a query from the same distribution, and estimates the
/// p-value with the subsample estimator.
pub fn verify_theorem3(alpha: f64, trials: usize, seed: u64) -> Result<Theorem3Report> {
    if trials < 100_000 {
        return Err(Error::InvalidArgument(format!("need at least 100000 trials, got {trials}")));
    }
    let n = min_calibration_size(alpha)?;
    let parts = partitioned(seed, trials, DEFAULT_PARTITIONS, |range, rng| -> Result<u64> {
        let mut hits = 0;
        for _ in range {
            let pool: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let cal = CalibrationSet::new(Vec::new(), pool, "trial")?;
            let q = Score::new(rng.random())?;
            let p = cal.estimate_subsample(q, Class::Positive, alpha, rng)?;
            hits += (p.value <= alpha) as u64;
        }
        Ok(hits)
    });
    let hits = parts.into_iter().sum::<Result<u64>>()?;
    Ok(report(alpha, n, trials, hits))
}

fn report(alpha: f64, n: usize, trials: usize, hits: u64) -> Theorem3Report {
    let frequency = hits as f64 / trials as f64;
    let bound = bound(alpha, trials);
    Theorem3Report {
        alpha,
        pool_size: n,
        trials,
        hits,
        frequency,
        bound,
        exact: exact_level(alpha, n),
        pass: frequency <= bound,
    }
}

/// Fixed-pool protocol: one pool for all trials. The frequency then depends
/// on the particular pool; reported, not asserted.
pub fn theorem3_fixed_pool(alpha: f64, trials: usize, seed: u64) -> Result<Theorem3Report> {
    let n = min_calibration_size(alpha)?;
    let mut rng = crate::rng::stream(seed, 0);
    let pool: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let cal = CalibrationSet::new(Vec::new(), pool, "fixed")?;
    let parts = partitioned(seed, trials, DEFAULT_PARTITIONS, |range, rng| -> Result<u64> {
        let mut hits = 0;
        for _ in range {
            let p = cal.estimate_subsample(Score::new(rng.random())?, Class::Positive, alpha, rng)?;
            hits += (p.value <= alpha) as u64;
        }
        Ok(hits)
    });
    let hits = parts.into_iter().sum::<Result<u64>>()?;
    Ok(report(alpha, n, trials, hits))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma1Report {
    pub max_size: usize,
    pub multisets: u64,
    pub cases: u64,
    /// Cases with r_k > k + 1.
    pub violations: u64,
    /// Cases with r_k > k, the bound as displayed.
    pub displayed_violations: u64,
    pub first_displayed_counterexample: Option<(Vec<u32>, usize, usize)>,
    pub pass: bool,
}

/// Number of elements that are `>=` at most `k` other elements.
pub fn r_k(set: &[u32], k: usize) -> usize {
    set.iter()
        .enumerate()
        .filter(|&(i, &a)| {
            let m = set.iter().enumerate().filter(|&(j, &b)| j != i && a >= b).count();
            m <= k
        })
        .count()
}

/// Enumerates every multiset with values and sizes in `1..=max_size` and
/// every `k < size`.
pub fn verify_lemma1(max_size: usize) -> Result<Lemma1Report> {
    if max_size == 0 || max_size > 8 {
        return Err(Error::InvalidArgument(format!("max size must be in 1..=8, got {max_size}")));
    }
    let mut rep = Lemma1Report {
        max_size,
        multisets: 0,
        cases: 0,
        violations: 0,
        displayed_violations: 0,
        first_displayed_counterexample: None,
        pass: false,
    };
    for size in 1..=max_size {
        // non-decreasing sequences enumerate multisets
        let mut set = vec![1u32; size];
        loop {
            rep.multisets += 1;
            for k in 0..size {
                let r = r_k(&set, k);
                rep.cases += 1;
                if r > k + 1 {
                    rep.violations += 1;
                }
                if r > k {
                    rep.displayed_violations += 1;
                    rep.first_displayed_counterexample.get_or_insert((set.clone(), k, r));
                }
            }
            let Some(pos) = (0..size).rev().find(|&i| set[i] < max_size as u32) else {
                break;
            };
            let v = set[pos] + 1;
            set[pos..].iter_mut().for_each(|x| *x = v);
        }
    }
    rep.pass = rep.violations == 0;
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentPoint {
    pub x: f64,
    pub p: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub analytic_variance: f64,
    pub variance_se: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub n: usize,
    pub redraws: usize,
    pub points: Vec<MomentPoint>,
    pub pass: bool,
}

/// Mean and variance of p̂₁ at each grid point over `redraws` calibration
/// draws of size `n`, compared with `x` and `x(1 − x)/n`.
pub fn verify_estimator_moments(x_grid: &[f64], n: usize, redraws: usize, seed: u64) -> Result<MomentReport> {
    if redraws < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 redraws, got {redraws}")));
    }
    if n == 0 || x_grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidArgument("grid must lie in [0, 1] and n must be positive".into()));
    }
    let parts = partitioned(seed, redraws, DEFAULT_PARTITIONS, |range, rng| -> Result<Vec<Vec<f64>>> {
        range
            .map(|_| {
                let pool: Vec<f64> = (0..n).map(|_| rng.random()).collect();
                let cal = CalibrationSet::new(Vec::new(), pool, "redraw")?;
                x_grid
                    .iter()
                    .map(|&x| Ok(cal.estimate_p1(Score::new(x)?)?.value))
                    .collect()
            })
            .collect()
    });
    let draws: Vec<Vec<f64>> = parts.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let r = redraws as f64;
    let nf = n as f64;
    let points: Vec<MomentPoint> = x_grid
        .iter()
        .enumerate()
        .map(|(g, &x)| {
            let vals: Vec<f64> = draws.iter().map(|d| d[g]).collect();
            let mean = vals.iter().sum::<f64>() / r;
            let variance = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
            let pq = x * (1.0 - x);
            let analytic_variance = pq / nf;
            // fourth central moment of a binomial proportion
            let mu4 = pq * (1.0 + 3.0 * (nf - 2.0) * pq) / nf.powi(3);
            let var_of_var = ((mu4 - analytic_variance.powi(2) * (r - 3.0) / (r - 1.0)) / r).max(0.0);
            let mean_se = (analytic_variance / r).sqrt();
            let variance_se = var_of_var.sqrt();
            let pass = (mean - x).abs() <= 4.0 * mean_se
                && (variance - analytic_variance).abs() <= 4.0 * variance_se
                && variance <= 1.0 / (4.0 * nf) + 4.0 * variance_se;
            MomentPoint {
                x,
                p: x,
                mean,
                mean_se,
                variance,
                analytic_variance,
                variance_se,
                pass,
            }
        })
        .collect();
    let pass = points.iter().all(|p| p.pass);
    Ok(MomentReport {
        n,
        redraws,
        points,
        pass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DkwReport {
    pub n: usize,
    pub epsilon: f64,
    pub redraws: usize,
    pub covered: u64,
    pub coverage: f64,
    pub band: f64,
    /// band − 3 binomial standard errors.
    pub threshold: f64,
    pub pass: bool,
}

/// Fraction of calibration draws whose p̂₁ stays within ε of the true
/// p-value uniformly in the query.
pub fn verify_dkw_coverage(n: usize, epsilon: f64, redraws: usize, seed: u64) -> Result<DkwReport> {
    if n == 0 || !(epsilon > 0.0) || redraws == 0 {
        return Err(Error::InvalidArgument("need n > 0, epsilon > 0 and redraws > 0".into()));
    }
    let parts = partitioned(seed, redraws, DEFAULT_PARTITIONS, |range, rng| -> u64 {
        range
            .map(|_| {
                let mut pool: Vec<f64> = (0..n).map(|_| rng.random()).collect();
                pool.sort_by(f64::total_cmp);
                (ks_uniform(&pool) <= epsilon) as u64
            })
            .sum()
    });
    let covered: u64 = parts.into_iter().sum();
    let coverage = covered as f64 / redraws as f64;
    let band = dkw_band(n as u64, epsilon);
    let threshold = band - 3.0 * (band * (1.0 - band) / redraws as f64).sqrt();
    Ok(DkwReport {
        n,
        epsilon,
        redraws,
        covered,
        coverage,
        band,
        threshold,
        pass: coverage >= threshold,
    })
}
