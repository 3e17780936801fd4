//! Monte-Carlo null distributions and critical tables for the classical
//! normality tests at small sample sizes.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};

use super::stats::{NormalityTest, TestResult};
use crate::error::{Error, Result};
use crate::pvalue::check_level;
use crate::rng::{blocked, derive_seed};

pub const MIN_NULL_REPS: usize = 10_000;

/// Replications per generator stream. Tables built with more replications
/// from the same seed extend the smaller ones.
const NULL_BLOCK: usize = 1000;

/// Sorted null statistics per (test, n), simulated from N(0, 1) samples.
/// All three statistics are affine invariant, so one null serves every
/// normal distribution.
#[derive(Clone, Debug)]
pub struct NullTables {
    reps: usize,
    seed: u64,
    stats: BTreeMap<(NormalityTest, usize), Vec<f64>>,
}

impl NullTables {
    pub fn build(tests: &[NormalityTest], n_grid: &[usize], reps: usize, seed: u64) -> Result<Self> {
        if reps < MIN_NULL_REPS {
            return Err(Error::InvalidArgument(format!(
                "null tables need at least {MIN_NULL_REPS} replications, got {reps}"
            )));
        }
        let mut stats = BTreeMap::new();
        for &n in n_grid {
            for &t in tests {
                if n < t.min_n() {
                    return Err(Error::InsufficientSampleSize {
                        needed: t.min_n(),
                        given: n,
                    });
                }
            }
            let parts = blocked(derive_seed(seed, n as u64), reps, NULL_BLOCK, |range, rng| {
                let mut out = vec![Vec::with_capacity(range.len()); tests.len()];
                let mut x = vec![0.0; n];
                for _ in range {
                    x.iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
                    for (slot, t) in out.iter_mut().zip(tests) {
                        slot.push(t.statistic(&x).expect("normal draws are nondegenerate"));
                    }
                }
                out
            });
            for (i, &t) in tests.iter().enumerate() {
                let mut v: Vec<f64> = parts.iter().flat_map(|p| p[i].iter().copied()).collect();
                v.sort_by(f64::total_cmp);
                stats.insert((t, n), v);
            }
        }
        Ok(NullTables { reps, seed, stats })
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn null(&self, test: NormalityTest, n: usize) -> Result<&[f64]> {
        self.stats
            .get(&(test, n))
            .map(Vec::as_slice)
            .ok_or(Error::MissingNullTable { test: test.name(), n })
    }

    /// Monte-Carlo p-value `(1 + #{null >= stat}) / (reps + 1)`.
    pub fn pvalue(&self, test: NormalityTest, n: usize, statistic: f64) -> Result<f64> {
        let null = self.null(test, n)?;
        let at_least = null.len() - null.partition_point(|&x| x < statistic);
        Ok((1 + at_least) as f64 / (null.len() + 1) as f64)
    }

    /// Empirical `(1 - alpha)`-quantile of the null statistic. The test
    /// rejects when the statistic strictly exceeds it.
    pub fn critical_value(&self, test: NormalityTest, n: usize, alpha: f64) -> Result<f64> {
        check_level(alpha)?;
        let null = self.null(test, n)?;
        Ok(null[quantile_index(null.len(), 1.0 - alpha)])
    }

    /// Standard error of the critical value from the spread of neighbouring
    /// order statistics: half the width of the ±1 binomial-sd rank window.
    pub fn critical_value_se(&self, test: NormalityTest, n: usize, alpha: f64) -> Result<f64> {
        check_level(alpha)?;
        let null = self.null(test, n)?;
        let p = 1.0 - alpha;
        let half = (p * alpha / null.len() as f64).sqrt();
        let lo = null[quantile_index(null.len(), (p - half).max(0.0))];
        let hi = null[quantile_index(null.len(), (p + half).min(1.0))];
        Ok((hi - lo) / 2.0)
    }

    pub fn evaluate(&self, test: NormalityTest, sample: &[f64]) -> Result<TestResult> {
        let statistic = test.statistic(sample)?;
        Ok(TestResult {
            statistic,
            pvalue: self.pvalue(test, sample.len(), statistic)?,
            test,
            n: sample.len(),
        })
    }

    pub fn rejects(&self, test: NormalityTest, sample: &[f64], alpha: f64) -> Result<bool> {
        let statistic = test.statistic(sample)?;
        Ok(statistic > self.critical_value(test, sample.len(), alpha)?)
    }

    pub fn critical_table(&self, alpha_grid: &[f64]) -> Result<CriticalTable> {
        let mut entries = Vec::new();
        for &(test, n) in self.stats.keys() {
            for &alpha in alpha_grid {
                entries.push(CriticalEntry {
                    test,
                    n,
                    alpha,
                    critical_value: self.critical_value(test, n, alpha)?,
                });
            }
        }
        Ok(CriticalTable {
            reps: self.reps,
            seed: self.seed,
            entries,
        })
    }
}

fn quantile_index(len: usize, p: f64) -> usize {
    ((p * len as f64).ceil() as usize).clamp(1, len) - 1
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalEntry {
    pub test: NormalityTest,
    pub n: usize,
    pub alpha: f64,
    pub critical_value: f64,
}

/// Critical values per (test, n, alpha), persisted as CSV
/// `test,n,alpha,critical_value` under a `# reps=R seed=S` comment.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalTable {
    pub reps: usize,
    pub seed: u64,
    pub entries: Vec<CriticalEntry>,
}

impl CriticalTable {
    pub fn lookup(&self, test: NormalityTest, n: usize, alpha: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.test == test && e.n == n && e.alpha == alpha)
            .map(|e| e.critical_value)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# reps={} seed={}", self.reps, self.seed)?;
        writeln!(out, "test,n,alpha,critical_value")?;
        for e in &self.entries {
            writeln!(out, "{},{},{},{:.16e}", e.test, e.n, e.alpha, e.critical_value)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R, origin: &Path) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Format {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = input.lines();
        let meta = lines.next().transpose()?.unwrap_or_default();
        let mut reps = None;
        let mut seed = None;
        for kv in meta.trim_start_matches('#').split_whitespace() {
            match kv.split_once('=') {
                Some(("reps", v)) => reps = v.parse().ok(),
                Some(("seed", v)) => seed = v.parse().ok(),
                _ => {}
            }
        }
        let (reps, seed) = reps.zip(seed).ok_or_else(|| bad(1, "missing `# reps=.. seed=..` header".into()))?;
        if lines.next().transpose()?.as_deref().map(str::trim) != Some("test,n,alpha,critical_value") {
            return Err(bad(2, "expected header test,n,alpha,critical_value".into()));
        }
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let row = i + 3;
            if f.len() != 4 {
                return Err(bad(row, format!("expected 4 fields, got {}", f.len())));
            }
            entries.push(CriticalEntry {
                test: f[0].parse().map_err(|e: Error| bad(row, e.to_string()))?,
                n: f[1].parse().map_err(|_| bad(row, format!("bad n {:?}", f[1])))?,
                alpha: f[2].parse().map_err(|_| bad(row, format!("bad alpha {:?}", f[2])))?,
                critical_value: f[3]
                    .parse()
                    .map_err(|_| bad(row, format!("bad critical value {:?}", f[3])))?,
            });
        }
        Ok(CriticalTable { reps, seed, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn tables() -> NullTables {
        NullTables::build(&NormalityTest::ALL, &[20, 50], MIN_NULL_REPS, 17).unwrap()
    }

    #[test]
    fn too_few_reps_rejected() {
        assert!(NullTables::build(&NormalityTest::ALL, &[20], 100, 0).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let a = NullTables::build(&[NormalityTest::JarqueBera], &[10], MIN_NULL_REPS, 5).unwrap();
        let b = NullTables::build(&[NormalityTest::JarqueBera], &[10], MIN_NULL_REPS, 5).unwrap();
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn critical_values_decrease_with_alpha() {
        let t = tables();
        for test in NormalityTest::ALL {
            for n in [20, 50] {
                let grid = [0.01, 0.05, 0.1, 0.2];
                let cv: Vec<f64> = grid.iter().map(|&a| t.critical_value(test, n, a).unwrap()).collect();
                assert!(cv.windows(2).all(|w| w[0] >= w[1]), "{test} {n} {cv:?}");
            }
        }
    }

    #[test]
    fn rejection_rate_on_fresh_null_draws() {
        let t = tables();
        let draws = 10_000;
        let mut rng = stream(12345, 0);
        for alpha in [0.01, 0.05] {
            let mut rejected = [0usize; 3];
            for _ in 0..draws {
                let x: Vec<f64> = (0..50).map(|_| 3.0 + 2.0 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
                for (k, test) in NormalityTest::ALL.into_iter().enumerate() {
                    rejected[k] += t.rejects(test, &x, alpha).unwrap() as usize;
                }
            }
            // table and fresh draws each contribute binomial noise
            let sd = (2.0 * alpha * (1.0 - alpha) / draws as f64).sqrt();
            for r in rejected {
                let rate = r as f64 / draws as f64;
                assert!((rate - alpha).abs() < 4.0 * sd, "alpha {alpha}: rate {rate}");
            }
        }
    }

    #[test]
    fn doubling_reps_is_stable() {
        let small = tables();
        // same seed: the larger table extends the smaller one
        let big = NullTables::build(&NormalityTest::ALL, &[20], 2 * MIN_NULL_REPS, 17).unwrap();
        for test in NormalityTest::ALL {
            for alpha in [0.05, 0.1] {
                let a = small.critical_value(test, 20, alpha).unwrap();
                let b = big.critical_value(test, 20, alpha).unwrap();
                let se = small.critical_value_se(test, 20, alpha).unwrap();
                assert!((a - b).abs() < 2.0 * se, "{test} {alpha}: {a} vs {b} (se {se})");
            }
        }
    }

    #[test]
    fn pvalues_bounded_and_ordered() {
        let t = tables();
        let p_small = t.pvalue(NormalityTest::AndersonDarling, 20, 10.0).unwrap();
        let p_big = t.pvalue(NormalityTest::AndersonDarling, 20, 0.0).unwrap();
        assert!(p_small > 0.0 && p_small < 1e-3);
        assert_eq!(p_big, 1.0);
        assert!(matches!(
            t.pvalue(NormalityTest::JarqueBera, 30, 1.0),
            Err(Error::MissingNullTable { n: 30, .. })
        ));
    }

    #[test]
    fn table_csv_round_trip() {
        let t = tables().critical_table(&[0.01, 0.05]).unwrap();
        assert_eq!(t.entries.len(), 3 * 2 * 2);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# reps=10000 seed=17\ntest,n,alpha,critical_value\n"));
        let back = CriticalTable::read_csv(buf.as_slice(), Path::new("t.csv")).unwrap();
        assert_eq!(back, t);
        assert!(back.lookup(NormalityTest::Lilliefors, 50, 0.05).is_some());
    }
}
