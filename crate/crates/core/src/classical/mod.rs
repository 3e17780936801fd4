//! Baseline normality tests: Jarque-Bera, Lilliefors and Anderson-Darling,
//! with p-values from Monte-Carlo null tables.

mod null;
mod stats;

pub use null::{CriticalEntry, CriticalTable, NullTables, MIN_NULL_REPS};
pub use stats::{
    anderson_darling_statistic, jarque_bera_statistic, lilliefors_statistic, NormalityTest,
    TestResult,
};
pub(crate) use stats::{ad_to_normal, ks_distance_to_normal};

use crate::error::Result;

pub fn jarque_bera(sample: &[f64], nulls: &NullTables) -> Result<TestResult> {
    nulls.evaluate(NormalityTest::JarqueBera, sample)
}

pub fn lilliefors(sample: &[f64], nulls: &NullTables) -> Result<TestResult> {
    nulls.evaluate(NormalityTest::Lilliefors, sample)
}

pub fn anderson_darling(sample: &[f64], nulls: &NullTables) -> Result<TestResult> {
    nulls.evaluate(NormalityTest::AndersonDarling, sample)
}

/// Builds null distributions and returns the critical table on `alpha_grid`.
pub fn build_critical_table(
    tests: &[NormalityTest],
    n_grid: &[usize],
    alpha_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<CriticalTable> {
    NullTables::build(tests, n_grid, reps, seed)?.critical_table(alpha_grid)
}
