//! Evaluation: confusion metrics, α-sweeps, power studies, the theory
//! verification suite and the end-to-end normality demo.

pub mod demo;
pub mod evaluate;
pub mod metrics;
pub mod report;
pub mod theory;

pub use demo::{run_demo_normality, DemoConfig, DemoOutcome, MethodRates};
pub use evaluate::{
    alpha_sweep, decide_all, evaluate_test, power_by_group, trend, Method, PowerCell, PowerTable, SweepCurve,
    SweepPoint, TrendReport,
};
pub use metrics::{auroc, confusion, rates, ConfusionCounts, RateReport};
pub use report::{write_report, ReportRow, REPORT_HEADER};
pub use theory::{
    ks_critical_1pct, ks_uniform, r_k, theorem3_fixed_pool, uniformity_experiment, verify_dkw_coverage,
    verify_estimator_moments, verify_lemma1, verify_theorem3, verify_uniformity, DkwReport, Lemma1Report,
    MomentPoint, MomentReport, Theorem3Report, UniformityReport,
};
