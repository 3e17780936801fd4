//! End-to-end normality experiment: generate data, train the scorer,
//! calibrate, then evaluate the derived tests against the classical ones.

use rayon::prelude::*;

use super::evaluate::{alpha_sweep, power_by_group, trend, Method, PowerTable, SweepCurve};
use super::metrics::{auroc, rates, ConfusionCounts, RateReport};
use super::report::ReportRow;
use crate::classical::{NormalityTest, NullTables};
use crate::datagen::{generate_experiment, generate_palette_set, ExperimentConfig, Group, LabeledSample, SampleGroup, Split};
use crate::decision::DerivedTest;
use crate::error::Result;
use crate::pvalue::{CalibrationSet, Class, EstimatorMode, Score};
use crate::rng::derive_seed;
use crate::scoring::{train_scorer, Hyperparams, ScorerModel, TrainingReport};

#[derive(Clone, Debug, PartialEq)]
pub struct DemoConfig {
    pub seed: u64,
    pub experiment: ExperimentConfig,
    pub hyper: Hyperparams,
    pub alpha_grid: Vec<f64>,
    /// Level of the FNR-controlled test in the power study.
    pub power_alpha: f64,
    pub mode: EstimatorMode,
    pub palette_per_distribution: usize,
    pub null_reps: usize,
    /// Allowed gap between a controlled rate and its α.
    pub rate_tolerance: f64,
    pub auroc_floor: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            seed: 2024,
            experiment: ExperimentConfig::default(),
            hyper: Hyperparams::default(),
            alpha_grid: vec![0.01, 0.05, 0.1],
            power_alpha: 0.1,
            mode: EstimatorMode::Full,
            palette_per_distribution: 250,
            null_reps: 20_000,
            rate_tolerance: 0.01,
            auroc_floor: 0.9,
        }
    }
}

/// Rates of one method on the evaluation split at one level.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodRates {
    pub method: String,
    pub alpha: f64,
    pub report: RateReport,
}

pub struct DemoOutcome {
    pub config: DemoConfig,
    pub model: ScorerModel,
    pub training: TrainingReport,
    pub calibration: CalibrationSet,
    /// Evaluation split, scored.
    pub eval_scored: Vec<(Score, Class)>,
    pub auroc: f64,
    pub auroc_by_size: Vec<(usize, f64)>,
    /// FPR-controlled (target 0) and FNR-controlled (target 1) sweeps.
    pub sweeps: Vec<SweepCurve>,
    pub power: PowerTable,
    /// Derived tests and baselines on the evaluation split.
    pub comparison: Vec<MethodRates>,
    pub null_tables: NullTables,
}

fn score_all(model: &ScorerModel, samples: &[&LabeledSample]) -> Result<Vec<Score>> {
    samples.par_iter().map(|s| model.score(&s.sample)).collect()
}

pub fn run_demo_normality(config: &DemoConfig) -> Result<DemoOutcome> {
    let data = generate_experiment(derive_seed(config.seed, 1), &config.experiment)?;

    let train: Vec<(crate::scoring::ObjectSample, Class)> =
        data.split(Split::Train).map(|s| (s.sample.clone(), s.label)).collect();
    let (model, training) = train_scorer(&train, config.hyper, derive_seed(config.seed, 2))?;

    let calib: Vec<&LabeledSample> = data.split(Split::Calib).collect();
    let calib_scores = score_all(&model, &calib)?;
    let calibration = CalibrationSet::from_labeled(
        calib_scores.iter().zip(&calib).map(|(s, x)| (s.value(), x.label)),
        format!("demo seed={} split=calib", config.seed),
    )?;

    let eval: Vec<&LabeledSample> = data.split(Split::Eval).collect();
    let eval_scores = score_all(&model, &eval)?;
    let eval_scored: Vec<(Score, Class)> = eval_scores.iter().copied().zip(eval.iter().map(|s| s.label)).collect();
    let auroc_all = auroc(&eval_scored.iter().map(|(s, c)| (s.value(), *c)).collect::<Vec<_>>())?;
    let auroc_by_size = config
        .experiment
        .sizes
        .iter()
        .map(|&n| {
            let scored: Vec<(f64, Class)> = eval_scored
                .iter()
                .zip(&eval)
                .filter(|(_, s)| s.sample.len() == n)
                .map(|((score, c), _)| (score.value(), *c))
                .collect();
            Ok((n, auroc(&scored)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let test_seed = derive_seed(config.seed, 3);
    let factory = |target: Class| {
        move |alpha: f64| Ok(DerivedTest::new(target, alpha, config.mode)?.with_seed(test_seed))
    };
    let sweeps = vec![
        alpha_sweep(factory(Class::Negative), &calibration, &eval_scored, &config.alpha_grid)?,
        alpha_sweep(factory(Class::Positive), &calibration, &eval_scored, &config.alpha_grid)?,
    ];

    let null_tables = NullTables::build(
        &NormalityTest::ALL,
        &config.experiment.sizes,
        config.null_reps,
        derive_seed(config.seed, 4),
    )?;

    let mut comparison = Vec::new();
    for sweep in &sweeps {
        let name = match sweep.target_class {
            Class::Negative => "NN0",
            Class::Positive => "NN1",
        };
        for p in &sweep.points {
            comparison.push(MethodRates {
                method: name.into(),
                alpha: p.alpha,
                report: p.report,
            });
        }
    }
    for &alpha in &config.alpha_grid {
        let verdicts: Vec<[bool; 3]> = eval
            .par_iter()
            .map(|s| {
                let mut out = [false; 3];
                for (slot, t) in out.iter_mut().zip(NormalityTest::ALL) {
                    *slot = null_tables.rejects(t, s.sample.values(), alpha)?;
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for (k, t) in NormalityTest::ALL.into_iter().enumerate() {
            let mut c = ConfusionCounts::default();
            for (v, s) in verdicts.iter().zip(&eval) {
                let label = if v[k] { Class::Negative } else { Class::Positive };
                c.record(label, s.label);
            }
            comparison.push(MethodRates {
                method: t.name().into(),
                alpha,
                report: rates(c)?,
            });
        }
    }

    let palette = generate_palette_set(
        derive_seed(config.seed, 5),
        &Group::ALL,
        &config.experiment.sizes,
        config.palette_per_distribution,
    )?;
    let mut power_samples: Vec<LabeledSample> = eval.iter().map(|s| (*s).clone()).collect();
    power_samples.extend(palette.samples);
    let refs: Vec<&LabeledSample> = power_samples.iter().collect();
    let power_scores = score_all(&model, &refs)?;
    let power_test = DerivedTest::new(Class::Positive, config.power_alpha, config.mode)?.with_seed(test_seed);
    let power = power_by_group(&power_test, &calibration, &power_samples, &power_scores, Some(&null_tables))?;

    Ok(DemoOutcome {
        config: config.clone(),
        model,
        training,
        calibration,
        eval_scored,
        auroc: auroc_all,
        auroc_by_size,
        sweeps,
        power,
        comparison,
        null_tables,
    })
}

impl DemoOutcome {
    /// Whether the controlled rate is within tolerance of α at every sweep point.
    pub fn rate_control_holds(&self) -> bool {
        self.sweeps.iter().all(|s| {
            s.points
                .iter()
                .all(|p| (p.report.target_rate(s.target_class) - p.alpha).abs() <= self.config.rate_tolerance)
        })
    }

    /// Pooled FNR of the power-study derived test on normal samples.
    pub fn pooled_fnr(&self) -> f64 {
        self.power
            .pooled(SampleGroup::Normal, Method::Derived)
            .map(|c| c.rate())
            .unwrap_or(f64::NAN)
    }

    pub fn sweep_rows(&self) -> Vec<ReportRow> {
        let mut rows = Vec::new();
        for s in &self.sweeps {
            let experiment = match s.target_class {
                Class::Negative => "sweep_fpr_control",
                Class::Positive => "sweep_fnr_control",
            };
            for p in &s.points {
                let ok = (p.report.target_rate(s.target_class) - p.alpha).abs() <= self.config.rate_tolerance;
                rows.push(ReportRow {
                    alpha: Some(p.alpha),
                    pass: Some(ok && p.report.identity_holds()),
                    ..ReportRow::new(experiment, "all").with_rates(&p.report)
                });
            }
        }
        rows
    }

    pub fn comparison_rows(&self) -> Vec<ReportRow> {
        self.comparison
            .iter()
            .map(|m| ReportRow {
                alpha: Some(m.alpha),
                pass: Some(m.report.identity_holds()),
                ..ReportRow::new(format!("table_{}", m.method), "all").with_rates(&m.report)
            })
            .collect()
    }

    /// Per-(group, n) rejection rates. Non-normal groups fill the FPR/TNR
    /// columns (TNR is the power); the normal group fills FNR/TPR.
    pub fn power_rows(&self) -> Vec<ReportRow> {
        let mut rows = Vec::new();
        for ((group, method, n), cell) in &self.power.cells {
            let rate = cell.rate();
            let mut row = ReportRow {
                n: Some(*n),
                alpha: Some(self.power.alpha),
                ..ReportRow::new(format!("power_{method}"), group.to_string())
            };
            if *group == SampleGroup::Normal {
                row.fnr = Some(rate);
                row.tpr = Some(1.0 - rate);
            } else {
                row.tnr = Some(rate);
                row.fpr = Some(1.0 - rate);
            }
            rows.push(row);
        }
        // the trend verdict is attached to a summary row per group
        for group in [Group::G1, Group::G2, Group::G3, Group::G4] {
            let g = SampleGroup::Palette(group);
            if let Ok(t) = trend(&self.power.series(g, Method::Derived)) {
                rows.push(ReportRow {
                    alpha: Some(self.power.alpha),
                    pass: Some(t.pass),
                    ..ReportRow::new("power_trend_derived", g.to_string())
                });
            }
        }
        rows
    }

    pub fn all_rows(&self) -> Vec<ReportRow> {
        let mut rows = self.sweep_rows();
        rows.extend(self.comparison_rows());
        rows.extend(self.power_rows());
        rows
    }
}
