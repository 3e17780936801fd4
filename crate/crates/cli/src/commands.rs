use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pvclass::calib_io::{load_calibration, read_labeled_scores, save_calibration};
use pvclass::datagen::{load_samples, save_samples, ExperimentConfig};
use pvclass::harness::{
    alpha_sweep, decide_all, run_demo_normality, theorem3_fixed_pool, uniformity_experiment, verify_dkw_coverage,
    verify_estimator_moments, verify_lemma1, verify_theorem3, write_report, DemoConfig, ReportRow,
};
use pvclass::rng::derive_seed;
use pvclass::scoring::{Hyperparams, ScorerModel};
use pvclass::{dkw_band, CalibrationSet, Class, DerivedTest, Error, Result, Score};
use rayon::prelude::*;

use crate::manifest::Manifest;
use crate::{CalibrateArgs, ClassifyArgs, Command, Common, DemoArgs, EvaluateArgs, SimulateArgs, Verdict};

const DKW_REPORT_EPSILON: f64 = 0.02;

pub fn run(cmd: &Command) -> Result<Verdict> {
    fs::create_dir_all(&cmd.common().out_dir)?;
    match cmd {
        Command::Calibrate(a) => calibrate(a),
        Command::Classify(a) => classify(a),
        Command::Simulate(a) => simulate(a),
        Command::DemoNormality(a) => demo(a),
        Command::Evaluate(a) => evaluate(a),
    }
}

fn derived_test(c: &Common) -> Result<DerivedTest> {
    Ok(DerivedTest::new(c.target_class, c.alpha, c.mode)?
        .with_bootstrap_reps(c.bootstrap_reps)?
        .with_seed(c.seed))
}

/// Canonical text of the settings that determine a run's outputs.
fn config_text(c: &Common, extra: &str) -> String {
    format!(
        "seed={}\nalpha={}\ntarget_class={}\nmode={}\nbootstrap_reps={}\n{extra}",
        c.seed, c.alpha, c.target_class, c.mode, c.bootstrap_reps
    )
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn calibrate(a: &CalibrateArgs) -> Result<Verdict> {
    let scores = read_labeled_scores(File::open(&a.input)?, &a.input)?;
    let provenance = a.provenance.clone().unwrap_or_else(|| a.input.display().to_string());
    let cal = CalibrationSet::from_labeled(scores, provenance)?;
    for class in [Class::Negative, Class::Positive] {
        if cal.len(class) == 0 {
            return Err(Error::EmptyCalibration(class));
        }
    }
    let out = a.output.clone().unwrap_or_else(|| a.common.out_dir.join("calibration.csv"));
    save_calibration(&cal, &out)?;

    let (n0, n1) = (cal.len(Class::Negative), cal.len(Class::Positive));
    println!("n0={n0} n1={n1}");
    println!(
        "dkw_band(eps={DKW_REPORT_EPSILON}): class0={:.6} class1={:.6}",
        dkw_band(n0 as u64, DKW_REPORT_EPSILON),
        dkw_band(n1 as u64, DKW_REPORT_EPSILON)
    );
    println!("wrote {}", out.display());

    let mut m = Manifest::new("calibrate", a.common.seed, config_text(&a.common, ""));
    m.count("n0", n0);
    m.count("n1", n1);
    m.output(&out);
    m.append(&a.common.out_dir)?;
    Ok(Verdict::Ok)
}

/// Calibration set plus the input samples scored by the model.
fn load_inputs(calibration: &Path, model: &Path, input: &Path) -> Result<(CalibrationSet, Vec<(Score, Class)>)> {
    let cal = load_calibration(calibration)?;
    let model = ScorerModel::load(model)?;
    let samples = load_samples(input)?;
    let scored = samples
        .samples
        .par_iter()
        .map(|s| Ok((model.score(&s.sample)?, s.label)))
        .collect::<Result<Vec<_>>>()?;
    Ok((cal, scored))
}

fn opt_estimate(cal: &CalibrationSet, class: Class, s: Score) -> String {
    if cal.len(class) == 0 {
        String::new()
    } else {
        cal.estimate(class, s).map(|p| p.value.to_string()).unwrap_or_default()
    }
}

fn classify(a: &ClassifyArgs) -> Result<Verdict> {
    let test = derived_test(&a.common)?;
    let (cal, scored) = load_inputs(&a.calibration, &a.model, &a.input)?;
    test.check_calibration(&cal)?;
    let scores: Vec<Score> = scored.iter().map(|(s, _)| *s).collect();
    let decisions = decide_all(&test, &cal, &scores)?;

    let out = a.output.clone().unwrap_or_else(|| a.common.out_dir.join("decisions.csv"));
    let mut w = create(&out)?;
    writeln!(w, "index,score,p0,p1,pvalue,n_used,decision")?;
    let mut labeled = [0usize; 2];
    for (i, (s, d)) in scores.iter().zip(&decisions).enumerate() {
        labeled[d.label.as_u8() as usize] += 1;
        writeln!(
            w,
            "{i},{:.17e},{},{},{},{},{}",
            s.value(),
            opt_estimate(&cal, Class::Negative, *s),
            opt_estimate(&cal, Class::Positive, *s),
            d.pvalue.value,
            d.pvalue.n_used,
            d.label
        )?;
    }
    w.flush()?;
    println!("classified {} objects: {} as 0, {} as 1", scores.len(), labeled[0], labeled[1]);
    println!("wrote {}", out.display());

    let mut m = Manifest::new("classify", a.common.seed, config_text(&a.common, ""));
    m.count("objects", scores.len());
    m.count("decided_0", labeled[0]);
    m.count("decided_1", labeled[1]);
    m.output(&out);
    m.append(&a.common.out_dir)?;
    Ok(Verdict::Ok)
}

fn evaluate(a: &EvaluateArgs) -> Result<Verdict> {
    let base = derived_test(&a.common)?;
    let (cal, scored) = load_inputs(&a.calibration, &a.model, &a.input)?;
    base.check_calibration(&cal)?;
    let c = &a.common;
    let curve = alpha_sweep(
        |alpha| Ok(DerivedTest::new(c.target_class, alpha, c.mode)?.with_bootstrap_reps(c.bootstrap_reps)?.with_seed(c.seed)),
        &cal,
        &scored,
        &a.alpha_grid,
    )?;
    let experiment = match c.target_class {
        Class::Negative => "sweep_fpr_control",
        Class::Positive => "sweep_fnr_control",
    };
    let rows: Vec<ReportRow> = curve
        .points
        .iter()
        .map(|p| {
            let rate = p.report.target_rate(c.target_class);
            println!("alpha={} controlled_rate={rate:.4}", p.alpha);
            ReportRow {
                alpha: Some(p.alpha),
                pass: Some((rate - p.alpha).abs() <= a.tolerance && p.report.identity_holds()),
                ..ReportRow::new(experiment, "all").with_rates(&p.report)
            }
        })
        .collect();
    let out = c.out_dir.join("evaluation.csv");
    let mut w = create(&out)?;
    write_report(&rows, &mut w)?;
    w.flush()?;
    println!("monotone={}", curve.is_monotone());
    println!("wrote {}", out.display());

    let grid = format!("alpha_grid={:?}\ntolerance={}\n", a.alpha_grid, a.tolerance);
    let mut m = Manifest::new("evaluate", c.seed, config_text(c, &grid));
    m.count("objects", scored.len());
    m.count("passing_rows", rows.iter().filter(|r| r.pass == Some(true)).count());
    m.output(&out);
    m.append(&c.out_dir)?;
    Ok(Verdict::Ok)
}

struct Check {
    name: String,
    statistic: f64,
    threshold: f64,
    /// `None` for diagnostics that carry no verdict.
    pass: Option<bool>,
    detail: String,
}

fn simulate(a: &SimulateArgs) -> Result<Verdict> {
    let seed = a.common.seed;
    let mut checks = Vec::new();

    let u = uniformity_experiment(10_000, a.queries, derive_seed(seed, 1))?;
    checks.push(Check {
        name: "pvalue_uniformity".into(),
        statistic: u.ks,
        threshold: u.critical,
        pass: Some(u.pass),
        detail: format!("ks distance; calibration {} queries {}", u.calibration_size, u.queries),
    });

    for (tag, alpha) in [(2, 0.05), (3, 0.5)] {
        let r = verify_theorem3(alpha, a.trials, derive_seed(seed, tag))?;
        checks.push(Check {
            name: format!("subsample_level_alpha_{alpha}"),
            statistic: r.frequency,
            threshold: r.bound,
            pass: Some(r.pass),
            detail: format!("pool {} trials {} exact level {:.5}", r.pool_size, r.trials, r.exact),
        });
    }
    let fixed = theorem3_fixed_pool(0.05, a.trials, derive_seed(seed, 4))?;
    checks.push(Check {
        name: "subsample_level_fixed_pool".into(),
        statistic: fixed.frequency,
        threshold: fixed.bound,
        pass: None,
        detail: format!("one pool of {} reused over {} trials", fixed.pool_size, fixed.trials),
    });

    let grid: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
    for (k, n) in [20usize, 200, 2000].into_iter().enumerate() {
        let r = verify_estimator_moments(&grid, n, a.redraws, derive_seed(seed, 10 + k as u64))?;
        let worst = r
            .points
            .iter()
            .map(|p| ((p.mean - p.p).abs() / p.mean_se).max((p.variance - p.analytic_variance).abs() / p.variance_se))
            .fold(0.0, f64::max);
        checks.push(Check {
            name: format!("estimator_moments_n{n}"),
            statistic: worst,
            threshold: 4.0,
            pass: Some(r.pass),
            detail: format!("largest deviation in standard errors over {} points", r.points.len()),
        });
    }

    let d = verify_dkw_coverage(1000, 0.05, a.redraws, derive_seed(seed, 20))?;
    checks.push(Check {
        name: "dkw_coverage".into(),
        statistic: d.coverage,
        threshold: d.threshold,
        pass: Some(d.pass),
        detail: format!("n {} eps {} band {:.5}", d.n, d.epsilon, d.band),
    });

    let l = verify_lemma1(8)?;
    checks.push(Check {
        name: "rank_bound".into(),
        statistic: l.violations as f64,
        threshold: 0.0,
        pass: Some(l.pass),
        detail: format!(
            "{} multisets {} cases; r_k > k in {} cases; first {:?}",
            l.multisets, l.cases, l.displayed_violations, l.first_displayed_counterexample
        ),
    });

    let out = a.common.out_dir.join("simulation.csv");
    let mut w = create(&out)?;
    writeln!(w, "check,statistic,threshold,pass,detail")?;
    for c in &checks {
        let detail = c.detail.replace([',', '"'], ";");
        let pass = c.pass.map(|p| p.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{pass},{detail}", c.name, c.statistic, c.threshold)?;
        println!(
            "{} {}: {:.6} vs {:.6} ({})",
            match c.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "INFO",
            },
            c.name,
            c.statistic,
            c.threshold,
            c.detail
        );
    }
    w.flush()?;
    println!("wrote {}", out.display());

    let extra = format!("trials={}\nredraws={}\nqueries={}\n", a.trials, a.redraws, a.queries);
    let failed = checks.iter().filter(|c| c.pass == Some(false)).count();
    let mut m = Manifest::new("simulate", seed, config_text(&a.common, &extra));
    m.count("checks", checks.len());
    m.count("failed", failed);
    m.output(&out);
    m.append(&a.common.out_dir)?;
    Ok(if failed == 0 { Verdict::Ok } else { Verdict::ChecksFailed })
}

fn demo_config(a: &DemoArgs) -> Result<DemoConfig> {
    let experiment = ExperimentConfig {
        sizes: a.sizes.clone(),
        train_per_class: a.train_per_class,
        calib_per_class: a.calib_per_class,
        eval_per_class: a.eval_per_class,
        ..ExperimentConfig::default()
    };
    experiment.validate()?;
    Ok(DemoConfig {
        seed: a.common.seed,
        experiment,
        hyper: Hyperparams {
            learning_rate: a.learning_rate,
            epochs: a.epochs,
            batch_size: a.batch_size,
        },
        alpha_grid: a.alpha_grid.clone(),
        power_alpha: a.power_alpha,
        mode: a.common.mode,
        palette_per_distribution: a.palette_per_distribution,
        null_reps: a.null_reps,
        rate_tolerance: a.tolerance,
        ..DemoConfig::default()
    })
}

fn demo(a: &DemoArgs) -> Result<Verdict> {
    let config = demo_config(a)?;
    let outcome = run_demo_normality(&config)?;
    let dir = &a.common.out_dir;
    let mut outputs: Vec<PathBuf> = Vec::new();

    let report = dir.join("report.csv");
    let mut w = create(&report)?;
    write_report(&outcome.all_rows(), &mut w)?;
    w.flush()?;
    outputs.push(report);

    let model = dir.join("model.txt");
    outcome.model.save(&model)?;
    outputs.push(model);

    let cal = dir.join("calibration.csv");
    save_calibration(&outcome.calibration, &cal)?;
    outputs.push(cal);

    let table = dir.join("critical_values.csv");
    let mut w = create(&table)?;
    outcome.null_tables.critical_table(&config.alpha_grid)?.write_csv(&mut w)?;
    w.flush()?;
    outputs.push(table);

    let cfg = dir.join("experiment.cfg");
    fs::write(&cfg, config.experiment.to_kv())?;
    outputs.push(cfg);

    let data_count = if a.save_data {
        let data = pvclass::datagen::generate_experiment(derive_seed(config.seed, 1), &config.experiment)?;
        let path = dir.join("samples.csv");
        save_samples(&data, &path)?;
        outputs.push(path);
        data.samples.len()
    } else {
        0
    };

    for s in &outcome.sweeps {
        for p in &s.points {
            println!(
                "target={} alpha={} fpr={:.4} fnr={:.4}",
                s.target_class, p.alpha, p.report.fpr, p.report.fnr
            );
        }
    }
    for m in &outcome.comparison {
        println!("{} alpha={}: fpr={:.4} fnr={:.4}", m.method, m.alpha, m.report.fpr, m.report.fnr);
    }
    println!(
        "auroc={:.4} (floor {}) pooled_fnr={:.4} training_epochs_rejected={}",
        outcome.auroc,
        config.auroc_floor,
        outcome.pooled_fnr(),
        outcome.training.halvings
    );
    let ok = outcome.rate_control_holds();
    println!("rate control within {}: {}", config.rate_tolerance, if ok { "PASS" } else { "FAIL" });
    for o in &outputs {
        println!("wrote {}", o.display());
    }

    let extra = format!("{}\nhyper={:?}\nalpha_grid={:?}\npower_alpha={}\npalette={}\nnull_reps={}\ntolerance={}\n",
        config.experiment.to_kv(), config.hyper, config.alpha_grid, config.power_alpha,
        config.palette_per_distribution, config.null_reps, config.rate_tolerance);
    let mut m = Manifest::new("demo-normality", config.seed, config_text(&a.common, &extra));
    m.count("calibration_0", outcome.calibration.len(Class::Negative));
    m.count("calibration_1", outcome.calibration.len(Class::Positive));
    m.count("evaluation", outcome.eval_scored.len());
    m.count("power_cells", outcome.power.cells.len());
    m.count("saved_samples", data_count);
    for o in &outputs {
        m.output(o);
    }
    m.append(dir)?;
    Ok(if ok { Verdict::Ok } else { Verdict::ChecksFailed })
}
