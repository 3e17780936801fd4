use std::sync::OnceLock;

use pvclass::calib_io::{load_calibration, save_calibration};
use pvclass::classical::{NormalityTest, NullTables};
use pvclass::datagen::{palette, DistributionSpec, ExperimentConfig, Group, SampleGroup};
use pvclass::harness::{run_demo_normality, DemoConfig, DemoOutcome, Method};
use pvclass::rng::stream;
use pvclass::scoring::ScorerModel;
use pvclass::{Class, DerivedTest, EstimatorMode, Score};

fn demo() -> &'static DemoOutcome {
    static DEMO: OnceLock<DemoOutcome> = OnceLock::new();
    DEMO.get_or_init(|| run_demo_normality(&DemoConfig::default()).unwrap())
}

fn small_config(seed: u64) -> DemoConfig {
    DemoConfig {
        seed,
        experiment: ExperimentConfig {
            train_per_class: 2000,
            calib_per_class: 1000,
            eval_per_class: 1000,
            ..ExperimentConfig::default()
        },
        palette_per_distribution: 20,
        null_reps: 10_000,
        ..DemoConfig::default()
    }
}

#[test]
fn cauchy_samples_of_100_are_rejected() {
    let d = demo();
    let t1 = DistributionSpec::StudentT { df: 1.0 };
    assert_eq!(palette(Group::G1)[0], t1);
    let test = DerivedTest::new(Class::Positive, 0.1, EstimatorMode::Full).unwrap();
    let mut rng = stream(31, 0);
    let (mut derived, mut ad) = (0, 0);
    let draws = 1000;
    for _ in 0..draws {
        let s = t1.sample(&mut rng, 100).unwrap();
        let score = d.model.score(&s).unwrap();
        derived += (test.decide(&d.calibration, score, &mut rng).unwrap().label == Class::Negative) as u32;
        ad += d.null_tables.rejects(NormalityTest::AndersonDarling, s.values(), 0.1).unwrap() as u32;
    }
    assert!(derived as f64 / draws as f64 > 0.9, "derived power {derived}/{draws}");
    assert!(ad as f64 / draws as f64 > 0.9, "AD power {ad}/{draws}");
}

#[test]
fn normal_samples_score_above_cauchy_samples() {
    let d = demo();
    let mut rng = stream(32, 0);
    let normal = DistributionSpec::Normal { mean: 0.0, sd: 1.0 };
    let cauchy = DistributionSpec::StudentT { df: 1.0 };
    let mean_score = |spec: DistributionSpec, rng: &mut _| {
        (0..1000).map(|_| d.model.score(&spec.sample(rng, 100).unwrap()).unwrap().value()).sum::<f64>() / 1000.0
    };
    let a = mean_score(normal, &mut rng);
    let b = mean_score(cauchy, &mut rng);
    assert!(a > b, "{a} vs {b}");
}

#[test]
fn training_loss_never_increases() {
    let losses = &demo().training.epoch_losses;
    assert_eq!(losses.len(), DemoConfig::default().hyper.epochs);
    assert!(losses.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn power_is_reported_for_every_group_and_size() {
    let d = demo();
    for g in Group::ALL {
        let series = d.power.series(SampleGroup::Palette(g), Method::Derived);
        assert_eq!(series.len(), 10);
        for t in NormalityTest::ALL {
            assert_eq!(d.power.series(SampleGroup::Palette(g), Method::Classical(t)).len(), 10);
        }
    }
    let rows = d.all_rows();
    assert!(rows.iter().any(|r| r.experiment == "power_trend_derived"));
    assert!(rows.iter().filter(|r| r.experiment.starts_with("sweep_")).all(|r| r.pass == Some(true)));
}

#[test]
fn laplace_rejected_more_often_than_normal() {
    let nulls = NullTables::build(&NormalityTest::ALL, &[20, 50], 10_000, 5).unwrap();
    let mut rng = stream(33, 0);
    let laplace = DistributionSpec::Laplace { location: 0.0, scale: 1.0 };
    let normal = DistributionSpec::Normal { mean: 0.0, sd: 1.0 };
    for n in [20, 50] {
        let rate = |spec: DistributionSpec, rng: &mut _| {
            (0..4000)
                .filter(|_| nulls.rejects(NormalityTest::JarqueBera, spec.sample(rng, n).unwrap().values(), 0.05).unwrap())
                .count()
        };
        let l = rate(laplace, &mut rng);
        let z = rate(normal, &mut rng);
        assert!(l > z, "n={n}: {l} vs {z}");
    }
}

#[test]
fn lilliefors_power_on_uniform_grows_with_n() {
    let nulls = NullTables::build(&[NormalityTest::Lilliefors], &[20, 100], 10_000, 6).unwrap();
    let mut rng = stream(34, 0);
    let u = DistributionSpec::Uniform { low: 0.0, high: 1.0 };
    let power = |n: usize, rng: &mut _| {
        (0..4000)
            .filter(|_| nulls.rejects(NormalityTest::Lilliefors, u.sample(rng, n).unwrap().values(), 0.05).unwrap())
            .count()
    };
    let p20 = power(20, &mut rng);
    let p100 = power(100, &mut rng);
    assert!(p100 > p20, "{p20} vs {p100}");
}

#[test]
fn model_and_calibration_round_trip_exactly() {
    let d = demo();
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.txt");
    let cal_path = dir.path().join("cal.csv");
    d.model.save(&model_path).unwrap();
    save_calibration(&d.calibration, &cal_path).unwrap();
    let model = ScorerModel::load(&model_path).unwrap();
    let cal = load_calibration(&cal_path).unwrap();
    assert_eq!(cal, d.calibration);
    let mut rng = stream(35, 0);
    for _ in 0..200 {
        let s = DistributionSpec::Gumbel { location: 0.0, scale: 1.0 }.sample(&mut rng, 40).unwrap();
        assert_eq!(model.score(&s).unwrap().value().to_bits(), d.model.score(&s).unwrap().value().to_bits());
    }
}

#[test]
fn demo_is_reproducible_and_seed_sensitive() {
    let a = run_demo_normality(&small_config(1)).unwrap();
    let b = run_demo_normality(&small_config(1)).unwrap();
    assert_eq!(a.all_rows(), b.all_rows());
    assert_eq!(a.model, b.model);
    let c = run_demo_normality(&small_config(2)).unwrap();
    assert_ne!(a.model, c.model);
}

#[test]
fn subsample_mode_keeps_fnr_near_its_exact_level() {
    // with n = 11 scores per decision, P(p <= 0.1) = 2/12 for continuous scores
    let d = demo();
    let test = DerivedTest::new(Class::Positive, 0.1, EstimatorMode::Subsample).unwrap().with_seed(8);
    let positives: Vec<Score> = d.eval_scored.iter().filter(|(_, c)| *c == Class::Positive).map(|(s, _)| *s).collect();
    let decisions = pvclass::harness::decide_all(&test, &d.calibration, &positives).unwrap();
    let fnr = decisions.iter().filter(|x| x.label == Class::Negative).count() as f64 / positives.len() as f64;
    let exact = 2.0 / 12.0;
    let sd = (exact * (1.0 - exact) / positives.len() as f64).sqrt();
    assert!((fnr - exact).abs() < 4.0 * sd + 0.01, "{fnr}");
    assert!(decisions.iter().all(|x| x.pvalue.n_used == 11));
}
