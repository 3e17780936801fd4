//! Python module `pvclass_py`.
//!
//! Classes are represented as the integers 0 and 1, estimator modes as the
//! strings "full", "subsample" and "bootstrap". Randomized calls take an
//! explicit seed.

use std::path::PathBuf;

use pvclass::classical::{anderson_darling_statistic, jarque_bera_statistic, lilliefors_statistic};
use pvclass::datagen::{kappa, MomentSpec};
use pvclass::harness;
use pvclass::rng::stream;
use pvclass::scoring::{self, ObjectSample, ScorerModel};
use pvclass::{calib_io, Class, EstimatorMode, Score};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: pvclass::Error) -> PyErr {
    match e {
        pvclass::Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn class(label: u8) -> PyResult<Class> {
    Class::from_u8(label).map_err(err)
}

fn score(s: f64) -> PyResult<Score> {
    Score::new(s).map_err(err)
}

fn mode(m: &str) -> PyResult<EstimatorMode> {
    m.parse().map_err(err)
}

fn classes(labels: &[u8]) -> PyResult<Vec<Class>> {
    labels.iter().map(|&l| class(l)).collect()
}

/// Held-out calibration scores, split by class.
#[pyclass(name = "CalibrationSet", frozen)]
struct PyCalibrationSet {
    inner: pvclass::CalibrationSet,
}

#[pymethods]
impl PyCalibrationSet {
    #[new]
    #[pyo3(signature = (class0, class1, provenance = String::new()))]
    fn new(class0: Vec<f64>, class1: Vec<f64>, provenance: String) -> PyResult<Self> {
        let inner = pvclass::CalibrationSet::new(class0, class1, provenance).map_err(err)?;
        Ok(PyCalibrationSet { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (scores, labels, provenance = String::new()))]
    fn from_labeled(scores: Vec<f64>, labels: Vec<u8>, provenance: String) -> PyResult<Self> {
        if scores.len() != labels.len() {
            return Err(err(pvclass::Error::LengthMismatch(scores.len(), labels.len())));
        }
        let pairs: Vec<(f64, Class)> = scores.into_iter().zip(classes(&labels)?).collect();
        let inner = pvclass::CalibrationSet::from_labeled(pairs, provenance).map_err(err)?;
        Ok(PyCalibrationSet { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyCalibrationSet {
            inner: calib_io::load_calibration(&path).map_err(err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        calib_io::save_calibration(&self.inner, &path).map_err(err)
    }

    fn len(&self, cls: u8) -> PyResult<usize> {
        Ok(self.inner.len(class(cls)?))
    }

    /// Sorted scores of one class.
    fn scores(&self, cls: u8) -> PyResult<Vec<f64>> {
        Ok(self.inner.scores(class(cls)?).to_vec())
    }

    #[getter]
    fn provenance(&self) -> String {
        self.inner.provenance().to_string()
    }

    fn estimate(&self, cls: u8, s: f64) -> PyResult<f64> {
        Ok(self.inner.estimate(class(cls)?, score(s)?).map_err(err)?.value)
    }

    fn estimate_p0(&self, s: f64) -> PyResult<f64> {
        Ok(self.inner.estimate_p0(score(s)?).map_err(err)?.value)
    }

    fn estimate_p1(&self, s: f64) -> PyResult<f64> {
        Ok(self.inner.estimate_p1(score(s)?).map_err(err)?.value)
    }

    fn estimate_subsample(&self, s: f64, cls: u8, alpha: f64, seed: u64) -> PyResult<f64> {
        let mut rng = stream(seed, 0);
        let p = self.inner.estimate_subsample(score(s)?, class(cls)?, alpha, &mut rng);
        Ok(p.map_err(err)?.value)
    }

    fn estimate_bootstrap(&self, s: f64, cls: u8, reps: usize, seed: u64) -> PyResult<f64> {
        let mut rng = stream(seed, 0);
        let p = self.inner.estimate_bootstrap(score(s)?, class(cls)?, reps, &mut rng);
        Ok(p.map_err(err)?.value)
    }

    fn __repr__(&self) -> String {
        format!(
            "CalibrationSet(n0={}, n1={})",
            self.inner.len(Class::Negative),
            self.inner.len(Class::Positive)
        )
    }
}

/// Threshold test on the p-value of one target class.
#[pyclass(name = "DerivedTest", frozen)]
struct PyDerivedTest {
    inner: pvclass::DerivedTest,
}

#[pymethods]
impl PyDerivedTest {
    #[new]
    #[pyo3(signature = (target_class, alpha, mode = "full", bootstrap_reps = 200, seed = 0))]
    fn new(target_class: u8, alpha: f64, mode: &str, bootstrap_reps: usize, seed: u64) -> PyResult<Self> {
        let inner = pvclass::DerivedTest::new(class(target_class)?, alpha, self::mode(mode)?)
            .and_then(|t| t.with_bootstrap_reps(bootstrap_reps))
            .map_err(err)?
            .with_seed(seed);
        Ok(PyDerivedTest { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn target_class(&self) -> u8 {
        self.inner.target_class().as_u8()
    }

    fn check_calibration(&self, cal: &PyCalibrationSet) -> PyResult<()> {
        self.inner.check_calibration(&cal.inner).map_err(err)
    }

    /// Returns `(label, pvalue)`; randomized modes draw from stream `index + 1`.
    #[pyo3(signature = (cal, s, index = 0))]
    fn decide(&self, cal: &PyCalibrationSet, s: f64, index: u64) -> PyResult<(u8, f64)> {
        let mut rng = stream(self.inner.seed(), index + 1);
        let d = self.inner.decide(&cal.inner, score(s)?, &mut rng).map_err(err)?;
        Ok((d.label.as_u8(), d.pvalue.value))
    }

    /// Decides every score; entry i matches `decide(cal, scores[i], i)`.
    fn decide_all(&self, py: Python<'_>, cal: &PyCalibrationSet, scores: Vec<f64>) -> PyResult<Vec<(u8, f64)>> {
        let scores = scores.into_iter().map(score).collect::<PyResult<Vec<_>>>()?;
        let decisions = py
            .detach(|| harness::decide_all(&self.inner, &cal.inner, &scores))
            .map_err(err)?;
        Ok(decisions.iter().map(|d| (d.label.as_u8(), d.pvalue.value)).collect())
    }
}

/// Trained logistic scorer.
#[pyclass(name = "ScorerModel", frozen)]
struct PyScorerModel {
    inner: ScorerModel,
}

#[pymethods]
impl PyScorerModel {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyScorerModel {
            inner: ScorerModel::load(&path).map_err(err)?,
        })
    }

    fn score(&self, values: Vec<f64>) -> PyResult<f64> {
        let sample = ObjectSample::new(values).map_err(err)?;
        Ok(self.inner.score(&sample).map_err(err)?.value())
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }
}

#[pyfunction]
fn min_calibration_size(alpha: f64) -> PyResult<usize> {
    pvclass::min_calibration_size(alpha).map_err(err)
}

#[pyfunction]
fn dkw_band(n: u64, epsilon: f64) -> f64 {
    pvclass::dkw_band(n, epsilon)
}

#[pyfunction]
fn dkw_required_n(epsilon: f64, confidence: f64) -> PyResult<u64> {
    pvclass::dkw_required_n(epsilon, confidence).map_err(err)
}

/// Scorer features of one sample, in `FEATURE_NAMES` order.
#[pyfunction]
fn extract_features(values: Vec<f64>) -> PyResult<Vec<f64>> {
    let sample = ObjectSample::new(values).map_err(err)?;
    Ok(scoring::extract_features(&sample).map_err(err)?.as_array().to_vec())
}

#[pyfunction]
fn jarque_bera(values: Vec<f64>) -> PyResult<f64> {
    jarque_bera_statistic(&values).map_err(err)
}

#[pyfunction]
fn lilliefors(values: Vec<f64>) -> PyResult<f64> {
    lilliefors_statistic(&values).map_err(err)
}

#[pyfunction]
fn anderson_darling(values: Vec<f64>) -> PyResult<f64> {
    anderson_darling_statistic(&values).map_err(err)
}

/// Pearson family ("normal", "I", ..., "VII") for the given moments.
#[pyfunction]
#[pyo3(signature = (skewness, kurtosis, mean = 0.0, variance = 1.0))]
fn pearson_type(skewness: f64, kurtosis: f64, mean: f64, variance: f64) -> PyResult<String> {
    let spec = MomentSpec::new(mean, variance, skewness, kurtosis).map_err(err)?;
    Ok(pvclass::datagen::pearson_type(&spec).map_err(err)?.to_string())
}

#[pyfunction]
fn pearson_kappa(beta1: f64, beta2: f64) -> f64 {
    kappa(beta1, beta2)
}

/// Confusion counts and rates; class 1 is the positive class.
#[pyfunction]
fn rates<'py>(py: Python<'py>, decisions: Vec<u8>, labels: Vec<u8>) -> PyResult<Bound<'py, PyDict>> {
    let c = harness::confusion(&classes(&decisions)?, &classes(&labels)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("tp", c.tp)?;
    d.set_item("fp", c.fp)?;
    d.set_item("tn", c.tn)?;
    d.set_item("fn", c.fn_)?;
    if let Ok(r) = harness::rates(c) {
        d.set_item("fpr", r.fpr)?;
        d.set_item("fnr", r.fnr)?;
        d.set_item("tpr", r.tpr)?;
        d.set_item("tnr", r.tnr)?;
        d.set_item("accuracy", r.accuracy)?;
        d.set_item("identity_holds", r.identity_holds())?;
    }
    Ok(d)
}

#[pyfunction]
fn auroc(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<f64> {
    if scores.len() != labels.len() {
        return Err(err(pvclass::Error::LengthMismatch(scores.len(), labels.len())));
    }
    let pairs: Vec<(f64, Class)> = scores.into_iter().zip(classes(&labels)?).collect();
    harness::auroc(&pairs).map_err(err)
}

#[pymodule]
fn pvclass_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCalibrationSet>()?;
    m.add_class::<PyDerivedTest>()?;
    m.add_class::<PyScorerModel>()?;
    m.add_function(wrap_pyfunction!(min_calibration_size, m)?)?;
    m.add_function(wrap_pyfunction!(dkw_band, m)?)?;
    m.add_function(wrap_pyfunction!(dkw_required_n, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(jarque_bera, m)?)?;
    m.add_function(wrap_pyfunction!(lilliefors, m)?)?;
    m.add_function(wrap_pyfunction!(anderson_darling, m)?)?;
    m.add_function(wrap_pyfunction!(pearson_type, m)?)?;
    m.add_function(wrap_pyfunction!(pearson_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(rates, m)?)?;
    m.add_function(wrap_pyfunction!(auroc, m)?)?;
    m.add("FEATURE_NAMES", scoring::FEATURE_NAMES.to_vec())?;
    Ok(())
}
