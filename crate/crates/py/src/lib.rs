//! Python bindings: domains, triplets, sample paths of `X` and `Y`,
//! exponent estimates and predictions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use silevy::experiments::{Estimators, RegularityRun};
use silevy::indexing::{d_a, Domain, IndexSet, MetricKind, Point};
use silevy::integral::{DriftMode, Integrand, SamplePathY};
use silevy::levy::{sample_path, CellField, JumpList, LevyMeasureSpec, LevyTriplet, SamplePath};
use silevy::measure::Measure;
use silevy::regularity::predict_1d;

fn err(e: silevy::Error) -> PyErr {
    match e {
        silevy::Error::Io(e) => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

/// Reads a spec given as a dict or a JSON string.
fn spec<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if obj.is_instance_of::<PyDict>() || obj.is_instance_of::<PyList>() {
        obj.py()
            .import("json")?
            .call_method1("dumps", (obj,))?
            .extract()?
    } else {
        obj.extract()?
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n
                .as_f64()
                .unwrap_or(f64::NAN)
                .into_pyobject(py)?
                .into_any()
                .unbind(),
        },
        // the `+∞` sentinel travels as "inf"
        Value::String(s) if s == "inf" => f64::INFINITY.into_pyobject(py)?.into_any().unbind(),
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => {
            let items = a
                .iter()
                .map(|x| to_py(py, x))
                .collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any().unbind()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

fn ser<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &value)
}

fn metric_of(name: Option<&str>, domain: &Domain) -> PyResult<MetricKind> {
    match name.unwrap_or("symm_diff") {
        "symm_diff" => Ok(MetricKind::symm_diff(Measure::natural(domain))),
        "hausdorff_tips" => Ok(MetricKind::HausdorffTips),
        other => Err(PyValueError::new_err(format!("unknown metric {other:?}"))),
    }
}

/// A box `[0, side]^p` or a finite tree.
#[pyclass(name = "Domain", module = "silevy_py", frozen)]
struct PyDomain {
    inner: Domain,
}

#[pymethods]
impl PyDomain {
    #[new]
    fn new(spec_obj: &Bound<'_, PyAny>) -> PyResult<Self> {
        let value: Value = spec(spec_obj)?;
        Ok(PyDomain {
            inner: Domain::from_json(&value).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (p, side = 1.0))]
    fn new_box(p: usize, side: f64) -> PyResult<Self> {
        Ok(PyDomain {
            inner: Domain::new_box(p, side).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Number of cells at mesh level `n`.
    fn cell_count(&self, n: u32) -> usize {
        self.inner.cells(n).len()
    }

    /// `d_A(A(s), A(t))`.
    #[pyo3(signature = (s, t, metric = None))]
    fn distance_of_atoms(&self, s: Vec<f64>, t: Vec<f64>, metric: Option<&str>) -> PyResult<f64> {
        let d = &self.inner;
        let a = IndexSet::Atom(d.point(&s).map_err(err)?);
        let b = IndexSet::Atom(d.point(&t).map_err(err)?);
        Ok(d_a(d, &a, &b, &metric_of(metric, d)?))
    }

    fn __repr__(&self) -> String {
        format!("Domain({})", self.inner.to_json())
    }
}

/// A Lévy triplet `(b, σ², ν)` with `ν` a sum of atoms and an optional
/// truncated symmetric stable part.
#[pyclass(name = "LevyTriplet", module = "silevy_py", frozen)]
struct PyTriplet {
    inner: LevyTriplet,
}

#[pymethods]
impl PyTriplet {
    #[new]
    #[pyo3(signature = (b = 0.0, sigma2 = 0.0, atoms = Vec::new(), stable = None))]
    fn new(
        b: f64,
        sigma2: f64,
        atoms: Vec<(f64, f64)>,
        stable: Option<(f64, f64)>,
    ) -> PyResult<Self> {
        let mut nu = LevyMeasureSpec::atoms(&atoms);
        if let Some((alpha, c)) = stable {
            nu = nu.plus(&LevyMeasureSpec::stable(alpha, c)).map_err(err)?;
        }
        Ok(PyTriplet {
            inner: LevyTriplet::new(b, sigma2, nu).map_err(err)?,
        })
    }

    fn psi(&self, xi: f64) -> PyResult<num_complex_shim::C> {
        let z = self.inner.psi(xi).map_err(err)?;
        Ok(num_complex_shim::C(z.re, z.im))
    }

    #[getter]
    fn mean_rate(&self) -> f64 {
        self.inner.mean_rate()
    }

    #[getter]
    fn var_rate(&self) -> f64 {
        self.inner.var_rate()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable")
    }
}

mod num_complex_shim {
    use pyo3::prelude::*;
    use pyo3::types::PyComplex;

    /// A complex number handed to Python as `complex`.
    pub struct C(pub f64, pub f64);

    impl<'py> IntoPyObject<'py> for C {
        type Target = PyComplex;
        type Output = Bound<'py, PyComplex>;
        type Error = std::convert::Infallible;

        fn into_pyobject(self, py: Python<'py>) -> Result<Self::Output, Self::Error> {
            Ok(PyComplex::from_doubles(py, self.0, self.1))
        }
    }
}

// one per Python object, so the variant sizes do not matter
#[allow(clippy::large_enum_variant)]
enum Process {
    X(SamplePath),
    Y(SamplePathY),
}

/// A sample path of `X`, or of `Y = ∫ f dX` when built by `integrate`.
#[pyclass(name = "SamplePath", module = "silevy_py", frozen)]
struct PyPath {
    inner: Process,
}

impl PyPath {
    fn x_path(&self) -> &SamplePath {
        match &self.inner {
            Process::X(x) => x,
            Process::Y(y) => y.x(),
        }
    }

    fn field(&self) -> &CellField {
        match &self.inner {
            Process::X(x) => x.field(),
            Process::Y(y) => y.field(),
        }
    }

    fn jump_list(&self) -> &JumpList {
        match &self.inner {
            Process::X(x) => x.jumps(),
            Process::Y(y) => y.jumps(),
        }
    }

    fn domain(&self) -> &Domain {
        self.x_path().domain()
    }
}

#[pymethods]
impl PyPath {
    #[getter]
    fn level(&self) -> u32 {
        self.x_path().level()
    }

    #[getter]
    fn is_integral(&self) -> bool {
        matches!(self.inner, Process::Y(_))
    }

    /// Value on the atom `A(t)`; `t` must be a mesh tip.
    fn value(&self, t: Vec<f64>) -> PyResult<f64> {
        let p = self.domain().point(&t).map_err(err)?;
        self.field()
            .value(&IndexSet::Atom(p))
            .ok_or_else(|| PyValueError::new_err("point is not a tip of the mesh"))
    }

    /// Jumps as `(location, size)` pairs.
    fn jumps(&self) -> Vec<(Vec<f64>, f64)> {
        let d = self.domain();
        let j = self.jump_list();
        (0..j.len())
            .map(|i| {
                let r = j.get(d, i);
                let loc = match r.location {
                    Point::Box(c) => c,
                    Point::Tree(path) => path.into_iter().map(f64::from).collect(),
                };
                (loc, r.size)
            })
            .collect()
    }

    fn __len__(&self) -> usize {
        self.jump_list().len()
    }

    /// Exports the path (header, JSONL jumps, CSV cells) into `dir`.
    fn write(&self, dir: &str) -> PyResult<()> {
        let dir = std::path::Path::new(dir);
        match &self.inner {
            Process::X(x) => silevy::export::write_x(dir, x),
            Process::Y(y) => silevy::export::write_y(dir, y),
        }
        .map_err(err)
    }
}

/// Samples `X` on the level-`level` mesh; `stream` indexes independent
/// paths under one seed.
#[pyfunction]
#[pyo3(signature = (triplet, domain, level, eps, seed, stream = 0))]
fn sample(
    py: Python<'_>,
    triplet: &PyTriplet,
    domain: &PyDomain,
    level: u32,
    eps: f64,
    seed: u64,
    stream: u64,
) -> PyResult<PyPath> {
    let (t, d) = (triplet.inner.clone(), domain.inner.clone());
    let x = py
        .detach(move || sample_path(&t, &d, &Measure::natural(&d), level, eps, seed, stream))
        .map_err(err)?;
    Ok(PyPath {
        inner: Process::X(x),
    })
}

/// `Y = ∫ f dX` on the path `x`; `drift` is "keep" or "cancel".
#[pyfunction]
#[pyo3(signature = (x, integrand, drift = "keep"))]
fn integrate(x: &PyPath, integrand: &Bound<'_, PyAny>, drift: &str) -> PyResult<PyPath> {
    let f: Integrand = spec(integrand)?;
    let mode: DriftMode = serde_json::from_value(Value::String(drift.into()))
        .map_err(|_| PyValueError::new_err(format!("unknown drift mode {drift:?}")))?;
    let base = match &x.inner {
        Process::X(p) => p.clone(),
        Process::Y(_) => return Err(PyValueError::new_err("integrate expects a path of X")),
    };
    let y = SamplePathY::from_path(base, &f, mode).map_err(err)?;
    Ok(PyPath {
        inner: Process::Y(y),
    })
}

/// Regularity estimates of `path` at each target. `estimators` picks from
/// "holder", "c_exp", "localized", "pc" and "jump_bound".
#[pyfunction]
#[pyo3(signature = (path, targets, js = None, margin = 3, estimators = None, metric = None))]
fn estimate(
    py: Python<'_>,
    path: &PyPath,
    targets: Vec<Vec<f64>>,
    js: Option<Vec<u32>>,
    margin: u32,
    estimators: Option<Vec<String>>,
    metric: Option<&str>,
) -> PyResult<Py<PyAny>> {
    let d = path.domain().clone();
    let names = estimators.unwrap_or_else(|| vec!["holder".into()]);
    let mut est = Estimators {
        holder: false,
        c_exp: false,
        localized: false,
        pc: false,
        jump_bound: false,
    };
    for n in &names {
        match n.as_str() {
            "holder" => est.holder = true,
            "c_exp" => est.c_exp = true,
            "localized" => est.localized = true,
            "pc" => est.pc = true,
            "jump_bound" => est.jump_bound = true,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown estimator {other:?}"
                )))
            }
        }
    }
    let targets = targets
        .iter()
        .map(|t| d.point(t))
        .collect::<silevy::Result<Vec<_>>>()
        .map_err(err)?;
    let x = path.x_path();
    let run = RegularityRun {
        metric: metric_of(metric, &d)?,
        measure: *x.measure(),
        triplet: x.triplet().clone(),
        integrand: None,
        mode: DriftMode::Keep,
        level: x.level(),
        eps: x.eps(),
        seed: x.seed(),
        reps: 0,
        targets,
        js: js.unwrap_or_else(|| (3..=10).collect()),
        margin,
        estimators: est,
        domain: d,
    };
    let out = py
        .detach(|| {
            let plans = run.plans()?;
            run.estimate(&plans, path.field(), Some(path.jump_list()))
        })
        .map_err(err)?;
    ser(py, &out)
}

/// `1/β + a·1{f(t) = 0}` on the one-dimensional box.
#[pyfunction]
fn predict_exponent_1d(
    domain: &PyDomain,
    integrand: &Bound<'_, PyAny>,
    t: Vec<f64>,
    beta: f64,
) -> PyResult<f64> {
    let f: Integrand = spec(integrand)?;
    let p = domain.inner.point(&t).map_err(err)?;
    Ok(predict_1d(&f, &domain.inner, &p, beta)
        .map_err(err)?
        .value())
}

#[pymodule]
fn silevy_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomain>()?;
    m.add_class::<PyTriplet>()?;
    m.add_class::<PyPath>()?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(predict_exponent_1d, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
