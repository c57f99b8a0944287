//! Python bindings for the torus and sphere fields, the Möbius group, the
//! slice projection, the cut-off and the verification suites.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sobolev_lab::cutoff::{self, BumpProfile};
use sobolev_lab::diffeo::{self, BuiltinFamily, DiffeoFamily, FamilyKind, FamilyParams, GroupParam};
use sobolev_lab::harness::{self, ExperimentConfig, Suite};
use sobolev_lab::{norms, probe, sphere, synth, DiscreteField, GridSpec, LabError};

create_exception!(sobolev_lab_py, SobolevLabError, PyException);

fn err(e: LabError) -> PyErr {
    SobolevLabError::new_err(e.to_string())
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for sobolev_lab::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

/// Sobolev index `(k, p)`.
#[pyclass(name = "SobolevIndex", module = "sobolev_lab_py", frozen, from_py_object)]
#[derive(Clone)]
struct PySobolevIndex(sobolev_lab::SobolevIndex);

#[pymethods]
impl PySobolevIndex {
    /// Validated index with `p > 2` and `floor(k − 2/p) >= 1`; `strict=False`
    /// admits any `p >= 1`.
    #[new]
    #[pyo3(signature = (k, p, strict = true))]
    fn new(k: usize, p: f64, strict: bool) -> PyResult<Self> {
        let idx = if strict { sobolev_lab::SobolevIndex::new(k, p) } else { sobolev_lab::SobolevIndex::unchecked(k, p) };
        Ok(PySobolevIndex(idx.py()?))
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.p()
    }

    #[getter]
    fn m0(&self) -> i64 {
        self.0.m0()
    }

    fn __repr__(&self) -> String {
        format!("SobolevIndex(k={}, p={})", self.0.k(), self.0.p())
    }
}

/// Field on the uniform `N × N` torus grid with values in `ℝ^dim`.
#[pyclass(name = "TorusField", module = "sobolev_lab_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyTorusField(DiscreteField);

#[pymethods]
impl PyTorusField {
    /// Component-major values: `values[c * N * N + j * N + i]` is component `c`
    /// at the node `(2πi/N, 2πj/N)`.
    #[new]
    fn new(n: usize, dim: usize, values: Vec<f64>) -> PyResult<Self> {
        Ok(PyTorusField(DiscreteField::from_values(GridSpec::torus(n).py()?, dim, values).py()?))
    }

    #[staticmethod]
    fn constant(n: usize, value: Vec<f64>) -> PyResult<Self> {
        Ok(PyTorusField(DiscreteField::constant(GridSpec::torus(n).py()?, &value)))
    }

    /// Seeded field with spectral decay `s`.
    #[staticmethod]
    fn synth(s: f64, seed: u64, n: usize, dim: usize) -> PyResult<Self> {
        Ok(PyTorusField(synth::synth_field(s, seed, GridSpec::torus(n).py()?, dim).py()?))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.grid().n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn axpy(&self, s: f64, other: &PyTorusField) -> PyResult<Self> {
        Ok(PyTorusField(self.0.axpy(s, &other.0).py()?))
    }

    fn max_abs_diff(&self, other: &PyTorusField) -> PyResult<f64> {
        self.0.max_abs_diff(&other.0).py()
    }

    /// `‖f‖_{k−drop, p}`.
    #[pyo3(signature = (idx, drop = 0))]
    fn norm(&self, idx: &PySobolevIndex, drop: usize) -> PyResult<f64> {
        norms::sobolev_norm(&self.0, &idx.0, drop).py()
    }

    fn norm_power(&self, idx: &PySobolevIndex) -> PyResult<f64> {
        norms::norm_power(&self.0, &idx.0).py()
    }

    fn norm_power_gradient(&self, idx: &PySobolevIndex) -> PyResult<Self> {
        Ok(PyTorusField(norms::norm_power_gradient(&self.0, &idx.0).py()?))
    }

    /// Value at a point of `[0, 2π)²` by spectral interpolation.
    fn evaluate(&self, x: [f64; 2]) -> PyResult<Vec<f64>> {
        sphere::evaluate(&self.0, &x).py()
    }

    /// `f∘T_a`.
    fn compose(&self, family: &PyFamily, a: Vec<f64>) -> PyResult<Self> {
        let a = GroupParam::for_family(&family.0, a).py()?;
        Ok(PyTorusField(diffeo::compose(&self.0, &family.0, &a).py()?))
    }

    /// `∂_{a_j}(f∘T_a)`.
    fn action_partial(&self, family: &PyFamily, a: Vec<f64>, j: usize) -> PyResult<Self> {
        let a = GroupParam::for_family(&family.0, a).py()?;
        Ok(PyTorusField(diffeo::action_partial(&self.0, &family.0, &a, j).py()?))
    }

    fn __repr__(&self) -> String {
        format!("TorusField(n={}, dim={})", self.0.grid().n(), self.0.dim())
    }
}

/// Built-in diffeomorphism family of the torus.
#[pyclass(name = "Family", module = "sobolev_lab_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyFamily(BuiltinFamily);

#[pymethods]
impl PyFamily {
    /// `kind` is `translation`, `shear-bump` or `mobius-pushforward`.
    #[new]
    #[pyo3(signature = (kind, center = None, bump_radius = None, scale = None, radius = None))]
    fn new(
        kind: &str,
        center: Option<[f64; 2]>,
        bump_radius: Option<f64>,
        scale: Option<f64>,
        radius: Option<f64>,
    ) -> PyResult<Self> {
        let kind = [FamilyKind::Translation, FamilyKind::ShearBump, FamilyKind::MobiusPushforward]
            .into_iter()
            .find(|k| k.name() == kind)
            .ok_or_else(|| SobolevLabError::new_err(format!("unknown family `{kind}`")))?;
        let d = FamilyParams::default();
        let params = FamilyParams {
            center: center.unwrap_or(d.center),
            bump_radius: bump_radius.unwrap_or(d.bump_radius),
            scale: scale.unwrap_or(d.scale),
            radius: radius.or(d.radius),
        };
        Ok(PyFamily(diffeo::builtin_family(kind, &params).py()?))
    }

    #[getter]
    fn param_dim(&self) -> usize {
        self.0.param_dim()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius()
    }

    fn map(&self, a: Vec<f64>, x: [f64; 2]) -> [f64; 2] {
        self.0.map(&a, x)
    }
}

/// Residual order of the first-order Taylor expansion of `a ↦ η∘T_a` along axis `j`.
#[pyfunction]
#[pyo3(signature = (family, eta, idx, drop, steps, j = 0))]
fn derivative_order(
    family: &PyFamily,
    eta: &PyTorusField,
    idx: &PySobolevIndex,
    drop: usize,
    steps: Vec<f64>,
    j: usize,
) -> PyResult<f64> {
    let zero = GroupParam::zero(&family.0);
    Ok(probe::derivative_check(&family.0, &eta.0, &zero, j, &idx.0, drop, &steps).py()?.order)
}

/// `|E(g∘T_{x−x₀}, x₀) − E(g, x)|` for the localized translations of radius `r`.
#[pyfunction]
fn evaluation_identity_gap(g: &PyTorusField, x0: [f64; 2], x: [f64; 2], r: f64) -> PyResult<f64> {
    sphere::evaluation_identity_gap(&g.0, x0, x, r).py()
}

fn point_from_py(z: Option<Complex64>) -> sphere::SpherePoint {
    z.map_or_else(sphere::SpherePoint::infinity, sphere::SpherePoint::finite)
}

/// Element of `PSL(2, ℂ)`.
#[pyclass(name = "MobiusElement", module = "sobolev_lab_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyMobius(sphere::MobiusElement);

#[pymethods]
impl PyMobius {
    #[new]
    fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> PyResult<Self> {
        Ok(PyMobius(sphere::MobiusElement::new(a, b, c, d).py()?))
    }

    #[staticmethod]
    fn identity() -> Self {
        PyMobius(sphere::MobiusElement::identity())
    }

    /// `exp(t X)` for the traceless generator `[[x₁, x₂], [x₃, −x₁]]`.
    #[staticmethod]
    #[pyo3(signature = (x, t = 1.0))]
    fn exp(x: [Complex64; 3], t: f64) -> Self {
        PyMobius(sphere::MobiusElement::exp(x, t))
    }

    /// The map sending `(0, 1, ∞)` to `(y1, y2, y3)`; `None` is `∞`.
    #[staticmethod]
    fn from_triple(y1: Option<Complex64>, y2: Option<Complex64>, y3: Option<Complex64>) -> PyResult<Self> {
        let (a, b, c) = (point_from_py(y1), point_from_py(y2), point_from_py(y3));
        Ok(PyMobius(sphere::mobius_from_triple(&a, &b, &c).py()?))
    }

    /// Seeded element with distance to the identity at most `max_distance`.
    #[staticmethod]
    fn sample(seed: u64, max_distance: f64) -> Self {
        PyMobius(sphere::sample_near_identity(seed, max_distance))
    }

    fn coefficients(&self) -> [Complex64; 4] {
        self.0.coefficients()
    }

    fn det(&self) -> Complex64 {
        self.0.det()
    }

    fn distance_to_identity(&self) -> f64 {
        self.0.distance_to_identity()
    }

    fn distance(&self, other: &PyMobius) -> f64 {
        self.0.distance(&other.0)
    }

    fn compose(&self, other: &PyMobius) -> Self {
        PyMobius(self.0.compose(&other.0))
    }

    fn inverse(&self) -> Self {
        PyMobius(self.0.inverse())
    }

    /// Image of `z`; `None` stands for `∞` in both directions.
    fn apply(&self, z: Option<Complex64>) -> Option<Complex64> {
        self.0.apply(&point_from_py(z)).z()
    }

    fn __repr__(&self) -> String {
        let [a, b, c, d] = self.0.coefficients();
        format!("MobiusElement(a={a}, b={b}, c={c}, d={d})")
    }
}

/// Field on the Riemann sphere in two Chebyshev charts.
#[pyclass(name = "SphereField", module = "sobolev_lab_py", frozen, from_py_object)]
#[derive(Clone)]
struct PySphereField(sphere::SphereField);

#[pymethods]
impl PySphereField {
    /// The smooth center field with `n` nodes per chart axis.
    #[staticmethod]
    #[pyo3(signature = (n = sphere::DEFAULT_CHART_N))]
    fn standard_center(n: usize) -> PyResult<Self> {
        Ok(PySphereField(sphere::standard_center(n).py()?))
    }

    /// Smooth seeded field built from quadratic monomials in the embedding coordinates.
    #[staticmethod]
    fn random_direction(n: usize, dim: usize, seed: u64) -> PyResult<Self> {
        Ok(PySphereField(cutoff::random_sphere_direction(n, dim, seed).py()?))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.grid().n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Value at `z`; `None` is `∞`.
    fn evaluate(&self, z: Option<Complex64>) -> Vec<f64> {
        self.0.evaluate(&point_from_py(z))
    }

    fn axpy(&self, s: f64, other: &PySphereField) -> PyResult<Self> {
        Ok(PySphereField(self.0.axpy(s, &other.0).py()?))
    }

    fn max_abs_diff(&self, other: &PySphereField) -> PyResult<f64> {
        self.0.max_abs_diff(&other.0).py()
    }

    fn overlap_mismatch(&self) -> f64 {
        self.0.overlap_mismatch()
    }

    fn norm(&self, idx: &PySobolevIndex) -> PyResult<f64> {
        self.0.norm(&idx.0).py()
    }

    /// `self∘γ` for a near-identity `γ`.
    fn compose_mobius(&self, g: &PyMobius) -> PyResult<Self> {
        Ok(PySphereField(sphere::mobius_act(&g.0, &self.0).py()?))
    }
}

/// The marked-point slice through a center field.
#[pyclass(name = "Slice", module = "sobolev_lab_py", frozen, from_py_object)]
#[derive(Clone)]
struct PySlice(sphere::SliceSpec);

#[pymethods]
impl PySlice {
    /// Constraints normal to the center's value curves at `0, 1, ∞`.
    #[new]
    fn new(center: &PySphereField) -> PyResult<Self> {
        Ok(PySlice(sphere::SliceSpec::transverse_normal(center.0.clone()).py()?))
    }

    fn residual(&self, k: &PySphereField) -> f64 {
        self.0.slice_residual(&k.0)
    }

    /// `(γ⁻¹, k∘γ⁻¹, newton_iterations)`.
    fn project(&self, k: &PySphereField) -> PyResult<(PyMobius, PySphereField, usize)> {
        let p = sphere::slice_projection(&k.0, &self.0).py()?;
        let iterations = p.max_iterations();
        Ok((PyMobius(p.gamma_inv), PySphereField(p.projected), iterations))
    }

    /// `η_O(k)` for the constant section `ξ₀`, witnessed at `(idx, m)`.
    #[pyo3(signature = (xi0, k, idx, m = 1))]
    fn extend_constant(&self, xi0: &PySphereField, k: &PySphereField, idx: &PySobolevIndex, m: usize) -> PyResult<PySphereField> {
        let section = sphere::constant_section(xi0.0.clone(), m, &idx.0).py()?;
        Ok(PySphereField(sphere::equivariant_extension(&section, &self.0, &k.0).py()?))
    }

    /// `β(k)` for the bump with radii `(r0, r1)`.
    fn cutoff(&self, k: &PySphereField, r0: f64, r1: f64, idx: &PySobolevIndex) -> PyResult<f64> {
        let chi = BumpProfile::new(r0, r1).py()?;
        cutoff::slice_cutoff(&k.0, &self.0, &chi, &idx.0).py()
    }
}

/// The default configuration of `suite` as TOML.
#[pyfunction]
fn default_config(suite: &str) -> PyResult<String> {
    Ok(ExperimentConfig::for_suite(suite.parse::<Suite>().py()?).to_toml())
}

/// Runs a suite and returns `(all_passed, rows)` with one dict per CSV row.
/// `config` is TOML text; missing keys take the suite defaults.
#[pyfunction]
#[pyo3(signature = (suite, config = None))]
fn run_suite<'py>(py: Python<'py>, suite: &str, config: Option<&str>) -> PyResult<(bool, Vec<Bound<'py, PyDict>>)> {
    let suite: Suite = suite.parse().py()?;
    let cfg = match config {
        Some(text) => {
            let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| SobolevLabError::new_err(e.to_string()))?;
            table.entry("suite").or_insert_with(|| toml::Value::String(suite.name().into()));
            let defaults = toml::Table::try_from(ExperimentConfig::for_suite(suite))
                .map_err(|e| SobolevLabError::new_err(e.to_string()))?;
            for (key, value) in defaults {
                table.entry(key).or_insert(value);
            }
            ExperimentConfig::from_toml(&table.to_string()).py()?
        }
        None => ExperimentConfig::for_suite(suite),
    };
    if cfg.suite != suite {
        return Err(SobolevLabError::new_err(format!("config is for suite `{}`", cfg.suite)));
    }
    let out = py.detach(|| harness::run_suite(&cfg)).py()?;
    let rows = out
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("suite", r.suite.name())?;
            d.set_item("cell", &r.cell)?;
            d.set_item("grid", r.grid)?;
            d.set_item("k", r.k)?;
            d.set_item("p", r.p)?;
            d.set_item("m", r.m)?;
            d.set_item("s", r.s)?;
            d.set_item("metric", &r.metric)?;
            d.set_item("value", r.value)?;
            d.set_item("threshold", r.threshold)?;
            d.set_item("pass", r.pass)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok((out.rows.iter().all(|r| r.pass), rows))
}

#[pymodule]
fn sobolev_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SobolevLabError", m.py().get_type::<SobolevLabError>())?;
    m.add_class::<PySobolevIndex>()?;
    m.add_class::<PyTorusField>()?;
    m.add_class::<PyFamily>()?;
    m.add_class::<PyMobius>()?;
    m.add_class::<PySphereField>()?;
    m.add_class::<PySlice>()?;
    m.add_function(wrap_pyfunction!(derivative_order, m)?)?;
    m.add_function(wrap_pyfunction!(evaluation_identity_gap, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("GENERATOR", synth::GENERATOR)?;
    Ok(())
}
