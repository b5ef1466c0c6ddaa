//! Python bindings: `import ellmom`.
//!
//! High-precision values cross the boundary as decimal strings so that no
//! digits are lost; pass them to `mpmath.mpf` or `decimal.Decimal`.

use ellmom_core::elliptic::EllipticKind;
use ellmom_core::hyper::{pfq, HypSpec};
use ellmom_core::identities::catalog::Catalog as CoreCatalog;
use ellmom_core::identities::pslq::{pslq as core_pslq, RelationQuery};
use ellmom_core::identities::verify::{default_tolerance, verify_suite, Report};
use ellmom_core::identities::{evaluate as core_evaluate, fourier_coeff as core_fourier, Expr};
use ellmom_core::moments::{
    closed_form, h_seq as core_h_seq, moment_quadrature, odd_moment_exact as core_odd, ExactMoment, MomentSpec,
    OddProduct,
};
use ellmom_core::{BigReal, Error, PrecisionContext};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(ellmom, EllmomError, PyValueError);

fn err(e: Error) -> PyErr {
    EllmomError::new_err(e.to_string())
}

fn ctx(digits: u32) -> PyResult<PrecisionContext> {
    PrecisionContext::new(digits).map_err(err)
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> PyResult<T> {
    s.trim()
        .parse()
        .map_err(|_| EllmomError::new_err(format!("{what}: cannot parse {s:?}")))
}

fn json<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn py_int<'py>(py: Python<'py>, digits: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("builtins")?.getattr("int")?.call1((digits,))
}

/// Value of an expression, e.g. `"int(x*K(x)*Kc(x))"` or `"pi^3/16"`.
#[pyfunction]
#[pyo3(signature = (expr, digits = 50))]
fn evaluate(expr: &str, digits: u32) -> PyResult<String> {
    let c = ctx(digits)?;
    let e: Expr = expr.parse().map_err(err)?;
    let v = core_evaluate(&e, &c).map_err(err)?;
    Ok(v.to_decimal(default_tolerance(&c) as usize))
}

/// `∫₀¹ xⁿ x'ᵐ P(x) dx` for a product such as `"K Kc"`: closed form (if
/// known), quadrature and their difference.
#[pyfunction]
#[pyo3(signature = (product, n = "0", m = "0", digits = 50))]
fn moment<'py>(py: Python<'py>, product: &str, n: &str, m: &str, digits: u32) -> PyResult<Bound<'py, PyDict>> {
    let c = ctx(digits)?;
    let spec = MomentSpec::parse_product(product, parse(n, "n")?, parse(m, "m")?).map_err(err)?;
    let closed = closed_form(&spec, &c).map_err(err)?;
    let quad = moment_quadrature(&spec, &c).map_err(err)?.value;
    let shown = default_tolerance(&c) as usize;
    let d = PyDict::new(py);
    d.set_item("product", spec.product_label())?;
    d.set_item("n", spec.n.to_string())?;
    d.set_item("m", spec.m.to_string())?;
    d.set_item("quadrature", quad.to_decimal(shown))?;
    match &closed {
        Some(cf) => {
            d.set_item("method", cf.method)?;
            d.set_item("closed_form", cf.value.to_decimal(shown))?;
            d.set_item("exact", cf.exact.as_ref().map(|e| e.to_string()))?;
            d.set_item("absdiff", (&cf.value - &quad).abs().to_decimal(6))?;
        }
        None => {
            for k in ["method", "closed_form", "exact", "absdiff"] {
                d.set_item(k, py.None())?;
            }
        }
    }
    Ok(d)
}

/// Exact odd moment of `K^2, E^2, KE, Kc^2, Ec^2, Kc Ec` or `K Kc` as
/// `(a, b, basis)`: the value is `a + b*zeta3` or `b*pi^3`.
#[pyfunction]
fn odd_moment_exact(product: &str, n: i64) -> PyResult<(String, String, &'static str)> {
    let spec = MomentSpec::parse_product(product, n.into(), 0.into()).map_err(err)?;
    let p = OddProduct::from_spec(&spec)
        .ok_or_else(|| EllmomError::new_err(format!("no exact odd moments for {product:?}")))?;
    let e = core_odd(p, n).map_err(err)?;
    let (a, b) = e.coefficients();
    let basis = match e {
        ExactMoment::Zeta3(_) => "zeta3",
        ExactMoment::Pi3(_) => "pi3",
    };
    Ok((a.to_string(), b.to_string(), basis))
}

/// `h(n) = Σ_k C(2n−2k, n−k)² C(2k, k)²` as a Python int.
#[pyfunction]
fn h_seq(py: Python<'_>, n: u64) -> PyResult<Bound<'_, PyAny>> {
    py_int(py, &core_h_seq(n).to_string())
}

/// pFq value for a spec such as `"3F2(1/2,1/2,1/2;1,1;1)"`.
#[pyfunction]
#[pyo3(signature = (spec, digits = 50))]
fn hyper(spec: &str, digits: u32) -> PyResult<String> {
    let c = ctx(digits)?;
    let s: HypSpec = spec.parse().map_err(err)?;
    Ok(pfq(&s, &c).map_err(err)?.to_decimal(default_tolerance(&c) as usize))
}

/// Coefficients of `sin((4n+1)t)` and `sin((4n+3)t)` in `K(sin t)` or `E(sin t)`.
#[pyfunction]
#[pyo3(signature = (kind, n, digits = 50))]
fn fourier_coeff(kind: &str, n: u64, digits: u32) -> PyResult<(String, String)> {
    let c = ctx(digits)?;
    let k: EllipticKind = parse(kind, "kind")?;
    let f = core_fourier(k, n, &c).map_err(err)?;
    let shown = default_tolerance(&c) as usize;
    Ok((f.first.to_decimal(shown), f.second.to_decimal(shown)))
}

/// Integer relation among decimal values, or `None`. Each value needs at
/// least `2 * precision` digits.
#[pyfunction]
#[pyo3(signature = (values, precision, bits = 20))]
fn pslq<'py>(py: Python<'py>, values: Vec<String>, precision: u32, bits: u32) -> PyResult<Option<Vec<Bound<'py, PyAny>>>> {
    let values = values
        .iter()
        .map(|v| BigReal::parse(v, 2 * precision))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let q = RelationQuery {
        values,
        max_coefficient_bits: bits,
        precision,
    };
    match core_pslq(&q).map_err(err)? {
        Some(r) => Ok(Some(
            r.coefficients
                .iter()
                .map(|c| py_int(py, &c.to_string()))
                .collect::<PyResult<_>>()?,
        )),
        None => Ok(None),
    }
}

/// The identity catalog: the built-in one, or a TOML file.
#[pyclass(frozen)]
struct Catalog {
    inner: CoreCatalog,
}

#[pymethods]
impl Catalog {
    #[new]
    #[pyo3(signature = (path = None))]
    fn new(path: Option<std::path::PathBuf>) -> PyResult<Self> {
        let inner = match path {
            Some(p) => CoreCatalog::load(&p).map_err(err)?,
            None => CoreCatalog::builtin(),
        };
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[pyo3(signature = (suite = "all"))]
    fn ids(&self, suite: &str) -> PyResult<Vec<String>> {
        Ok(self.inner.suite(suite).map_err(err)?.iter().map(|i| i.id().to_string()).collect())
    }

    /// Checks a suite (or the given ids) and returns one dict per identity.
    #[pyo3(signature = (suite = "all", digits = 50, ids = None))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        suite: &str,
        digits: u32,
        ids: Option<Vec<String>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let c = ctx(digits)?;
        let mut chosen = self.inner.suite(suite).map_err(err)?;
        if let Some(ids) = &ids {
            chosen.retain(|i| ids.iter().any(|id| id == i.id()));
        }
        let reports: Vec<Report> = py.detach(|| verify_suite(&chosen, &c));
        let reports: Vec<Report> = reports.into_iter().map(Report::without_timing).collect();
        json(py, &serde_json::to_string(&reports).expect("reports serialize"))
    }
}

#[pymodule]
fn ellmom(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("EllmomError", m.py().get_type::<EllmomError>())?;
    m.add_class::<Catalog>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(odd_moment_exact, m)?)?;
    m.add_function(wrap_pyfunction!(h_seq, m)?)?;
    m.add_function(wrap_pyfunction!(hyper, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(pslq, m)?)?;
    Ok(())
}
