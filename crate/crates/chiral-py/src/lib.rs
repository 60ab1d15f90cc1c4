//! Python bindings: patches, fields and their brackets, T-duality pairs and
//! the verification suites.

use chiral::cdr::Patch as RsPatch;
use chiral::cli::config::{Group, SuiteConfig};
use chiral::cli::expr::{evaluate, parse_field, parse_query, render_value};
use chiral::cli::report::Format;
use chiral::cli::suites;
use chiral::courant::{check_axioms, random_samples, Bracket, Flux};
use chiral::tduality::{DualPairSetup, Side};
use chiral::va::{FieldExpr, VaContext};
use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use std::sync::Arc;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An element of a vertex algebra, tied to the context it lives in.
#[pyclass(name = "Field", frozen, unsendable, skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    ctx: Arc<VaContext>,
    expr: FieldExpr,
}

impl PyField {
    fn wrap(&self, expr: FieldExpr) -> PyField {
        PyField { ctx: self.ctx.clone(), expr }
    }

    fn same_ctx(&self, other: &PyField) -> PyResult<()> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(PyTypeError::new_err("fields live in different vertex algebras"))
        }
    }
}

#[pymethods]
impl PyField {
    fn __str__(&self) -> String {
        self.ctx.show(&self.expr)
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.ctx.show(&self.expr))
    }

    fn __eq__(&self, other: &PyField) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) && self.expr == other.expr
    }

    fn __add__(&self, other: &PyField) -> PyResult<PyField> {
        self.same_ctx(other)?;
        Ok(self.wrap(self.expr.add(&other.expr)))
    }

    fn __sub__(&self, other: &PyField) -> PyResult<PyField> {
        self.same_ctx(other)?;
        Ok(self.wrap(self.expr.sub(&other.expr)))
    }

    fn __neg__(&self) -> PyField {
        self.wrap(self.expr.neg())
    }

    /// Normally ordered product.
    fn __mul__(&self, other: &PyField) -> PyResult<PyField> {
        self.same_ctx(other)?;
        Ok(self.wrap(self.ctx.wick(&self.expr, &other.expr).map_err(value_err)?))
    }

    fn is_zero(&self) -> bool {
        self.expr.is_zero()
    }

    /// Conformal weight, or None if the field is not homogeneous.
    fn weight(&self) -> Option<i64> {
        self.ctx.weight_of(&self.expr)
    }

    fn derivative(&self) -> PyResult<PyField> {
        Ok(self.wrap(self.ctx.derivative(&self.expr).map_err(value_err)?))
    }

    /// The `n`-th product `a∘ₙb`.
    fn circle(&self, n: i64, other: &PyField) -> PyResult<PyField> {
        self.same_ctx(other)?;
        Ok(self.wrap(self.ctx.circle(&self.expr, n, &other.expr).map_err(value_err)?))
    }

    /// λ-bracket coefficients: entry `k` multiplies `λ^k / k!`.
    fn bracket(&self, other: &PyField) -> PyResult<Vec<PyField>> {
        self.same_ctx(other)?;
        let br = self.ctx.lambda_bracket(&self.expr, &other.expr).map_err(value_err)?;
        Ok(br.entries.into_iter().map(|e| self.wrap(e)).collect())
    }
}

/// A coordinate patch with its chiral de Rham algebra.
#[pyclass(name = "Patch", frozen, unsendable)]
struct PyPatch {
    inner: RsPatch,
}

#[pymethods]
impl PyPatch {
    #[new]
    #[pyo3(signature = (n, m = 0))]
    fn new(n: usize, m: usize) -> PyResult<Self> {
        Ok(PyPatch { inner: RsPatch::standard(n, m).map_err(value_err)? })
    }

    fn field(&self, text: &str) -> PyResult<PyField> {
        let expr = parse_field(self.inner.ctx(), text).map_err(value_err)?;
        Ok(PyField { ctx: self.inner.ctx().clone(), expr })
    }

    /// Evaluate an expression or query and render the result.
    fn evaluate(&self, text: &str) -> PyResult<String> {
        let q = parse_query(text).map_err(value_err)?;
        let v = evaluate(self.inner.ctx(), &q).map_err(value_err)?;
        Ok(render_value(self.inner.ctx(), &v))
    }

    /// The differential `D`.
    fn d(&self, a: &PyField) -> PyResult<PyField> {
        if !Arc::ptr_eq(&a.ctx, self.inner.ctx()) {
            return Err(PyTypeError::new_err("field does not belong to this patch"));
        }
        Ok(a.wrap(self.inner.d(&a.expr).map_err(value_err)?))
    }

    /// The fields `J, Q, G, L` of the topological algebra.
    fn structure_fields(&self) -> Vec<(String, PyField)> {
        let s = self.inner.structure_fields();
        let ctx = self.inner.ctx();
        [("J", &s.j), ("Q", &s.q), ("G", &s.g), ("L", &s.l)]
            .into_iter()
            .map(|(k, e)| (k.to_string(), PyField { ctx: ctx.clone(), expr: e.clone() }))
            .collect()
    }
}

/// A dual pair of circle bundles, built from a suite configuration.
#[pyclass(name = "DualPair", frozen, unsendable)]
struct PyDualPair {
    inner: DualPairSetup,
}

#[pymethods]
impl PyDualPair {
    /// Parse the `[patch]` and `[twist]` sections of a configuration.
    #[staticmethod]
    fn from_config(toml: &str) -> PyResult<Self> {
        let cfg = SuiteConfig::parse(toml).map_err(value_err)?;
        let rd = cfg.reduction.ok_or_else(|| PyValueError::new_err("config has no bundle data"))?;
        Ok(PyDualPair { inner: DualPairSetup::new(rd).map_err(value_err)? })
    }

    /// Parse a field on one side (`dual=False` for Z).
    #[pyo3(signature = (text, dual = false))]
    fn field(&self, text: &str, dual: bool) -> PyResult<PyField> {
        let q = self.inner.side(if dual { Side::Dual } else { Side::Z });
        let expr = parse_field(q.ctx(), text).map_err(value_err)?;
        Ok(PyField { ctx: q.ctx().clone(), expr })
    }

    /// The chiral T-duality map from Z to its dual.
    fn t_ch(&self, a: &PyField) -> PyResult<PyField> {
        let z = self.inner.side(Side::Z);
        if !Arc::ptr_eq(&a.ctx, z.ctx()) {
            return Err(PyTypeError::new_err("field does not live on the Z side"));
        }
        let out = self.inner.t_ch(&a.expr).map_err(value_err)?;
        Ok(PyField { ctx: self.inner.side(Side::Dual).ctx().clone(), expr: out })
    }
}

/// Run the suites of a configuration; returns `(rendered report, all passed)`.
#[pyfunction]
#[pyo3(signature = (config, group = None, format = "text"))]
fn run_suites(config: &str, group: Option<&str>, format: &str) -> PyResult<(String, bool)> {
    let cfg = SuiteConfig::parse(config).map_err(value_err)?;
    let g = group.map(|s| s.parse::<Group>()).transpose().map_err(value_err)?;
    let f: Format = format.parse().map_err(value_err)?;
    let r = suites::run(&cfg, g);
    Ok((r.render(f), r.all_pass()))
}

/// Character of the base-point quotient as `{(q, z): coefficient}`, computed
/// from cohomology, together with the predicted series.
#[pyfunction]
fn point_character(order: u32) -> PyResult<(Vec<((u32, i32), i64)>, Vec<((u32, i32), i64)>)> {
    let (c, p) = suites::point_characters(order).map_err(PyValueError::new_err)?;
    Ok((c.terms().collect(), p.terms().collect()))
}

/// Failure counts per Courant axiom on random sections.
#[pyfunction]
#[pyo3(signature = (n, count, seed = 0, max_degree = 2))]
fn courant_failures(n: usize, count: usize, seed: u64, max_degree: u32) -> PyResult<[usize; 5]> {
    let s = random_samples(seed, n, count, max_degree);
    let rep = check_axioms(&Bracket::Courant(Flux::zero(n, 0)), &s).map_err(value_err)?;
    Ok(rep.failures())
}

#[pymodule]
fn chiral_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPatch>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyDualPair>()?;
    m.add_function(wrap_pyfunction!(run_suites, m)?)?;
    m.add_function(wrap_pyfunction!(point_character, m)?)?;
    m.add_function(wrap_pyfunction!(courant_failures, m)?)?;
    Ok(())
}
