//! Python bindings: models, valuations, Markov-tree propagation, hypertree
//! conversion, generation, sampling and tree learning.

use std::sync::Arc;

use beltree::hypergraph::{Hypergraph, VarSet};
use beltree::io::{valuation_from_json, valuation_to_json, MassJson, ValuationJson};
use beltree::{checks, BeliefNetwork, BeliefValuation, Error, EvidencePotential, GeneratorConfig, Measure, Scope};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    if e.is_numeric() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn var_set(model: &beltree::Model, names: &[String]) -> PyResult<VarSet> {
    names.iter().map(|n| model.index_of(n).map_err(to_py)).collect()
}

#[pyclass(name = "Model", module = "beltree_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: Arc<beltree::Model>,
}

#[pymethods]
impl PyModel {
    /// `variables` is a list of `(name, [value, ...])`.
    #[new]
    fn new(variables: Vec<(String, Vec<String>)>) -> PyResult<Self> {
        let vars = variables.into_iter().map(|(n, d)| beltree::Variable::new(n, d)).collect();
        Ok(PyModel { inner: beltree::Model::new(vars).map_err(to_py)? })
    }

    /// Variables with values `<lowercase name>0`, `<lowercase name>1`.
    #[staticmethod]
    fn binary(names: Vec<String>) -> PyResult<Self> {
        Ok(PyModel { inner: beltree::Model::binary(&names).map_err(to_py)? })
    }

    #[getter]
    fn variables(&self) -> Vec<(String, Vec<String>)> {
        self.inner.variables().iter().map(|v| (v.name.clone(), v.domain.clone())).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let names: Vec<&str> = (0..self.inner.len()).map(|i| self.inner.name(i)).collect();
        format!("Model({})", names.join(", "))
    }
}

#[pyclass(name = "Valuation", module = "beltree_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyValuation {
    inner: BeliefValuation,
}

impl PyValuation {
    fn wrap(inner: BeliefValuation) -> Self {
        PyValuation { inner }
    }

    fn scope(&self, names: &[String]) -> PyResult<Scope> {
        Scope::from_names(self.inner.scope().model(), names).map_err(to_py)
    }
}

#[pymethods]
impl PyValuation {
    /// `masses` is a list of `(focal set, mass)` where a focal set is a list
    /// of configurations, each a list of values in `scope` order.
    #[new]
    fn new(model: &PyModel, scope: Vec<String>, masses: Vec<(Vec<Vec<String>>, f64)>) -> PyResult<Self> {
        let json = ValuationJson {
            scope,
            masses: masses.into_iter().map(|(set, mass)| MassJson { set, mass }).collect(),
        };
        Ok(Self::wrap(valuation_from_json(&model.inner, &json).map_err(to_py)?))
    }

    #[staticmethod]
    fn vacuous(model: &PyModel, scope: Vec<String>) -> PyResult<Self> {
        let s = Scope::from_names(&model.inner, &scope).map_err(to_py)?;
        Ok(Self::wrap(BeliefValuation::vacuous(&s)))
    }

    /// Probabilities listed over the scope's configurations, last variable
    /// fastest.
    #[staticmethod]
    fn bayesian(model: &PyModel, scope: Vec<String>, probs: Vec<f64>) -> PyResult<Self> {
        let s = Scope::from_names(&model.inner, &scope).map_err(to_py)?;
        Ok(Self::wrap(BeliefValuation::bayesian(&s, &probs).map_err(to_py)?))
    }

    #[staticmethod]
    fn from_json(model: &PyModel, text: &str) -> PyResult<Self> {
        let json: ValuationJson = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self::wrap(valuation_from_json(&model.inner, &json).map_err(to_py)?))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&valuation_to_json(&self.inner)).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn scope_names(&self) -> Vec<String> {
        self.inner.scope().names().into_iter().map(String::from).collect()
    }

    /// Focal elements as `(configurations, mass)`.
    fn masses(&self) -> Vec<(Vec<Vec<String>>, f64)> {
        self.inner.focal_elements().map(|(s, m)| (s.configurations(), m)).collect()
    }

    fn commonality(&self, configurations: Vec<Vec<String>>) -> PyResult<f64> {
        let set = beltree::ConfigSet::from_labels(self.inner.scope(), &configurations).map_err(to_py)?;
        self.inner.commonality_at(&set).map_err(to_py)
    }

    #[getter]
    fn conflict(&self) -> f64 {
        self.inner.conflict()
    }

    #[getter]
    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn is_proper(&self) -> bool {
        self.inner.is_proper()
    }

    fn is_vacuous(&self) -> bool {
        self.inner.is_vacuous()
    }

    fn combine(&self, other: &PyValuation) -> PyResult<Self> {
        Ok(Self::wrap(self.inner.combine(&other.inner).map_err(to_py)?))
    }

    fn marginalize(&self, scope: Vec<String>) -> PyResult<Self> {
        let s = self.scope(&scope)?;
        Ok(Self::wrap(self.inner.marginalize(&s).map_err(to_py)?))
    }

    fn extend(&self, scope: Vec<String>) -> PyResult<Self> {
        let s = self.scope(&scope)?;
        Ok(Self::wrap(self.inner.vacuous_extend(&s).map_err(to_py)?))
    }

    fn normalized(&self) -> PyResult<Self> {
        Ok(Self::wrap(self.inner.normalized().map_err(to_py)?))
    }

    fn decombine(&self, divisor: &PyValuation) -> PyResult<Self> {
        Ok(Self::wrap(beltree::decombine(&self.inner, &divisor.inner).map_err(to_py)?))
    }

    fn mk_condition(&self, given: Vec<String>) -> PyResult<Self> {
        let s = self.scope(&given)?;
        Ok(Self::wrap(beltree::mk_condition(&self.inner, &s).map_err(to_py)?))
    }

    /// Mk-conditional of the marginal on `target` given `given`.
    fn conditional(&self, target: Vec<String>, given: Vec<String>) -> PyResult<Self> {
        let (t, g) = (self.scope(&target)?, self.scope(&given)?);
        Ok(Self::wrap(beltree::conditional(&self.inner, &t, &g).map_err(to_py)?))
    }

    fn max_abs_diff(&self, other: &PyValuation) -> PyResult<f64> {
        self.inner.max_abs_diff(&other.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Valuation({}, {} focal)", self.inner.scope(), self.inner.focal_count())
    }
}

/// Divergence of `approx` from `reference`.
#[pyfunction]
fn delta(approx: &PyValuation, reference: &PyValuation) -> PyResult<f64> {
    beltree::delta_divergence(&approx.inner, &reference.inner).map_err(to_py)
}

#[pyclass(name = "MarkovTree", module = "beltree_py", frozen)]
struct PyMarkovTree {
    inner: beltree::MarkovTree,
}

impl PyMarkovTree {
    fn evidence(&self, items: &[String]) -> PyResult<Vec<EvidencePotential>> {
        items
            .iter()
            .map(|e| EvidencePotential::parse(self.inner.model(), e).map_err(to_py))
            .collect()
    }
}

#[pymethods]
impl PyMarkovTree {
    /// Hosts every factor on a hypertree covering the factor scopes.
    #[new]
    fn new(factors: Vec<PyValuation>) -> PyResult<Self> {
        let f: Vec<BeliefValuation> = factors.into_iter().map(|v| v.inner).collect();
        Ok(PyMarkovTree { inner: beltree::MarkovTree::from_factors(&f).map_err(to_py)? })
    }

    #[getter]
    fn nodes(&self) -> Vec<Vec<String>> {
        (0..self.inner.len())
            .map(|k| self.inner.node_scope(k).names().into_iter().map(String::from).collect())
            .collect()
    }

    fn factors(&self) -> Vec<PyValuation> {
        self.inner.factors().iter().cloned().map(PyValuation::wrap).collect()
    }

    /// Node marginals after combining the evidence (`VAR=value` or
    /// `VAR=v1|v2@strength`), unnormalized.
    #[pyo3(signature = (evidence = Vec::new()))]
    fn propagate(&self, evidence: Vec<String>) -> PyResult<Vec<PyValuation>> {
        let ev = self.evidence(&evidence)?;
        Ok(self.inner.propagate(&ev).map_err(to_py)?.into_iter().map(PyValuation::wrap).collect())
    }

    #[pyo3(signature = (var, evidence = Vec::new()))]
    fn query(&self, var: &str, evidence: Vec<String>) -> PyResult<PyValuation> {
        let ev = self.evidence(&evidence)?;
        let v = self.inner.model().index_of(var).map_err(to_py)?;
        Ok(PyValuation::wrap(self.inner.query(v, &ev).map_err(to_py)?))
    }

    fn joint(&self) -> PyResult<PyValuation> {
        Ok(PyValuation::wrap(self.inner.joint(beltree::propagation::DEFAULT_JOINT_LIMIT).map_err(to_py)?))
    }

    fn to_network(&self) -> PyResult<PyNetwork> {
        let conv = beltree::hypertree_to_network(&self.inner).map_err(to_py)?;
        Ok(PyNetwork { inner: conv.network })
    }
}

#[pyclass(name = "Network", module = "beltree_py", frozen)]
struct PyNetwork {
    inner: BeliefNetwork,
}

#[pymethods]
impl PyNetwork {
    /// `(variable, parents)` per node.
    #[getter]
    fn structure(&self) -> Vec<(String, Vec<String>)> {
        let m = self.inner.model();
        (0..m.len())
            .map(|v| {
                let parents = self.inner.dag().parents(v).iter().map(|&p| m.name(p).to_string()).collect();
                (m.name(v).to_string(), parents)
            })
            .collect()
    }

    fn valuation(&self, var: &str) -> PyResult<PyValuation> {
        let v = self.inner.model().index_of(var).map_err(to_py)?;
        Ok(PyValuation::wrap(self.inner.valuation(v).clone()))
    }

    fn joint(&self) -> PyResult<PyValuation> {
        Ok(PyValuation::wrap(self.inner.underlying().map_err(to_py)?))
    }

    fn hyperedges(&self) -> Vec<Vec<String>> {
        let m = self.inner.model();
        self.inner
            .induced_hypergraph()
            .edges()
            .iter()
            .map(|e| e.iter().map(|&v| m.name(v).to_string()).collect())
            .collect()
    }
}

fn edge_names(model: &beltree::Model, edges: &[(usize, usize)]) -> Vec<(String, String)> {
    edges.iter().map(|&(a, b)| (model.name(a).to_string(), model.name(b).to_string())).collect()
}

/// Random tree-structured distribution; returns `(model, tree edges, joint)`.
#[pyfunction]
#[pyo3(signature = (vars, seed = 0, focal = 3, q_min = 0.05, bayesian = false))]
fn generate_tree(
    vars: usize,
    seed: u64,
    focal: usize,
    q_min: f64,
    bayesian: bool,
) -> PyResult<(PyModel, Vec<(String, String)>, PyValuation)> {
    let cfg = GeneratorConfig {
        vars,
        focal,
        q_min,
        seed,
        ..GeneratorConfig::default()
    };
    let g = if bayesian {
        beltree::generate_bayesian_tree(&cfg)
    } else {
        beltree::generate_tree_distribution(&cfg)
    }
    .map_err(to_py)?;
    let edges = edge_names(&g.model, &g.edges);
    Ok((PyModel { inner: g.model }, edges, PyValuation::wrap(g.joint)))
}

#[pyclass(name = "Dataset", module = "beltree_py", frozen)]
struct PyDataset {
    inner: beltree::SampleDataset,
}

#[pymethods]
impl PyDataset {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn estimate(&self, scope: Vec<String>) -> PyResult<PyValuation> {
        let s = Scope::from_names(self.inner.model(), &scope).map_err(to_py)?;
        Ok(PyValuation::wrap(beltree::estimate_marginal(&self.inner, &s).map_err(to_py)?))
    }
}

#[pyfunction]
#[pyo3(signature = (joint, n, seed = 0))]
fn sample(joint: &PyValuation, n: usize, seed: u64) -> PyResult<PyDataset> {
    Ok(PyDataset { inner: beltree::sample(&joint.inner, n, seed).map_err(to_py)? })
}

fn measure(name: &str) -> PyResult<Measure> {
    match name {
        "dep-bn" => Ok(Measure::DepBn),
        "dep-kl" => Ok(Measure::DepKl),
        other => Err(PyValueError::new_err(format!("unknown measure `{other}`"))),
    }
}

/// Learns a tree network from an exact valuation or a dataset; returns
/// `(edges, network)`.
#[pyfunction]
#[pyo3(signature = (source, measure = "dep-bn"))]
fn learn_tree(source: &Bound<'_, PyAny>, measure: &str) -> PyResult<(Vec<(String, String)>, PyNetwork)> {
    let m = self::measure(measure)?;
    let learned = if let Ok(v) = source.cast::<PyValuation>() {
        beltree::learn_tree(&v.get().inner, m)
    } else if let Ok(d) = source.cast::<PyDataset>() {
        beltree::learn_tree(&d.get().inner, m)
    } else {
        return Err(PyValueError::new_err("source must be a Valuation or a Dataset"));
    }
    .map_err(to_py)?;
    let model = learned.network.model().clone();
    Ok((edge_names(&model, &learned.edges), PyNetwork { inner: learned.network }))
}

/// Dags whose induced reduced hypergraph equals `hyperedges`, as parent maps.
#[pyfunction]
#[pyo3(signature = (model, hyperedges, max_vars = 6))]
fn compatible_dags(model: &PyModel, hyperedges: Vec<Vec<String>>, max_vars: usize) -> PyResult<Vec<Vec<(String, Vec<String>)>>> {
    let m = &model.inner;
    let edges = hyperedges.iter().map(|e| var_set(m, e)).collect::<PyResult<Vec<_>>>()?;
    let h = Hypergraph::new(0..m.len(), edges).map_err(to_py)?;
    let dags = beltree::enumerate_compatible(&h, max_vars).map_err(to_py)?;
    Ok(dags
        .iter()
        .map(|d| {
            (0..m.len())
                .map(|v| (m.name(v).to_string(), d.parents(v).iter().map(|&p| m.name(p).to_string()).collect()))
                .collect()
        })
        .collect())
}

/// d-separation of `j` and `k` given `l` in the dag of `network`.
#[pyfunction]
fn d_separated(network: &PyNetwork, j: Vec<String>, k: Vec<String>, l: Vec<String>) -> PyResult<bool> {
    let m = network.inner.model();
    Ok(beltree::d_separated(network.inner.dag(), &var_set(m, &j)?, &var_set(m, &k)?, &var_set(m, &l)?))
}

/// Runs a property suite (`axioms`, `theorem4`, `examples`, `roundtrip`) and
/// returns its JSON report.
#[pyfunction]
#[pyo3(signature = (suite, seed = 0, size = 20))]
fn check(suite: &str, seed: u64, size: usize) -> PyResult<String> {
    let report = match suite {
        "axioms" => checks::check_axioms(size, seed),
        "theorem4" => checks::check_theorem4(size, seed),
        "examples" => checks::check_examples(),
        "roundtrip" => checks::check_roundtrip(size, seed),
        other => return Err(PyValueError::new_err(format!("unknown suite `{other}`"))),
    }
    .map_err(to_py)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn beltree_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyValuation>()?;
    m.add_class::<PyMarkovTree>()?;
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(generate_tree, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(learn_tree, m)?)?;
    m.add_function(wrap_pyfunction!(compatible_dags, m)?)?;
    m.add_function(wrap_pyfunction!(d_separated, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
