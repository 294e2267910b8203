//! Python bindings: instances, graphs and tree maps, plus the flow, cut and pipeline operations.
//! Rational values come back as `fractions.Fraction`.

use flowcut::experiment::{
    distortion_experiment, gap_experiment, search_gap_instance, vertex_capacities,
};
use flowcut::graph::{all_pairs_distances, is_outerplanar, reduce_lengths, MetricGraph};
use flowcut::instance::PlanarInstance;
use flowcut::io::{
    graph_from_json, graph_to_json, instance_from_json, instance_to_json, read_instance,
    report_to_json,
};
use flowcut::lp::Arithmetic;
use flowcut::polyflow::{
    brute_sparsest_edge_cut, brute_sparsest_vertex_cut, mcf_dual_polymatroid, mcf_polymatroid_lp,
};
use flowcut::rational::{self, Q};
use flowcut::rng::rng;
use flowcut::thinround::thin_map;
use flowcut::treeembed::{embed_outerplanar, is_star_shaped, thinness, TreeMap};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: flowcut::Error) -> PyErr {
    match e {
        flowcut::Error::Invariant(_) | flowcut::Error::NotStarShaped(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, x: &Q) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((rational::fmt(x),))
}

fn from_json<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.getattr("loads")?.call1((v.to_string(),))
}

fn parse_json(text: &str) -> PyResult<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Undirected graph with nonnegative rational edge lengths.
#[pyclass(name = "Graph", frozen)]
struct PyGraph(MetricGraph);

#[pymethods]
impl PyGraph {
    /// Builds a graph from `(u, v, length)` triples; lengths may be ints, strings like "3/2" or
    /// Fractions.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize, Bound<'_, PyAny>)>) -> PyResult<Self> {
        let edges = edges
            .into_iter()
            .map(|(u, v, l)| {
                let s = l.str()?.to_string();
                Ok((u, v, rational::parse(&s).map_err(err)?))
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyGraph(MetricGraph::new(n, edges).map_err(err)?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyGraph(graph_from_json(&parse_json(text)?).map_err(err)?))
    }

    fn to_json(&self) -> String {
        graph_to_json(&self.0).to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    fn edges<'py>(&self, py: Python<'py>) -> PyResult<Vec<(usize, usize, Bound<'py, PyAny>)>> {
        self.0
            .edges()
            .iter()
            .map(|e| Ok((e.u, e.v, fraction(py, &e.len)?)))
            .collect()
    }

    fn is_outerplanar(&self) -> bool {
        is_outerplanar(&self.0)
    }

    /// Shortest-path distance, or None when disconnected.
    fn distance<'py>(
        &self,
        py: Python<'py>,
        u: usize,
        v: usize,
    ) -> PyResult<Option<Bound<'py, PyAny>>> {
        check_vertex(&self.0, u)?;
        check_vertex(&self.0, v)?;
        all_pairs_distances(&self.0)
            .get(u, v)
            .map(|d| fraction(py, d))
            .transpose()
    }

    /// Same graph with every edge shortened to the distance between its ends.
    fn reduced(&self) -> Self {
        PyGraph(reduce_lengths(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.0.n(), self.0.m())
    }
}

fn check_vertex(g: &MetricGraph, v: usize) -> PyResult<()> {
    if v < g.n() {
        Ok(())
    } else {
        Err(PyValueError::new_err(format!("vertex {v} out of range")))
    }
}

/// Planar graph with a face, capacities and demands on the face.
#[pyclass(name = "Instance", frozen)]
struct PyInstance(PlanarInstance);

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyInstance(
            instance_from_json(&parse_json(text)?).map_err(err)?,
        ))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyInstance(
            read_instance(std::path::Path::new(path)).map_err(err)?,
        ))
    }

    fn to_json(&self) -> String {
        instance_to_json(&self.0).to_string()
    }

    fn validate(&self) -> PyResult<()> {
        self.0.validate().map_err(err)
    }

    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph(self.0.graph.clone())
    }

    #[getter]
    fn face(&self) -> Vec<usize> {
        self.0.face.clone()
    }

    /// Vertex capacities, or None for general polymatroid capacities.
    #[getter]
    fn vertex_capacities<'py>(&self, py: Python<'py>) -> PyResult<Option<Vec<Bound<'py, PyAny>>>> {
        vertex_capacities(&self.0.caps)
            .map(|c| c.iter().map(|x| fraction(py, x)).collect())
            .transpose()
    }

    fn demands<'py>(&self, py: Python<'py>) -> PyResult<Vec<(usize, usize, Bound<'py, PyAny>)>> {
        self.0
            .demands
            .iter()
            .map(|(u, v, x)| Ok((u, v, fraction(py, x)?)))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n={}, m={}, face={:?}, demands={})",
            self.0.graph.n(),
            self.0.graph.m(),
            self.0.face,
            self.0.demands.len()
        )
    }
}

/// Map from graph vertices to the nodes of a metric tree.
#[pyclass(name = "TreeMap", frozen)]
struct PyTreeMap {
    tm: TreeMap,
    graph: MetricGraph,
}

#[pymethods]
impl PyTreeMap {
    /// Tree node of every graph vertex.
    #[getter]
    fn map(&self) -> Vec<usize> {
        self.tm.map.clone()
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.tm.tree.node_count()
    }

    fn tree_edges<'py>(&self, py: Python<'py>) -> PyResult<Vec<(usize, usize, Bound<'py, PyAny>)>> {
        self.tm
            .tree
            .edges()
            .iter()
            .map(|(a, b, l)| Ok((*a, *b, fraction(py, l)?)))
            .collect()
    }

    /// Tree distance between the images of graph vertices `u` and `v`.
    fn distance<'py>(&self, py: Python<'py>, u: usize, v: usize) -> PyResult<Bound<'py, PyAny>> {
        check_vertex(&self.graph, u)?;
        check_vertex(&self.graph, v)?;
        fraction(py, &self.tm.dist(&self.tm.rooted(), u, v))
    }

    fn is_lipschitz(&self) -> bool {
        self.tm.lipschitz_violation(&self.graph).is_none()
    }

    fn is_star_shaped(&self) -> bool {
        is_star_shaped(&self.graph, &self.tm)
    }

    fn thinness(&self) -> usize {
        thinness(&self.graph, &self.tm)
    }

    fn to_json(&self) -> String {
        flowcut::io::tree_map_to_json(&self.tm).to_string()
    }
}

fn arithmetic(exact: bool) -> Arithmetic {
    if exact {
        Arithmetic::Exact
    } else {
        Arithmetic::Float
    }
}

/// Optimal concurrent flow value.
#[pyfunction]
#[pyo3(signature = (instance, exact = true))]
fn mcf<'py>(py: Python<'py>, instance: &PyInstance, exact: bool) -> PyResult<Bound<'py, PyAny>> {
    let i = &instance.0;
    let sol = mcf_polymatroid_lp(&i.graph, &i.caps, &i.demands, arithmetic(exact)).map_err(err)?;
    fraction(py, &sol.epsilon)
}

/// Optimal dual lengths: a dict with `epsilon`, `objective` and per-edge `lengths`.
#[pyfunction]
#[pyo3(signature = (instance, exact = true))]
fn dual<'py>(py: Python<'py>, instance: &PyInstance, exact: bool) -> PyResult<Bound<'py, PyDict>> {
    let i = &instance.0;
    let (sol, ell, total) =
        mcf_dual_polymatroid(&i.graph, &i.caps, &i.demands, arithmetic(exact)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("epsilon", fraction(py, &sol.epsilon)?)?;
    d.set_item("objective", fraction(py, &total)?)?;
    let lengths = ell
        .lengths()
        .iter()
        .map(|x| fraction(py, x))
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("lengths", lengths)?;
    Ok(d)
}

/// Sparsest cut by enumeration: `(vertex set, sparsity)` for vertex capacities, otherwise
/// `(edge set, sparsity)`.
#[pyfunction]
fn sparsest_cut<'py>(
    py: Python<'py>,
    instance: &PyInstance,
) -> PyResult<(Vec<usize>, Bound<'py, PyAny>)> {
    let i = &instance.0;
    match vertex_capacities(&i.caps) {
        Some(cap) => {
            let (set, phi) = brute_sparsest_vertex_cut(&i.graph, &cap, &i.demands).map_err(err)?;
            Ok((set, fraction(py, &phi)?))
        }
        None => {
            let c = brute_sparsest_edge_cut(&i.graph, &i.caps, &i.demands).map_err(err)?;
            Ok((c.edges, fraction(py, &c.sparsity)?))
        }
    }
}

/// Random star-shaped 1-Lipschitz embedding of an outerplanar graph into a tree.
#[pyfunction]
#[pyo3(signature = (graph, seed = 0))]
fn embed(graph: &PyGraph, seed: u64) -> PyResult<PyTreeMap> {
    let g = reduce_lengths(&graph.0);
    let tm = embed_outerplanar(&g, seed).map_err(err)?;
    Ok(PyTreeMap { tm, graph: g })
}

/// Embeds, then thins the tree map so that it is 4-thin.
#[pyfunction]
#[pyo3(signature = (graph, seed = 0))]
fn thin(graph: &PyGraph, seed: u64) -> PyResult<PyTreeMap> {
    let g = reduce_lengths(&graph.0);
    let tm = embed_outerplanar(&g, seed).map_err(err)?;
    let t = thin_map(&g, &tm, &mut rng(seed.wrapping_add(1))).map_err(err)?;
    Ok(PyTreeMap {
        tm: t.map,
        graph: g,
    })
}

/// Full pipeline report as a dict.
#[pyfunction]
#[pyo3(signature = (instance, samples = 8, seed = 0))]
fn gap<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = gap_experiment(&instance.0, samples, seed).map_err(err)?;
    from_json(py, &report_to_json(&rep))
}

/// Searches small outerplanar instances for a vertex flow-cut gap of at least `target`.
#[pyfunction]
#[pyo3(signature = (max_n = 14, budget = 20000, target = "7/5", seed = 1))]
fn search_gap<'py>(
    py: Python<'py>,
    max_n: usize,
    budget: usize,
    target: &str,
    seed: u64,
) -> PyResult<(PyInstance, Bound<'py, PyAny>)> {
    let target = rational::parse(target).map_err(err)?;
    let w = search_gap_instance(max_n, budget, &target, seed).map_err(err)?;
    Ok((PyInstance(w.instance), fraction(py, &w.ratio)?))
}

/// Smallest empirical mean contraction over vertex pairs.
#[pyfunction]
#[pyo3(signature = (graph, samples = 200, seed = 0))]
fn distortion(graph: &PyGraph, samples: usize, seed: u64) -> PyResult<f64> {
    Ok(
        distortion_experiment(&reduce_lengths(&graph.0), samples, seed)
            .map_err(err)?
            .min_mean_ratio,
    )
}

#[pymodule]
fn flowcut_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PyTreeMap>()?;
    m.add_function(wrap_pyfunction!(mcf, m)?)?;
    m.add_function(wrap_pyfunction!(dual, m)?)?;
    m.add_function(wrap_pyfunction!(sparsest_cut, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(thin, m)?)?;
    m.add_function(wrap_pyfunction!(gap, m)?)?;
    m.add_function(wrap_pyfunction!(search_gap, m)?)?;
    m.add_function(wrap_pyfunction!(distortion, m)?)?;
    Ok(())
}
