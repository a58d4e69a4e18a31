//! Python bindings: graphs, generation, rewiring, threshold dynamics,
//! sweeps, and cascade ingestion.

use std::fs::File;
use std::io::BufReader;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use consensus_core::dynamics;
use consensus_core::experiments::{self, CellStatus, GroupField, SweepConfig};
use consensus_core::ingest;
use consensus_core::netgen::{self, GenConfig};
use consensus_core::rewire::{rewire_seeded, RewireConfig};
use consensus_core::{DirectedMultigraph, Direction, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn open(path: &str) -> PyResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))
}

/// Weighted directed multigraph without self-loops.
#[pyclass(name = "Graph", module = "assortative_consensus", frozen)]
struct PyGraph {
    inner: DirectedMultigraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (node_count, edges))]
    fn new(node_count: usize, edges: Vec<(usize, usize, u32)>) -> PyResult<Self> {
        let inner = DirectedMultigraph::from_weighted_edges(node_count, edges).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Reads a `source,target,weight` CSV.
    #[staticmethod]
    #[pyo3(signature = (path, node_count=None))]
    fn load(path: &str, node_count: Option<usize>) -> PyResult<Self> {
        let inner = DirectedMultigraph::read_edge_list(open(path)?, node_count).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save_edge_list(path).map_err(to_py)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn total_weight(&self) -> u64 {
        self.inner.total_weight()
    }

    fn edges(&self) -> Vec<(usize, usize, u32)> {
        self.inner.edges().iter().map(|e| (e.source, e.target, e.weight)).collect()
    }

    fn out_degrees(&self) -> Vec<u64> {
        self.inner.degree_sequence(Direction::Out)
    }

    fn in_degrees(&self) -> Vec<u64> {
        self.inner.degree_sequence(Direction::In)
    }

    /// Out-out degree assortativity.
    fn assortativity(&self) -> PyResult<f64> {
        self.inner.assortativity().map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.node_count()
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.inner.node_count(), self.inner.total_weight())
    }
}

#[pyfunction]
#[pyo3(signature = (n=1000, gamma=3.0, k_in=17, seed=0))]
fn generate(py: Python<'_>, n: usize, gamma: f64, k_in: u64, seed: u64) -> PyResult<PyGraph> {
    let cfg = GenConfig { n, gamma, k_in, seed };
    let inner = py.detach(|| netgen::generate(&cfg)).map_err(to_py)?;
    Ok(PyGraph { inner })
}

/// Returns `(graph, achieved_r, steps)`.
#[pyfunction]
#[pyo3(signature = (graph, target_r, tolerance=RewireConfig::DEFAULT_TOLERANCE, max_steps=RewireConfig::DEFAULT_MAX_STEPS, seed=0))]
fn rewire(
    py: Python<'_>,
    graph: &PyGraph,
    target_r: f64,
    tolerance: f64,
    max_steps: u64,
    seed: u64,
) -> PyResult<(PyGraph, f64, u64)> {
    let cfg = RewireConfig { r_target: target_r, tolerance, max_steps, seed };
    let out = py.detach(|| rewire_seeded(&graph.inner, &cfg)).map_err(to_py)?;
    Ok((PyGraph { inner: out.graph }, out.achieved_r, out.steps_used))
}

/// One run to fixation from a Bernoulli(p) start.
#[pyfunction]
#[pyo3(signature = (graph, p, n_th, seed=0, max_sweeps=dynamics::DEFAULT_MAX_SWEEPS))]
fn simulate<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    p: f64,
    n_th: usize,
    seed: u64,
    max_sweeps: u64,
) -> PyResult<Bound<'py, PyDict>> {
    use rand::SeedableRng;
    let g = &graph.inner;
    let rec = py
        .detach(|| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let th = dynamics::assign_thresholds(g.node_count(), n_th, &mut rng)?;
            let mut state = dynamics::init_opinions(g.node_count(), p, &mut rng)?;
            dynamics::run_to_fixation(g, &mut state, &th, max_sweeps, &mut rng)
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("t_f_sweeps", rec.t_f_sweeps)?;
    d.set_item("t_f_picks", rec.t_f_picks)?;
    d.set_item("s_bar", rec.s_bar)?;
    d.set_item("absorbed", rec.absorbed)?;
    Ok(d)
}

fn status_name(s: CellStatus) -> &'static str {
    match s {
        CellStatus::Ok => "ok",
        CellStatus::TargetUnreachable => "target_unreachable",
        CellStatus::MatchingStuck => "matching_stuck",
        CellStatus::Failed => "failed",
    }
}

/// Runs a sweep described by key=value text; one dict per replicate.
#[pyfunction]
#[pyo3(signature = (config, serial=false))]
fn sweep<'py>(py: Python<'py>, config: &str, serial: bool) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = SweepConfig::parse(config).map_err(to_py)?;
    let rows = py
        .detach(|| if serial { experiments::run_sweep_serial(&cfg) } else { experiments::run_sweep(&cfg) })
        .map_err(to_py)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("replicate_seed", r.replicate_seed)?;
            d.set_item("r_target", r.r_target)?;
            d.set_item("r_achieved", r.r_achieved)?;
            d.set_item("p", r.p)?;
            d.set_item("n_th", r.n_th)?;
            d.set_item("s_bar", r.s_bar)?;
            d.set_item("t_f_sweeps", r.t_f_sweeps)?;
            d.set_item("t_f_picks", r.t_f_picks)?;
            d.set_item("absorbed", r.absorbed)?;
            d.set_item("status", status_name(r.status))?;
            Ok(d)
        })
        .collect()
}

/// Boxplot summary of a results CSV, returned as CSV text.
#[pyfunction]
#[pyo3(signature = (results_path, group="r_target,n_th,p", consensus_band=experiments::DEFAULT_CONSENSUS_BAND))]
fn summarize(results_path: &str, group: &str, consensus_band: f64) -> PyResult<String> {
    let rows = experiments::read_results(open(results_path)?).map_err(to_py)?;
    let fields = GroupField::parse_list(group).map_err(to_py)?;
    let summary = experiments::summarize(&rows, &fields, consensus_band).map_err(to_py)?;
    let mut buf = Vec::new();
    summary.write_csv(&mut buf).map_err(to_py)?;
    String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Influence network of a JSON Lines dump: `(graph, authors)` where
/// `authors[i]` names node `i`.
#[pyfunction]
fn ingest_dump(path: &str) -> PyResult<(PyGraph, Vec<String>)> {
    let forest = ingest::read_cascades(open(path)?).map_err(to_py)?;
    let (inner, authors) = ingest::build_network(&forest).map_err(to_py)?;
    let names = (0..authors.len()).map(|i| authors.name(i).to_owned()).collect();
    Ok((PyGraph { inner }, names))
}

/// Log-log fit of a degree histogram: `(gamma_hat, r_squared, points)`.
#[pyfunction]
fn powerlaw_fit(degrees: Vec<u64>) -> PyResult<(f64, f64, usize)> {
    let fit = ingest::powerlaw_fit(&degrees).map_err(to_py)?;
    Ok((fit.gamma_hat, fit.r_squared, fit.points))
}

/// Time-binned polarity of the largest cascades: `[(root_id, means)]`.
/// Cascades with fewer scored records than bins are left out.
#[pyfunction]
#[pyo3(signature = (path, bins=20, top_cascades=10))]
fn bin_polarity(path: &str, bins: usize, top_cascades: usize) -> PyResult<Vec<(String, Vec<f64>)>> {
    let forest = ingest::read_cascades(open(path)?).map_err(to_py)?;
    let mut out = Vec::new();
    for tree in forest.largest(top_cascades) {
        match ingest::bin_polarity(tree.records(), bins) {
            Ok(means) => out.push((tree.root().id.clone(), means)),
            Err(Error::TooFewRecords { .. }) => {}
            Err(e) => return Err(to_py(e)),
        }
    }
    Ok(out)
}

#[pymodule]
fn assortative_consensus(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(rewire, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(ingest_dump, m)?)?;
    m.add_function(wrap_pyfunction!(powerlaw_fit, m)?)?;
    m.add_function(wrap_pyfunction!(bin_polarity, m)?)?;
    Ok(())
}
