//! Python bindings. The extension module is importable as `risklens`.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use risklens::baseline::{perturb_explain, PerturbationSpec, DEFAULT_SAMPLES};
use risklens::explain::{self, trace_episode, TraceMode};
use risklens::render::{load_trace_csv, render_heatmap as render, save_trace_csv};
use risklens::risk::{label_binary_with, risk_init, risk_iterate, DeadEnds};
use risklens::toyenvs::{cliff_generate, grid_generate, GridMap};
use risklens::{
    persist, Distance, Error, FeatureSchema, FitOptions, Metric, Mode, NodeId, RiskBlock, Verdict,
};

create_exception!(risklens, RiskLensError, PyValueError);

type TraceRows = Vec<(Option<u32>, Option<Vec<f64>>)>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => RiskLensError::new_err(format!("{}: {other}", other.kind())),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for risklens::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn verdict_dict<'py>(py: Python<'py>, verdict: &Verdict) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    match verdict {
        Verdict::Direction(e) => {
            d.set_item("no_direction", false)?;
            d.set_item("g", e.g.clone())?;
            d.set_item("features", e.features.clone())?;
            d.set_item("bias", e.bias)?;
            d.set_item(
                "mode",
                match e.mode {
                    Mode::Classification => "classification",
                    Mode::Regression => "regression",
                },
            )?;
            d.set_item("reachable_size", e.reachable_size)?;
            d.set_item("risky_count", e.risky_count)?;
            d.set_item("query_clamped", e.query_clamped)?;
        }
        Verdict::NoDirection {
            reachable_size,
            risky_count,
        } => {
            d.set_item("no_direction", true)?;
            d.set_item("reachable_size", *reachable_size)?;
            d.set_item("risky_count", *risky_count)?;
        }
    }
    Ok(d)
}

fn hops(d: Distance) -> Option<u32> {
    match d {
        Distance::Hops(h) => Some(h),
        Distance::CapExceeded => None,
    }
}

/// A validated transition log.
#[pyclass(name = "TransitionLog", module = "risklens")]
struct PyLog(risklens::TransitionLog);

#[pymethods]
impl PyLog {
    /// Reads a JSON-lines log against the given feature names.
    #[staticmethod]
    fn read(path: &str, features: Vec<String>) -> PyResult<Self> {
        let schema = FeatureSchema::new(features).py_err()?;
        Ok(PyLog(risklens::TransitionLog::ingest(path, schema).py_err()?))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save(path).py_err()
    }

    #[getter]
    fn features(&self) -> Vec<String> {
        self.0.schema().names().to_vec()
    }

    #[getter]
    fn record_count(&self) -> usize {
        self.0.record_count()
    }

    #[getter]
    fn transition_count(&self) -> usize {
        self.0.transition_count()
    }

    #[getter]
    fn fatal_count(&self) -> usize {
        self.0.fatal_count()
    }

    fn episode_ids(&self) -> Vec<String> {
        self.0.episodes().iter().map(|e| e.id.clone()).collect()
    }

    fn states(&self, episode_id: &str) -> PyResult<Vec<Vec<f64>>> {
        let ep = self
            .0
            .episode(episode_id)
            .ok_or_else(|| RiskLensError::new_err(format!("no episode '{episode_id}'")))?;
        Ok(ep.states().map(<[f64]>::to_vec).collect())
    }

    /// Keeps whole episodes in order until `max_transitions` is reached.
    fn truncated(&self, max_transitions: usize) -> Self {
        PyLog(self.0.truncated(max_transitions))
    }

    fn __len__(&self) -> usize {
        self.0.record_count()
    }
}

/// Transition graph together with whatever risk labelings have been computed.
#[pyclass(name = "TransitionGraph", module = "risklens")]
struct PyGraph {
    graph: risklens::TransitionGraph,
    risk: RiskBlock,
}

impl PyGraph {
    fn fit(reg: Option<f64>, step: Option<f64>, iterations: Option<u32>) -> FitOptions {
        let d = FitOptions::default();
        FitOptions {
            reg: reg.unwrap_or(d.reg),
            step: step.unwrap_or(d.step),
            iterations: iterations.unwrap_or(d.iterations),
        }
    }
}

#[pymethods]
impl PyGraph {
    #[staticmethod]
    #[pyo3(signature = (log, epsilon, metric = "euclidean"))]
    fn build(log: &PyLog, epsilon: f64, metric: &str) -> PyResult<Self> {
        let metric: Metric = metric.parse().py_err()?;
        Ok(PyGraph {
            graph: risklens::TransitionGraph::build(&log.0, epsilon, metric).py_err()?,
            risk: RiskBlock::default(),
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let (graph, risk) = persist::load(path).py_err()?;
        Ok(PyGraph { graph, risk })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        persist::save(path, &self.graph, &self.risk).py_err()
    }

    fn to_json(&self) -> PyResult<String> {
        persist::to_json(&self.graph, &self.risk).py_err()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.graph.epsilon()
    }

    #[getter]
    fn features(&self) -> Vec<String> {
        self.graph.schema().names().to_vec()
    }

    fn find_node(&self, state: Vec<f64>) -> PyResult<u32> {
        Ok(self.graph.find_node(&state).py_err()?.0)
    }

    fn representative(&self, node: u32) -> PyResult<Vec<f64>> {
        self.check(node)?;
        Ok(self.graph.representative(NodeId(node)).to_vec())
    }

    /// `(successor, multiplicity)` pairs sorted by successor id.
    fn successors(&self, node: u32) -> PyResult<Vec<(u32, u64)>> {
        self.check(node)?;
        Ok(self
            .graph
            .successors(NodeId(node))
            .iter()
            .map(|(k, m)| (k.0, *m))
            .collect())
    }

    #[pyo3(signature = (dead_ends = "safe"))]
    fn label_binary(&mut self, dead_ends: &str) -> PyResult<usize> {
        let convention: DeadEnds = dead_ends.parse().py_err()?;
        let labels = label_binary_with(&self.graph, convention);
        let count = labels.risky_count();
        self.risk.binary = Some(labels);
        Ok(count)
    }

    #[pyo3(signature = (l = 0.01, iterations = 50))]
    fn label_probabilistic(&mut self, l: f64, iterations: u32) -> PyResult<()> {
        let r = risk_iterate(&self.graph, &risk_init(&self.graph), l, iterations).py_err()?;
        self.risk.probabilistic = Some(r);
        Ok(())
    }

    fn risky_nodes(&self) -> PyResult<Vec<u32>> {
        let labels = self.risk.require_binary().py_err()?;
        Ok(labels.risky_ids().into_iter().map(|id| id.0).collect())
    }

    fn risk_values(&self) -> PyResult<Vec<f64>> {
        Ok(self.risk.require_probabilistic().py_err()?.values.clone())
    }

    #[pyo3(signature = (state, depth, regression = false, denormalize = false, reg = None, step = None, iterations = None))]
    #[allow(clippy::too_many_arguments)]
    fn explain<'py>(
        &self,
        py: Python<'py>,
        state: Vec<f64>,
        depth: u32,
        regression: bool,
        denormalize: bool,
        reg: Option<f64>,
        step: Option<f64>,
        iterations: Option<u32>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let opts = Self::fit(reg, step, iterations);
        let verdict = if regression {
            let risk = self.risk.require_probabilistic().py_err()?;
            explain::direction_of_risk_regression(&self.graph, risk, &state, depth, &opts).py_err()?
        } else {
            let labels = self.risk.require_binary().py_err()?;
            explain::direction_of_risk(&self.graph, labels, &state, depth, &opts).py_err()?
        };
        let verdict = match verdict {
            Verdict::Direction(e) if denormalize => {
                Verdict::Direction(e.denormalized(self.graph.normalizer()))
            }
            v => v,
        };
        verdict_dict(py, &verdict)
    }

    /// Hop count to the nearest risky node, or `None` beyond `cap`.
    fn distance_to_risk(&self, state: Vec<f64>, cap: u32) -> PyResult<Option<u32>> {
        let labels = self.risk.require_binary().py_err()?;
        Ok(hops(explain::distance_to_risk(&self.graph, labels, &state, cap).py_err()?))
    }

    /// Per-step `(distance, g)` pairs. `mode` is "distance",
    /// "classification" or "regression". When `csv_path` is given the trace
    /// is also written there.
    #[pyo3(signature = (states, depth, cap, mode = "classification", csv_path = None))]
    fn trace(
        &self,
        states: Vec<Vec<f64>>,
        depth: u32,
        cap: u32,
        mode: &str,
        csv_path: Option<&str>,
    ) -> PyResult<TraceRows> {
        let labels = self.risk.require_binary().py_err()?;
        let mode = match mode {
            "distance" => TraceMode::DistanceOnly,
            "classification" => TraceMode::Classification,
            "regression" => TraceMode::Regression(self.risk.require_probabilistic().py_err()?),
            other => return Err(RiskLensError::new_err(format!("unknown trace mode '{other}'"))),
        };
        let trace = trace_episode(&self.graph, labels, &states, depth, cap, mode, &FitOptions::default())
            .py_err()?;
        if let Some(path) = csv_path {
            save_trace_csv(&trace, path).py_err()?;
        }
        Ok(trace.steps.into_iter().map(|s| (hops(s.distance), s.g)).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "TransitionGraph(nodes={}, edges={}, epsilon={})",
            self.graph.node_count(),
            self.graph.edge_count(),
            self.graph.epsilon()
        )
    }
}

impl PyGraph {
    fn check(&self, node: u32) -> PyResult<()> {
        if (node as usize) < self.graph.node_count() {
            Ok(())
        } else {
            Err(RiskLensError::new_err(format!("node {node} out of range")))
        }
    }
}

fn parse_map(map: Option<&str>) -> PyResult<GridMap> {
    match map {
        Some(text) => text.parse().py_err(),
        None => Ok(GridMap::blocked_corridor()),
    }
}

/// Random-walk log in the continuous cliff world.
#[pyfunction]
#[pyo3(signature = (episodes, max_steps, seed = 0))]
fn cliff_log(episodes: usize, max_steps: usize, seed: u64) -> PyResult<PyLog> {
    Ok(PyLog(cliff_generate(episodes, max_steps, seed).py_err()?))
}

/// Random-agent log on a gridworld. `map` is map text; the bundled blocked
/// corridor is used when omitted.
#[pyfunction]
#[pyo3(signature = (episodes, max_steps, seed = 0, map = None))]
fn grid_log(episodes: usize, max_steps: usize, seed: u64, map: Option<&str>) -> PyResult<PyLog> {
    let map = parse_map(map)?;
    Ok(PyLog(grid_generate(&map, episodes, max_steps, seed).py_err()?))
}

#[pyfunction]
fn bundled_map(name: &str) -> PyResult<String> {
    match name {
        "blocked_corridor" => Ok(GridMap::blocked_corridor().to_string()),
        "straight_corridor" => Ok(GridMap::straight_corridor().to_string()),
        other => Err(RiskLensError::new_err(format!("no bundled map '{other}'"))),
    }
}

#[pyfunction]
#[pyo3(signature = (trace_csv, out, vscale = 5, exclude = Vec::new()))]
fn render_heatmap(trace_csv: &str, out: &str, vscale: usize, exclude: Vec<String>) -> PyResult<(usize, usize)> {
    let trace = load_trace_csv(trace_csv).py_err()?;
    let img = render(&trace, vscale, &exclude).py_err()?;
    img.save(out).py_err()?;
    Ok((img.width, img.height))
}

/// Graph explanation and perturbation baseline for one grid state.
#[pyfunction]
#[pyo3(signature = (graph, state, depth, map = None, samples = DEFAULT_SAMPLES, seed = 0))]
fn compare_baseline<'py>(
    py: Python<'py>,
    graph: &PyGraph,
    state: Vec<f64>,
    depth: u32,
    map: Option<&str>,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let map = parse_map(map)?;
    let opts = FitOptions::default();
    let labels = graph.risk.require_binary().py_err()?;
    let ours = explain::direction_of_risk(&graph.graph, labels, &state, depth, &opts).py_err()?;
    let spec = PerturbationSpec::uniform(state.len(), samples);
    let theirs = perturb_explain(&state, graph.graph.schema().names(), &spec, &map, seed, &opts).py_err()?;
    let out = PyDict::new(py);
    out.set_item("graph", verdict_dict(py, &ours)?)?;
    out.set_item("baseline", verdict_dict(py, &theirs)?)?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "risklens")]
fn risklens_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RiskLensError", m.py().get_type::<RiskLensError>())?;
    m.add_class::<PyLog>()?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(cliff_log, m)?)?;
    m.add_function(wrap_pyfunction!(grid_log, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_map, m)?)?;
    m.add_function(wrap_pyfunction!(render_heatmap, m)?)?;
    m.add_function(wrap_pyfunction!(compare_baseline, m)?)?;
    Ok(())
}
