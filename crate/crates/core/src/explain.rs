//! Local direction-of-risk explanations.
//!
//! For a query state we find its node, collect every node within `n`
//! directed hops (the reachable set), and fit a linear surrogate on the
//! nodes' normalized representatives. Classification fits the binary risky
//! label with logistic regression; regression fits probabilistic risk values
//! with ridge. The surrogate weights are the direction of risk `g`: moving
//! the state along `g` increases estimated risk.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, TransitionGraph};
use crate::linear::{fit_logistic, fit_ridge, LinearFit, LogisticConfig};
use crate::log_model::Normalizer;
use crate::risk::{BinaryRiskLabeling, ProbabilisticRisk};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachableSet {
    pub origin: NodeId,
    pub depth: u32,
    /// Members with their hop distance, in BFS order (origin first).
    pub nodes: Vec<(NodeId, u32)>,
}

impl ReachableSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.iter().any(|&(n, _)| n == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|&(n, _)| n)
    }
}

/// Forward BFS from `origin` following outgoing edges up to `depth` hops.
pub fn reachable_from(graph: &TransitionGraph, origin: NodeId, depth: u32) -> Result<ReachableSet> {
    if depth < 1 {
        return Err(Error::InvalidDepth);
    }
    let mut seen = vec![false; graph.node_count()];
    let mut nodes = vec![(origin, 0)];
    seen[origin.index()] = true;
    let mut queue = VecDeque::from([(origin, 0u32)]);
    while let Some((id, d)) = queue.pop_front() {
        if d == depth {
            continue;
        }
        for &(next, _) in graph.successors(id) {
            if !seen[next.index()] {
                seen[next.index()] = true;
                nodes.push((next, d + 1));
                queue.push_back((next, d + 1));
            }
        }
    }
    Ok(ReachableSet {
        origin,
        depth,
        nodes,
    })
}

pub fn reachable(graph: &TransitionGraph, state: &[f64], depth: u32) -> Result<ReachableSet> {
    if depth < 1 {
        return Err(Error::InvalidDepth);
    }
    reachable_from(graph, graph.find_node(state)?, depth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Classification,
    Regression,
}

/// Surrogate settings. `step` and `iterations` only affect classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub reg: f64,
    pub step: f64,
    pub iterations: u32,
}

impl Default for FitOptions {
    fn default() -> Self {
        let c = LogisticConfig::default();
        FitOptions {
            reg: c.reg,
            step: c.step,
            iterations: c.iterations,
        }
    }
}

impl FitOptions {
    fn logistic(&self) -> LogisticConfig {
        LogisticConfig {
            reg: self.reg,
            step: self.step,
            iterations: self.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    /// Direction of risk, one weight per feature.
    pub g: Vec<f64>,
    pub features: Vec<String>,
    pub bias: f64,
    pub mode: Mode,
    pub reachable_size: usize,
    /// Risky nodes in the sample. In regression mode, nodes with positive
    /// risk.
    pub risky_count: usize,
    /// The query fell outside the logged bounds and was clamped.
    pub query_clamped: bool,
}

impl Explanation {
    /// Converts `g` from normalized units to raw units by dividing each
    /// weight by its dimension's span. Degenerate dimensions get zero.
    pub fn denormalized(&self, normalizer: &Normalizer) -> Explanation {
        let g = self
            .g
            .iter()
            .enumerate()
            .map(|(d, &w)| {
                let span = normalizer.span(d);
                if span > 0.0 {
                    w / span
                } else {
                    0.0
                }
            })
            .collect();
        Explanation { g, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Direction(Explanation),
    /// The neighbourhood carries no risk gradient.
    NoDirection {
        reachable_size: usize,
        risky_count: usize,
    },
}

impl Verdict {
    pub fn explanation(&self) -> Option<&Explanation> {
        match self {
            Verdict::Direction(e) => Some(e),
            Verdict::NoDirection { .. } => None,
        }
    }

    pub fn is_no_direction(&self) -> bool {
        matches!(self, Verdict::NoDirection { .. })
    }
}

fn representatives(graph: &TransitionGraph, set: &ReachableSet) -> Vec<Vec<f64>> {
    set.ids().map(|id| graph.representative(id).to_vec()).collect()
}

fn into_explanation(
    graph: &TransitionGraph,
    fit: LinearFit,
    mode: Mode,
    set: &ReachableSet,
    risky_count: usize,
    query_clamped: bool,
) -> Explanation {
    Explanation {
        g: fit.weights,
        features: graph.schema().names().to_vec(),
        bias: fit.bias,
        mode,
        reachable_size: set.len(),
        risky_count,
        query_clamped,
    }
}

/// Logistic surrogate over the reachable set, one sample per node.
pub fn direction_of_risk(
    graph: &TransitionGraph,
    labels: &BinaryRiskLabeling,
    state: &[f64],
    depth: u32,
    options: &FitOptions,
) -> Result<Verdict> {
    if depth < 1 {
        return Err(Error::InvalidDepth);
    }
    check_labels(graph, labels.len())?;
    let (origin, clamped) = graph.locate(state)?;
    let set = reachable_from(graph, origin, depth)?;
    let ys: Vec<f64> = set
        .ids()
        .map(|id| if labels.is_risky(id) { 1.0 } else { 0.0 })
        .collect();
    let risky_count = ys.iter().filter(|&&y| y == 1.0).count();
    if risky_count == 0 || risky_count == set.len() {
        return Ok(Verdict::NoDirection {
            reachable_size: set.len(),
            risky_count,
        });
    }
    let fit = fit_logistic(&representatives(graph, &set), &ys, &options.logistic())?;
    Ok(Verdict::Direction(into_explanation(
        graph,
        fit,
        Mode::Classification,
        &set,
        risky_count,
        clamped,
    )))
}

/// Ridge surrogate of probabilistic risk values over the reachable set.
pub fn direction_of_risk_regression(
    graph: &TransitionGraph,
    risk: &ProbabilisticRisk,
    state: &[f64],
    depth: u32,
    options: &FitOptions,
) -> Result<Verdict> {
    if depth < 1 {
        return Err(Error::InvalidDepth);
    }
    check_labels(graph, risk.values.len())?;
    let (origin, clamped) = graph.locate(state)?;
    let set = reachable_from(graph, origin, depth)?;
    let ys: Vec<f64> = set.ids().map(|id| risk.value(id)).collect();
    let risky_count = ys.iter().filter(|&&y| y > 0.0).count();
    if set.len() < 2 {
        return Ok(Verdict::NoDirection {
            reachable_size: set.len(),
            risky_count,
        });
    }
    let fit = fit_ridge(&representatives(graph, &set), &ys, options.reg)?;
    Ok(Verdict::Direction(into_explanation(
        graph,
        fit,
        Mode::Regression,
        &set,
        risky_count,
        clamped,
    )))
}

fn check_labels(graph: &TransitionGraph, len: usize) -> Result<()> {
    if len != graph.node_count() {
        return Err(Error::InvalidGraph(format!(
            "risk labeling covers {len} nodes, graph has {}",
            graph.node_count()
        )));
    }
    Ok(())
}

/// Hop distance from a state's node to the nearest risky node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Hops(u32),
    /// No risky node within the cap.
    CapExceeded,
}

impl Distance {
    /// Value used for plotting and CSV output: capped distances read as the
    /// cap itself.
    pub fn capped_value(self, cap: u32) -> u32 {
        match self {
            Distance::Hops(h) => h,
            Distance::CapExceeded => cap,
        }
    }

    pub fn is_capped(self) -> bool {
        matches!(self, Distance::CapExceeded)
    }
}

pub fn distance_from(
    graph: &TransitionGraph,
    labels: &BinaryRiskLabeling,
    origin: NodeId,
    cap: u32,
) -> Distance {
    if labels.is_risky(origin) {
        return Distance::Hops(0);
    }
    let mut seen = vec![false; graph.node_count()];
    seen[origin.index()] = true;
    let mut queue = VecDeque::from([(origin, 0u32)]);
    while let Some((id, d)) = queue.pop_front() {
        if d == cap {
            continue;
        }
        for &(next, _) in graph.successors(id) {
            if seen[next.index()] {
                continue;
            }
            if labels.is_risky(next) {
                return Distance::Hops(d + 1);
            }
            seen[next.index()] = true;
            queue.push_back((next, d + 1));
        }
    }
    Distance::CapExceeded
}

pub fn distance_to_risk(
    graph: &TransitionGraph,
    labels: &BinaryRiskLabeling,
    state: &[f64],
    cap: u32,
) -> Result<Distance> {
    if cap < 1 {
        return Err(Error::InvalidDepth);
    }
    check_labels(graph, labels.len())?;
    Ok(distance_from(graph, labels, graph.find_node(state)?, cap))
}

/// What a trace computes besides distance to risk.
#[derive(Debug, Clone, Copy)]
pub enum TraceMode<'a> {
    DistanceOnly,
    Classification,
    Regression(&'a ProbabilisticRisk),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub distance: Distance,
    /// Direction of risk at this step; `None` when there was no direction
    /// or none was requested.
    pub g: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub features: Vec<String>,
    pub cap: u32,
    pub steps: Vec<TraceStep>,
}

impl EpisodeTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

pub fn trace_episode<S: AsRef<[f64]>>(
    graph: &TransitionGraph,
    labels: &BinaryRiskLabeling,
    episode: &[S],
    depth: u32,
    cap: u32,
    mode: TraceMode<'_>,
    options: &FitOptions,
) -> Result<EpisodeTrace> {
    let steps = episode
        .iter()
        .map(|state| {
            let state = state.as_ref();
            let distance = distance_to_risk(graph, labels, state, cap)?;
            let verdict = match mode {
                TraceMode::DistanceOnly => None,
                TraceMode::Classification => {
                    Some(direction_of_risk(graph, labels, state, depth, options)?)
                }
                TraceMode::Regression(risk) => Some(direction_of_risk_regression(
                    graph, risk, state, depth, options,
                )?),
            };
            let g = match verdict {
                Some(Verdict::Direction(e)) => Some(e.g),
                _ => None,
            };
            Ok(TraceStep { distance, g })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpisodeTrace {
        features: graph.schema().names().to_vec(),
        cap,
        steps,
    })
}
