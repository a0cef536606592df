//! Risk labelings over graph nodes.
//!
//! * Binary: a node is risky if it holds a fatal state, or if it has at
//!   least one outgoing edge and every successor is risky (supercritical).
//!   The labeling is the least fixed point of that rule.
//! * Probabilistic: starts from `R0(s) = 0.5 + fatal/(2·total)` for nodes
//!   with fatal states (0 otherwise) and repeatedly blends each node's value
//!   with the multiplicity-weighted root-mean-square of its successors.

use std::collections::VecDeque;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, TransitionGraph};

/// How nodes without outgoing edges and without fatal states are labeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeadEnds {
    /// Dead ends are safe (they include successful terminations).
    #[default]
    Safe,
    /// Vacuous reading: "all successors are risky" holds for dead ends.
    Risky,
}

impl FromStr for DeadEnds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "safe" => Ok(DeadEnds::Safe),
            "risky" => Ok(DeadEnds::Risky),
            other => Err(Error::InvalidGraph(format!("unknown dead-end convention '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRiskLabeling {
    risky: Vec<bool>,
}

impl BinaryRiskLabeling {
    pub fn from_flags(risky: Vec<bool>) -> Self {
        BinaryRiskLabeling { risky }
    }

    pub fn from_ids(node_count: usize, ids: &[NodeId]) -> Result<Self> {
        let mut risky = vec![false; node_count];
        for id in ids {
            let slot = risky.get_mut(id.index()).ok_or_else(|| {
                Error::InvalidGraph(format!("risky node {id} does not exist"))
            })?;
            *slot = true;
        }
        Ok(BinaryRiskLabeling { risky })
    }

    pub fn is_risky(&self, id: NodeId) -> bool {
        self.risky[id.index()]
    }

    pub fn flags(&self) -> &[bool] {
        &self.risky
    }

    pub fn len(&self) -> usize {
        self.risky.len()
    }

    pub fn is_empty(&self) -> bool {
        self.risky.is_empty()
    }

    pub fn risky_count(&self) -> usize {
        self.risky.iter().filter(|&&r| r).count()
    }

    pub fn risky_ids(&self) -> Vec<NodeId> {
        self.risky
            .iter()
            .enumerate()
            .filter(|(_, &r)| r)
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }
}

pub fn label_binary(graph: &TransitionGraph) -> BinaryRiskLabeling {
    label_binary_with(graph, DeadEnds::Safe)
}

/// Worklist propagation backwards from fatal nodes. Each node tracks how
/// many of its distinct successors are still not risky; it turns risky when
/// that count reaches zero. Runs in O(V + E).
pub fn label_binary_with(graph: &TransitionGraph, dead_ends: DeadEnds) -> BinaryRiskLabeling {
    let n = graph.node_count();
    let mut risky = vec![false; n];
    let mut pending: Vec<usize> = (0..n)
        .map(|i| graph.successors(NodeId(i as u32)).len())
        .collect();
    let mut queue = VecDeque::new();
    for (i, node) in graph.nodes().iter().enumerate() {
        let dead_end = pending[i] == 0;
        if node.s_fatal > 0 || (dead_end && dead_ends == DeadEnds::Risky) {
            risky[i] = true;
            queue.push_back(i);
        }
    }
    let preds = graph.predecessors();
    while let Some(k) = queue.pop_front() {
        for p in &preds[k] {
            let p = p.index();
            if risky[p] {
                continue;
            }
            pending[p] -= 1;
            if pending[p] == 0 {
                risky[p] = true;
                queue.push_back(p);
            }
        }
    }
    BinaryRiskLabeling { risky }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilisticRisk {
    pub values: Vec<f64>,
    pub iterations: u32,
    /// Learning rate of the most recent update; 0 before any iteration.
    #[serde(rename = "l")]
    pub learning_rate: f64,
}

impl ProbabilisticRisk {
    pub fn value(&self, id: NodeId) -> f64 {
        self.values[id.index()]
    }
}

pub fn risk_init(graph: &TransitionGraph) -> ProbabilisticRisk {
    let values = graph
        .nodes()
        .iter()
        .map(|n| {
            if n.s_fatal == 0 {
                0.0
            } else {
                0.5 + n.s_fatal as f64 / (2.0 * n.s_total as f64)
            }
        })
        .collect();
    ProbabilisticRisk {
        values,
        iterations: 0,
        learning_rate: 0.0,
    }
}

/// Synchronous updates: every node's next value reads only the previous
/// iteration. Nodes without successors keep their value. Fatal nodes are
/// updated like any other.
pub fn risk_iterate(
    graph: &TransitionGraph,
    risk: &ProbabilisticRisk,
    learning_rate: f64,
    iterations: u32,
) -> Result<ProbabilisticRisk> {
    if !(learning_rate > 0.0 && learning_rate < 1.0) {
        return Err(Error::InvalidLearningRate(learning_rate));
    }
    if risk.values.len() != graph.node_count() {
        return Err(Error::InvalidGraph(format!(
            "risk has {} values for {} nodes",
            risk.values.len(),
            graph.node_count()
        )));
    }
    if iterations == 0 {
        return Ok(risk.clone());
    }
    let mut current = risk.values.clone();
    let mut next = vec![0.0; current.len()];
    for _ in 0..iterations {
        for (i, slot) in next.iter_mut().enumerate() {
            let succ = graph.successors(NodeId(i as u32));
            if succ.is_empty() {
                *slot = current[i];
                continue;
            }
            let (num, den) = succ.iter().fold((0.0, 0.0), |(num, den), &(k, v)| {
                let r = current[k.index()];
                (num + r * r * v as f64, den + v as f64)
            });
            let propagated = (num / den).sqrt();
            *slot = ((1.0 - learning_rate) * current[i] + learning_rate * propagated).clamp(0.0, 1.0);
        }
        std::mem::swap(&mut current, &mut next);
    }
    Ok(ProbabilisticRisk {
        values: current,
        iterations: risk.iterations + iterations,
        learning_rate,
    })
}

/// Risk results as stored alongside a graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RiskBlock {
    pub binary: Option<BinaryRiskLabeling>,
    pub probabilistic: Option<ProbabilisticRisk>,
}

impl RiskBlock {
    pub fn is_empty(&self) -> bool {
        self.binary.is_none() && self.probabilistic.is_none()
    }

    pub fn require_binary(&self) -> Result<&BinaryRiskLabeling> {
        self.binary.as_ref().ok_or(Error::MissingRisk("binary"))
    }

    pub fn require_probabilistic(&self) -> Result<&ProbabilisticRisk> {
        self.probabilistic
            .as_ref()
            .ok_or(Error::MissingRisk("probabilistic"))
    }
}
