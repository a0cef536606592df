//! The ε-radius state-transition graph.
//!
//! States are normalized and inserted greedily in log order. A state joins
//! the nearest existing node whose representative lies within ε (ties to the
//! lowest id); otherwise it founds a new node and becomes its
//! representative. Each consecutive record pair in an episode adds one to
//! the multiplicity of the corresponding edge. Actions are not recorded.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{euclidean, CellHash, KdTree};
use crate::log_model::{FeatureSchema, Normalizer, TransitionLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node count exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::UnsupportedMetric(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: NodeId,
    /// Normalized state that created the node.
    pub representative: Vec<f64>,
    pub s_total: u64,
    pub s_fatal: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub multiplicity: u64,
}

pub struct TransitionGraph {
    epsilon: f64,
    metric: Metric,
    schema: FeatureSchema,
    normalizer: Normalizer,
    nodes: Vec<GraphNode>,
    /// Outgoing `(to, multiplicity)` lists sorted by target id.
    out: Vec<Vec<(NodeId, u64)>>,
    reps: Vec<Vec<f64>>,
    tree: KdTree,
}

impl fmt::Debug for TransitionGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransitionGraph")
            .field("epsilon", &self.epsilon)
            .field("nodes", &self.nodes.len())
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl PartialEq for TransitionGraph {
    fn eq(&self, other: &Self) -> bool {
        self.epsilon == other.epsilon
            && self.metric == other.metric
            && self.schema == other.schema
            && self.normalizer == other.normalizer
            && self.nodes == other.nodes
            && self.out == other.out
    }
}

impl Clone for TransitionGraph {
    fn clone(&self) -> Self {
        TransitionGraph::assemble(
            self.epsilon,
            self.metric,
            self.schema.clone(),
            self.normalizer.clone(),
            self.nodes.clone(),
            self.out.clone(),
        )
    }
}

impl TransitionGraph {
    pub fn build(log: &TransitionLog, epsilon: f64, metric: Metric) -> Result<Self> {
        Self::build_with_assignments(log, epsilon, metric).map(|(g, _)| g)
    }

    /// Builds the graph and also returns, per episode, the node each record
    /// was assigned to.
    pub fn build_with_assignments(
        log: &TransitionLog,
        epsilon: f64,
        metric: Metric,
    ) -> Result<(Self, Vec<Vec<NodeId>>)> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        let normalizer = Normalizer::fit(log)?;
        let dim = log.schema().dim();

        let mut reps: Vec<Vec<f64>> = Vec::new();
        let mut nodes: Vec<GraphNode> = Vec::new();
        let mut out: Vec<Vec<(NodeId, u64)>> = Vec::new();
        let mut hash = CellHash::new(epsilon, dim);
        let mut assignments = Vec::with_capacity(log.episodes().len());

        for episode in log.episodes() {
            let mut ids = Vec::with_capacity(episode.len());
            let mut prev: Option<NodeId> = None;
            for record in &episode.records {
                let state = normalizer.normalize(&record.state)?;
                let id = match hash.nearest_within(&state, &reps) {
                    Some((i, _)) => NodeId::from_index(i),
                    None => {
                        let id = NodeId::from_index(nodes.len());
                        hash.insert(id.index(), &state);
                        nodes.push(GraphNode {
                            id,
                            representative: state.clone(),
                            s_total: 0,
                            s_fatal: 0,
                        });
                        reps.push(state);
                        out.push(Vec::new());
                        id
                    }
                };
                let node = &mut nodes[id.index()];
                node.s_total += 1;
                node.s_fatal += u64::from(record.fatal);
                if let Some(from) = prev {
                    bump_edge(&mut out[from.index()], id);
                }
                prev = Some(id);
                ids.push(id);
            }
            assignments.push(ids);
        }

        let graph = Self::assemble(
            epsilon,
            metric,
            log.schema().clone(),
            normalizer,
            nodes,
            out,
        );
        Ok((graph, assignments))
    }

    /// Assembles a graph from explicit parts, validating structural
    /// invariants. Representatives must already be normalized. The
    /// pairwise-separation property of built graphs is not required here.
    pub fn from_parts(
        epsilon: f64,
        metric: Metric,
        schema: FeatureSchema,
        normalizer: Normalizer,
        nodes: Vec<GraphNode>,
        edges: Vec<GraphEdge>,
    ) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        if normalizer.dim() != schema.dim() {
            return Err(Error::InvalidGraph(format!(
                "normalizer has {} dimensions, schema has {}",
                normalizer.dim(),
                schema.dim()
            )));
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.id.index() != i {
                return Err(Error::InvalidGraph(format!(
                    "node at position {i} has id {}",
                    node.id
                )));
            }
            if node.representative.len() != schema.dim() {
                return Err(Error::InvalidGraph(format!(
                    "node {i} representative has {} values, expected {}",
                    node.representative.len(),
                    schema.dim()
                )));
            }
            if node.representative.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "node {i} has a non-finite representative"
                )));
            }
            if node.s_total == 0 || node.s_fatal > node.s_total {
                return Err(Error::InvalidGraph(format!(
                    "node {i} has inconsistent counts (total {}, fatal {})",
                    node.s_total, node.s_fatal
                )));
            }
        }
        let mut out = vec![Vec::new(); nodes.len()];
        for edge in &edges {
            if edge.from.index() >= nodes.len() || edge.to.index() >= nodes.len() {
                return Err(Error::InvalidGraph(format!(
                    "edge {} -> {} references a missing node",
                    edge.from, edge.to
                )));
            }
            if edge.multiplicity == 0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {} -> {} has zero multiplicity",
                    edge.from, edge.to
                )));
            }
            out[edge.from.index()].push((edge.to, edge.multiplicity));
        }
        for list in &mut out {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidGraph("duplicate edge".into()));
            }
        }
        Ok(Self::assemble(epsilon, metric, schema, normalizer, nodes, out))
    }

    fn assemble(
        epsilon: f64,
        metric: Metric,
        schema: FeatureSchema,
        normalizer: Normalizer,
        nodes: Vec<GraphNode>,
        out: Vec<Vec<(NodeId, u64)>>,
    ) -> Self {
        let reps: Vec<Vec<f64>> = nodes.iter().map(|n| n.representative.clone()).collect();
        let tree = KdTree::build(&reps);
        TransitionGraph {
            epsilon,
            metric,
            schema,
            normalizer,
            nodes,
            out,
            reps,
            tree,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &GraphNode {
        &self.nodes[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn representative(&self, id: NodeId) -> &[f64] {
        &self.reps[id.index()]
    }

    /// Outgoing `(target, multiplicity)` pairs in ascending target order.
    pub fn successors(&self, id: NodeId) -> &[(NodeId, u64)] {
        &self.out[id.index()]
    }

    pub fn multiplicity(&self, from: NodeId, to: NodeId) -> u64 {
        let list = &self.out[from.index()];
        list.binary_search_by_key(&to, |&(t, _)| t)
            .map_or(0, |i| list[i].1)
    }

    /// Every edge in `(from, to)` order.
    pub fn edges(&self) -> impl Iterator<Item = GraphEdge> + '_ {
        self.out.iter().enumerate().flat_map(|(from, list)| {
            list.iter().map(move |&(to, multiplicity)| GraphEdge {
                from: NodeId::from_index(from),
                to,
                multiplicity,
            })
        })
    }

    /// Distinct predecessors of every node, ascending.
    pub fn predecessors(&self) -> Vec<Vec<NodeId>> {
        let mut preds = vec![Vec::new(); self.nodes.len()];
        for (from, list) in self.out.iter().enumerate() {
            for &(to, _) in list {
                preds[to.index()].push(NodeId::from_index(from));
            }
        }
        preds
    }

    /// Node whose representative is nearest to the normalized, clamped
    /// query. Ties go to the lowest id.
    pub fn find_node(&self, raw_state: &[f64]) -> Result<NodeId> {
        self.locate(raw_state).map(|(id, _)| id)
    }

    /// Like [`find_node`](Self::find_node), also reporting whether the
    /// query had to be clamped into the logged bounds.
    pub fn locate(&self, raw_state: &[f64]) -> Result<(NodeId, bool)> {
        let (q, clamped) = self.normalizer.normalize_query(raw_state)?;
        let (i, _) = self.tree.nearest(&q, &self.reps).ok_or(Error::EmptyGraph)?;
        Ok((NodeId::from_index(i), clamped))
    }

    /// Nearest node for an already-normalized state.
    pub fn find_node_normalized(&self, state: &[f64]) -> Result<NodeId> {
        if state.len() != self.schema.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.schema.dim(),
                found: state.len(),
            });
        }
        let (i, _) = self.tree.nearest(state, &self.reps).ok_or(Error::EmptyGraph)?;
        Ok(NodeId::from_index(i))
    }

    pub fn distance(a: &[f64], b: &[f64]) -> f64 {
        euclidean(a, b)
    }
}

fn bump_edge(list: &mut Vec<(NodeId, u64)>, to: NodeId) {
    match list.binary_search_by_key(&to, |&(t, _)| t) {
        Ok(i) => list[i].1 += 1,
        Err(i) => list.insert(i, (to, 1)),
    }
}
