//! Versioned JSON graph files.
//!
//! ```text
//! {"version":1,"epsilon":0.2,"metric":"euclidean","schema":{"features":[..]},
//!  "normalizer":{"bounds":[[lo,hi],..]},"nodes":[..],"edges":[..],
//!  "risk":{"binary":[ids..],"probabilistic":{"l":..,"iterations":..,"values":[..]}}}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{GraphEdge, GraphNode, Metric, NodeId, TransitionGraph};
use crate::log_model::{FeatureSchema, Normalizer};
use crate::risk::{BinaryRiskLabeling, ProbabilisticRisk, RiskBlock};

pub const GRAPH_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct GraphFile {
    version: u32,
    epsilon: f64,
    metric: Metric,
    schema: FeatureSchema,
    normalizer: Normalizer,
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    risk: Option<RiskFile>,
}

#[derive(Serialize, Deserialize)]
struct RiskFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    binary: Option<Vec<NodeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probabilistic: Option<ProbabilisticRisk>,
}

pub fn to_json(graph: &TransitionGraph, risk: &RiskBlock) -> Result<String> {
    let file = GraphFile {
        version: GRAPH_FILE_VERSION,
        epsilon: graph.epsilon(),
        metric: graph.metric(),
        schema: graph.schema().clone(),
        normalizer: graph.normalizer().clone(),
        nodes: graph.nodes().to_vec(),
        edges: graph.edges().collect(),
        risk: (!risk.is_empty()).then(|| RiskFile {
            binary: risk.binary.as_ref().map(BinaryRiskLabeling::risky_ids),
            probabilistic: risk.probabilistic.clone(),
        }),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn from_json(text: &str) -> Result<(TransitionGraph, RiskBlock)> {
    let value: Value = serde_json::from_str(text)?;
    match value.get("version") {
        Some(Value::Number(n)) if n.as_u64() == Some(GRAPH_FILE_VERSION as u64) => {}
        other => {
            return Err(Error::VersionMismatch {
                expected: GRAPH_FILE_VERSION,
                found: other.map_or_else(|| "<missing>".to_string(), Value::to_string),
            })
        }
    }
    let file: GraphFile = serde_json::from_value(value)?;
    if file.normalizer.dim() != file.schema.dim() {
        return Err(Error::InvalidGraph(
            "normalizer and schema disagree on dimension".into(),
        ));
    }
    let graph = TransitionGraph::from_parts(
        file.epsilon,
        file.metric,
        file.schema,
        file.normalizer,
        file.nodes,
        file.edges,
    )?;
    let mut risk = RiskBlock::default();
    if let Some(block) = file.risk {
        if let Some(ids) = block.binary {
            risk.binary = Some(BinaryRiskLabeling::from_ids(graph.node_count(), &ids)?);
        }
        if let Some(prob) = block.probabilistic {
            if prob.values.len() != graph.node_count() {
                return Err(Error::InvalidGraph(format!(
                    "probabilistic risk has {} values for {} nodes",
                    prob.values.len(),
                    graph.node_count()
                )));
            }
            if prob.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidGraph(
                    "probabilistic risk values must lie in [0, 1]".into(),
                ));
            }
            risk.probabilistic = Some(prob);
        }
    }
    Ok((graph, risk))
}

pub fn save(path: impl AsRef<Path>, graph: &TransitionGraph, risk: &RiskBlock) -> Result<()> {
    let path = path.as_ref();
    let text = to_json(graph, risk)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<(TransitionGraph, RiskBlock)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
