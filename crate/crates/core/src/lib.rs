//! Post-hoc risk explanations for agents acting in sequential decision
//! processes.
//!
//! The pipeline only needs a log of state transitions:
//!
//! 1. [`log_model`] ingests and validates the log and fits a min-max
//!    [`Normalizer`](log_model::Normalizer).
//! 2. [`graph`] greedily discretizes states into ε-radius nodes and records
//!    transition multiplicities between them.
//! 3. [`risk`] labels nodes as risky (fatal or supercritical) and computes
//!    recursive probabilistic risk values.
//! 4. [`explain`] searches the nodes reachable within `n` hops of a query
//!    state and fits a local linear surrogate whose weights are the
//!    direction of risk.
//!
//! [`baseline`] provides a transition-blind perturbation surrogate for
//! comparison, [`toyenvs`] bundles reproducible log generators, and
//! [`render`] writes trace CSVs and PPM heatmaps.

pub mod baseline;
pub mod error;
pub mod explain;
pub mod graph;
pub mod index;
pub mod linear;
pub mod log_model;
pub mod persist;
pub mod render;
pub mod risk;
pub mod toyenvs;

pub use error::{Error, Result};
pub use explain::{Distance, EpisodeTrace, Explanation, FitOptions, Mode, ReachableSet, Verdict};
pub use graph::{GraphEdge, GraphNode, Metric, NodeId, TransitionGraph};
pub use log_model::{Episode, FeatureSchema, Normalizer, TransitionLog, TransitionRecord};
pub use risk::{BinaryRiskLabeling, DeadEnds, ProbabilisticRisk, RiskBlock};
