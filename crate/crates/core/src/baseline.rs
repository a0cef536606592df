//! Transition-blind perturbation baseline.
//!
//! Each sample adds one integer offset per feature (drawn uniformly from
//! that feature's range) to the query state. Samples the validity oracle
//! rejects are dropped; the rest are labeled by the label oracle and a
//! logistic surrogate is fit on the offsets. Reachability plays no part.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::explain::{Explanation, FitOptions, Mode, Verdict};
use crate::linear::{fit_logistic, LogisticConfig};
use crate::toyenvs::{GridMap, Tile};

pub trait PerturbationOracle {
    fn is_valid(&self, state: &[f64]) -> bool;
    fn is_risky(&self, state: &[f64]) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationSpec {
    pub offsets: Vec<RangeInclusive<i64>>,
    pub samples: usize,
}

pub const DEFAULT_SAMPLES: usize = 5000;

impl PerturbationSpec {
    /// `[-3, 3]` on every feature.
    pub fn uniform(dim: usize, samples: usize) -> Self {
        PerturbationSpec {
            offsets: vec![-3..=3; dim],
            samples,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.offsets.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: self.offsets.len(),
                found: dim,
            });
        }
        if self.samples == 0 {
            return Err(Error::InvalidPerturbation("samples must be at least 1".into()));
        }
        if let Some(i) = self.offsets.iter().position(|r| r.is_empty()) {
            return Err(Error::InvalidPerturbation(format!(
                "offset range for feature {i} is empty"
            )));
        }
        Ok(())
    }
}

/// Fits the baseline surrogate around `state`. `features` names the state
/// dimensions; the returned `g` is in raw offset units. For this
/// explanation `reachable_size` counts valid perturbations and
/// `risky_count` the risky ones among them.
pub fn perturb_explain(
    state: &[f64],
    features: &[String],
    spec: &PerturbationSpec,
    oracle: &impl PerturbationOracle,
    seed: u64,
    options: &FitOptions,
) -> Result<Verdict> {
    spec.validate(state.len())?;
    if features.len() != state.len() {
        return Err(Error::DimensionMismatch {
            expected: state.len(),
            found: features.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offsets = Vec::new();
    let mut labels = Vec::new();
    let mut perturbed = vec![0.0; state.len()];
    for _ in 0..spec.samples {
        let delta: Vec<f64> = spec
            .offsets
            .iter()
            .map(|r| rng.gen_range(r.clone()) as f64)
            .collect();
        for ((p, s), d) in perturbed.iter_mut().zip(state).zip(&delta) {
            *p = s + d;
        }
        if !oracle.is_valid(&perturbed) {
            continue;
        }
        labels.push(if oracle.is_risky(&perturbed) { 1.0 } else { 0.0 });
        offsets.push(delta);
    }
    if offsets.is_empty() {
        return Err(Error::NoValidPerturbations);
    }
    let risky_count = labels.iter().filter(|&&y| y == 1.0).count();
    if risky_count == 0 || risky_count == labels.len() {
        return Ok(Verdict::NoDirection {
            reachable_size: labels.len(),
            risky_count,
        });
    }
    let config = LogisticConfig {
        reg: options.reg,
        step: options.step,
        iterations: options.iterations,
    };
    let fit = fit_logistic(&offsets, &labels, &config)?;
    Ok(Verdict::Direction(Explanation {
        g: fit.weights,
        features: features.to_vec(),
        bias: fit.bias,
        mode: Mode::Classification,
        reachable_size: labels.len(),
        risky_count,
        query_clamped: false,
    }))
}

/// Grid validity: inside the map and not a wall. Risky: lava.
impl PerturbationOracle for GridMap {
    fn is_valid(&self, state: &[f64]) -> bool {
        !matches!(
            self.tile_at_offset(state[0].round() as i64, state[1].round() as i64),
            None | Some(Tile::Wall)
        )
    }

    fn is_risky(&self, state: &[f64]) -> bool {
        self.tile_at_offset(state[0].round() as i64, state[1].round() as i64) == Some(Tile::Lava)
    }
}
