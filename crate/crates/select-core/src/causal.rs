//! Restoration-intervention tracing over abstract layered models.
//!
//! Swap a single layer's parameters from an edited model into a base model,
//! score concept presence on both outputs, and record the per-layer score
//! drop. Layers whose swap moves the score the most are the ones carrying
//! the concept.
//!
//! The model here is a deliberately small stand-in for a real network: a
//! named stack of parameter blocks with a fixed linear forward map. The
//! forward rule hashes the prompt into a per-layer scalar in [0.25, 1] and
//! sums the scaled blocks, which keeps everything deterministic while still
//! letting interventions on different layers produce different features.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::concept::{Category, Concept};
use crate::hash::{scalar_in, unit_vector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error("models are not intervention-compatible at layer {index} (`{name}`): {reason}")]
    Incompatible {
        index: usize,
        name: String,
        reason: String,
    },
    #[error("model has no layers")]
    NoLayers,
    #[error("layer {index} (`{name}`) has {actual} parameters, expected {expected}")]
    RaggedLayer {
        index: usize,
        name: String,
        expected: usize,
        actual: usize,
    },
    #[error("at least one prompt is required")]
    NoPrompts,
    #[error("empty contribution list")]
    EmptyContributions,
    #[error("planted layer index {0} is out of range for {1} layers")]
    BadPlantIndex(usize, usize),
    #[error("model file is invalid: {0}")]
    BadModelFile(String),
}

/// One named parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub params: Vec<f64>,
}

/// An ordered stack of named parameter blocks with a deterministic forward
/// map. All blocks in one model share a dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredModel {
    pub layers: Vec<Layer>,
}

impl LayeredModel {
    pub fn new(layers: Vec<Layer>) -> Result<LayeredModel, TraceError> {
        if layers.is_empty() {
            return Err(TraceError::NoLayers);
        }
        let expected = layers[0].params.len();
        for (index, layer) in layers.iter().enumerate() {
            if layer.params.len() != expected {
                return Err(TraceError::RaggedLayer {
                    index,
                    name: layer.name.clone(),
                    expected,
                    actual: layer.params.len(),
                });
            }
        }
        Ok(LayeredModel { layers })
    }

    pub fn parse(json: &str) -> Result<LayeredModel, TraceError> {
        let raw: LayeredModel =
            serde_json::from_str(json).map_err(|e| TraceError::BadModelFile(e.to_string()))?;
        LayeredModel::new(raw.layers)
    }

    pub fn dimension(&self) -> usize {
        self.layers.first().map(|l| l.params.len()).unwrap_or(0)
    }

    /// Per-layer prompt scalar in [0.25, 1]; strictly positive so a layer's
    /// contribution never cancels across prompts.
    fn prompt_scalar(layer_name: &str, prompt: &str) -> f64 {
        let label = alloc::format!("{layer_name}|{prompt}");
        scalar_in(&label, 0, 0.25, 1.0)
    }

    /// Deterministic forward map: sum of parameter blocks, each scaled by
    /// its prompt scalar.
    pub fn forward(&self, prompt: &str) -> Vec<f64> {
        let mut features = alloc::vec![0.0; self.dimension()];
        for layer in &self.layers {
            let x = LayeredModel::prompt_scalar(&layer.name, prompt);
            for (f, p) in features.iter_mut().zip(&layer.params) {
                *f += x * p;
            }
        }
        features
    }

    fn forward_with_swap(&self, swap_index: usize, donor: &LayeredModel, prompt: &str) -> Vec<f64> {
        let mut features = alloc::vec![0.0; self.dimension()];
        for (k, layer) in self.layers.iter().enumerate() {
            let params = if k == swap_index {
                &donor.layers[k].params
            } else {
                &layer.params
            };
            let x = LayeredModel::prompt_scalar(&layer.name, prompt);
            for (f, p) in features.iter_mut().zip(params) {
                *f += x * p;
            }
        }
        features
    }
}

/// Deterministic concept-presence scorer over feature vectors.
pub trait ConceptScorer: Send + Sync {
    fn score(&self, features: &[f64], concept: &Concept) -> f64;
}

/// Projects features onto a hash-derived unit direction per concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashDirectionScorer {
    pub dimension: usize,
    pub seed: u64,
}

impl HashDirectionScorer {
    pub fn direction(&self, concept: &Concept) -> Vec<f64> {
        unit_vector(&concept.normalized(), self.seed, self.dimension)
    }
}

impl ConceptScorer for HashDirectionScorer {
    fn score(&self, features: &[f64], concept: &Concept) -> f64 {
        self.direction(concept)
            .iter()
            .zip(features)
            .map(|(d, f)| d * f)
            .sum()
    }
}

/// Per-layer contribution scores. `normalized` is min-max scaled within the
/// vector; a constant raw vector normalizes to all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerContribution {
    pub layer: String,
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionVector {
    pub concept: Concept,
    pub per_layer: Vec<LayerContribution>,
}

impl ContributionVector {
    /// Index of the largest raw delta (first on ties).
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.per_layer.iter().enumerate() {
            if best.is_none_or(|(_, raw)| c.raw > raw) {
                best = Some((i, c.raw));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Indices of the k largest raw deltas.
    pub fn top_k(&self, k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.per_layer.len()).collect();
        order.sort_by(|&a, &b| {
            self.per_layer[b]
                .raw
                .total_cmp(&self.per_layer[a].raw)
                .then(a.cmp(&b))
        });
        order.truncate(k);
        order
    }
}

/// Min-max scaling to [0, 1]; constant input maps to all zeros.
pub fn normalize_contributions(raw: &[f64]) -> Result<Vec<f64>, TraceError> {
    if raw.is_empty() {
        return Err(TraceError::EmptyContributions);
    }
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    if span == 0.0 {
        return Ok(alloc::vec![0.0; raw.len()]);
    }
    Ok(raw.iter().map(|v| (v - min) / span).collect())
}

fn check_compatible(base: &LayeredModel, edited: &LayeredModel) -> Result<(), TraceError> {
    if base.layers.len() != edited.layers.len() {
        return Err(TraceError::Incompatible {
            index: base.layers.len().min(edited.layers.len()),
            name: "<layer count>".into(),
            reason: alloc::format!(
                "base has {} layers, edited has {}",
                base.layers.len(),
                edited.layers.len()
            ),
        });
    }
    for (index, (a, b)) in base.layers.iter().zip(&edited.layers).enumerate() {
        if a.name != b.name {
            return Err(TraceError::Incompatible {
                index,
                name: a.name.clone(),
                reason: alloc::format!("edited layer is named `{}`", b.name),
            });
        }
        if a.params.len() != b.params.len() {
            return Err(TraceError::Incompatible {
                index,
                name: a.name.clone(),
                reason: alloc::format!(
                    "parameter blocks differ in shape ({} vs {})",
                    a.params.len(),
                    b.params.len()
                ),
            });
        }
    }
    Ok(())
}

/// For each layer, build the hybrid model (base with that one layer taken
/// from the edited model) and record the mean score drop over prompts.
/// A larger drop means the layer is more involved in the concept.
pub fn trace_layers<S: ConceptScorer + ?Sized>(
    base: &LayeredModel,
    edited: &LayeredModel,
    scorer: &S,
    concept: &Concept,
    prompts: &[String],
) -> Result<ContributionVector, TraceError> {
    check_compatible(base, edited)?;
    if prompts.is_empty() {
        return Err(TraceError::NoPrompts);
    }
    let base_scores: Vec<f64> = prompts
        .iter()
        .map(|p| scorer.score(&base.forward(p), concept))
        .collect();
    let mut raw = Vec::with_capacity(base.layers.len());
    for k in 0..base.layers.len() {
        let mut total = 0.0;
        for (prompt, base_score) in prompts.iter().zip(&base_scores) {
            let hybrid = base.forward_with_swap(k, edited, prompt);
            total += base_score - scorer.score(&hybrid, concept);
        }
        raw.push(total / prompts.len() as f64);
    }
    let normalized = normalize_contributions(&raw)?;
    let per_layer = base
        .layers
        .iter()
        .zip(raw.iter().zip(normalized))
        .map(|(layer, (r, n))| LayerContribution {
            layer: layer.name.clone(),
            raw: *r,
            normalized: n,
        })
        .collect();
    Ok(ContributionVector {
        concept: concept.clone(),
        per_layer,
    })
}

/// Synthetic base/edited model pair where only the planted layers carry a
/// concept-aligned parameter difference.
#[derive(Debug, Clone)]
pub struct PlantedFixture {
    pub base: LayeredModel,
    pub edited: LayeredModel,
    pub scorer: HashDirectionScorer,
    pub concept: Concept,
    pub planted: BTreeSet<usize>,
}

const PLANT_DIMENSION: usize = 8;
const PLANT_STRENGTH: f64 = 1.0;

/// Build a planted tracing fixture. The edited model equals the base model
/// except on the planted layers, where the concept direction has been
/// subtracted; tracing therefore recovers exactly the planted set as the
/// top-|planted| layers for any non-empty prompt list.
pub fn make_planted_model(
    num_layers: usize,
    planted_layers: &BTreeSet<usize>,
    seed: u64,
) -> Result<PlantedFixture, TraceError> {
    if num_layers == 0 {
        return Err(TraceError::NoLayers);
    }
    for &index in planted_layers {
        if index >= num_layers {
            return Err(TraceError::BadPlantIndex(index, num_layers));
        }
    }
    let concept = Concept::new(&alloc::format!("planted concept {seed}"), Category::General)
        .expect("non-empty name");
    let scorer = HashDirectionScorer {
        dimension: PLANT_DIMENSION,
        seed,
    };
    let direction = scorer.direction(&concept);

    let mut base_layers = Vec::with_capacity(num_layers);
    let mut edited_layers = Vec::with_capacity(num_layers);
    for k in 0..num_layers {
        let name = alloc::format!("layer{k:02}");
        let params: Vec<f64> = unit_vector(&alloc::format!("params|{name}"), seed, PLANT_DIMENSION)
            .iter()
            .map(|v| v * 2.0)
            .collect();
        let edited_params: Vec<f64> = if planted_layers.contains(&k) {
            params
                .iter()
                .zip(&direction)
                .map(|(p, d)| p - PLANT_STRENGTH * d)
                .collect()
        } else {
            params.clone()
        };
        base_layers.push(Layer {
            name: name.clone(),
            params,
        });
        edited_layers.push(Layer {
            name,
            params: edited_params,
        });
    }
    Ok(PlantedFixture {
        base: LayeredModel::new(base_layers)?,
        edited: LayeredModel::new(edited_layers)?,
        scorer,
        concept,
        planted: planted_layers.clone(),
    })
}
