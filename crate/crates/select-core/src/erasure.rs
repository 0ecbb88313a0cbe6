//! Closed-form weight editing on embedding matrices.
//!
//! The objective is a regularized least-squares redirection: make the
//! edited weights map the target embeddings where the original weights map
//! the anchor embeddings, while keeping the update inert on the retain
//! embeddings:
//!
//! ```text
//! L(D) = ||(W + D) C1 - W C*||_F^2  +  lambda * ||D C0||_F^2
//! ```
//!
//! Setting the gradient to zero gives `D M = B` with
//! `M = C1 C1^T + lambda C0 C0^T` and `B = W (C* - C1) C1^T`. `M` is
//! routinely rank-deficient (the embedding dimension usually exceeds the
//! number of stacked embeddings), so the solver inverts `M` on its
//! numerical range via a symmetric eigendecomposition and returns the
//! minimum-norm stationary point. `B` always lies in that range, which
//! makes the result an exact global minimizer rather than a jittered
//! approximation; [`solve_gradient_oracle`] exists to verify exactly that
//! and must stay independent of the closed-form path.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::concept::normalize_name;
use crate::hash::unit_vector;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EditError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("lambda must be finite and >= 0, got {0}")]
    InvalidLambda(f64),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("normal matrix is singular (smallest eigenvalue {conditioning:.3e})")]
    Singular { conditioning: f64 },
    #[error("learning rate must be finite and > 0, got {0}")]
    InvalidLearningRate(f64),
    #[error("gradient descent diverged (gradient norm {gradient_norm:.3e})")]
    Diverged { gradient_norm: f64 },
    #[error("gradient descent did not converge in {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NotConverged {
        iterations: usize,
        gradient_norm: f64,
    },
    #[error("matrix file is inconsistent: rows*cols = {expected}, data length = {actual}")]
    BadMatrixFile { expected: usize, actual: usize },
    #[error("no embedding for concept `{0}`")]
    UnknownConcept(String),
    #[error("embedding for `{name}` has length {actual}, expected {expected}")]
    BadEmbeddingLength {
        name: String,
        expected: usize,
        actual: usize,
    },
}

/// One weight-edit instance: weights, target/anchor/retain embeddings
/// (stacked as columns), and the preservation weight lambda.
#[derive(Debug, Clone, PartialEq)]
pub struct EditProblem {
    pub weights: DMatrix<f64>,
    pub target: DMatrix<f64>,
    pub anchor: DMatrix<f64>,
    pub retain: DMatrix<f64>,
    pub lambda: f64,
}

impl EditProblem {
    pub fn new(
        weights: DMatrix<f64>,
        target: DMatrix<f64>,
        anchor: DMatrix<f64>,
        retain: DMatrix<f64>,
        lambda: f64,
    ) -> Result<EditProblem, EditError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(EditError::InvalidLambda(lambda));
        }
        let d_in = weights.ncols();
        if target.nrows() != d_in || anchor.nrows() != d_in || retain.nrows() != d_in {
            return Err(EditError::ShapeMismatch(alloc::format!(
                "weights are {}x{d_in}; embeddings must have {d_in} rows (target {}, anchor {}, retain {})",
                weights.nrows(),
                target.nrows(),
                anchor.nrows(),
                retain.nrows()
            )));
        }
        if target.shape() != anchor.shape() {
            return Err(EditError::ShapeMismatch(alloc::format!(
                "target is {:?} but anchor is {:?}",
                target.shape(),
                anchor.shape()
            )));
        }
        if target.ncols() == 0 {
            return Err(EditError::ShapeMismatch(
                "target must have at least one column".into(),
            ));
        }
        for m in [&weights, &target, &anchor, &retain] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(EditError::NonFinite);
            }
        }
        Ok(EditProblem {
            weights,
            target,
            anchor,
            retain,
            lambda,
        })
    }

    fn normal_matrix(&self) -> DMatrix<f64> {
        &self.target * self.target.transpose()
            + self.lambda * (&self.retain * self.retain.transpose())
    }

    fn rhs(&self) -> DMatrix<f64> {
        &self.weights * (&self.anchor - &self.target) * self.target.transpose()
    }

    /// Gradient of the objective at `delta`.
    pub fn gradient(&self, delta: &DMatrix<f64>) -> DMatrix<f64> {
        2.0 * ((&self.weights + delta) * &self.target - &self.weights * &self.anchor)
            * self.target.transpose()
            + 2.0 * self.lambda * (delta * &self.retain * self.retain.transpose())
    }
}

/// Solved edit with its loss decomposition. `conditioning` is the smallest
/// eigenvalue of the normal matrix; at or below zero means the solve went
/// through the rank-truncated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditSolution {
    pub delta: MatrixFile,
    pub total_loss: f64,
    pub e1: f64,
    pub e0: f64,
    pub conditioning: f64,
}

impl EditSolution {
    pub fn delta_matrix(&self) -> Result<DMatrix<f64>, EditError> {
        self.delta.to_matrix()
    }
}

/// Evaluate the loss decomposition for a proposed update.
pub fn loss_eval(p: &EditProblem, delta: &DMatrix<f64>) -> Result<(f64, f64, f64), EditError> {
    if delta.shape() != p.weights.shape() {
        return Err(EditError::ShapeMismatch(alloc::format!(
            "delta is {:?}, weights are {:?}",
            delta.shape(),
            p.weights.shape()
        )));
    }
    let erase_residual = (&p.weights + delta) * &p.target - &p.weights * &p.anchor;
    let e1 = erase_residual.norm_squared();
    let e0 = (delta * &p.retain).norm_squared();
    Ok((e1 + p.lambda * e0, e1, e0))
}

/// Solve the edit objective in closed form.
pub fn solve_closed_form(p: &EditProblem) -> Result<EditSolution, EditError> {
    let normal = p.normal_matrix();
    let rhs = p.rhs();
    let eigen = normal.clone().symmetric_eigen();
    let conditioning = eigen.eigenvalues.min();

    let delta = if rhs.norm_squared() == 0.0 {
        // Zero right-hand side (anchor equals target, or zero target
        // columns): zero is a global minimizer.
        DMatrix::zeros(p.weights.nrows(), p.weights.ncols())
    } else {
        let max_eigen = eigen.eigenvalues.max();
        let threshold = max_eigen.max(0.0) * 1e-14 * normal.nrows() as f64;
        if !(max_eigen > threshold && max_eigen > 0.0) {
            return Err(EditError::Singular { conditioning });
        }
        let inverted = eigen
            .eigenvalues
            .map(|v| if v > threshold { 1.0 / v } else { 0.0 });
        let pseudo_inverse = &eigen.eigenvectors
            * DMatrix::from_diagonal(&inverted)
            * eigen.eigenvectors.transpose();
        let delta = &rhs * pseudo_inverse;
        // The right-hand side lies in the range of the normal matrix, so
        // the truncated solve must satisfy the stationarity equation; a
        // large residual means genuinely inconsistent input.
        let residual = (&delta * &normal - &rhs).norm();
        if residual.is_nan() || residual > 1e-6 * (1.0 + rhs.norm()) {
            return Err(EditError::Singular { conditioning });
        }
        delta
    };

    let (total_loss, e1, e0) = loss_eval(p, &delta)?;
    Ok(EditSolution {
        delta: MatrixFile::from_matrix(&delta),
        total_loss,
        e1,
        e0,
        conditioning,
    })
}

/// Plain gradient descent on the objective from a zero start. This is the
/// independent verification oracle for [`solve_closed_form`]; it shares
/// nothing with the eigendecomposition path.
pub fn solve_gradient_oracle(
    p: &EditProblem,
    learning_rate: f64,
    max_iterations: usize,
    tolerance: f64,
) -> Result<DMatrix<f64>, EditError> {
    if !learning_rate.is_finite() || learning_rate <= 0.0 {
        return Err(EditError::InvalidLearningRate(learning_rate));
    }
    let mut delta = DMatrix::zeros(p.weights.nrows(), p.weights.ncols());
    let scale = 1.0 + p.rhs().norm();
    let mut gradient_norm = f64::INFINITY;
    for _ in 0..max_iterations {
        let gradient = p.gradient(&delta);
        gradient_norm = gradient.norm();
        if !gradient_norm.is_finite() || gradient_norm > 1e12 * scale {
            return Err(EditError::Diverged { gradient_norm });
        }
        if gradient_norm < tolerance {
            return Ok(delta);
        }
        delta -= learning_rate * gradient;
    }
    Err(EditError::NotConverged {
        iterations: max_iterations,
        gradient_norm,
    })
}

/// The edited weights `W + delta`.
pub fn apply_edit(weights: &DMatrix<f64>, delta: &DMatrix<f64>) -> Result<DMatrix<f64>, EditError> {
    if weights.shape() != delta.shape() {
        return Err(EditError::ShapeMismatch(alloc::format!(
            "weights are {:?}, delta is {:?}",
            weights.shape(),
            delta.shape()
        )));
    }
    Ok(weights + delta)
}

/// The matrix file schema: row-major data with explicit dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixFile {
    pub fn from_matrix(m: &DMatrix<f64>) -> MatrixFile {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                data.push(m[(r, c)]);
            }
        }
        MatrixFile {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>, EditError> {
        if self.rows * self.cols != self.data.len() {
            return Err(EditError::BadMatrixFile {
                expected: self.rows * self.cols,
                actual: self.data.len(),
            });
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }

    pub fn parse(json: &str) -> Result<MatrixFile, EditError> {
        serde_json::from_str(json).map_err(|e| EditError::ShapeMismatch(alloc::format!("{e}")))
    }
}

/// Source of concept embeddings for the edit pipeline: either an explicit
/// name-to-vector map, or deterministic unit vectors derived from the
/// concept name so the pipeline runs without any encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EmbeddingProvider {
    File {
        dimension: usize,
        vectors: BTreeMap<String, Vec<f64>>,
    },
    HashSynthetic {
        dimension: usize,
        seed: u64,
    },
}

impl EmbeddingProvider {
    pub fn from_map(vectors: BTreeMap<String, Vec<f64>>) -> Result<EmbeddingProvider, EditError> {
        let dimension = vectors
            .values()
            .next()
            .map(Vec::len)
            .ok_or_else(|| EditError::UnknownConcept("<empty embedding file>".into()))?;
        let mut normalized = BTreeMap::new();
        for (name, vector) in vectors {
            if vector.len() != dimension {
                return Err(EditError::BadEmbeddingLength {
                    name,
                    expected: dimension,
                    actual: vector.len(),
                });
            }
            normalized.insert(normalize_name(&name), vector);
        }
        Ok(EmbeddingProvider::File {
            dimension,
            vectors: normalized,
        })
    }

    pub fn dimension(&self) -> usize {
        match self {
            EmbeddingProvider::File { dimension, .. } => *dimension,
            EmbeddingProvider::HashSynthetic { dimension, .. } => *dimension,
        }
    }

    pub fn embedding(&self, name: &str) -> Result<Vec<f64>, EditError> {
        match self {
            EmbeddingProvider::File { vectors, .. } => vectors
                .get(&normalize_name(name))
                .cloned()
                .ok_or_else(|| EditError::UnknownConcept(name.into())),
            EmbeddingProvider::HashSynthetic { dimension, seed } => {
                Ok(unit_vector(&normalize_name(name), *seed, *dimension))
            }
        }
    }

    /// Stack embeddings for several names as the columns of a matrix.
    pub fn columns(&self, names: &[&str]) -> Result<DMatrix<f64>, EditError> {
        let dim = self.dimension();
        let mut m = DMatrix::zeros(dim, names.len());
        for (j, name) in names.iter().enumerate() {
            let v = self.embedding(name)?;
            for (i, value) in v.iter().enumerate() {
                m[(i, j)] = *value;
            }
        }
        Ok(m)
    }
}
