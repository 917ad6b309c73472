//! Diagonal-covariance Gaussian mixtures trained by EM, and the bona fide vs
//! spoof likelihood-ratio detector built from a pair of them.

mod em;
mod pair;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use em::{em_fit, EmFit};
pub use pair::{read_model_file, score_utterance, write_model_file, GmmPairModel, TrainMeta, MODEL_MAGIC, MODEL_VERSION};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Error)]
pub enum GmmError {
    #[error("{frames} frames are not enough to fit {k} components")]
    TooFewFrames { k: usize, frames: usize },
    #[error("dimension mismatch: model has {expected}, input has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("no frames to score")]
    ZeroFrames,
    #[error("invalid mixture: {0}")]
    InvalidModel(String),
    #[error("invalid EM config: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    /// Number of mixture components.
    pub k: usize,
    pub max_iters: usize,
    /// Stop when the per-frame log-likelihood improves by less than this fraction.
    pub rel_tol: f64,
    pub var_floor: f64,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self { k: 64, max_iters: 50, rel_tol: 1e-5, var_floor: 1e-6, seed: 0 }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<(), GmmError> {
        if self.k == 0 || self.max_iters == 0 {
            return Err(GmmError::InvalidConfig("k and max_iters must be >= 1".into()));
        }
        if !(self.var_floor > 0.0) || !(self.rel_tol >= 0.0) {
            return Err(GmmError::InvalidConfig("var_floor must be > 0 and rel_tol >= 0".into()));
        }
        Ok(())
    }
}

/// Mixture of `K` diagonal Gaussians in `D` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Gmm {
    weights: Vec<f64>,
    means: Array2<f64>,
    variances: Array2<f64>,
    // cached: ln w_k - (D ln 2π + Σ_d ln σ²_kd) / 2
    log_norm: Vec<f64>,
    inv_var: Array2<f64>,
}

impl Gmm {
    pub fn new(weights: Vec<f64>, means: Array2<f64>, variances: Array2<f64>) -> Result<Self, GmmError> {
        let k = weights.len();
        if k == 0 || means.dim() != variances.dim() || means.nrows() != k || means.ncols() == 0 {
            return Err(GmmError::InvalidModel(format!(
                "shapes: {} weights, means {:?}, variances {:?}",
                k,
                means.dim(),
                variances.dim()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(GmmError::InvalidModel("weights must be >= 0 and sum to 1".into()));
        }
        if variances.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || means.iter().any(|m| !m.is_finite()) {
            return Err(GmmError::InvalidModel("variances must be positive and means finite".into()));
        }
        Ok(Self::from_parts(weights, means, variances))
    }

    fn from_parts(weights: Vec<f64>, means: Array2<f64>, variances: Array2<f64>) -> Self {
        let d = means.ncols() as f64;
        let log_norm = weights
            .iter()
            .zip(variances.rows())
            .map(|(w, var)| w.ln() - 0.5 * (d * LN_2PI + var.iter().map(|v| v.ln()).sum::<f64>()))
            .collect();
        let inv_var = variances.mapv(|v| 1.0 / v);
        Self { weights, means, variances, log_norm, inv_var }
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.ncols()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &Array2<f64> {
        &self.means
    }

    pub fn variances(&self) -> &Array2<f64> {
        &self.variances
    }

    /// `ln(w_k N(x; μ_k, σ²_k))` for every component, written into `out`.
    fn log_joint(&self, frame: ArrayView1<f64>, out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            let mut q = 0.0;
            for ((x, m), iv) in frame.iter().zip(self.means.row(k)).zip(self.inv_var.row(k)) {
                let diff = x - m;
                q += diff * diff * iv;
            }
            *slot = self.log_norm[k] - 0.5 * q;
        }
    }

    fn check_frame(&self, frame: ArrayView1<f64>) -> Result<(), GmmError> {
        if frame.len() != self.dim() {
            return Err(GmmError::DimensionMismatch { expected: self.dim(), actual: frame.len() });
        }
        Ok(())
    }

    /// `ln Σ_k w_k N(x; μ_k, diag σ²_k)` via log-sum-exp.
    pub fn log_likelihood(&self, frame: ArrayView1<f64>) -> Result<f64, GmmError> {
        self.check_frame(frame)?;
        let mut buf = vec![0.0; self.n_components()];
        self.log_joint(frame, &mut buf);
        Ok(log_sum_exp(&buf))
    }

    /// Posterior component probabilities for one frame.
    pub fn responsibilities(&self, frame: ArrayView1<f64>) -> Result<Vec<f64>, GmmError> {
        self.check_frame(frame)?;
        let mut buf = vec![0.0; self.n_components()];
        self.log_joint(frame, &mut buf);
        let lse = log_sum_exp(&buf);
        Ok(buf.into_iter().map(|l| (l - lse).exp()).collect())
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
