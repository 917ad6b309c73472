//! Bona fide / spoof detector and its model file:
//!
//! ```text
//! "AAGM" | u32 version | u8 tag | u32 K | u32 D
//! then for bonafide, spoof: K f64 weights | K*D f64 means | K*D f64 variances
//! ```
//!
//! Little-endian throughout. Training metadata is not stored.

use std::io::{Read, Write};

use ndarray::Array2;

use super::{Gmm, GmmError};
use crate::frontends::{FeatureMatrix, FrontendTag};

pub const MODEL_MAGIC: &[u8; 4] = b"AAGM";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainMeta {
    pub seed: u64,
    /// EM iterations for (bonafide, spoof).
    pub iterations: (usize, usize),
    /// Final mean per-frame training log-likelihood for (bonafide, spoof).
    pub final_log_likelihood: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmPairModel {
    pub bonafide: Gmm,
    pub spoof: Gmm,
    pub frontend_tag: FrontendTag,
    pub train_meta: Option<TrainMeta>,
}

impl GmmPairModel {
    pub fn new(bonafide: Gmm, spoof: Gmm, frontend_tag: FrontendTag) -> Result<Self, GmmError> {
        if bonafide.dim() != spoof.dim() {
            return Err(GmmError::DimensionMismatch { expected: bonafide.dim(), actual: spoof.dim() });
        }
        if bonafide.n_components() != spoof.n_components() {
            return Err(GmmError::InvalidModel(format!(
                "component counts differ: {} vs {}",
                bonafide.n_components(),
                spoof.n_components()
            )));
        }
        Ok(Self { bonafide, spoof, frontend_tag, train_meta: None })
    }

    pub fn dim(&self) -> usize {
        self.bonafide.dim()
    }

    /// Same model with the two mixtures exchanged.
    pub fn swapped(&self) -> Self {
        Self { bonafide: self.spoof.clone(), spoof: self.bonafide.clone(), ..self.clone() }
    }
}

/// Mean per-frame log-likelihood ratio, bona fide over spoof. Higher means
/// more bona fide.
pub fn score_utterance(model: &GmmPairModel, features: &FeatureMatrix) -> Result<f64, GmmError> {
    let data = features.data();
    if data.nrows() != model.dim() {
        return Err(GmmError::DimensionMismatch { expected: model.dim(), actual: data.nrows() });
    }
    if data.ncols() == 0 {
        return Err(GmmError::ZeroFrames);
    }
    let mut sum = 0.0;
    for frame in data.columns() {
        sum += model.bonafide.log_likelihood(frame)? - model.spoof.log_likelihood(frame)?;
    }
    Ok(sum / data.ncols() as f64)
}

fn push_gmm(bytes: &mut Vec<u8>, g: &Gmm) {
    let values = g.weights().iter().chain(g.means().iter()).chain(g.variances().iter());
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn write_model_file<W: Write>(mut w: W, model: &GmmPairModel) -> Result<(), GmmError> {
    let (k, d) = (model.bonafide.n_components(), model.dim());
    let mut bytes = Vec::with_capacity(17 + 2 * 8 * k * (1 + 2 * d));
    bytes.extend_from_slice(MODEL_MAGIC);
    bytes.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    bytes.push(model.frontend_tag.code());
    bytes.extend_from_slice(&(k as u32).to_le_bytes());
    bytes.extend_from_slice(&(d as u32).to_le_bytes());
    push_gmm(&mut bytes, &model.bonafide);
    push_gmm(&mut bytes, &model.spoof);
    w.write_all(&bytes)?;
    Ok(())
}

fn take_gmm(values: &mut impl Iterator<Item = f64>, k: usize, d: usize) -> Result<Gmm, GmmError> {
    let weights: Vec<f64> = values.take(k).collect();
    let means = Array2::from_shape_vec((k, d), values.take(k * d).collect()).expect("length checked");
    let variances = Array2::from_shape_vec((k, d), values.take(k * d).collect()).expect("length checked");
    Gmm::new(weights, means, variances).map_err(|e| GmmError::Format(e.to_string()))
}

pub fn read_model_file<R: Read>(mut r: R) -> Result<GmmPairModel, GmmError> {
    let mut header = [0u8; 17];
    r.read_exact(&mut header).map_err(|_| GmmError::Format("truncated header".into()))?;
    if &header[..4] != MODEL_MAGIC {
        return Err(GmmError::Format("bad magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != MODEL_VERSION {
        return Err(GmmError::Format(format!("unsupported version {version}")));
    }
    let tag = FrontendTag::from_code(header[8])
        .ok_or_else(|| GmmError::Format(format!("unknown front-end code {}", header[8])))?;
    let (k, d) = (u32_at(9) as usize, u32_at(13) as usize);
    if k == 0 || d == 0 {
        return Err(GmmError::Format(format!("empty model {k}x{d}")));
    }
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let expected = 2 * 8 * k * (1 + 2 * d);
    if payload.len() != expected {
        return Err(GmmError::Format(format!("expected {expected} payload bytes, found {}", payload.len())));
    }
    let mut values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let bonafide = take_gmm(&mut values, k, d)?;
    let spoof = take_gmm(&mut values, k, d)?;
    GmmPairModel::new(bonafide, spoof, tag)
}
