//! Spectral front-ends: STFT, triangular filterbanks, LFCC/MFCC cepstra and
//! magnitude+phase spectrogram features, plus their row-wise concatenations.

mod dct;
mod file;
mod filterbank;
mod stft;

use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, s, Array2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::AudioBuffer;

pub use dct::dct2_matrix;
pub use file::{read_feature_file, write_feature_file, FEATURE_MAGIC, FEATURE_VERSION};
pub use filterbank::{
    filter_edges, filterbank, hz_to_mel, linear_filterbank, mel_filterbank, mel_to_hz, triangle, Warp,
};
pub use stft::{hann_periodic, stft, Stft, StftConfig, WindowKind};

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("input of {len} samples is shorter than one {win_length}-sample window")]
    TooShort { len: usize, win_length: usize },
    #[error("invalid front-end config: {0}")]
    InvalidConfig(String),
    #[error("frame counts differ: {0} vs {1}")]
    FrameMismatch(usize, usize),
    #[error("front-ends {0} and {1} cannot be combined")]
    UnsupportedCombination(FrontendTag, FrontendTag),
    #[error("unknown front-end {0:?}")]
    UnknownTag(String),
    #[error("feature matrix contains a non-finite value at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("feature file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MelScale {
    #[default]
    Htk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontendConfig {
    pub stft: StftConfig,
    pub n_coeffs: usize,
    pub n_filters: usize,
    pub fmin: f64,
    /// Upper filterbank edge; `None` means the Nyquist frequency.
    pub fmax: Option<f64>,
    pub log_floor: f64,
    pub mel_scale: MelScale,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            n_coeffs: 80,
            n_filters: 80,
            fmin: 0.0,
            fmax: None,
            log_floor: 1e-10,
            mel_scale: MelScale::Htk,
        }
    }
}

impl FrontendConfig {
    pub fn fmax_for(&self, sample_rate: u32) -> f64 {
        self.fmax.unwrap_or(sample_rate as f64 / 2.0)
    }

    pub fn validate(&self, sample_rate: u32) -> Result<(), FrontendError> {
        self.stft.validate()?;
        let fmax = self.fmax_for(sample_rate);
        if self.n_filters == 0 || self.n_coeffs == 0 || self.n_coeffs > self.n_filters {
            return Err(FrontendError::InvalidConfig(format!(
                "need 0 < n_coeffs ({}) <= n_filters ({})",
                self.n_coeffs, self.n_filters
            )));
        }
        if !(self.fmin >= 0.0 && self.fmin < fmax && fmax <= sample_rate as f64 / 2.0) {
            return Err(FrontendError::InvalidConfig(format!(
                "need 0 <= fmin ({}) < fmax ({fmax}) <= {}",
                self.fmin,
                sample_rate as f64 / 2.0
            )));
        }
        if !(self.log_floor > 0.0) {
            return Err(FrontendError::InvalidConfig("log_floor must be > 0".into()));
        }
        Ok(())
    }
}

/// Which front-end (or concatenation) produced a feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrontendTag {
    #[serde(rename = "mfcc")]
    Mfcc,
    #[serde(rename = "lfcc")]
    Lfcc,
    #[serde(rename = "spec")]
    Spec,
    #[serde(rename = "mfcc+spec")]
    MfccSpec,
    #[serde(rename = "lfcc+spec")]
    LfccSpec,
    #[serde(rename = "mfcc+lfcc")]
    MfccLfcc,
}

impl FrontendTag {
    pub const ALL: [FrontendTag; 6] = [
        FrontendTag::Mfcc,
        FrontendTag::Lfcc,
        FrontendTag::Spec,
        FrontendTag::MfccSpec,
        FrontendTag::LfccSpec,
        FrontendTag::MfccLfcc,
    ];

    /// Byte code used in the binary feature and model files.
    pub fn code(self) -> u8 {
        match self {
            FrontendTag::Mfcc => 0,
            FrontendTag::Lfcc => 1,
            FrontendTag::Spec => 2,
            FrontendTag::MfccSpec => 3,
            FrontendTag::LfccSpec => 4,
            FrontendTag::MfccLfcc => 5,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.code() == code)
    }

    pub fn name(self) -> &'static str {
        match self {
            FrontendTag::Mfcc => "mfcc",
            FrontendTag::Lfcc => "lfcc",
            FrontendTag::Spec => "spec",
            FrontendTag::MfccSpec => "mfcc+spec",
            FrontendTag::LfccSpec => "lfcc+spec",
            FrontendTag::MfccLfcc => "mfcc+lfcc",
        }
    }

    /// Base front-ends in stacking order.
    pub fn parts(self) -> &'static [FrontendTag] {
        match self {
            FrontendTag::Mfcc => &[FrontendTag::Mfcc],
            FrontendTag::Lfcc => &[FrontendTag::Lfcc],
            FrontendTag::Spec => &[FrontendTag::Spec],
            FrontendTag::MfccSpec => &[FrontendTag::Mfcc, FrontendTag::Spec],
            FrontendTag::LfccSpec => &[FrontendTag::Lfcc, FrontendTag::Spec],
            FrontendTag::MfccLfcc => &[FrontendTag::Mfcc, FrontendTag::Lfcc],
        }
    }

    /// Tag of `[a; b]`, independent of stacking order.
    pub fn combine(a: FrontendTag, b: FrontendTag) -> Result<FrontendTag, FrontendError> {
        use FrontendTag::*;
        match (a, b) {
            (Mfcc, Spec) | (Spec, Mfcc) => Ok(MfccSpec),
            (Lfcc, Spec) | (Spec, Lfcc) => Ok(LfccSpec),
            (Mfcc, Lfcc) | (Lfcc, Mfcc) => Ok(MfccLfcc),
            _ => Err(FrontendError::UnsupportedCombination(a, b)),
        }
    }

    /// Number of feature rows for a given config.
    pub fn rows(self, cfg: &FrontendConfig) -> usize {
        self.parts()
            .iter()
            .map(|p| if *p == FrontendTag::Spec { 2 * cfg.n_coeffs } else { cfg.n_coeffs })
            .sum()
    }
}

impl fmt::Display for FrontendTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FrontendTag {
    type Err = FrontendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| FrontendError::UnknownTag(s.to_string()))
    }
}

/// `C × N` feature matrix (coefficients × frames).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Array2<f64>,
    tag: FrontendTag,
}

impl FeatureMatrix {
    pub fn new(data: Array2<f64>, tag: FrontendTag) -> Result<Self, FrontendError> {
        if let Some(((r, c), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(FrontendError::NonFinite(r, c));
        }
        Ok(Self { data, tag })
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn tag(&self) -> FrontendTag {
        self.tag
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_frames(&self) -> usize {
        self.data.ncols()
    }
}

/// Row-wise stack `[a; b]`.
pub fn concat_frontends(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<FeatureMatrix, FrontendError> {
    if a.n_frames() != b.n_frames() {
        return Err(FrontendError::FrameMismatch(a.n_frames(), b.n_frames()));
    }
    let tag = FrontendTag::combine(a.tag, b.tag)?;
    let data = concatenate(Axis(0), &[a.data.view(), b.data.view()]).expect("column counts checked");
    Ok(FeatureMatrix { data, tag })
}

/// Precomputed STFT plan, filterbanks and DCT for one config and sample rate.
/// Immutable after construction and shared read-only across workers.
#[derive(Debug, Clone)]
pub struct FeaturePipeline {
    cfg: FrontendConfig,
    stft: Stft,
    mel: Array2<f64>,
    linear: Array2<f64>,
    mel_row_sums: Vec<f64>,
    dct: Array2<f64>,
}

impl FeaturePipeline {
    pub fn new(cfg: &FrontendConfig, sample_rate: u32) -> Result<Self, FrontendError> {
        cfg.validate(sample_rate)?;
        let mel = mel_filterbank(cfg, sample_rate);
        let mel_row_sums = mel.rows().into_iter().map(|r| r.sum()).collect();
        Ok(Self {
            cfg: cfg.clone(),
            stft: Stft::new(&cfg.stft)?,
            linear: linear_filterbank(cfg, sample_rate),
            mel,
            mel_row_sums,
            dct: dct2_matrix(cfg.n_coeffs, cfg.n_filters),
        })
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.cfg
    }

    /// Log filterbank energies of the power spectrum, `n_filters × N`.
    pub fn log_energies(&self, buf: &AudioBuffer, warp: Warp) -> Result<Array2<f64>, FrontendError> {
        let spec = self.stft.process(buf.samples())?;
        let power = spec.mapv(|c| c.norm_sqr());
        let bank = match warp {
            Warp::Mel => &self.mel,
            Warp::Linear => &self.linear,
        };
        let floor = self.cfg.log_floor;
        Ok(bank.dot(&power).mapv(|e| (e + floor).ln()))
    }

    /// LFCC (`Warp::Linear`) or MFCC (`Warp::Mel`): orthonormal DCT-II of the
    /// log filterbank energies, first `n_coeffs` rows.
    pub fn cepstral(&self, buf: &AudioBuffer, warp: Warp) -> Result<FeatureMatrix, FrontendError> {
        let log_e = self.log_energies(buf, warp)?;
        let tag = match warp {
            Warp::Mel => FrontendTag::Mfcc,
            Warp::Linear => FrontendTag::Lfcc,
        };
        FeatureMatrix::new(self.dct.dot(&log_e), tag)
    }

    /// `[log mel magnitude; mel-weighted mean phase]`, `2·n_coeffs × N`.
    pub fn spec_features(&self, buf: &AudioBuffer) -> Result<FeatureMatrix, FrontendError> {
        let spec = self.stft.process(buf.samples())?;
        let n = self.cfg.n_coeffs;
        let floor = self.cfg.log_floor;
        let mel = self.mel.slice(s![..n, ..]);

        let magnitude = mel.dot(&spec.mapv(|c| c.norm())).mapv(|e| (e + floor).ln());
        let phase = spec.mapv(|c| if c.norm() == 0.0 { 0.0 } else { c.arg() });
        let mut angle = mel.dot(&phase);
        for (mut row, &sum) in angle.rows_mut().into_iter().zip(&self.mel_row_sums) {
            if sum > 0.0 {
                row.mapv_inplace(|v| v / sum);
            } else {
                row.fill(0.0);
            }
        }
        let data = concatenate(Axis(0), &[magnitude.view(), angle.view()]).expect("same frame count");
        FeatureMatrix::new(data, FrontendTag::Spec)
    }

    pub fn extract(&self, buf: &AudioBuffer, tag: FrontendTag) -> Result<FeatureMatrix, FrontendError> {
        let base = |t: FrontendTag| match t {
            FrontendTag::Mfcc => self.cepstral(buf, Warp::Mel),
            FrontendTag::Lfcc => self.cepstral(buf, Warp::Linear),
            _ => self.spec_features(buf),
        };
        match tag.parts() {
            [single] => base(*single),
            [a, b] => concat_frontends(&base(*a)?, &base(*b)?),
            _ => unreachable!("front-end tags have one or two parts"),
        }
    }
}

pub fn cepstral(buf: &AudioBuffer, cfg: &FrontendConfig, warp: Warp) -> Result<FeatureMatrix, FrontendError> {
    FeaturePipeline::new(cfg, buf.sample_rate())?.cepstral(buf, warp)
}

pub fn spec_features(buf: &AudioBuffer, cfg: &FrontendConfig) -> Result<FeatureMatrix, FrontendError> {
    FeaturePipeline::new(cfg, buf.sample_rate())?.spec_features(buf)
}
