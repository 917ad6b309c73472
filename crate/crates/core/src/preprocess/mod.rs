//! Waveform preprocessing: WAV I/O, resampling, silence removal and
//! fixed-length trim/repeat-pad.
//!
//! The canonical chain applied to every utterance before feature extraction is
//! [`preprocess`]: downmix to mono (done by [`load_wav`]), resample to the
//! target rate, delete long silent runs, then trim or repeat-pad to a fixed
//! duration.

mod resample;
mod silence;
mod wav;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use resample::{resample, Resampler};
pub use silence::{trim_silence, SilenceTrim};
pub use wav::{load_wav, read_wav, write_wav, WavEncoding};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("cannot read audio file: {0}")]
    Unreadable(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("audio contains no samples")]
    EmptyAudio,
    #[error("audio is entirely silent after silence removal")]
    AllSilent,
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },
    #[error("sample rate {actual} Hz does not match the configured target {expected} Hz")]
    RateMismatch { expected: u32, actual: u32 },
    #[error("invalid preprocessing config: {0}")]
    InvalidConfig(String),
}

/// Mono waveform with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, PreprocessError> {
        if sample_rate == 0 {
            return Err(PreprocessError::InvalidSampleRate);
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(PreprocessError::NonFiniteSample { index });
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }

    // Invariants already hold for derived buffers.
    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(sample_rate > 0);
        Self { samples, sample_rate }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Output sample rate in Hz.
    pub target_rate: u32,
    /// Silent runs strictly longer than this (seconds) are deleted.
    pub min_silence_dur: f64,
    /// Output duration in seconds.
    pub target_dur: f64,
    /// Frame length (seconds) used by the silence detector.
    pub silence_frame: f64,
    /// Frame RMS threshold relative to the buffer peak, in dB.
    pub silence_threshold_db: f64,
    /// Absolute RMS floor below which a frame is always silent.
    pub absolute_floor: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            target_rate: 16_000,
            min_silence_dur: 0.2,
            target_dur: 4.0,
            silence_frame: 0.010,
            silence_threshold_db: -40.0,
            absolute_floor: 1e-4,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        let bad = |m: &str| Err(PreprocessError::InvalidConfig(m.to_string()));
        if self.target_rate == 0 {
            return bad("target_rate must be > 0");
        }
        for (name, v) in [
            ("target_dur", self.target_dur),
            ("min_silence_dur", self.min_silence_dur),
            ("silence_frame", self.silence_frame),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PreprocessError::InvalidConfig(format!("{name} must be > 0")));
            }
        }
        let ratio = self.min_silence_dur / self.silence_frame;
        if ratio.round() < 1.0 {
            return bad("min_silence_dur must span at least one silence frame");
        }
        if !self.absolute_floor.is_finite() || self.absolute_floor < 0.0 {
            return bad("absolute_floor must be a non-negative number");
        }
        Ok(())
    }

    /// Output length in samples at the target rate.
    pub fn target_len(&self) -> usize {
        (self.target_dur * self.target_rate as f64).round() as usize
    }
}

/// Trim to the first `round(target_dur * rate)` samples, or tile the buffer
/// end-to-end and truncate when it is shorter.
pub fn fix_length(buf: &AudioBuffer, cfg: &PreprocessConfig) -> Result<AudioBuffer, PreprocessError> {
    if buf.is_empty() {
        return Err(PreprocessError::EmptyAudio);
    }
    let target = (cfg.target_dur * buf.sample_rate as f64).round() as usize;
    let src = buf.samples();
    let out = if src.len() >= target {
        src[..target].to_vec()
    } else {
        src.iter().copied().cycle().take(target).collect()
    };
    Ok(AudioBuffer::from_parts(out, buf.sample_rate))
}

/// Full chain: resample, silence removal, fixed-length trim/pad.
pub fn preprocess(buf: &AudioBuffer, cfg: &PreprocessConfig) -> Result<AudioBuffer, PreprocessError> {
    cfg.validate()?;
    if buf.is_empty() {
        return Err(PreprocessError::EmptyAudio);
    }
    let resampled = resample(buf, cfg.target_rate);
    let trimmed = trim_silence(&resampled, cfg)?;
    if trimmed.all_silent {
        return Err(PreprocessError::AllSilent);
    }
    fix_length(&trimmed.audio, cfg)
}
