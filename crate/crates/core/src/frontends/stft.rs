use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Hann,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StftConfig {
    pub win_length: usize,
    pub hop_length: usize,
    pub n_fft: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self { win_length: 400, hop_length: 160, n_fft: 512, window: WindowKind::Hann }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<(), FrontendError> {
        if self.win_length == 0 || self.win_length > self.n_fft {
            return Err(FrontendError::InvalidConfig(format!(
                "win_length {} must be in 1..={}",
                self.win_length, self.n_fft
            )));
        }
        if self.hop_length == 0 {
            return Err(FrontendError::InvalidConfig("hop_length must be > 0".into()));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    /// `1 + floor((len - win) / hop)`, or `None` when the input is shorter than one window.
    pub fn n_frames(&self, len: usize) -> Option<usize> {
        (len >= self.win_length).then(|| 1 + (len - self.win_length) / self.hop_length)
    }

    pub fn window(&self) -> Vec<f64> {
        match self.window {
            WindowKind::Hann => hann_periodic(self.win_length),
        }
    }
}

/// Periodic Hann window, `0.5 - 0.5 cos(2πn/N)`.
pub fn hann_periodic(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
        .collect()
}

/// Planned short-time Fourier transform; cheap to share across threads.
#[derive(Clone)]
pub struct Stft {
    cfg: StftConfig,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft").field("cfg", &self.cfg).finish_non_exhaustive()
    }
}

impl Stft {
    pub fn new(cfg: &StftConfig) -> Result<Self, FrontendError> {
        cfg.validate()?;
        let fft = FftPlanner::new().plan_fft_forward(cfg.n_fft);
        Ok(Self { cfg: cfg.clone(), window: cfg.window(), fft })
    }

    pub fn config(&self) -> &StftConfig {
        &self.cfg
    }

    /// One-sided spectrum, `(n_fft/2 + 1) × n_frames`. Frame `t` covers
    /// samples `[t·hop, t·hop + win)`; no centre padding.
    pub fn process(&self, signal: &[f64]) -> Result<Array2<Complex64>, FrontendError> {
        let n_frames = self.cfg.n_frames(signal.len()).ok_or(FrontendError::TooShort {
            len: signal.len(),
            win_length: self.cfg.win_length,
        })?;
        let n_bins = self.cfg.n_bins();
        let mut out = Array2::zeros((n_bins, n_frames));
        let mut buf = vec![Complex64::new(0.0, 0.0); self.cfg.n_fft];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for t in 0..n_frames {
            let start = t * self.cfg.hop_length;
            let frame = &signal[start..start + self.cfg.win_length];
            for (slot, (x, w)) in buf.iter_mut().zip(frame.iter().zip(&self.window)) {
                *slot = Complex64::new(x * w, 0.0);
            }
            buf[self.cfg.win_length..].fill(Complex64::new(0.0, 0.0));
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (k, v) in buf[..n_bins].iter().enumerate() {
                out[[k, t]] = *v;
            }
        }
        Ok(out)
    }
}

pub fn stft(signal: &[f64], cfg: &StftConfig) -> Result<Array2<Complex64>, FrontendError> {
    Stft::new(cfg)?.process(signal)
}
