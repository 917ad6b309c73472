//! Triangular filterbanks on a mel (HTK) or linear frequency axis.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::FrontendConfig;

/// Frequency warp used to place filter edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Warp {
    Mel,
    Linear,
}

/// HTK mel scale, `2595 log10(1 + f/700)`.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Edge frequencies in Hz: `n_filters + 2` points equally spaced on the
/// warped axis. Filter `k` rises from edge `k`, peaks at `k+1`, falls to `k+2`.
pub fn filter_edges(warp: Warp, n_filters: usize, fmin: f64, fmax: f64) -> Vec<f64> {
    let n = n_filters + 1;
    match warp {
        Warp::Linear => (0..=n).map(|i| fmin + i as f64 * (fmax - fmin) / n as f64).collect(),
        Warp::Mel => {
            let (lo, hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
            (0..=n)
                .map(|i| match i {
                    0 => fmin,
                    i if i == n => fmax,
                    i => mel_to_hz(lo + i as f64 * (hi - lo) / n as f64),
                })
                .collect()
        }
    }
}

/// Triangle with unit peak at `center`, zero at and beyond `lo` and `hi`.
pub fn triangle(f: f64, lo: f64, center: f64, hi: f64) -> f64 {
    if f <= lo || f >= hi {
        0.0
    } else if f <= center {
        (f - lo) / (center - lo)
    } else {
        (hi - f) / (hi - center)
    }
}

/// `n_filters × (n_fft/2 + 1)` weight matrix sampled at the FFT bin centres.
pub fn filterbank(cfg: &FrontendConfig, sample_rate: u32, warp: Warp) -> Array2<f64> {
    let n_bins = cfg.stft.n_bins();
    let fmax = cfg.fmax_for(sample_rate);
    let edges = filter_edges(warp, cfg.n_filters, cfg.fmin, fmax);
    let bin_hz = sample_rate as f64 / cfg.stft.n_fft as f64;
    Array2::from_shape_fn((cfg.n_filters, n_bins), |(k, b)| {
        triangle(b as f64 * bin_hz, edges[k], edges[k + 1], edges[k + 2])
    })
}

pub fn mel_filterbank(cfg: &FrontendConfig, sample_rate: u32) -> Array2<f64> {
    filterbank(cfg, sample_rate, Warp::Mel)
}

pub fn linear_filterbank(cfg: &FrontendConfig, sample_rate: u32) -> Array2<f64> {
    filterbank(cfg, sample_rate, Warp::Linear)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontends::StftConfig;

    #[test]
    fn mel_scale_reference_points() {
        assert_eq!(hz_to_mel(0.0), 0.0);
        let m = hz_to_mel(1000.0);
        assert!((m - 2595.0 * (1.0f64 + 1000.0 / 700.0).log10()).abs() < 1e-12);
        assert!((m - 999.99).abs() < 0.01, "{m}");
        for f in [0.0, 55.0, 1000.0, 7999.0] {
            assert!((mel_to_hz(hz_to_mel(f)) - f).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_peaks_are_evenly_spaced() {
        let edges = filter_edges(Warp::Linear, 80, 0.0, 8000.0);
        for k in 0..80 {
            assert!((edges[k + 1] - (k + 1) as f64 * 8000.0 / 81.0).abs() < 1e-9);
            assert!((edges[k + 2] - edges[k + 1] - 8000.0 / 81.0).abs() < 1e-9);
        }
    }

    #[test]
    fn weights_are_bounded_and_peak_at_one() {
        let cfg = FrontendConfig::default();
        for warp in [Warp::Mel, Warp::Linear] {
            let fb = filterbank(&cfg, 16_000, warp);
            assert_eq!(fb.dim(), (80, 257));
            assert!(fb.iter().all(|&w| (0.0..=1.0).contains(&w)));
            let edges = filter_edges(warp, 80, 0.0, 8000.0);
            for k in 0..80 {
                assert_eq!(triangle(edges[k + 1], edges[k], edges[k + 1], edges[k + 2]), 1.0);
            }
        }
    }

    #[test]
    fn no_spectral_holes() {
        let cfg = FrontendConfig::default();
        for warp in [Warp::Mel, Warp::Linear] {
            let fb = filterbank(&cfg, 16_000, warp);
            let edges = filter_edges(warp, 80, 0.0, 8000.0);
            for b in 0..257 {
                let f = b as f64 * 31.25;
                if f > edges[0] && f < edges[81] {
                    assert!(fb.column(b).sum() > 0.0, "{warp:?} bin {b} has no coverage");
                }
            }
        }
    }

    #[test]
    fn flat_spectrum_gives_equal_linear_energies() {
        // 63 filters over 0..8000 Hz put edges every 125 Hz = 4 bins, so each
        // sampled triangle has the same weight sum and maximum 1.0 on a bin.
        let cfg = FrontendConfig { n_filters: 63, n_coeffs: 63, ..Default::default() };
        let fb = linear_filterbank(&cfg, 16_000);
        let energies = fb.dot(&ndarray::Array1::<f64>::ones(257));
        for e in energies.iter() {
            assert!((e - energies[0]).abs() < 1e-9);
        }
        for row in fb.rows() {
            assert_eq!(row.iter().cloned().fold(0.0, f64::max), 1.0);
        }
    }

    #[test]
    fn mel_and_linear_banks_differ() {
        let cfg = FrontendConfig::default();
        assert_ne!(mel_filterbank(&cfg, 16_000), linear_filterbank(&cfg, 16_000));
    }

    #[test]
    fn respects_stft_size() {
        let cfg = FrontendConfig {
            stft: StftConfig { n_fft: 1024, win_length: 800, hop_length: 320, ..Default::default() },
            ..Default::default()
        };
        assert_eq!(mel_filterbank(&cfg, 16_000).dim(), (80, 513));
    }
}
