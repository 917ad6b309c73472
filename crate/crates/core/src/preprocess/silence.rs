use super::{AudioBuffer, PreprocessConfig, PreprocessError};

/// Result of [`trim_silence`].
#[derive(Debug, Clone, PartialEq)]
pub struct SilenceTrim {
    pub audio: AudioBuffer,
    /// Number of input samples deleted.
    pub removed: usize,
    /// Set when a non-empty input was entirely silent; `audio` is empty then.
    pub all_silent: bool,
}

/// Delete maximal runs of silent frames lasting longer than
/// `cfg.min_silence_dur`. Shorter runs are kept; sample order is preserved.
///
/// A frame is silent when its RMS is below
/// `max(peak * 10^(threshold_db / 20), absolute_floor)`.
pub fn trim_silence(buf: &AudioBuffer, cfg: &PreprocessConfig) -> Result<SilenceTrim, PreprocessError> {
    if buf.sample_rate() != cfg.target_rate {
        return Err(PreprocessError::RateMismatch { expected: cfg.target_rate, actual: buf.sample_rate() });
    }
    cfg.validate()?;
    let rate = buf.sample_rate() as f64;
    let frame_len = ((cfg.silence_frame * rate).round() as usize).max(1);
    let max_kept_run = (cfg.min_silence_dur * rate).round() as usize;
    let threshold = (buf.peak() * 10f64.powf(cfg.silence_threshold_db / 20.0)).max(cfg.absolute_floor);

    let samples = buf.samples();
    let silent: Vec<bool> = samples
        .chunks(frame_len)
        .map(|frame| {
            let rms = (frame.iter().map(|s| s * s).sum::<f64>() / frame.len() as f64).sqrt();
            rms < threshold
        })
        .collect();

    let mut out = Vec::with_capacity(samples.len());
    let mut f = 0;
    while f < silent.len() {
        let start = f;
        let is_silent = silent[f];
        while f < silent.len() && silent[f] == is_silent {
            f += 1;
        }
        let lo = start * frame_len;
        let hi = (f * frame_len).min(samples.len());
        if !is_silent || hi - lo <= max_kept_run {
            out.extend_from_slice(&samples[lo..hi]);
        }
    }
    let removed = samples.len() - out.len();
    let all_silent = out.is_empty() && !samples.is_empty();
    Ok(SilenceTrim { audio: AudioBuffer::from_parts(out, buf.sample_rate()), removed, all_silent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(n: usize) -> Vec<f64> {
        (0..n).map(|i| 0.5 * (2.0 * PI * 300.0 * i as f64 / 16_000.0).sin()).collect()
    }

    fn tone_gap_tone(gap: usize) -> AudioBuffer {
        let mut v = tone(16_000);
        v.extend(std::iter::repeat(0.0).take(gap));
        v.extend(tone(16_000));
        AudioBuffer::new(v, 16_000).unwrap()
    }

    #[test]
    fn loud_input_is_unchanged() {
        let b = AudioBuffer::new(tone(16_000).iter().map(|s| s + 0.6).collect(), 16_000).unwrap();
        let t = trim_silence(&b, &PreprocessConfig::default()).unwrap();
        assert_eq!(t.audio, b);
        assert_eq!(t.removed, 0);
    }

    #[test]
    fn long_gap_is_removed() {
        let t = trim_silence(&tone_gap_tone(8_000), &PreprocessConfig::default()).unwrap();
        let dur = t.audio.duration();
        assert!((dur - 2.0).abs() <= 0.010 + 1e-12, "duration {dur}");
    }

    #[test]
    fn short_gap_is_kept() {
        let t = trim_silence(&tone_gap_tone(2_400), &PreprocessConfig::default()).unwrap();
        let dur = t.audio.duration();
        assert!((dur - 2.15).abs() <= 0.010 + 1e-12, "duration {dur}");
    }

    #[test]
    fn gap_of_exactly_min_duration_is_kept() {
        let t = trim_silence(&tone_gap_tone(3_200), &PreprocessConfig::default()).unwrap();
        assert_eq!(t.audio.len(), 35_200);
    }

    #[test]
    fn digital_silence_is_flagged() {
        let b = AudioBuffer::new(vec![0.0; 8_000], 16_000).unwrap();
        let t = trim_silence(&b, &PreprocessConfig::default()).unwrap();
        assert!(t.all_silent);
        assert!(t.audio.is_empty());
    }

    #[test]
    fn rate_must_match_config() {
        let b = AudioBuffer::new(vec![0.1; 100], 8_000).unwrap();
        assert!(matches!(
            trim_silence(&b, &PreprocessConfig::default()),
            Err(PreprocessError::RateMismatch { expected: 16_000, actual: 8_000 })
        ));
    }

    #[test]
    fn output_is_ordered_subsequence() {
        let mut v = Vec::new();
        for k in 0..6 {
            v.extend(tone(1_000 + 500 * k).iter().map(|s| s + k as f64 * 1e-3));
            v.extend(std::iter::repeat(0.0).take(1_000 * k * k));
        }
        let b = AudioBuffer::new(v.clone(), 16_000).unwrap();
        let out = trim_silence(&b, &PreprocessConfig::default()).unwrap().audio;
        let mut it = v.iter();
        for s in out.samples() {
            assert!(it.any(|x| x == s), "not a subsequence");
        }
    }
}
