//! Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel.

use super::AudioBuffer;

const KAISER_BETA: f64 = 12.0;
/// Kernel taps per phase at the lower of the two rates.
const TAPS_PER_PHASE: usize = 32;
/// Cutoff as a fraction of the lower Nyquist frequency.
const ROLLOFF: f64 = 0.9;

/// Precomputed polyphase filter for one `(input_rate, output_rate)` pair.
#[derive(Debug, Clone)]
pub struct Resampler {
    input_rate: u32,
    output_rate: u32,
    up: u64,
    down: u64,
    half_taps: usize,
    /// `up` rows of `2 * half_taps` coefficients, each row summing to 1.
    phases: Vec<Vec<f64>>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

impl Resampler {
    pub fn new(input_rate: u32, output_rate: u32) -> Self {
        assert!(input_rate > 0 && output_rate > 0, "sample rates must be positive");
        let g = gcd(input_rate as u64, output_rate as u64);
        let up = output_rate as u64 / g;
        let down = input_rate as u64 / g;
        // Kernel is specified in input-sample units; when decimating it is
        // stretched by the rate ratio so the cutoff tracks the output Nyquist.
        let ratio = (up as f64 / down as f64).min(1.0);
        let cutoff = ROLLOFF * ratio;
        let half_width = (TAPS_PER_PHASE / 2) as f64 / ratio;
        let half_taps = half_width.ceil() as usize;
        let i0_beta = bessel_i0(KAISER_BETA);

        let phases = if up == down {
            Vec::new()
        } else {
            (0..up)
                .map(|p| {
                    let frac = p as f64 / up as f64;
                    // tap j sits at input offset (j - half_taps + 1) from floor(x)
                    let mut row: Vec<f64> = (0..2 * half_taps)
                        .map(|j| {
                            let offset = j as f64 - half_taps as f64 + 1.0;
                            let tau = frac - offset;
                            let r = tau / half_width;
                            if r.abs() >= 1.0 {
                                0.0
                            } else {
                                let win = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / i0_beta;
                                cutoff * sinc(cutoff * tau) * win
                            }
                        })
                        .collect();
                    let sum: f64 = row.iter().sum();
                    row.iter_mut().for_each(|c| *c /= sum);
                    row
                })
                .collect()
        };
        Self { input_rate, output_rate, up, down, half_taps, phases }
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        let num = input_len as u128 * self.output_rate as u128;
        let den = self.input_rate as u128;
        ((2 * num + den) / (2 * den)) as usize
    }

    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        if self.up == self.down {
            return input.to_vec();
        }
        let n_out = self.output_len(input.len());
        let len = input.len() as i64;
        let mut out = Vec::with_capacity(n_out);
        for n in 0..n_out as u64 {
            let pos = n * self.down;
            let base = (pos / self.up) as i64;
            let row = &self.phases[(pos % self.up) as usize];
            let start = base - self.half_taps as i64 + 1;
            let mut acc = 0.0;
            for (j, c) in row.iter().enumerate() {
                let idx = start + j as i64;
                if idx >= 0 && idx < len {
                    acc += c * input[idx as usize];
                }
            }
            out.push(acc);
        }
        out
    }
}

/// Band-limited resampling to `target_rate`; identity when the rates match.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> AudioBuffer {
    if buf.sample_rate() == target_rate {
        return buf.clone();
    }
    let r = Resampler::new(buf.sample_rate(), target_rate);
    AudioBuffer::from_parts(r.process(buf.samples()), target_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, rate: u32, secs: f64) -> AudioBuffer {
        let n = (rate as f64 * secs).round() as usize;
        AudioBuffer::new((0..n).map(|i| (2.0 * PI * freq * i as f64 / rate as f64).sin()).collect(), rate).unwrap()
    }

    /// Naive single-bin DFT power, independent of the FFT path.
    fn dft_power(x: &[f64], k: usize) -> f64 {
        let n = x.len() as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in x.iter().enumerate() {
            let a = -2.0 * PI * k as f64 * i as f64 / n;
            re += v * a.cos();
            im += v * a.sin();
        }
        re * re + im * im
    }

    #[test]
    fn identity_at_same_rate() {
        let b = tone(440.0, 16_000, 0.1);
        assert_eq!(resample(&b, 16_000), b);
    }

    #[test]
    fn length_formula() {
        let b = tone(100.0, 22_050, 1.0);
        let out = resample(&b, 16_000);
        assert_eq!(out.len(), 16_000);
        assert_eq!(out.sample_rate(), 16_000);
        assert_eq!(Resampler::new(44_100, 16_000).output_len(44_101), 16_000);
    }

    #[test]
    fn dc_is_preserved() {
        let b = AudioBuffer::new(vec![0.25; 4800], 48_000).unwrap();
        let out = resample(&b, 16_000);
        // away from the zero-padded edges
        for v in &out.samples()[100..1500] {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn tone_stays_clean_after_downsampling() {
        // 440 Hz is bin-centred on a 1 s window at 16 kHz, so a rectangular
        // DFT over exactly one second has no leakage of its own.
        let b = tone(440.0, 48_000, 3.0);
        let out = resample(&b, 16_000);
        let mid = &out.samples()[16_000..32_000];
        let peak = dft_power(mid, 440);
        let total: f64 = mid.iter().map(|v| v * v).sum::<f64>() * mid.len() as f64;
        // Parseval: two-sided power sum = N * energy; the tone occupies bins 440 and N-440.
        let out_of_band = total - 2.0 * peak;
        let db = 10.0 * (out_of_band.max(1e-300) / peak).log10();
        assert!(db < -60.0, "out-of-band {db:.1} dB");
    }

    #[test]
    fn upsampling_keeps_tone() {
        let b = tone(1000.0, 8_000, 3.0);
        let out = resample(&b, 16_000);
        let mid = &out.samples()[16_000..32_000];
        let peak = dft_power(mid, 1000);
        let total: f64 = mid.iter().map(|v| v * v).sum::<f64>() * mid.len() as f64;
        let db = 10.0 * ((total - 2.0 * peak).max(1e-300) / peak).log10();
        assert!(db < -60.0, "out-of-band {db:.1} dB");
    }

    #[test]
    fn aliasing_components_are_suppressed() {
        // 7.9 kHz at 48 kHz is near the output Nyquist; 12 kHz must vanish.
        let b = tone(12_000.0, 48_000, 1.0);
        let out = resample(&b, 16_000);
        let energy: f64 = out.samples()[2000..14_000].iter().map(|v| v * v).sum::<f64>() / 12_000.0;
        assert!(10.0 * energy.log10() < -60.0 + 10.0 * 0.5f64.log10());
    }

    #[test]
    fn duration_is_preserved() {
        for (rin, rout, n) in [(22_050u32, 16_000u32, 12_345usize), (8_000, 16_000, 777), (44_100, 16_000, 1)] {
            let b = AudioBuffer::new(vec![0.0; n], rin).unwrap();
            let out = resample(&b, rout);
            let diff = (out.len() as f64 / rout as f64 - n as f64 / rin as f64).abs();
            assert!(diff <= 1.0 / rout as f64);
        }
    }
}
