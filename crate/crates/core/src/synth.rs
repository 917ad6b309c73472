//! Toy corpus in the ASVspoof 2019 LA training layout: bona fide utterances
//! are voiced harmonic tones with pauses; spoofed ones add a broadband noise
//! floor whose colour depends on the pseudo-attack.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::{write_wav, AudioBuffer, PreprocessError, WavEncoding};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid toy corpus config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Audio(#[from] PreprocessError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseColour {
    White,
    /// One-pole lowpass.
    Brown,
    /// First difference.
    Blue,
}

impl NoiseColour {
    pub const ALL: [NoiseColour; 3] = [NoiseColour::White, NoiseColour::Brown, NoiseColour::Blue];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyKind {
    Bonafide,
    Spoof(NoiseColour),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_bonafide: usize,
    pub n_per_attack: usize,
    /// Pseudo-attacks A01.. cycle through the noise colours.
    pub n_attacks: usize,
    pub seed: u64,
    pub min_dur: f64,
    pub max_dur: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { n_bonafide: 40, n_per_attack: 14, n_attacks: 3, seed: 0, min_dur: 2.5, max_dur: 5.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSummary {
    pub bonafide: usize,
    pub spoof: usize,
    pub attacks: Vec<String>,
}

fn white(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.0..1.0)
}

fn coloured_noise(rng: &mut ChaCha8Rng, colour: NoiseColour, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..=n).map(|_| white(rng)).collect();
    let mut out: Vec<f64> = match colour {
        NoiseColour::White => raw[1..].to_vec(),
        NoiseColour::Brown => {
            let mut y = 0.0;
            raw[1..].iter().map(|x| {
                y = 0.9 * y + x;
                y
            })
            .collect()
        }
        NoiseColour::Blue => raw.windows(2).map(|w| w[1] - w[0]).collect(),
    };
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    out.iter_mut().for_each(|v| *v /= peak);
    out
}

/// Generate one toy utterance.
pub fn synth_utterance(kind: ToyKind, seed: u64, sample_rate: u32, duration: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sr = sample_rate as f64;
    let n = (duration * sr).round() as usize;
    let f0 = rng.gen_range(110.0..240.0);
    let n_harm = rng.gen_range(3..6);
    let syllable_rate = rng.gen_range(3.0..5.0);
    let vibrato = rng.gen_range(3.0..6.0);
    let mut phase = 0.0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / sr;
        let f = f0 * (1.0 + 0.02 * (2.0 * PI * vibrato * t).sin());
        phase += 2.0 * PI * f / sr;
        let env = 0.6 + 0.4 * (2.0 * PI * syllable_rate * t).sin();
        let voiced: f64 = (1..=n_harm).map(|h| (h as f64 * phase).sin() / h as f64).sum();
        out.push(0.25 * env * voiced);
    }
    match kind {
        ToyKind::Bonafide => {
            for v in out.iter_mut() {
                *v += 1e-4 * white(&mut rng);
            }
            // an occasional long pause, removed again by silence trimming
            if rng.gen_bool(0.5) && n > sr as usize {
                let start = rng.gen_range(0..n - (0.5 * sr) as usize);
                for v in &mut out[start..start + (0.5 * sr) as usize] {
                    *v = 0.0;
                }
            }
        }
        ToyKind::Spoof(colour) => {
            let noise = coloured_noise(&mut rng, colour, n);
            for (v, e) in out.iter_mut().zip(noise) {
                *v = 0.7 * *v + 0.2 * e;
            }
        }
    }
    out
}

/// Write the toy corpus under `root` and return its tallies.
pub fn generate_toy_corpus(root: impl AsRef<Path>, cfg: &SynthConfig) -> Result<SynthSummary, SynthError> {
    if cfg.n_bonafide == 0 || cfg.n_per_attack == 0 || cfg.n_attacks == 0 || cfg.n_attacks > 19 {
        return Err(SynthError::InvalidConfig("need >= 1 bona fide, >= 1 file per attack, 1..=19 attacks".into()));
    }
    if !(cfg.min_dur > 0.0 && cfg.max_dur >= cfg.min_dur) {
        return Err(SynthError::InvalidConfig("durations must satisfy 0 < min_dur <= max_dur".into()));
    }
    let root = root.as_ref();
    let wav_dir = root.join("ASVspoof2019_LA_train").join("wav");
    let proto_dir = root.join("ASVspoof2019_LA_cm_protocols");
    std::fs::create_dir_all(&wav_dir)?;
    std::fs::create_dir_all(&proto_dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut jobs: Vec<(ToyKind, String)> = (0..cfg.n_bonafide).map(|_| (ToyKind::Bonafide, "-".to_string())).collect();
    let attacks: Vec<String> = (1..=cfg.n_attacks).map(|a| format!("A{a:02}")).collect();
    for (a, id) in attacks.iter().enumerate() {
        let colour = NoiseColour::ALL[a % NoiseColour::ALL.len()];
        jobs.extend((0..cfg.n_per_attack).map(|_| (ToyKind::Spoof(colour), id.clone())));
    }

    let mut protocol = String::new();
    for (i, (kind, attack)) in jobs.iter().enumerate() {
        let file_id = format!("LA_T_{:07}", i + 1);
        let speaker = format!("LA_{:04}", i % 8);
        // every fourth file is stored at 22.05 kHz
        let rate = if i % 4 == 3 { 22_050 } else { 16_000 };
        let dur = rng.gen_range(cfg.min_dur..=cfg.max_dur);
        let samples = synth_utterance(*kind, rng.gen(), rate, dur);
        write_wav(wav_dir.join(format!("{file_id}.wav")), &AudioBuffer::new(samples, rate)?, WavEncoding::Pcm16)?;
        let key = if *kind == ToyKind::Bonafide { "bonafide" } else { "spoof" };
        writeln!(protocol, "{speaker} {file_id} - {attack} {key}").expect("writing to a String");
    }
    std::fs::write(proto_dir.join("ASVspoof2019.LA.cm.train.trn.txt"), protocol)?;
    Ok(SynthSummary { bonafide: cfg.n_bonafide, spoof: cfg.n_attacks * cfg.n_per_attack, attacks })
}
