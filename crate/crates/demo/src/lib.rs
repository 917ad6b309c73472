//! WebAssembly bindings for the browser demo. Each export returns a JSON
//! string; the `*_json` functions hold the logic and run natively in tests.

use aad_core::corpus::Label;
use aad_core::frontends::{filterbank, FeaturePipeline, FrontendConfig, FrontendTag, Warp};
use aad_core::metrics::{compute_eer, det_points, read_scores_csv};
use aad_core::preprocess::{preprocess, AudioBuffer, PreprocessConfig};
use aad_core::synth::{synth_utterance, NoiseColour, ToyKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const RATE: u32 = 16_000;

fn toy_kind(name: &str) -> Result<ToyKind, String> {
    Ok(match name {
        "bonafide" => ToyKind::Bonafide,
        "white" => ToyKind::Spoof(NoiseColour::White),
        "brown" => ToyKind::Spoof(NoiseColour::Brown),
        "blue" => ToyKind::Spoof(NoiseColour::Blue),
        other => return Err(format!("unknown utterance kind {other:?}")),
    })
}

/// Features of a 4 s toy utterance: `{tag, rows, cols, min, max, data}` with
/// `data` row-major.
pub fn feature_map_json(kind: &str, seed: u64, frontend: &str) -> Result<Value, String> {
    let tag: FrontendTag = frontend.parse().map_err(|e| format!("{e}"))?;
    let raw = AudioBuffer::new(synth_utterance(toy_kind(kind)?, seed, RATE, 4.0), RATE).map_err(|e| e.to_string())?;
    let audio = preprocess(&raw, &PreprocessConfig::default()).map_err(|e| e.to_string())?;
    let pipeline = FeaturePipeline::new(&FrontendConfig::default(), RATE).map_err(|e| e.to_string())?;
    let f = pipeline.extract(&audio, tag).map_err(|e| e.to_string())?;
    let data: Vec<f64> = f.data().iter().copied().collect();
    let min = data.iter().copied().fold(f64::INFINITY, f64::min);
    let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(json!({"tag": tag.name(), "rows": f.rows(), "cols": f.n_frames(), "min": min, "max": max, "data": data}))
}

/// Triangular filter responses at the FFT bin frequencies: `{freqs, filters}`.
pub fn filterbank_json(warp: &str, n_filters: usize) -> Result<Value, String> {
    let warp = match warp {
        "mel" => Warp::Mel,
        "linear" => Warp::Linear,
        other => return Err(format!("unknown warp {other:?}")),
    };
    if !(1..=128).contains(&n_filters) {
        return Err("n_filters must be in 1..=128".into());
    }
    let cfg = FrontendConfig { n_filters, n_coeffs: n_filters, ..FrontendConfig::default() };
    let fb = filterbank(&cfg, RATE, warp);
    let n_bins = fb.ncols();
    let freqs: Vec<f64> = (0..n_bins).map(|k| k as f64 * RATE as f64 / cfg.stft.n_fft as f64).collect();
    let filters: Vec<Vec<f64>> = fb.rows().into_iter().map(|r| r.to_vec()).collect();
    Ok(json!({"freqs": freqs, "filters": filters}))
}

fn det_json(scores: &[(f64, Label)]) -> Result<Value, String> {
    let eer = compute_eer(scores).map_err(|e| e.to_string())?;
    let points: Vec<Value> = det_points(scores)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|p| json!({"threshold": if p.threshold.is_finite() { json!(p.threshold) } else { Value::Null }, "far": p.far, "frr": p.frr}))
        .collect();
    Ok(json!({"eer": eer, "n": scores.len(), "points": points}))
}

/// FAR/FRR curve and EER for Gaussian scores: bona fide ~ N(separation, 1),
/// spoof ~ N(0, 1).
pub fn synthetic_eer_json(separation: f64, n_per_class: usize, seed: u64) -> Result<Value, String> {
    if n_per_class == 0 || n_per_class > 100_000 || !separation.is_finite() {
        return Err("need 1..=100000 scores per class and a finite separation".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || {
        let (u, v): (f64, f64) = (1.0 - rng.gen::<f64>(), rng.gen());
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    };
    let mut scores: Vec<(f64, Label)> = (0..n_per_class).map(|_| (separation + gauss(), Label::Bonafide)).collect();
    scores.extend((0..n_per_class).map(|_| (gauss(), Label::Spoof)));
    det_json(&scores)
}

/// FAR/FRR curve and EER for a pasted `path,score,label` CSV.
pub fn csv_eer_json(text: &str) -> Result<Value, String> {
    let records = read_scores_csv(text.as_bytes()).map_err(|e| e.to_string())?;
    let scores: Vec<(f64, Label)> = records.into_iter().map(|r| (r.score, r.label)).collect();
    det_json(&scores)
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn feature_map(kind: &str, seed: u32, frontend: &str) -> Result<String, JsValue> {
    to_js(feature_map_json(kind, seed as u64, frontend))
}

#[wasm_bindgen]
pub fn filterbank_curves(warp: &str, n_filters: u32) -> Result<String, JsValue> {
    to_js(filterbank_json(warp, n_filters as usize))
}

#[wasm_bindgen]
pub fn synthetic_eer(separation: f64, n_per_class: u32, seed: u32) -> Result<String, JsValue> {
    to_js(synthetic_eer_json(separation, n_per_class as usize, seed as u64))
}

#[wasm_bindgen]
pub fn csv_eer(text: &str) -> Result<String, JsValue> {
    to_js(csv_eer_json(text))
}
