use std::collections::BTreeMap;
use std::io::Write;

use aad_core::corpus::{materialize, oversample, Label, Subset};
use aad_core::frontends::FeatureMatrix;
use aad_core::gmm::{em_fit, write_model_file, EmConfig, EmFit, GmmError, GmmPairModel, TrainMeta};
use ndarray::Array2;
use serde_json::json;

use super::{corpus_err, load_fold, load_manifest, summary, write_file, FeatureIndex};
use crate::{CliError, RunConfig};

/// Stack the frames (columns) of every matrix as rows of one `M x D` array.
fn pool_frames<'a>(mats: impl Iterator<Item = &'a FeatureMatrix>, dim: usize) -> Array2<f64> {
    let mut values = Vec::new();
    for m in mats {
        for frame in m.data().columns() {
            values.extend(frame.iter());
        }
    }
    let rows = values.len() / dim;
    Array2::from_shape_vec((rows, dim), values).expect("every matrix has `dim` rows")
}

fn fit_class(frames: &Array2<f64>, em: &EmConfig, class: Label, fold_id: u32) -> Result<EmFit, CliError> {
    em_fit(frames.view(), em).map_err(|e| match e {
        GmmError::TooFewFrames { k, frames } => CliError::Invalid(format!(
            "fold {fold_id} {class}: K={k} components but only {frames} training frames"
        )),
        other => CliError::Invalid(format!("fold {fold_id} {class}: {other}")),
    })
}

fn trace_json(fit: &EmFit) -> serde_json::Value {
    json!({"iterations": fit.iterations, "converged": fit.converged, "log_likelihoods": fit.log_likelihoods})
}

pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let tag = cfg.frontend;
    let manifest = load_manifest(cfg)?;
    let index = FeatureIndex::load(cfg, tag)?;
    let dim = tag.rows(&cfg.frontend_cfg);
    let mut models = Vec::new();
    for &fold_id in &cfg.folds {
        let fold = load_fold(cfg, fold_id)?;
        let context = format!("fold {fold_id}");
        let train = materialize(&manifest, &fold, Subset::Train).map_err(corpus_err(&context))?;
        let mut cache: BTreeMap<String, FeatureMatrix> = BTreeMap::new();
        for r in &train {
            let m = index.features(cfg, tag, &r.path)?;
            if m.rows() != dim {
                return Err(CliError::Invalid(format!("{}: {} feature rows, config implies {dim}", r.path, m.rows())));
            }
            cache.insert(r.path.clone(), m);
        }
        for &seed in &cfg.seeds {
            let balanced = oversample(&train, seed).map_err(corpus_err(&context))?;
            let class_frames = |label: Label| {
                pool_frames(balanced.iter().filter(|r| r.label == label).map(|r| &cache[&r.path]), dim)
            };
            let em = EmConfig { seed, ..cfg.em.clone() };
            let bona = fit_class(&class_frames(Label::Bonafide), &em, Label::Bonafide, fold_id)?;
            let spoof = fit_class(&class_frames(Label::Spoof), &em, Label::Spoof, fold_id)?;

            let log = json!({
                "fold_id": fold_id,
                "seed": seed,
                "frontend": tag.name(),
                "bonafide": trace_json(&bona),
                "spoof": trace_json(&spoof),
            });
            let meta = TrainMeta {
                seed,
                iterations: (bona.iterations, spoof.iterations),
                final_log_likelihood: (bona.final_log_likelihood(), spoof.final_log_likelihood()),
            };
            let mut model = GmmPairModel::new(bona.gmm, spoof.gmm, tag)
                .map_err(|e| CliError::Invalid(format!("{context}: {e}")))?;
            model.train_meta = Some(meta.clone());

            let path = cfg.model_path(tag, fold_id, seed);
            let mut bytes = Vec::new();
            write_model_file(&mut bytes, &model).map_err(|e| CliError::Invalid(e.to_string()))?;
            write_file(&path, bytes)?;
            let mut log_text = serde_json::to_string_pretty(&log).expect("plain data serializes");
            log_text.push('\n');
            write_file(&path.with_extension("train.json"), log_text)?;

            writeln!(
                out,
                "fold {fold_id} seed {seed}: {} train records after oversampling, LL bonafide {:.4} ({} it), spoof {:.4} ({} it)",
                balanced.len(),
                meta.final_log_likelihood.0,
                meta.iterations.0,
                meta.final_log_likelihood.1,
                meta.iterations.1
            )?;
            models.push(path);
        }
    }
    summary(out, "train", json!({"frontend": tag.name(), "models": models}))
}
