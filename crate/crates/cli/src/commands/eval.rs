use std::collections::BTreeSet;
use std::io::Write;

use aad_core::corpus::{materialize, FoldDefinition, Label, SampleRecord, Subset};
use aad_core::gmm::{read_model_file, score_utterance};
use aad_core::metrics::{save_scores, ScoreRecord, ScoreSet};
use serde_json::json;

use super::{corpus_err, load_fold, load_manifest, require, summary, write_file, FeatureIndex};
use crate::{CliError, RunConfig};

/// Train and eval must share no audio file and no attack-split spoof attack.
/// Attacks whose samples are split individually (FakeAVCeleb) are exempt from
/// the attack check.
pub fn leak_check(fold: &FoldDefinition, train: &[SampleRecord], eval: &[SampleRecord]) -> Result<(), CliError> {
    let attacks = |recs: &[SampleRecord]| -> BTreeSet<String> {
        recs.iter()
            .filter(|r| !r.is_bonafide() && fold.attacks.contains_key(&r.attack_id))
            .map(|r| r.attack_id.clone())
            .collect()
    };
    let shared: Vec<String> = attacks(train).intersection(&attacks(eval)).cloned().collect();
    if !shared.is_empty() {
        return Err(CliError::Invalid(format!(
            "fold {}: train/eval leak, attacks {shared:?} in both",
            fold.fold_id
        )));
    }
    let train_paths: BTreeSet<&str> = train.iter().map(|r| r.path.as_str()).collect();
    if let Some(r) = eval.iter().find(|r| train_paths.contains(r.path.as_str())) {
        return Err(CliError::Invalid(format!("fold {}: train/eval leak, {} in both", fold.fold_id, r.path)));
    }
    Ok(())
}

pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let tag = cfg.frontend;
    let manifest = load_manifest(cfg)?;
    let index = FeatureIndex::load(cfg, tag)?;
    let mut results = Vec::new();
    for &fold_id in &cfg.folds {
        let fold = load_fold(cfg, fold_id)?;
        let context = format!("fold {fold_id}");
        let train = materialize(&manifest, &fold, Subset::Train).map_err(corpus_err(&context))?;
        let eval = materialize(&manifest, &fold, Subset::Eval).map_err(corpus_err(&context))?;
        leak_check(&fold, &train, &eval)?;
        let features = eval.iter().map(|r| index.features(cfg, tag, &r.path)).collect::<Result<Vec<_>, _>>()?;

        for &seed in &cfg.seeds {
            let model_path = cfg.model_path(tag, fold_id, seed);
            require(&model_path, "run `aad train` first")?;
            let file = std::fs::File::open(&model_path)?;
            let model = read_model_file(std::io::BufReader::new(file))
                .map_err(|e| CliError::Invalid(format!("{}: {e}", model_path.display())))?;
            if model.frontend_tag != tag {
                return Err(CliError::Invalid(format!(
                    "{}: trained on {}, evaluating {tag}",
                    model_path.display(),
                    model.frontend_tag
                )));
            }
            let mut records = Vec::with_capacity(eval.len());
            for (r, f) in eval.iter().zip(&features) {
                let score = score_utterance(&model, f).map_err(|e| CliError::Invalid(format!("{}: {e}", r.path)))?;
                records.push(ScoreRecord { path: r.path.clone(), score, label: r.label });
            }
            let set = ScoreSet { fold_id, seed, tag, records };
            let fragment = set.fragment().map_err(|e| CliError::Invalid(format!("{context} seed {seed}: {e}")))?;

            let scores_path = cfg.scores_path(tag, fold_id, seed);
            if let Some(dir) = scores_path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            save_scores(&scores_path, &set.records).map_err(|e| CliError::Invalid(e.to_string()))?;
            let mut text = serde_json::to_string_pretty(&fragment).expect("plain data serializes");
            text.push('\n');
            write_file(&cfg.fragment_path(tag, fold_id, seed), text)?;

            let n_bona = set.records.iter().filter(|r| r.label == Label::Bonafide).count();
            writeln!(
                out,
                "fold {fold_id} seed {seed}: EER {:.3}% over {} bona fide / {} spoof",
                fragment.eer,
                n_bona,
                set.records.len() - n_bona
            )?;
            results.push(json!({"fold_id": fold_id, "seed": seed, "eer": fragment.eer}));
        }
    }
    summary(out, "eval", json!({"frontend": tag.name(), "results": results}))
}
