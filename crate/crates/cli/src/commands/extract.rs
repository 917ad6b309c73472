use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Component, Path, PathBuf};

use aad_core::corpus::{materialize, SampleRecord, Subset};
use aad_core::frontends::{write_feature_file, FeaturePipeline};
use aad_core::preprocess::{load_wav, preprocess};
use rayon::prelude::*;
use serde_json::json;

use super::{corpus_err, load_fold, load_manifest, summary, write_file, FeatureIndex, IndexEntry};
use crate::{CliError, RunConfig};

/// Abort when more than this fraction of files fail.
const MAX_FAILURE_RATE: f64 = 0.10;

/// Feature file location mirroring the source layout under the dataset root.
fn feature_rel_path(cfg: &RunConfig, record: &SampleRecord) -> PathBuf {
    let audio = Path::new(&record.path);
    let rel = cfg
        .dataset_roots
        .get(&record.dataset)
        .and_then(|root| audio.strip_prefix(root).ok())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| audio.components().filter(|c| matches!(c, Component::Normal(_))).collect());
    let mut p = PathBuf::from(record.dataset.name()).join(rel);
    p.set_extension("aadf");
    p
}

fn select_records(cfg: &RunConfig, subset: Option<Subset>) -> Result<Vec<SampleRecord>, CliError> {
    let manifest = load_manifest(cfg)?;
    let Some(subset) = subset else {
        return Ok(manifest.records().to_vec());
    };
    let mut picked = BTreeMap::new();
    for &fold_id in &cfg.folds {
        let fold = load_fold(cfg, fold_id)?;
        for r in materialize(&manifest, &fold, subset).map_err(corpus_err(&format!("fold {fold_id}")))? {
            picked.insert(r.path.clone(), r);
        }
    }
    Ok(picked.into_values().collect())
}

pub fn run(cfg: &RunConfig, subset: Option<Subset>, jobs: Option<usize>, out: &mut dyn Write) -> Result<(), CliError> {
    let tag = cfg.frontend;
    let records = select_records(cfg, subset)?;
    if records.is_empty() {
        return Err(CliError::Invalid("no records selected for extraction".into()));
    }
    let pipeline = FeaturePipeline::new(&cfg.frontend_cfg, cfg.preprocess.target_rate)
        .map_err(|e| CliError::Invalid(format!("front-end: {e}")))?;
    let feature_dir = cfg.feature_dir(tag);

    let extract_one = |r: &SampleRecord| -> Result<IndexEntry, String> {
        let audio = load_wav(&r.path).map_err(|e| e.to_string())?;
        let audio = preprocess(&audio, &cfg.preprocess).map_err(|e| e.to_string())?;
        let features = pipeline.extract(&audio, tag).map_err(|e| e.to_string())?;
        let rel = feature_rel_path(cfg, r);
        let mut bytes = Vec::new();
        write_feature_file(&mut bytes, &features).map_err(|e| e.to_string())?;
        write_file(&feature_dir.join(&rel), bytes).map_err(|e| e.to_string())?;
        Ok(IndexEntry {
            path: r.path.clone(),
            feature: rel.to_string_lossy().replace('\\', "/"),
            rows: features.rows(),
            cols: features.n_frames(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    log::info!("extracting {tag} features for {} files on {} threads", records.len(), pool.current_num_threads());
    let results: Vec<Result<IndexEntry, String>> = pool.install(|| records.par_iter().map(extract_one).collect());

    let mut index = FeatureIndex::load_or_empty(cfg, tag)?;
    let mut failed = 0usize;
    for (r, res) in records.iter().zip(results) {
        match res {
            Ok(entry) => {
                index.entries.insert(entry.path.clone(), entry);
            }
            Err(e) => {
                failed += 1;
                index.entries.remove(&r.path);
                log::warn!("skipping {}: {e}", r.path);
            }
        }
    }
    let rate = failed as f64 / records.len() as f64;
    if rate > MAX_FAILURE_RATE {
        return Err(CliError::Invalid(format!(
            "{failed} of {} files failed ({:.1}% > {:.0}%); aborting",
            records.len(),
            100.0 * rate,
            100.0 * MAX_FAILURE_RATE
        )));
    }
    index.save(cfg, tag)?;
    writeln!(out, "{tag}: extracted {} files, {failed} warnings", records.len() - failed)?;
    summary(
        out,
        "extract",
        json!({
            "frontend": tag.name(),
            "subset": subset.map(|s| s.to_string()),
            "files": records.len(),
            "ok": records.len() - failed,
            "warnings": failed,
            "index": FeatureIndex::path(cfg, tag),
        }),
    )
}
