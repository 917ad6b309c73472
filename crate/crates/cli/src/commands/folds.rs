use std::io::Write;

use aad_core::corpus::{build_fold, validate_fold, FoldDefinition, Subset};
use serde_json::json;

use super::{corpus_err, load_manifest, require, summary, write_file};
use crate::{CliError, RunConfig};

pub fn run(cfg: &RunConfig, force: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let manifest = load_manifest(cfg)?;
    let mut written = Vec::new();
    for &fold_id in &cfg.folds {
        let path = cfg.fold_path(fold_id);
        if path.exists() && !force {
            return Err(CliError::Invalid(format!("{} exists; pass --force to overwrite", path.display())));
        }
        let context = format!("fold {fold_id}");
        let fold = match cfg.fold_overrides.get(&fold_id) {
            Some(src) => {
                require(src, "fold override")?;
                let f = FoldDefinition::load(src).map_err(corpus_err(&context))?;
                if f.fold_id != fold_id {
                    return Err(CliError::Invalid(format!("{}: declares fold {}, configured as {fold_id}", src.display(), f.fold_id)));
                }
                f
            }
            None => build_fold(&manifest, fold_id, cfg.fold_seed).map_err(corpus_err(&context))?,
        };
        validate_fold(&manifest, &fold).map_err(corpus_err(&context))?;
        write_file(&path, fold.to_json())?;
        let list = |s: Subset| fold.attacks_in(s).into_iter().collect::<Vec<_>>().join(",");
        writeln!(
            out,
            "fold {fold_id}: train [{}] test [{}] eval [{}]",
            list(Subset::Train),
            list(Subset::Test),
            list(Subset::Eval)
        )?;
        written.push(path);
    }
    summary(out, "build-folds", json!({"folds": cfg.folds, "files": written}))
}
