use std::io::Write;

use aad_core::corpus::{ingest, merge, Tally};
use serde_json::json;

use super::{corpus_err, summary, write_file};
use crate::{CliError, RunConfig};

fn tally_line(t: &Tally) -> String {
    format!("bonafide={} spoof={} attacks={}", t.bonafide, t.spoof, t.attacks.len())
}

pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    if cfg.dataset_roots.is_empty() {
        return Err(CliError::Invalid("config lists no dataset_roots".into()));
    }
    let mut manifests = Vec::new();
    for (&dataset, root) in &cfg.dataset_roots {
        log::info!("ingesting {dataset} from {}", root.display());
        let m = ingest(root, dataset).map_err(corpus_err(dataset.name()))?;
        writeln!(out, "{dataset} {}", tally_line(&m.tallies()[&dataset]))?;
        manifests.push(m);
    }
    let merged = merge(&manifests).map_err(corpus_err("merge"))?;
    let total = merged.total();
    writeln!(out, "total {}", tally_line(&total))?;

    let mut bytes = Vec::new();
    merged.write_csv(&mut bytes).map_err(corpus_err("manifest"))?;
    let path = cfg.manifest_path();
    write_file(&path, bytes)?;
    summary(
        out,
        "ingest",
        json!({
            "bonafide": total.bonafide,
            "spoof": total.spoof,
            "attacks": total.attacks.len(),
            "manifest": path,
        }),
    )
}
