use std::io::Write;

use aad_core::metrics::{render_report, EvalFragment, EvalReport};
use serde_json::json;

use super::{summary, write_file};
use crate::{CliError, RunConfig};

/// Every EER fragment under `workdir/results`, in path order.
fn collect_fragments(cfg: &RunConfig) -> Result<Vec<EvalFragment>, CliError> {
    let root = cfg.workdir.join("results");
    let mut files = Vec::new();
    if root.is_dir() {
        for dir in std::fs::read_dir(&root)? {
            let dir = dir?.path();
            if dir.is_dir() {
                for f in std::fs::read_dir(&dir)? {
                    let f = f?.path();
                    if f.extension().is_some_and(|e| e == "json") {
                        files.push(f);
                    }
                }
            }
        }
    }
    files.sort();
    files
        .iter()
        .map(|f| {
            let text = std::fs::read_to_string(f)?;
            serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", f.display())))
        })
        .collect()
}

pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let fragments = collect_fragments(cfg)?;
    if fragments.is_empty() {
        return Err(CliError::MissingInput(format!(
            "no results under {}; run `aad eval` first",
            cfg.workdir.join("results").display()
        )));
    }
    let report = EvalReport::from_fragments(&fragments).map_err(|e| CliError::Invalid(e.to_string()))?;
    let table = render_report(&report);
    let json_path = cfg.workdir.join("report.json");
    let txt_path = cfg.workdir.join("report.txt");
    write_file(&json_path, report.to_json())?;
    write_file(&txt_path, &table)?;
    write!(out, "{table}")?;
    summary(
        out,
        "report",
        json!({"cells": report.cells.len(), "fragments": fragments.len(), "json": json_path, "text": txt_path}),
    )
}
