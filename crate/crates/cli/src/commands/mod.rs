pub mod eval;
pub mod extract;
pub mod folds;
pub mod ingest;
pub mod report;
pub mod synth;
pub mod train;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use aad_core::corpus::{CorpusError, FoldDefinition, Manifest};
use aad_core::frontends::{read_feature_file, FeatureMatrix, FrontendTag};
use serde::{Deserialize, Serialize};

use crate::{CliError, RunConfig};

/// Final machine-readable line of every command: `summary {json}`.
pub(crate) fn summary(out: &mut dyn Write, command: &str, mut fields: serde_json::Value) -> Result<(), CliError> {
    let mut line = serde_json::Map::new();
    line.insert("command".into(), command.into());
    if let Some(obj) = fields.as_object_mut() {
        line.append(obj);
    }
    writeln!(out, "summary {}", serde_json::Value::Object(line))?;
    Ok(())
}

pub(crate) fn corpus_err(context: &str) -> impl Fn(CorpusError) -> CliError + '_ {
    move |e| match e {
        CorpusError::Io(io) => CliError::MissingInput(format!("{context}: {io}")),
        CorpusError::MissingRoot(_) | CorpusError::MissingMetadata { .. } => {
            CliError::MissingInput(format!("{context}: {e}"))
        }
        other => CliError::Invalid(format!("{context}: {other}")),
    }
}

pub(crate) fn require(path: &Path, hint: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::MissingInput(format!("{} not found ({hint})", path.display())))
    }
}

pub(crate) fn load_manifest(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let path = cfg.manifest_path();
    require(&path, "run `aad ingest` first")?;
    Manifest::load(&path).map_err(corpus_err("manifest"))
}

pub(crate) fn load_fold(cfg: &RunConfig, fold_id: u32) -> Result<FoldDefinition, CliError> {
    let path = cfg.fold_path(fold_id);
    require(&path, "run `aad build-folds` first")?;
    FoldDefinition::load(&path).map_err(corpus_err(&format!("fold {fold_id}")))
}

pub(crate) fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub path: String,
    /// Relative to the front-end's feature directory.
    pub feature: String,
    pub rows: usize,
    pub cols: usize,
}

/// Sidecar `index.csv` mapping audio paths to feature files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureIndex {
    pub entries: BTreeMap<String, IndexEntry>,
}

impl FeatureIndex {
    pub fn path(cfg: &RunConfig, tag: FrontendTag) -> PathBuf {
        cfg.feature_dir(tag).join("index.csv")
    }

    pub fn load(cfg: &RunConfig, tag: FrontendTag) -> Result<Self, CliError> {
        let path = Self::path(cfg, tag);
        require(&path, "run `aad extract` first")?;
        let mut rd = csv::Reader::from_path(&path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for row in rd.deserialize() {
            let e: IndexEntry = row.map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
            entries.insert(e.path.clone(), e);
        }
        Ok(Self { entries })
    }

    pub fn load_or_empty(cfg: &RunConfig, tag: FrontendTag) -> Result<Self, CliError> {
        if Self::path(cfg, tag).exists() {
            Self::load(cfg, tag)
        } else {
            Ok(Self::default())
        }
    }

    pub fn save(&self, cfg: &RunConfig, tag: FrontendTag) -> Result<(), CliError> {
        let mut wr = csv::Writer::from_writer(Vec::new());
        for e in self.entries.values() {
            wr.serialize(e).map_err(|e| CliError::Invalid(format!("index: {e}")))?;
        }
        let bytes = wr.into_inner().map_err(|e| CliError::Invalid(format!("index: {e}")))?;
        write_file(&Self::path(cfg, tag), bytes)
    }

    pub fn features(&self, cfg: &RunConfig, tag: FrontendTag, audio_path: &str) -> Result<FeatureMatrix, CliError> {
        let entry = self.entries.get(audio_path).ok_or_else(|| {
            CliError::MissingInput(format!("no {tag} features for {audio_path}; run `aad extract`"))
        })?;
        let file = cfg.feature_dir(tag).join(&entry.feature);
        let reader = std::fs::File::open(&file)
            .map_err(|e| CliError::MissingInput(format!("{}: {e}", file.display())))?;
        let m = read_feature_file(std::io::BufReader::new(reader))
            .map_err(|e| CliError::Invalid(format!("{}: {e}", file.display())))?;
        if m.tag() != tag {
            return Err(CliError::Invalid(format!("{}: holds {} features, expected {tag}", file.display(), m.tag())));
        }
        Ok(m)
    }
}
