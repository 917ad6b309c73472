use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aad_core::corpus::Dataset;
use aad_core::frontends::{FrontendConfig, FrontendTag};
use aad_core::gmm::EmConfig;
use aad_core::preprocess::PreprocessConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a run needs. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset_roots: BTreeMap<Dataset, PathBuf>,
    pub workdir: PathBuf,
    #[serde(default = "default_frontend")]
    pub frontend: FrontendTag,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub frontend_cfg: FrontendConfig,
    #[serde(default)]
    pub em: EmConfig,
    #[serde(default = "default_folds")]
    pub folds: Vec<u32>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Seed for fold construction (the per-run seeds drive training).
    #[serde(default)]
    pub fold_seed: u64,
    /// Hand-written fold files that replace the generated ones.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fold_overrides: BTreeMap<u32, PathBuf>,
}

fn default_frontend() -> FrontendTag {
    FrontendTag::Lfcc
}

fn default_folds() -> Vec<u32> {
    vec![1, 2, 3]
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}

impl RunConfig {
    pub fn new(dataset_roots: BTreeMap<Dataset, PathBuf>, workdir: PathBuf) -> Self {
        Self {
            dataset_roots,
            workdir,
            frontend: default_frontend(),
            preprocess: PreprocessConfig::default(),
            frontend_cfg: FrontendConfig::default(),
            em: EmConfig::default(),
            folds: default_folds(),
            seeds: default_seeds(),
            fold_seed: 0,
            fold_overrides: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::MissingInput(format!("config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.dataset_roots.values_mut().for_each(resolve);
        cfg.fold_overrides.values_mut().for_each(resolve);
        resolve(&mut cfg.workdir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Invalid("config: seeds must not be empty".into()));
        }
        if self.folds.is_empty() || self.folds.iter().any(|f| !(1..=3).contains(f)) {
            return Err(CliError::Invalid(format!("config: folds must be a non-empty subset of 1..=3, got {:?}", self.folds)));
        }
        if let Some(k) = self.fold_overrides.keys().find(|k| !self.folds.contains(k)) {
            return Err(CliError::Invalid(format!("config: fold override for unconfigured fold {k}")));
        }
        self.preprocess.validate().map_err(|e| CliError::Invalid(format!("config: {e}")))?;
        self.frontend_cfg
            .validate(self.preprocess.target_rate)
            .map_err(|e| CliError::Invalid(format!("config: {e}")))?;
        self.em.validate().map_err(|e| CliError::Invalid(format!("config: {e}")))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.workdir.join("manifest.csv")
    }

    pub fn fold_path(&self, fold_id: u32) -> PathBuf {
        self.workdir.join("folds").join(format!("fold_{fold_id}.json"))
    }

    pub fn feature_dir(&self, tag: FrontendTag) -> PathBuf {
        self.workdir.join("features").join(tag_dir(tag))
    }

    pub fn model_path(&self, tag: FrontendTag, fold_id: u32, seed: u64) -> PathBuf {
        self.workdir.join("models").join(tag_dir(tag)).join(format!("gmm_f{fold_id}_s{seed}.aagm"))
    }

    pub fn scores_path(&self, tag: FrontendTag, fold_id: u32, seed: u64) -> PathBuf {
        self.workdir.join("scores").join(tag_dir(tag)).join(format!("scores_f{fold_id}_s{seed}.csv"))
    }

    pub fn fragment_path(&self, tag: FrontendTag, fold_id: u32, seed: u64) -> PathBuf {
        self.workdir.join("results").join(tag_dir(tag)).join(format!("eer_f{fold_id}_s{seed}.json"))
    }
}

/// Directory-safe form of a front-end tag (`lfcc+spec` -> `lfcc_spec`).
pub fn tag_dir(tag: FrontendTag) -> String {
    tag.name().replace('+', "_")
}
