//! Corpus manifests, per-dataset ingestion, attack-disjoint fold construction
//! and class-balancing oversampling.

mod fold;
mod ingest;
mod oversample;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fold::{build_fold, materialize, train_attack_quota, validate_fold, FoldDefinition, Subset};
pub use ingest::{ingest, WAVEFAKE_ATTACKS};
pub use oversample::oversample;

/// Spoof attack id recorded for bona fide samples.
pub const BONAFIDE_ATTACK: &str = "-";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{dataset}: missing metadata {path}")]
    MissingMetadata { dataset: Dataset, path: PathBuf },
    #[error("{dataset}: unknown attack code {code:?} ({context})")]
    UnknownAttack { dataset: Dataset, code: String, context: String },
    #[error("{0}: no samples found")]
    EmptyDataset(Dataset),
    #[error("{0}: dataset root does not exist")]
    MissingRoot(Dataset),
    #[error("duplicate path {0}")]
    DuplicatePath(String),
    #[error("{dataset}: no bona fide records")]
    NoBonafide { dataset: Dataset },
    #[error("record {path}: label {label} inconsistent with attack id {attack:?}")]
    LabelMismatch { path: String, label: Label, attack: String },
    #[error("{dataset}: {count} attacks cannot satisfy the train/test/eval quota")]
    TooFewAttacks { dataset: Dataset, count: usize },
    #[error("attack {0:?} appears in more than one dataset")]
    AmbiguousAttack(String),
    #[error("attack {attack:?} assigned to both {first} and {second}")]
    AttackInTwoSubsets { attack: String, first: Subset, second: Subset },
    #[error("record {0} has no subset assignment in the fold")]
    Unassigned(String),
    #[error("fold assigns unknown attack {0:?}")]
    UnknownFoldAttack(String),
    #[error("{dataset}: quota violation: {detail}")]
    Quota { dataset: Dataset, detail: String },
    #[error("fold id must be 1, 2 or 3, got {0}")]
    InvalidFoldId(u32),
    #[error("oversampling needs both classes (bonafide={bonafide}, spoof={spoof})")]
    SingleClass { bonafide: usize, spoof: usize },
    #[error("{context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dataset {
    #[serde(rename = "asvspoof_la")]
    AsvspoofLa,
    #[serde(rename = "wavefake")]
    WaveFake,
    #[serde(rename = "fakeavceleb")]
    FakeAvCeleb,
}

impl Dataset {
    pub const ALL: [Dataset; 3] = [Dataset::AsvspoofLa, Dataset::WaveFake, Dataset::FakeAvCeleb];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::AsvspoofLa => "asvspoof_la",
            Dataset::WaveFake => "wavefake",
            Dataset::FakeAvCeleb => "fakeavceleb",
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            Dataset::AsvspoofLa => 1,
            Dataset::WaveFake => 2,
            Dataset::FakeAvCeleb => 3,
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|d| d.name() == s).ok_or_else(|| CorpusError::Parse {
            context: "dataset".into(),
            message: format!("unknown dataset {s:?}"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Bonafide,
    Spoof,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Bonafide => "bonafide",
            Label::Spoof => "spoof",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SampleRecord {
    pub path: String,
    pub dataset: Dataset,
    pub attack_id: String,
    pub label: Label,
}

impl SampleRecord {
    pub fn bonafide(path: impl Into<String>, dataset: Dataset) -> Self {
        Self { path: path.into(), dataset, attack_id: BONAFIDE_ATTACK.into(), label: Label::Bonafide }
    }

    pub fn spoof(path: impl Into<String>, dataset: Dataset, attack: impl Into<String>) -> Self {
        Self { path: path.into(), dataset, attack_id: attack.into(), label: Label::Spoof }
    }

    pub fn is_bonafide(&self) -> bool {
        self.label == Label::Bonafide
    }
}

/// Per-utterance metadata for one or more datasets, sorted by path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    records: Vec<SampleRecord>,
}

/// Counts for one dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub bonafide: usize,
    pub spoof: usize,
    pub attacks: BTreeSet<String>,
}

impl Manifest {
    pub fn new(mut records: Vec<SampleRecord>) -> Result<Self, CorpusError> {
        records.sort();
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.path.as_str()) {
                return Err(CorpusError::DuplicatePath(r.path.clone()));
            }
            if r.is_bonafide() != (r.attack_id == BONAFIDE_ATTACK) {
                return Err(CorpusError::LabelMismatch {
                    path: r.path.clone(),
                    label: r.label,
                    attack: r.attack_id.clone(),
                });
            }
        }
        let m = Self { records };
        for (dataset, t) in m.tallies() {
            if t.bonafide == 0 {
                return Err(CorpusError::NoBonafide { dataset });
            }
        }
        Ok(m)
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn datasets(&self) -> BTreeSet<Dataset> {
        self.records.iter().map(|r| r.dataset).collect()
    }

    /// Per `(dataset, attack_id, label)` record counts.
    pub fn counts(&self) -> BTreeMap<(Dataset, String, Label), usize> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            *out.entry((r.dataset, r.attack_id.clone(), r.label)).or_insert(0) += 1;
        }
        out
    }

    pub fn tallies(&self) -> BTreeMap<Dataset, Tally> {
        let mut out: BTreeMap<Dataset, Tally> = BTreeMap::new();
        for r in &self.records {
            let t = out.entry(r.dataset).or_default();
            match r.label {
                Label::Bonafide => t.bonafide += 1,
                Label::Spoof => {
                    t.spoof += 1;
                    t.attacks.insert(r.attack_id.clone());
                }
            }
        }
        out
    }

    pub fn total(&self) -> Tally {
        let mut total = Tally::default();
        for (_, t) in self.tallies() {
            total.bonafide += t.bonafide;
            total.spoof += t.spoof;
            total.attacks.extend(t.attacks);
        }
        total
    }

    /// Spoof attack ids of one dataset, sorted.
    pub fn attacks(&self, dataset: Dataset) -> Vec<String> {
        self.tallies().remove(&dataset).map(|t| t.attacks.into_iter().collect()).unwrap_or_default()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CorpusError> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.records {
            wr.serialize(r).map_err(csv_err("manifest"))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, CorpusError> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(csv_err("manifest"))?.clone();
        if header.iter().collect::<Vec<_>>() != ["path", "dataset", "attack_id", "label"] {
            return Err(CorpusError::Parse {
                context: "manifest".into(),
                message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
            });
        }
        let records = rd.deserialize().collect::<Result<Vec<SampleRecord>, _>>().map_err(csv_err("manifest"))?;
        Self::new(records)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let mut bytes = Vec::new();
        self.write_csv(&mut bytes)?;
        std::fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn csv_err(context: &'static str) -> impl Fn(csv::Error) -> CorpusError {
    move |e| CorpusError::Parse { context: context.into(), message: e.to_string() }
}

/// Union of manifests with pairwise disjoint paths.
pub fn merge(manifests: &[Manifest]) -> Result<Manifest, CorpusError> {
    let records = manifests.iter().flat_map(|m| m.records.iter().cloned()).collect();
    Manifest::new(records)
}
