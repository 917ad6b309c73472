//! Equal error rate and the per-fold, per-seed result table.

mod eer;
mod report;

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::frontends::FrontendTag;

pub use eer::{compute_eer, det_points, DetPoint};
pub use report::{aggregate, render_report, CellKey, CellStats, EvalFragment, EvalReport};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("EER needs both classes (bonafide={bonafide}, spoof={spoof})")]
    SingleClass { bonafide: usize, spoof: usize },
    #[error("score {index} is not finite")]
    NonFinite { index: usize },
    #[error("cannot aggregate an empty list")]
    Empty,
    #[error("duplicate result for fold {fold_id}, {tag}, seed {seed}")]
    DuplicateFragment { fold_id: u32, tag: String, seed: u64 },
    #[error("{context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One scored utterance. Higher scores mean more bona fide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub path: String,
    pub score: f64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub fold_id: u32,
    pub seed: u64,
    pub tag: FrontendTag,
    pub records: Vec<ScoreRecord>,
}

impl ScoreSet {
    pub fn pairs(&self) -> Vec<(f64, Label)> {
        self.records.iter().map(|r| (r.score, r.label)).collect()
    }

    /// EER in percent.
    pub fn eer(&self) -> Result<f64, MetricsError> {
        compute_eer(&self.pairs())
    }

    pub fn fragment(&self) -> Result<EvalFragment, MetricsError> {
        Ok(EvalFragment { fold_id: self.fold_id, seed: self.seed, tag: self.tag.to_string(), eer: self.eer()? })
    }
}

/// Scores CSV with header `path,score,label`.
pub fn write_scores_csv<W: Write>(w: W, records: &[ScoreRecord]) -> Result<(), MetricsError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_scores_csv<R: Read>(r: R) -> Result<Vec<ScoreRecord>, MetricsError> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != ["path", "score", "label"] {
        return Err(MetricsError::Parse {
            context: "scores".into(),
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    rd.deserialize().collect::<Result<Vec<ScoreRecord>, _>>().map_err(csv_err)
}

pub fn save_scores(path: impl AsRef<Path>, records: &[ScoreRecord]) -> Result<(), MetricsError> {
    let mut bytes = Vec::new();
    write_scores_csv(&mut bytes, records)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>, MetricsError> {
    read_scores_csv(std::io::BufReader::new(std::fs::File::open(path)?))
}

fn csv_err(e: csv::Error) -> MetricsError {
    MetricsError::Parse { context: "scores".into(), message: e.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scores_csv_round_trip() {
        let recs = vec![
            ScoreRecord { path: "a/b.wav".into(), score: -1.234_567_890_123_4, label: Label::Spoof },
            ScoreRecord { path: "c.wav".into(), score: 0.1 + 0.2, label: Label::Bonafide },
        ];
        let mut bytes = Vec::new();
        write_scores_csv(&mut bytes, &recs).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("path,score,label\n"));
        assert!(text.contains(",spoof\n"));
        assert_eq!(read_scores_csv(bytes.as_slice()).unwrap(), recs);
    }

    #[test]
    fn scores_csv_header_checked() {
        assert!(read_scores_csv("path,label,score\nx,spoof,1\n".as_bytes()).is_err());
    }

    #[test]
    fn score_set_fragment() {
        let set = ScoreSet {
            fold_id: 2,
            seed: 1,
            tag: FrontendTag::LfccSpec,
            records: vec![
                ScoreRecord { path: "a".into(), score: 1.0, label: Label::Bonafide },
                ScoreRecord { path: "b".into(), score: -1.0, label: Label::Spoof },
            ],
        };
        let f = set.fragment().unwrap();
        assert_eq!((f.fold_id, f.seed, f.tag.as_str(), f.eer), (2, 1, "lfcc+spec", 0.0));
    }
}
