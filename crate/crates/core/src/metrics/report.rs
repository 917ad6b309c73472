use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Mean and sample standard deviation (divisor `n - 1`, 0 when `n == 1`).
pub fn aggregate(values: &[f64]) -> Result<(f64, f64), MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

/// EER of one (fold, tag, seed) evaluation, as written by `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFragment {
    pub fold_id: u32,
    pub seed: u64,
    pub tag: String,
    pub eer: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub fold_id: u32,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub eer_mean: f64,
    pub eer_std: f64,
    /// Per-seed EERs in seed order.
    pub per_seed: Vec<f64>,
}

impl CellStats {
    pub fn from_seeds(per_seed: Vec<f64>) -> Result<Self, MetricsError> {
        let (eer_mean, eer_std) = aggregate(&per_seed)?;
        Ok(Self { eer_mean, eer_std, per_seed })
    }
}

#[derive(Serialize, Deserialize)]
struct CellJson {
    fold_id: u32,
    tag: String,
    eer_mean: f64,
    eer_std: f64,
    per_seed: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    cells: Vec<CellJson>,
}

/// EER mean/std per (fold, front-end or model tag).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub cells: BTreeMap<CellKey, CellStats>,
}

impl EvalReport {
    pub fn insert(&mut self, fold_id: u32, tag: impl Into<String>, stats: CellStats) {
        self.cells.insert(CellKey { fold_id, tag: tag.into() }, stats);
    }

    /// Group fragments by (fold, tag) and aggregate over seeds.
    pub fn from_fragments(fragments: &[EvalFragment]) -> Result<Self, MetricsError> {
        let mut grouped: BTreeMap<CellKey, BTreeMap<u64, f64>> = BTreeMap::new();
        for f in fragments {
            let slot = grouped.entry(CellKey { fold_id: f.fold_id, tag: f.tag.clone() }).or_default();
            if slot.insert(f.seed, f.eer).is_some() {
                return Err(MetricsError::DuplicateFragment { fold_id: f.fold_id, tag: f.tag.clone(), seed: f.seed });
            }
        }
        let mut report = Self::default();
        for (key, seeds) in grouped {
            report.cells.insert(key, CellStats::from_seeds(seeds.into_values().collect())?);
        }
        Ok(report)
    }

    pub fn tags(&self) -> Vec<String> {
        self.cells.keys().map(|k| k.tag.clone()).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn to_json(&self) -> String {
        let cells = self
            .cells
            .iter()
            .map(|(k, c)| CellJson {
                fold_id: k.fold_id,
                tag: k.tag.clone(),
                eer_mean: c.eer_mean,
                eer_std: c.eer_std,
                per_seed: c.per_seed.clone(),
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&ReportJson { cells }).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, MetricsError> {
        let raw: ReportJson = serde_json::from_str(text)
            .map_err(|e| MetricsError::Parse { context: "report".into(), message: e.to_string() })?;
        let mut report = Self::default();
        for c in raw.cells {
            report.insert(c.fold_id, c.tag, CellStats { eer_mean: c.eer_mean, eer_std: c.eer_std, per_seed: c.per_seed });
        }
        Ok(report)
    }
}

/// Text table: one row per fold that has results, an (EER, STD) column pair
/// per tag, three decimals. Missing cells show `-`.
pub fn render_report(report: &EvalReport) -> String {
    let tags = report.tags();
    let folds: BTreeSet<u32> = report.cells.keys().map(|k| k.fold_id).collect();
    let mut out = String::from("fold");
    for t in &tags {
        out.push_str(&format!(" | {t} EER | {t} STD"));
    }
    out.push('\n');
    for fold in folds {
        out.push_str(&fold.to_string());
        for t in &tags {
            match report.cells.get(&CellKey { fold_id: fold, tag: t.clone() }) {
                Some(c) => out.push_str(&format!(" | {:.3} | {:.3}", c.eer_mean, c.eer_std)),
                None => out.push_str(" | - | -"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn aggregate_examples() {
        let (m, s) = aggregate(&[9.0, 9.5, 10.0]).unwrap();
        assert!((m - 9.5).abs() < 1e-12 && (s - 0.5).abs() < 1e-12);
        assert_eq!(aggregate(&[5.0, 5.0, 5.0]).unwrap(), (5.0, 0.0));
        assert_eq!(aggregate(&[7.0]).unwrap(), (7.0, 0.0));
        assert!(matches!(aggregate(&[]), Err(MetricsError::Empty)));
    }

    #[test]
    fn renders_table_row() {
        let mut r = EvalReport::default();
        r.insert(1, "lfcc", CellStats { eer_mean: 9.526, eer_std: 0.728, per_seed: vec![] });
        let text = render_report(&r);
        assert_eq!(text.lines().nth(1), Some("1 | 9.526 | 0.728"));
    }

    #[test]
    fn empty_folds_are_omitted() {
        let mut r = EvalReport::default();
        r.insert(1, "lfcc", CellStats::from_seeds(vec![1.0]).unwrap());
        r.insert(3, "lfcc", CellStats::from_seeds(vec![2.0]).unwrap());
        r.insert(3, "mfcc", CellStats::from_seeds(vec![3.0, 4.0]).unwrap());
        let text = render_report(&r);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "fold | lfcc EER | lfcc STD | mfcc EER | mfcc STD");
        assert_eq!(lines[1], "1 | 1.000 | 0.000 | - | -");
        assert_eq!(lines[2], "3 | 2.000 | 0.000 | 3.500 | 0.707");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn fragments_group_by_seed_order() {
        let frag = |fold, seed, eer| EvalFragment { fold_id: fold, seed, tag: "lfcc".into(), eer };
        let r = EvalReport::from_fragments(&[frag(1, 2, 10.0), frag(1, 0, 9.0), frag(1, 1, 9.5), frag(2, 0, 4.0)]).unwrap();
        let c = &r.cells[&CellKey { fold_id: 1, tag: "lfcc".into() }];
        assert_eq!(c.per_seed, vec![9.0, 9.5, 10.0]);
        assert!(render_report(&r).contains("1 | 9.500 | 0.500\n"));
        assert!(matches!(
            EvalReport::from_fragments(&[frag(1, 0, 1.0), frag(1, 0, 2.0)]),
            Err(MetricsError::DuplicateFragment { fold_id: 1, seed: 0, .. })
        ));
    }

    #[test]
    fn json_layout() {
        let mut r = EvalReport::default();
        r.insert(2, "lfcc+spec", CellStats::from_seeds(vec![1.5, 2.5]).unwrap());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["cells"][0]["fold_id"], 2);
        assert_eq!(v["cells"][0]["tag"], "lfcc+spec");
        assert_eq!(v["cells"][0]["eer_mean"], 2.0);
        assert_eq!(v["cells"][0]["per_seed"][1], 2.5);
        assert!(EvalReport::from_json("{\"cells\": 3}").is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(cells in prop::collection::vec((1u32..4, 0usize..6, prop::collection::vec(0.0f64..100.0, 1..5)), 0..10)) {
            let mut r = EvalReport::default();
            for (fold, t, seeds) in cells {
                r.insert(fold, ["mfcc", "lfcc", "spec", "mfcc+spec", "lfcc+spec", "mfcc+lfcc"][t], CellStats::from_seeds(seeds).unwrap());
            }
            prop_assert_eq!(EvalReport::from_json(&r.to_json()).unwrap(), r);
        }
    }
}
