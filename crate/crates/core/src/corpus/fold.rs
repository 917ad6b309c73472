//! Attack-disjoint train/test/eval folds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use super::{CorpusError, Dataset, Manifest, SampleRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Train,
    Test,
    Eval,
}

impl Subset {
    pub const ALL: [Subset; 3] = [Subset::Train, Subset::Test, Subset::Eval];
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subset::Train => "train",
            Subset::Test => "test",
            Subset::Eval => "eval",
        })
    }
}

impl std::str::FromStr for Subset {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Subset::Train),
            "test" => Ok(Subset::Test),
            "eval" => Ok(Subset::Eval),
            _ => Err(CorpusError::Parse { context: "subset".into(), message: format!("unknown subset {s:?}") }),
        }
    }
}

/// Subset assignment for one fold.
///
/// Spoof records are assigned through their attack id, except FakeAVCeleb
/// whose single attack is split per sample (`sample_split`). Bona fide
/// records are split per sample in every dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldDefinition {
    pub fold_id: u32,
    pub seed: u64,
    pub attacks: BTreeMap<String, Subset>,
    pub bonafide_split: BTreeMap<String, Subset>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub sample_split: BTreeMap<String, Subset>,
}

#[derive(Deserialize)]
struct RawFold {
    fold_id: u32,
    seed: u64,
    #[serde(deserialize_with = "map_entries")]
    attacks: Vec<(String, Subset)>,
    #[serde(deserialize_with = "map_entries")]
    bonafide_split: Vec<(String, Subset)>,
    #[serde(default, deserialize_with = "map_entries")]
    sample_split: Vec<(String, Subset)>,
}

/// JSON objects as ordered entry lists so repeated keys stay visible.
fn map_entries<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(String, Subset)>, D::Error> {
    struct EntriesVisitor;
    impl<'de> Visitor<'de> for EntriesVisitor {
        type Value = Vec<(String, Subset)>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an object mapping names to train/test/eval")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
            let mut out = Vec::new();
            while let Some(entry) = map.next_entry()? {
                out.push(entry);
            }
            Ok(out)
        }
    }
    d.deserialize_map(EntriesVisitor)
}

fn unique(entries: Vec<(String, Subset)>) -> Result<BTreeMap<String, Subset>, CorpusError> {
    let mut out = BTreeMap::new();
    for (key, subset) in entries {
        if let Some(&first) = out.get(&key) {
            if first != subset {
                return Err(CorpusError::AttackInTwoSubsets { attack: key, first, second: subset });
            }
        }
        out.insert(key, subset);
    }
    Ok(out)
}

impl FoldDefinition {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("fold serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        let raw: RawFold = serde_json::from_str(text)
            .map_err(|e| CorpusError::Parse { context: "fold file".into(), message: e.to_string() })?;
        if !(1..=3).contains(&raw.fold_id) {
            return Err(CorpusError::InvalidFoldId(raw.fold_id));
        }
        Ok(Self {
            fold_id: raw.fold_id,
            seed: raw.seed,
            attacks: unique(raw.attacks)?,
            bonafide_split: unique(raw.bonafide_split)?,
            sample_split: unique(raw.sample_split)?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Attack ids assigned to `subset`.
    pub fn attacks_in(&self, subset: Subset) -> BTreeSet<&str> {
        self.attacks.iter().filter(|(_, s)| **s == subset).map(|(a, _)| a.as_str()).collect()
    }

    pub fn subset_of(&self, record: &SampleRecord) -> Result<Subset, CorpusError> {
        let found = if record.is_bonafide() {
            self.bonafide_split.get(&record.path)
        } else if record.dataset == Dataset::FakeAvCeleb {
            self.sample_split.get(&record.path)
        } else {
            self.attacks.get(&record.attack_id)
        };
        found.copied().ok_or_else(|| CorpusError::Unassigned(record.path.clone()))
    }
}

/// Attacks per dataset that go to the train subset.
///
/// The full corpora use fixed counts (12 of 19 ASVspoof attacks, 5 of 7
/// WaveFake architectures); other sizes take about 70% while leaving at least
/// one attack each for test and eval.
pub fn train_attack_quota(dataset: Dataset, n_attacks: usize) -> Result<usize, CorpusError> {
    match (dataset, n_attacks) {
        (Dataset::AsvspoofLa, 19) => Ok(12),
        (Dataset::WaveFake, 7) => Ok(5),
        (_, n) if n < 3 => Err(CorpusError::TooFewAttacks { dataset, count: n }),
        (_, n) => Ok(((0.7 * n as f64).round() as usize).clamp(1, n - 2)),
    }
}

/// (train, test, eval) sizes for a 70/15/15 sample split.
fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = (0.7 * n as f64).round() as usize;
    let test = ((0.15 * n as f64).round() as usize).min(n - train);
    (train, test, n - train - test)
}

fn split_samples<'a>(paths: &mut [&'a str], rng: &mut ChaCha8Rng, out: &mut BTreeMap<String, Subset>) {
    paths.shuffle(rng);
    let (train, test, _) = split_sizes(paths.len());
    for (i, p) in paths.iter().enumerate() {
        let subset = if i < train {
            Subset::Train
        } else if i < train + test {
            Subset::Test
        } else {
            Subset::Eval
        };
        out.insert((*p).to_string(), subset);
    }
}

fn fold_rng(seed: u64, fold_id: u32, dataset: Dataset) -> ChaCha8Rng {
    // splitmix64 finaliser over the three inputs
    let mut z = seed
        ^ (fold_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ dataset.code().wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Seeded attack-disjoint fold over every dataset present in `manifest`.
pub fn build_fold(manifest: &Manifest, fold_id: u32, seed: u64) -> Result<FoldDefinition, CorpusError> {
    if !(1..=3).contains(&fold_id) {
        return Err(CorpusError::InvalidFoldId(fold_id));
    }
    let mut fold = FoldDefinition {
        fold_id,
        seed,
        attacks: BTreeMap::new(),
        bonafide_split: BTreeMap::new(),
        sample_split: BTreeMap::new(),
    };
    for dataset in manifest.datasets() {
        let mut rng = fold_rng(seed, fold_id, dataset);
        let records: Vec<&SampleRecord> = manifest.records().iter().filter(|r| r.dataset == dataset).collect();

        if dataset == Dataset::FakeAvCeleb {
            let mut spoof: Vec<&str> = records.iter().filter(|r| !r.is_bonafide()).map(|r| r.path.as_str()).collect();
            split_samples(&mut spoof, &mut rng, &mut fold.sample_split);
        } else {
            let mut attacks = manifest.attacks(dataset);
            let quota = train_attack_quota(dataset, attacks.len())?;
            attacks.shuffle(&mut rng);
            for (i, attack) in attacks.into_iter().enumerate() {
                let subset = match i {
                    i if i < quota => Subset::Train,
                    i if (i - quota) % 2 == 0 => Subset::Test,
                    _ => Subset::Eval,
                };
                if fold.attacks.insert(attack.clone(), subset).is_some() {
                    return Err(CorpusError::AmbiguousAttack(attack));
                }
            }
        }

        let mut bona: Vec<&str> = records.iter().filter(|r| r.is_bonafide()).map(|r| r.path.as_str()).collect();
        split_samples(&mut bona, &mut rng, &mut fold.bonafide_split);
    }
    Ok(fold)
}

fn check_split(dataset: Dataset, what: &str, counts: [usize; 3]) -> Result<(), CorpusError> {
    let n: usize = counts.iter().sum();
    for (count, share) in counts.iter().zip([0.70, 0.15, 0.15]) {
        if (*count as f64 - share * n as f64).abs() > 1.0 {
            return Err(CorpusError::Quota {
                dataset,
                detail: format!("{what} split {counts:?} is not 70/15/15 of {n}"),
            });
        }
    }
    Ok(())
}

/// Check that `fold` partitions `manifest` attack-disjointly and respects the quotas.
pub fn validate_fold(manifest: &Manifest, fold: &FoldDefinition) -> Result<(), CorpusError> {
    if !(1..=3).contains(&fold.fold_id) {
        return Err(CorpusError::InvalidFoldId(fold.fold_id));
    }
    let mut known_attacks = BTreeSet::new();
    let mut bona_counts: BTreeMap<Dataset, [usize; 3]> = BTreeMap::new();
    let mut sample_counts: BTreeMap<Dataset, [usize; 3]> = BTreeMap::new();
    for r in manifest.records() {
        let subset = fold.subset_of(r)?;
        if r.is_bonafide() {
            bona_counts.entry(r.dataset).or_default()[subset as usize] += 1;
        } else if r.dataset == Dataset::FakeAvCeleb {
            sample_counts.entry(r.dataset).or_default()[subset as usize] += 1;
        } else {
            known_attacks.insert(r.attack_id.as_str());
        }
    }
    if let Some(extra) = fold.attacks.keys().find(|a| !known_attacks.contains(a.as_str())) {
        return Err(CorpusError::UnknownFoldAttack(extra.clone()));
    }
    for dataset in manifest.datasets() {
        if dataset != Dataset::FakeAvCeleb {
            let attacks = manifest.attacks(dataset);
            let mut per_subset = [0usize; 3];
            for a in &attacks {
                per_subset[fold.attacks[a] as usize] += 1;
            }
            let quota = train_attack_quota(dataset, attacks.len())?;
            let [train, test, eval] = per_subset;
            if train != quota || test.abs_diff(eval) > 1 {
                return Err(CorpusError::Quota {
                    dataset,
                    detail: format!("attacks train/test/eval = {train}/{test}/{eval}, expected train {quota}"),
                });
            }
        }
        if let Some(c) = bona_counts.get(&dataset) {
            check_split(dataset, "bona fide", *c)?;
        }
        if let Some(c) = sample_counts.get(&dataset) {
            check_split(dataset, "spoof sample", *c)?;
        }
    }
    Ok(())
}

/// Records of `manifest` that fall in `subset`, sorted by path.
pub fn materialize(manifest: &Manifest, fold: &FoldDefinition, subset: Subset) -> Result<Vec<SampleRecord>, CorpusError> {
    let mut out = Vec::new();
    for r in manifest.records() {
        if fold.subset_of(r)? == subset {
            out.push(r.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::WAVEFAKE_ATTACKS;

    fn mock(n_bona: usize, attacks: &[(&str, usize)], dataset: Dataset) -> Vec<SampleRecord> {
        let mut v: Vec<SampleRecord> =
            (0..n_bona).map(|i| SampleRecord::bonafide(format!("{dataset}/b{i:05}.wav"), dataset)).collect();
        for (a, n) in attacks {
            v.extend((0..*n).map(|i| SampleRecord::spoof(format!("{dataset}/{a}/{i:05}.wav"), dataset, *a)));
        }
        v
    }

    fn wavefake() -> Manifest {
        let attacks: Vec<(&str, usize)> = WAVEFAKE_ATTACKS.iter().map(|a| (*a, 3)).collect();
        Manifest::new(mock(40, &attacks, Dataset::WaveFake)).unwrap()
    }

    #[test]
    fn wavefake_quota() {
        let m = wavefake();
        for seed in 0..20 {
            let f = build_fold(&m, 1 + (seed % 3) as u32, seed).unwrap();
            assert_eq!(f.attacks_in(Subset::Train).len(), 5);
            assert_eq!(f.attacks_in(Subset::Test).len(), 1);
            assert_eq!(f.attacks_in(Subset::Eval).len(), 1);
            validate_fold(&m, &f).unwrap();
        }
    }

    #[test]
    fn asvspoof_quota() {
        let ids: Vec<String> = (1..=19).map(|i| format!("A{i:02}")).collect();
        let attacks: Vec<(&str, usize)> = ids.iter().map(|a| (a.as_str(), 2)).collect();
        let m = Manifest::new(mock(30, &attacks, Dataset::AsvspoofLa)).unwrap();
        let f = build_fold(&m, 2, 9).unwrap();
        assert_eq!(f.attacks_in(Subset::Train).len(), 12);
        // odd remainder: test gets the extra attack
        assert_eq!(f.attacks_in(Subset::Test).len(), 4);
        assert_eq!(f.attacks_in(Subset::Eval).len(), 3);
    }

    #[test]
    fn generic_quota() {
        assert_eq!(train_attack_quota(Dataset::AsvspoofLa, 3).unwrap(), 1);
        assert_eq!(train_attack_quota(Dataset::AsvspoofLa, 10).unwrap(), 7);
        assert_eq!(train_attack_quota(Dataset::WaveFake, 4).unwrap(), 2);
        assert!(matches!(
            train_attack_quota(Dataset::WaveFake, 2),
            Err(CorpusError::TooFewAttacks { count: 2, .. })
        ));
    }

    #[test]
    fn deterministic_and_fold_dependent() {
        let m = wavefake();
        assert_eq!(build_fold(&m, 1, 5).unwrap(), build_fold(&m, 1, 5).unwrap());
        let folds: Vec<_> = (1..=3).map(|k| build_fold(&m, k, 5).unwrap()).collect();
        assert!(folds[0].bonafide_split != folds[1].bonafide_split || folds[1].bonafide_split != folds[2].bonafide_split);
        assert!(matches!(build_fold(&m, 4, 0), Err(CorpusError::InvalidFoldId(4))));
    }

    #[test]
    fn materialize_partitions() {
        let m = wavefake();
        let f = build_fold(&m, 3, 1).unwrap();
        let parts: Vec<_> = Subset::ALL.iter().map(|s| materialize(&m, &f, *s).unwrap()).collect();
        let mut all: Vec<SampleRecord> = parts.iter().flatten().cloned().collect();
        all.sort();
        assert_eq!(all, m.records());
        let attacks = |v: &Vec<SampleRecord>| -> BTreeSet<String> {
            v.iter().filter(|r| !r.is_bonafide()).map(|r| r.attack_id.clone()).collect()
        };
        assert!(attacks(&parts[0]).is_disjoint(&attacks(&parts[1])));
        assert!(attacks(&parts[0]).is_disjoint(&attacks(&parts[2])));
        assert!(attacks(&parts[1]).is_disjoint(&attacks(&parts[2])));
        for p in &parts {
            assert!(p.windows(2).all(|w| w[0].path < w[1].path));
        }
    }

    #[test]
    fn fakeavceleb_is_sample_split() {
        let mut recs = mock(20, &[("sv2tts", 100)], Dataset::FakeAvCeleb);
        recs.extend(mock(40, &WAVEFAKE_ATTACKS.map(|a| (a, 2)), Dataset::WaveFake));
        let m = Manifest::new(recs).unwrap();
        let f = build_fold(&m, 1, 0).unwrap();
        assert!(!f.attacks.contains_key("sv2tts"));
        assert_eq!(f.sample_split.len(), 100);
        let counts = Subset::ALL.map(|s| f.sample_split.values().filter(|v| **v == s).count());
        assert_eq!(counts, [70, 15, 15]);
        validate_fold(&m, &f).unwrap();
        let json = f.to_json();
        assert!(json.contains("\"sample_split\""));
        assert_eq!(FoldDefinition::from_json(&json).unwrap(), f);
    }

    #[test]
    fn json_layout_and_duplicate_detection() {
        let m = wavefake();
        let f = build_fold(&m, 1, 0).unwrap();
        let json = f.to_json();
        assert!(!json.contains("sample_split"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["fold_id"], 1);
        assert!(v["attacks"]["melgan"].is_string());
        assert_eq!(FoldDefinition::from_json(&json).unwrap(), f);

        let dup = r#"{"fold_id":1,"seed":0,"attacks":{"A07":"train","A07":"eval"},"bonafide_split":{}}"#;
        match FoldDefinition::from_json(dup) {
            Err(CorpusError::AttackInTwoSubsets { attack, .. }) => assert_eq!(attack, "A07"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_catches_bad_folds() {
        let m = wavefake();
        let good = build_fold(&m, 1, 0).unwrap();

        let mut f = good.clone();
        let a = f.attacks_in(Subset::Test).into_iter().next().unwrap().to_string();
        f.attacks.insert(a, Subset::Train);
        assert!(matches!(validate_fold(&m, &f), Err(CorpusError::Quota { .. })));

        let mut f = good.clone();
        f.attacks.remove("waveglow");
        assert!(matches!(validate_fold(&m, &f), Err(CorpusError::Unassigned(_))));

        let mut f = good.clone();
        f.attacks.insert("A01".into(), Subset::Eval);
        assert!(matches!(validate_fold(&m, &f), Err(CorpusError::UnknownFoldAttack(_))));

        let mut f = good;
        for v in f.bonafide_split.values_mut() {
            *v = Subset::Train;
        }
        assert!(matches!(validate_fold(&m, &f), Err(CorpusError::Quota { .. })));
    }
}
