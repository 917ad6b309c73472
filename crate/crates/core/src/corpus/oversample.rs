use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, SampleRecord};

/// Balance classes by duplicating the minority: every minority record is
/// repeated `majority / minority` times and a seeded choice of
/// `majority % minority` distinct records gets one extra copy. The majority
/// class is untouched. Output is sorted by path (stable for duplicates).
pub fn oversample(records: &[SampleRecord], seed: u64) -> Result<Vec<SampleRecord>, CorpusError> {
    let (bona, spoof): (Vec<&SampleRecord>, Vec<&SampleRecord>) = records.iter().partition(|r| r.is_bonafide());
    if bona.is_empty() || spoof.is_empty() {
        return Err(CorpusError::SingleClass { bonafide: bona.len(), spoof: spoof.len() });
    }
    let (minority, majority) = if bona.len() < spoof.len() { (bona, spoof) } else { (spoof, bona) };
    let mut out: Vec<SampleRecord> = majority.into_iter().cloned().collect();
    let target = out.len();
    let repeats = target / minority.len();
    let remainder = target % minority.len();
    for _ in 0..repeats {
        out.extend(minority.iter().map(|r| (*r).clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extra = sample(&mut rng, minority.len(), remainder).into_vec();
    extra.sort_unstable();
    out.extend(extra.into_iter().map(|i| minority[i].clone()));
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}
