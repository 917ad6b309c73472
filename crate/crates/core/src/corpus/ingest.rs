//! Directory and protocol-file readers for the three source corpora.
//!
//! Expected layouts under each dataset root:
//!
//! * ASVspoof 2019 LA: `ASVspoof2019_LA_cm_protocols/ASVspoof2019.LA.cm.{train.trn,dev.trl,eval.trl}.txt`
//!   with audio in `ASVspoof2019_LA_{train,dev,eval}/{wav,flac}/`.
//! * WaveFake: `generated_audio/<corpus>_<architecture>/*.wav`, bona fide in
//!   `LJSpeech-1.1/wavs/` and `jsut_ver1.1/basic5000/wav/`.
//! * FakeAVCeleb (audio tracks): `<category>/<race>/<gender>/<speaker>/*.wav`.

use std::path::{Path, PathBuf};

use super::{CorpusError, Dataset, Manifest, SampleRecord};

/// WaveFake architecture ids; English and Japanese variants share an id.
pub const WAVEFAKE_ATTACKS: [&str; 7] =
    ["melgan", "melgan_large", "parallel_wavegan", "mb_melgan", "fb_melgan", "hifigan", "waveglow"];

const ASV_PROTOCOL_DIR: &str = "ASVspoof2019_LA_cm_protocols";
const ASV_PARTS: [(&str, &str); 3] = [("train", "trn"), ("dev", "trl"), ("eval", "trl")];

/// Generated sets shipped with WaveFake that are not part of the vocoder benchmark.
const WAVEFAKE_EXCLUDED: [&str; 1] = ["common_voices_prompts_from_conformer_fastspeech2_pwg_ljspeech"];
const WAVEFAKE_BONAFIDE: [&str; 2] = ["LJSpeech-1.1/wavs", "jsut_ver1.1/basic5000/wav"];

const FAKEAVCELEB_BONAFIDE: &str = "RealVideo-RealAudio";
const FAKEAVCELEB_SPOOF: [&str; 2] = ["RealVideo-FakeAudio", "FakeVideo-FakeAudio"];
const FAKEAVCELEB_ATTACK: &str = "sv2tts";

pub fn ingest(root: impl AsRef<Path>, dataset: Dataset) -> Result<Manifest, CorpusError> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(CorpusError::MissingRoot(dataset));
    }
    let records = match dataset {
        Dataset::AsvspoofLa => ingest_asvspoof(root)?,
        Dataset::WaveFake => ingest_wavefake(root)?,
        Dataset::FakeAvCeleb => ingest_fakeavceleb(root)?,
    };
    if records.is_empty() {
        return Err(CorpusError::EmptyDataset(dataset));
    }
    Manifest::new(records)
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn is_asv_attack(code: &str) -> bool {
    code.len() == 3
        && code.starts_with('A')
        && code[1..].parse::<u32>().is_ok_and(|n| (1..=19).contains(&n))
}

fn ingest_asvspoof(root: &Path) -> Result<Vec<SampleRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut found_protocol = false;
    for (part, ext) in ASV_PARTS {
        let protocol = root.join(ASV_PROTOCOL_DIR).join(format!("ASVspoof2019.LA.cm.{part}.{ext}.txt"));
        if !protocol.is_file() {
            continue;
        }
        found_protocol = true;
        let audio_dir = root.join(format!("ASVspoof2019_LA_{part}"));
        let text = std::fs::read_to_string(&protocol)?;
        for (lineno, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let context = format!("{}:{}", protocol.display(), lineno + 1);
            let [_speaker, file_id, _env, attack, key] = fields[..] else {
                return Err(CorpusError::Parse { context, message: "expected 5 fields".into() });
            };
            let path = path_string(&asv_audio_path(&audio_dir, file_id));
            let record = match (key, attack) {
                ("bonafide", "-") => SampleRecord::bonafide(path, Dataset::AsvspoofLa),
                ("spoof", code) if is_asv_attack(code) => SampleRecord::spoof(path, Dataset::AsvspoofLa, code),
                ("spoof", code) => {
                    return Err(CorpusError::UnknownAttack {
                        dataset: Dataset::AsvspoofLa,
                        code: code.to_string(),
                        context,
                    })
                }
                _ => {
                    return Err(CorpusError::Parse {
                        context,
                        message: format!("inconsistent key {key:?} / attack {attack:?}"),
                    })
                }
            };
            records.push(record);
        }
    }
    if !found_protocol {
        return Err(CorpusError::MissingMetadata {
            dataset: Dataset::AsvspoofLa,
            path: root.join(ASV_PROTOCOL_DIR),
        });
    }
    Ok(records)
}

fn asv_audio_path(audio_dir: &Path, file_id: &str) -> PathBuf {
    let candidates = [
        audio_dir.join("wav").join(format!("{file_id}.wav")),
        audio_dir.join("flac").join(format!("{file_id}.wav")),
    ];
    candidates
        .into_iter()
        .find(|p| p.is_file())
        .unwrap_or_else(|| audio_dir.join("flac").join(format!("{file_id}.flac")))
}

/// Map a WaveFake `generated_audio` directory name to its architecture id.
fn wavefake_attack(dir: &str) -> Option<&'static str> {
    let arch = dir.strip_prefix("ljspeech_").or_else(|| dir.strip_prefix("jsut_"))?;
    let id = match arch.to_ascii_lowercase().as_str() {
        "melgan" => "melgan",
        "melgan_large" => "melgan_large",
        "parallel_wavegan" => "parallel_wavegan",
        "multi_band_melgan" => "mb_melgan",
        "full_band_melgan" => "fb_melgan",
        "hifigan" => "hifigan",
        "waveglow" => "waveglow",
        _ => return None,
    };
    Some(id)
}

fn ingest_wavefake(root: &Path) -> Result<Vec<SampleRecord>, CorpusError> {
    let generated = root.join("generated_audio");
    if !generated.is_dir() {
        return Err(CorpusError::MissingMetadata { dataset: Dataset::WaveFake, path: generated });
    }
    let mut records = Vec::new();
    for dir in sorted_entries(&generated)? {
        if !dir.is_dir() {
            continue;
        }
        let name = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        if WAVEFAKE_EXCLUDED.contains(&name.as_str()) {
            continue;
        }
        let attack = wavefake_attack(&name).ok_or_else(|| CorpusError::UnknownAttack {
            dataset: Dataset::WaveFake,
            code: name.clone(),
            context: path_string(&dir),
        })?;
        for wav in wav_files(&dir)? {
            records.push(SampleRecord::spoof(path_string(&wav), Dataset::WaveFake, attack));
        }
    }
    for sub in WAVEFAKE_BONAFIDE {
        let dir = root.join(sub);
        if dir.is_dir() {
            for wav in wav_files(&dir)? {
                records.push(SampleRecord::bonafide(path_string(&wav), Dataset::WaveFake));
            }
        }
    }
    Ok(records)
}

fn ingest_fakeavceleb(root: &Path) -> Result<Vec<SampleRecord>, CorpusError> {
    let bona_dir = root.join(FAKEAVCELEB_BONAFIDE);
    let spoof_dirs: Vec<PathBuf> = FAKEAVCELEB_SPOOF.iter().map(|d| root.join(d)).filter(|d| d.is_dir()).collect();
    if !bona_dir.is_dir() && spoof_dirs.is_empty() {
        return Err(CorpusError::MissingMetadata { dataset: Dataset::FakeAvCeleb, path: bona_dir });
    }
    let mut records = Vec::new();
    if bona_dir.is_dir() {
        for wav in wav_files(&bona_dir)? {
            records.push(SampleRecord::bonafide(path_string(&wav), Dataset::FakeAvCeleb));
        }
    }
    for dir in spoof_dirs {
        for wav in wav_files(&dir)? {
            records.push(SampleRecord::spoof(path_string(&wav), Dataset::FakeAvCeleb, FAKEAVCELEB_ATTACK));
        }
    }
    Ok(records)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut out = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<Vec<_>, _>>()?;
    out.sort();
    Ok(out)
}

/// All `.wav` files below `dir`, recursively, in sorted order.
fn wav_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for p in sorted_entries(&d)? {
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn touch(p: &Path) {
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, b"").unwrap();
    }

    #[test]
    fn asvspoof_protocol() {
        let dir = tempfile::tempdir().unwrap();
        let proto = dir.path().join(ASV_PROTOCOL_DIR);
        fs::create_dir_all(&proto).unwrap();
        fs::write(
            proto.join("ASVspoof2019.LA.cm.train.trn.txt"),
            "LA_0079 LA_T_1 - - bonafide\nLA_0079 LA_T_2 - A01 spoof\nLA_0080 LA_T_3 - A06 spoof\n",
        )
        .unwrap();
        fs::write(proto.join("ASVspoof2019.LA.cm.eval.trl.txt"), "LA_0001 LA_E_1 - A19 spoof\n").unwrap();
        touch(&dir.path().join("ASVspoof2019_LA_train/wav/LA_T_1.wav"));
        let m = ingest(dir.path(), Dataset::AsvspoofLa).unwrap();
        assert_eq!(m.len(), 4);
        let t = &m.tallies()[&Dataset::AsvspoofLa];
        assert_eq!((t.bonafide, t.spoof), (1, 3));
        assert_eq!(m.attacks(Dataset::AsvspoofLa), vec!["A01", "A06", "A19"]);
        assert!(m.records().iter().any(|r| r.path.ends_with("train/wav/LA_T_1.wav")));
        assert!(m.records().iter().any(|r| r.path.ends_with("eval/flac/LA_E_1.flac")));
    }

    #[test]
    fn asvspoof_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(ingest(dir.path(), Dataset::AsvspoofLa), Err(CorpusError::MissingMetadata { .. })));
        let proto = dir.path().join(ASV_PROTOCOL_DIR);
        fs::create_dir_all(&proto).unwrap();
        fs::write(proto.join("ASVspoof2019.LA.cm.dev.trl.txt"), "LA_0079 LA_D_1 - A20 spoof\n").unwrap();
        assert!(matches!(
            ingest(dir.path(), Dataset::AsvspoofLa),
            Err(CorpusError::UnknownAttack { code, .. }) if code == "A20"
        ));
        fs::write(proto.join("ASVspoof2019.LA.cm.dev.trl.txt"), "").unwrap();
        assert!(matches!(ingest(dir.path(), Dataset::AsvspoofLa), Err(CorpusError::EmptyDataset(_))));
        assert!(matches!(
            ingest(dir.path().join("missing"), Dataset::AsvspoofLa),
            Err(CorpusError::MissingRoot(Dataset::AsvspoofLa))
        ));
    }

    #[test]
    fn wavefake_layout() {
        let dir = tempfile::tempdir().unwrap();
        let r = dir.path();
        touch(&r.join("generated_audio/ljspeech_melgan/LJ001-0001_gen.wav"));
        touch(&r.join("generated_audio/jsut_multi_band_melgan/BASIC5000_0001_gen.wav"));
        touch(&r.join("generated_audio/ljspeech_multi_band_melgan/LJ001-0001_gen.wav"));
        touch(&r.join("generated_audio/ljspeech_hifiGAN/LJ001-0001_gen.wav"));
        touch(&r.join("generated_audio/common_voices_prompts_from_conformer_fastspeech2_pwg_ljspeech/x.wav"));
        touch(&r.join("LJSpeech-1.1/wavs/LJ001-0001.wav"));
        touch(&r.join("jsut_ver1.1/basic5000/wav/BASIC5000_0001.wav"));
        let m = ingest(r, Dataset::WaveFake).unwrap();
        let t = &m.tallies()[&Dataset::WaveFake];
        assert_eq!((t.bonafide, t.spoof), (2, 4));
        assert_eq!(m.attacks(Dataset::WaveFake), vec!["hifigan", "mb_melgan", "melgan"]);

        touch(&r.join("generated_audio/ljspeech_tacotron/x.wav"));
        assert!(matches!(ingest(r, Dataset::WaveFake), Err(CorpusError::UnknownAttack { .. })));
    }

    #[test]
    fn wavefake_names_cover_all_architectures() {
        let dirs = ["melgan", "melgan_large", "parallel_wavegan", "multi_band_melgan", "full_band_melgan", "hifiGAN", "waveglow"];
        let ids: Vec<_> = dirs.iter().map(|d| wavefake_attack(&format!("ljspeech_{d}")).unwrap()).collect();
        assert_eq!(ids, WAVEFAKE_ATTACKS);
    }

    #[test]
    fn fakeavceleb_layout() {
        let dir = tempfile::tempdir().unwrap();
        let r = dir.path();
        touch(&r.join("RealVideo-RealAudio/African/men/id00076/00109.wav"));
        touch(&r.join("RealVideo-FakeAudio/African/men/id00076/00109_fake.wav"));
        touch(&r.join("FakeVideo-FakeAudio/Asian/women/id00001/a.wav"));
        touch(&r.join("FakeVideo-RealAudio/Asian/women/id00001/b.wav"));
        let m = ingest(r, Dataset::FakeAvCeleb).unwrap();
        let t = &m.tallies()[&Dataset::FakeAvCeleb];
        assert_eq!((t.bonafide, t.spoof), (1, 2));
        assert_eq!(m.attacks(Dataset::FakeAvCeleb), vec!["sv2tts"]);
    }
}
