use std::path::{Path, PathBuf};

use aad_core::frontends::FrontendTag;
use aad_core::gmm::{read_model_file, write_model_file, GmmPairModel};

fn aad(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("aad").chain(args.iter().copied());
    let code = aad_cli::run_args(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

/// Small toy corpus plus config with a light EM setting.
fn toy(dir: &Path) -> PathBuf {
    let out = dir.to_str().unwrap();
    let (code, text) = aad(&["synth", out, "--n-bonafide", "20", "--n-per-attack", "8"]);
    assert_eq!(code, 0, "{text}");
    let cfg_path = dir.join("config.json");
    let mut cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cfg_path).unwrap()).unwrap();
    cfg["em"]["k"] = 4.into();
    cfg["em"]["max_iters"] = 10.into();
    cfg["seeds"] = serde_json::json!([0]);
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    cfg_path
}

fn run_ok(cfg: &Path, args: &[&str]) -> String {
    let mut full = vec!["--config", cfg.to_str().unwrap()];
    full.extend_from_slice(args);
    let (code, text) = aad(&full);
    assert_eq!(code, 0, "{args:?}: {text}");
    text
}

fn summary_line(text: &str) -> serde_json::Value {
    let line = text.lines().last().unwrap();
    serde_json::from_str(line.strip_prefix("summary ").expect("summary line last")).unwrap()
}

#[test]
fn ingest_prints_tallies_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    let text = run_ok(&cfg, &["ingest"]);
    assert!(text.contains("asvspoof_la bonafide=20 spoof=24 attacks=3"), "{text}");
    assert!(text.contains("total bonafide=20 spoof=24 attacks=3"));
    assert_eq!(summary_line(&text)["command"], "ingest");
    let manifest = dir.path().join("work/manifest.csv");
    let first = std::fs::read(&manifest).unwrap();
    run_ok(&cfg, &["ingest"]);
    assert_eq!(std::fs::read(&manifest).unwrap(), first);
}

#[test]
fn missing_root_exits_2_naming_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"dataset_roots": {"wavefake": "nowhere"}, "workdir": "w"}"#).unwrap();
    let (code, text) = aad(&["--config", cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(code, 2);
    assert!(text.contains("wavefake"), "{text}");
    let (code, _) = aad(&["--config", dir.path().join("absent.json").to_str().unwrap(), "ingest"]);
    assert_eq!(code, 2);
}

#[test]
fn build_folds_validates_and_guards_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    let (code, _) = aad(&["--config", cfg.to_str().unwrap(), "build-folds"]);
    assert_eq!(code, 2, "manifest missing");
    run_ok(&cfg, &["ingest"]);
    run_ok(&cfg, &["build-folds"]);
    let fold1 = dir.path().join("work/folds/fold_1.json");
    let bytes = std::fs::read(&fold1).unwrap();
    for k in 1..=3 {
        assert!(dir.path().join(format!("work/folds/fold_{k}.json")).is_file());
    }
    let (code, text) = aad(&["--config", cfg.to_str().unwrap(), "build-folds"]);
    assert_eq!(code, 1);
    assert!(text.contains("--force"));
    run_ok(&cfg, &["--force", "build-folds"]);
    assert_eq!(std::fs::read(&fold1).unwrap(), bytes);

    // hand-written fold putting A01 in two subsets
    let text = String::from_utf8(bytes).unwrap();
    let bad = text.replacen("\"attacks\": {", "\"attacks\": {\n    \"A01\": \"train\",\n    \"A01\": \"eval\",", 1);
    std::fs::write(dir.path().join("bad.json"), bad).unwrap();
    let mut c: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    c["fold_overrides"] = serde_json::json!({"1": "bad.json"});
    std::fs::write(&cfg, c.to_string()).unwrap();
    let (code, text) = aad(&["--config", cfg.to_str().unwrap(), "--force", "build-folds"]);
    assert_eq!(code, 1);
    assert!(text.contains("A01"), "{text}");
}

fn index_rows(path: &Path) -> Vec<(String, usize, usize)> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    rd.records().map(|r| {
        let r = r.unwrap();
        (r[1].to_string(), r[2].parse().unwrap(), r[3].parse().unwrap())
    })
    .collect()
}

#[test]
fn extract_shapes_and_failure_handling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    run_ok(&cfg, &["ingest"]);
    let wav_dir = dir.path().join("toy/ASVspoof2019_LA_train/wav");
    std::fs::write(wav_dir.join("LA_T_0000002.wav"), b"RIFF garbage").unwrap();

    let text = run_ok(&cfg, &["--jobs", "2", "extract"]);
    let s = summary_line(&text);
    assert_eq!((s["files"].as_u64(), s["warnings"].as_u64()), (Some(44), Some(1)));
    let rows = index_rows(&dir.path().join("work/features/lfcc/index.csv"));
    assert_eq!(rows.len(), 43);
    assert!(rows.iter().all(|(f, r, c)| f.ends_with(".aadf") && (*r, *c) == (80, 398)));

    run_ok(&cfg, &["--frontend", "lfcc+spec", "extract"]);
    let rows = index_rows(&dir.path().join("work/features/lfcc_spec/index.csv"));
    assert!(rows.iter().all(|(_, r, c)| (*r, *c) == (240, 398)));

    for i in 3..=8 {
        std::fs::write(wav_dir.join(format!("LA_T_{i:07}.wav")), b"").unwrap();
    }
    let (code, text) = aad(&["--config", cfg.to_str().unwrap(), "extract"]);
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("aborting"));
}

#[test]
fn train_eval_report_round() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    run_ok(&cfg, &["ingest"]);
    run_ok(&cfg, &["build-folds"]);
    let (code, _) = aad(&["--config", cfg.to_str().unwrap(), "train"]);
    assert_eq!(code, 2, "features missing");
    run_ok(&cfg, &["extract"]);
    let (code, _) = aad(&["--config", cfg.to_str().unwrap(), "eval"]);
    assert_eq!(code, 2, "models missing");

    run_ok(&cfg, &["train"]);
    let model = dir.path().join("work/models/lfcc/gmm_f2_s0.aagm");
    let first = std::fs::read(&model).unwrap();
    run_ok(&cfg, &["--fold", "2", "train"]);
    assert_eq!(std::fs::read(&model).unwrap(), first);

    let log: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(model.with_extension("train.json")).unwrap()).unwrap();
    for class in ["bonafide", "spoof"] {
        let ll: Vec<f64> = log[class]["log_likelihoods"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        assert!(ll.windows(2).all(|w| w[1] >= w[0] - 1e-8), "{class}: {ll:?}");
    }

    let text = run_ok(&cfg, &["eval"]);
    for r in summary_line(&text)["results"].as_array().unwrap() {
        assert!(r["eer"].as_f64().unwrap() < 5.0, "{text}");
    }
    let scores = std::fs::read_to_string(dir.path().join("work/scores/lfcc/scores_f1_s0.csv")).unwrap();
    assert!(scores.starts_with("path,score,label\n"));

    let text = run_ok(&cfg, &["report"]);
    let table: Vec<&str> = text.lines().take_while(|l| !l.starts_with("summary")).collect();
    assert_eq!(table.len(), 4);
    assert!(table[1].starts_with("1 | ") && table[3].starts_with("3 | "));
    assert!(dir.path().join("work/report.json").is_file());
}

#[test]
fn identical_mixtures_give_chance_eer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    for step in [&["ingest"][..], &["build-folds"], &["extract"], &["--fold", "1", "train"]] {
        run_ok(&cfg, step);
    }
    let path = dir.path().join("work/models/lfcc/gmm_f1_s0.aagm");
    let model = read_model_file(std::fs::File::open(&path).unwrap()).unwrap();
    let same = GmmPairModel::new(model.bonafide.clone(), model.bonafide, FrontendTag::Lfcc).unwrap();
    let mut bytes = Vec::new();
    write_model_file(&mut bytes, &same).unwrap();
    std::fs::write(&path, bytes).unwrap();
    let text = run_ok(&cfg, &["--fold", "1", "eval"]);
    let eer = summary_line(&text)["results"][0]["eer"].as_f64().unwrap();
    assert!((eer - 50.0).abs() <= 5.0, "{eer}");
}

#[test]
fn too_many_components_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    for step in [&["ingest"][..], &["build-folds"], &["extract"]] {
        run_ok(&cfg, step);
    }
    let mut c: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    c["em"]["k"] = 100_000.into();
    std::fs::write(&cfg, c.to_string()).unwrap();
    let (code, text) = aad(&["--config", cfg.to_str().unwrap(), "--fold", "1", "train"]);
    assert_eq!(code, 1);
    assert!(text.contains("K=100000") && text.contains("training frames"), "{text}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_aad");
    let status = std::process::Command::new(bin).args(["--config", "/nonexistent/cfg.json", "report"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    let status = std::process::Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&status.stdout).contains("build-folds"));
}
