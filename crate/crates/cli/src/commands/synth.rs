use std::collections::BTreeMap;
use std::io::Write;

use aad_core::corpus::Dataset;
use aad_core::gmm::EmConfig;
use aad_core::synth::{generate_toy_corpus, SynthConfig};
use serde_json::json;

use super::{summary, write_file};
use crate::{CliError, RunConfig, SynthArgs};

pub fn run(args: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let synth_cfg = SynthConfig {
        n_bonafide: args.n_bonafide,
        n_per_attack: args.n_per_attack,
        n_attacks: args.attacks,
        seed: args.corpus_seed,
        ..Default::default()
    };
    let corpus = args.out.join("toy");
    let s = generate_toy_corpus(&corpus, &synth_cfg).map_err(|e| CliError::Invalid(format!("synth: {e}")))?;

    let mut cfg = RunConfig::new(BTreeMap::from([(Dataset::AsvspoofLa, "toy".into())]), "work".into());
    cfg.em = EmConfig { k: 8, max_iters: 30, ..EmConfig::default() };
    let config_path = args.out.join("config.json");
    write_file(&config_path, cfg.to_json())?;

    writeln!(out, "wrote {} bona fide and {} spoof files ({}) to {}", s.bonafide, s.spoof, s.attacks.join(","), corpus.display())?;
    writeln!(out, "config: {}", config_path.display())?;
    summary(
        out,
        "synth",
        json!({"bonafide": s.bonafide, "spoof": s.spoof, "attacks": s.attacks.len(), "config": config_path}),
    )
}
