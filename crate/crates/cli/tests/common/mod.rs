#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

pub const BIN: &str = env!("CARGO_BIN_EXE_millscope");

pub fn fixture_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/small.toml")
}

pub fn millscope(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args)
        .env_remove("MILLSCOPE_OUT_DIR")
        .env_remove("MILLSCOPE_WORKERS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Runs `millscope` and fails the test unless it exits 0.
pub fn ok(args: &[&str], envs: &[(&str, &str)]) {
    let out = millscope(args, envs);
    assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
}

/// Every subcommand once, from synthesis to evaluation, into `dir`.
pub fn pipeline(config: &Path, dir: &Path, workers: usize) {
    let cfg = config.to_str().unwrap();
    let out = dir.to_str().unwrap();
    let workers = workers.to_string();
    let corpus = dir.join("corpus.jsonl");
    let flags = dir.join("flags.csv");
    let reviews = dir.join("reviews.csv");
    let truth = dir.join("truth.json");
    let (corpus, flags, reviews, truth) = (
        corpus.to_str().unwrap(),
        flags.to_str().unwrap(),
        reviews.to_str().unwrap(),
        truth.to_str().unwrap(),
    );
    let base = ["--config", cfg, "--out", out, "--workers", &workers];
    let steps: Vec<Vec<&str>> = vec![
        vec!["synth"],
        vec!["ingest", "--corpus", corpus],
        vec!["shapes", "--corpus", corpus],
        vec!["detect", "--corpus", corpus],
        vec!["trend", "--corpus", corpus],
        vec!["nullmodel", "--corpus", corpus],
        vec!["validate", "--corpus", corpus, "--flags", flags],
        vec!["reviews", "--corpus", corpus, "--reviews", reviews],
        vec!["report", "--kind", "publisher", "--corpus", corpus],
        vec!["report", "--kind", "journal", "--corpus", corpus],
        vec!["report", "--kind", "country", "--corpus", corpus],
        vec!["report", "--kind", "institution", "--corpus", corpus],
        vec!["evaluate", "--corpus", corpus, "--truth", truth],
    ];
    for step in steps {
        let args: Vec<&str> = step.iter().copied().chain(base).collect();
        ok(&args, &[]);
    }
}

/// File name to SHA-256 of every regular file in `dir`.
pub fn digests(dir: &Path) -> BTreeMap<String, String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, hex::encode(Sha256::digest(&bytes)))
        })
        .collect()
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

pub fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.deserialize().map(Result::unwrap).collect()
}
