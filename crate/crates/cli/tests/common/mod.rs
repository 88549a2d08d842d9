#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini")
}

/// Runs the binary against the mini fixture config with `workdir`.
pub fn retrace(workdir: &Path, args: &[&str]) -> Output {
    let config = fixture_dir().join("retrace.toml");
    Command::new(env!("CARGO_BIN_EXE_retrace"))
        .arg("--config")
        .arg(&config)
        .arg("--workdir")
        .arg(workdir)
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

pub fn ok(workdir: &Path, args: &[&str]) -> String {
    let out = retrace(workdir, args);
    assert!(
        out.status.success(),
        "retrace {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Every stage of the pipeline over the mini fixture.
pub fn full_pipeline(workdir: &Path) {
    let fx = fixture_dir();
    let p = |name: &str| fx.join(name).to_string_lossy().into_owned();
    ok(workdir, &["ingest", "--input", &p("rw.csv")]);
    ok(workdir, &["harvest"]);
    ok(workdir, &["affinity", "score"]);
    ok(workdir, &["affinity", "filter"]);
    ok(workdir, &["segment"]);
    ok(workdir, &["annotate", "extract", "--fulltext", &p("fulltext.json")]);
    ok(workdir, &["annotate", "import", "--csv", &p("annotations.csv")]);
    ok(workdir, &["corpus", "build"]);
    ok(workdir, &["topics", "fit"]);
    ok(workdir, &["topics", "export"]);
    ok(workdir, &["report"]);
    ok(workdir, &["export-vis"]);
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}
