//! Fixed invocations whose output is pinned in `golden/`.

use std::path::{Path, PathBuf};

use assert_cmd::Command;

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn bin() -> Command {
    let mut c = Command::cargo_bin("baire-games").unwrap();
    c.current_dir(golden_dir());
    c
}

/// (golden file, arguments)
pub const PLAYS: [(&str, &[&str]); 3] = [
    (
        "play_ex63_random.txt",
        &["play", "--cs", "ex63", "--payoff", "full_omega.tree", "--horizon", "3", "--I", "random:1", "--II", "random:1"],
    ),
    (
        "play_ex61_cover.txt",
        &["play", "--cs", "ex61", "--payoff", "branch0.tree", "--I", "random:1", "--II", "from-cover:coverdir", "--horizon", "4"],
    ),
    (
        "play_ex62_solver.json",
        &["play", "--cs", "ex62:3", "--horizon", "3", "--letter-cap", "3", "--cond-limit", "3", "--I", "solver", "--II", "random:7", "--json"],
    ),
];

/// Runs each pinned play twice and compares with its golden file.
/// `BLESS=1` rewrites the files instead.
pub fn check_goldens() -> Vec<String> {
    let mut bad = Vec::new();
    for (file, args) in PLAYS {
        let first = bin().args(args).output().unwrap();
        let second = bin().args(args).output().unwrap();
        if !first.status.success() {
            bad.push(format!("{file}: exit {:?}: {}", first.status.code(), String::from_utf8_lossy(&first.stderr)));
            continue;
        }
        if first.stdout != second.stdout {
            bad.push(format!("{file}: two runs differ"));
        }
        let path = golden_dir().join(file);
        if std::env::var_os("BLESS").is_some() {
            std::fs::write(&path, &first.stdout).unwrap();
            continue;
        }
        match std::fs::read(&path) {
            Ok(want) if want == first.stdout => {}
            Ok(_) => bad.push(format!("{file}: output differs from golden")),
            Err(e) => bad.push(format!("{file}: {e}")),
        }
    }
    bad
}
