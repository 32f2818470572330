#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the binary inside `dir` so relative paths in reports stay stable.
pub fn sinkclust(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_sinkclust"))
        .args(args)
        .current_dir(dir)
        .env("SINKCLUST_LOG", "error")
        .output()
        .expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = sinkclust(dir, args);
    assert_eq!(out.code, 0, "sinkclust {args:?} failed: {}", out.stderr);
    out
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}
