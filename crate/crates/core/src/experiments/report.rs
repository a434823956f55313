//! Metrics files: one CSV per run and JSON summaries.
//!
//! Run CSV columns are
//! `epoch,train_loss,test_acc,delta_c0,…,delta_c{K-1},mean_feat_norm`, one row
//! per epoch. Delta cells are empty where no snapshot was taken, for classes
//! without a defined mean direction, and for trainable heads.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::runner::RunResult;
use crate::error::Result;

/// `<kind>_K<k>_seed<s>`
pub fn run_file_stem(result: &RunResult) -> String {
    let c = &result.config;
    format!("{}_K{}_seed{}", c.head, c.classes, c.seed)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn run_csv(result: &RunResult) -> String {
    let k = result.config.classes;
    let mut out = String::from("epoch,train_loss,test_acc");
    for c in 0..k {
        let _ = write!(out, ",delta_c{c}");
    }
    out.push_str(",mean_feat_norm\n");

    for (i, (loss, acc)) in result.train_loss.iter().zip(&result.test_acc).enumerate() {
        let epoch = i + 1;
        let _ = write!(out, "{epoch},{},{}", num(*loss), num(*acc));
        let snap = result.trace.as_ref().and_then(|t| t.at_epoch(epoch));
        for c in 0..k {
            out.push(',');
            if let Some(d) = snap.and_then(|s| s.delta.get(c).copied().flatten()) {
                out.push_str(&num(d));
            }
        }
        let _ = writeln!(out, ",{}", num(result.mean_feature_norm[i]));
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the CSV path.
pub fn write_run(dir: &Path, stem: &str, result: &RunResult) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    fs::write(&csv, run_csv(result))?;
    write_json(&dir.join(format!("{stem}.json")), result)?;
    Ok(csv)
}
