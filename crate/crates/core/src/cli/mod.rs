//! The `polyhead` command line.
//!
//! Exit codes: 0 success, 1 validation failure (bad arguments, bad config,
//! failed verification), 2 I/O error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use config::{CliConfig, Command, DatasetSource};

use crate::data::{random_permutation, LabelPermutation};
use crate::error::{Error, Result};
use crate::experiments::{
    exchangeability_with_permutations, hadamard_comparison, report, train_run_with_network, RunResult,
    SpreadStats,
};
use crate::nn::Checkpoint;
use crate::polytope::{self, expected_neighbor_angle, read_weights, verify, write_weights, PolytopeKind, WeightFormat};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_IO: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "polyhead", version, about = "Fixed polytope classifiers: build, verify, train")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Write a fixed weight matrix to CSV or JSON.
    GenWeights {
        #[arg(long)]
        kind: PolytopeKind,
        #[arg(long = "k")]
        classes: usize,
        /// Embedding dimension (hadamard only; defaults to the next power of two).
        #[arg(long = "d")]
        dim: Option<usize>,
        /// Defaults to `<kind>_K<k>.<format>` in the working directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to the extension of `--out`, else csv.
        #[arg(long)]
        format: Option<WeightFormat>,
    },
    /// Check norms, angles and capacity of a weight file.
    Verify { path: PathBuf },
    /// Train one network.
    Train { config: PathBuf },
    /// Train once per random label permutation and summarize the spread.
    Permute {
        config: PathBuf,
        /// Parallel runs; overrides `jobs` in the config.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Hadamard head of dimension `d_had` against the orthoplex head.
    CompareHadamard { config: PathBuf },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { EXIT_OK });
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => ExitCode::from(EXIT_INVALID),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        EXIT_IO
    } else {
        EXIT_INVALID
    }
}

/// Runs one command; `Ok(false)` means it ran but a check failed.
pub fn execute(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::GenWeights {
            kind,
            classes,
            dim,
            out,
            format,
        } => gen_weights(kind, classes, dim, out, format).map(|_| true),
        Cmd::Verify { path } => verify_file(&path),
        Cmd::Train { config } => train(&config).map(|_| true),
        Cmd::Permute { config, jobs } => permute(&config, jobs).map(|_| true),
        Cmd::CompareHadamard { config } => compare_hadamard(&config).map(|_| true),
    }
}

fn angle_text(w: &polytope::WeightMatrix) -> String {
    match expected_neighbor_angle(w.kind(), w.dim()) {
        Ok(a) => format!("{a:.12} rad ({:.6} deg)", a.to_degrees()),
        Err(_) if w.is_orthogonal() => format!("{:.12} rad (orthogonal rows)", std::f64::consts::FRAC_PI_2),
        Err(_) => "none (rows not mutually orthogonal)".into(),
    }
}

pub fn gen_weights(
    kind: PolytopeKind,
    classes: usize,
    dim: Option<usize>,
    out: Option<PathBuf>,
    format: Option<WeightFormat>,
) -> Result<PathBuf> {
    let w = match (kind, dim) {
        (PolytopeKind::Hadamard, Some(d)) => polytope::build_hadamard_with_dim(classes, d)?,
        (_, Some(_)) => return Err(Error::config("d", "only valid with --kind hadamard")),
        (k, None) => polytope::build(k, classes)?,
    };
    let format = format.unwrap_or_else(|| out.as_deref().map_or(WeightFormat::Csv, WeightFormat::from_path));
    let out = out.unwrap_or_else(|| {
        let ext = match format {
            WeightFormat::Csv => "csv",
            WeightFormat::Json => "json",
        };
        PathBuf::from(format!("{kind}_K{classes}.{ext}"))
    });
    write_weights(&w, &out, format)?;
    println!("kind={kind} K={} d={}", w.classes(), w.dim());
    println!("expected neighbor angle: {}", angle_text(&w));
    println!("wrote {}", out.display());
    Ok(out)
}

pub fn verify_file(path: &Path) -> Result<bool> {
    let w = read_weights(path)?;
    let r = verify(&w);
    let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
    println!("kind={} K={} d={}", r.kind, r.classes, r.dim);
    println!("norm_ok={} max_norm_error={:.3e}", mark(r.norm_ok), r.max_norm_error);
    println!("angle_ok={} max_angle_error={:.3e}", mark(r.angle_ok), r.max_angle_error);
    println!("capacity_ok={}", mark(r.capacity_ok));
    println!("distinct_ok={}", mark(r.distinct_ok));
    if let Some(a) = r.expected_angle {
        println!("expected_angle={a:.12}");
    }
    println!("{}", if r.all_ok() { "PASS" } else { "FAIL" });
    Ok(r.all_ok())
}

fn load(config: &Path, command: Command) -> Result<(CliConfig, crate::experiments::RunConfig)> {
    let cli = CliConfig::load(config)?;
    let rc = cli.run_config(command)?;
    Ok((cli, rc))
}

fn write_result(dir: &Path, stem: &str, r: &RunResult) -> Result<PathBuf> {
    report::write_run(dir, stem, r)
}

pub fn train(config: &Path) -> Result<PathBuf> {
    let (cli, rc) = load(config, Command::Train)?;
    let dir = cli.experiment_dir()?;
    let (train, test) = rc.dataset.load(rc.classes)?;
    let (result, net) = train_run_with_network(&rc, &train, &test)?;

    let stem = report::run_file_stem(&result);
    let csv = write_result(&dir, &stem, &result)?;
    let ckpt = Checkpoint::capture(&net, serde_json::to_value(&rc)?, rc.seed, rc.epochs);
    ckpt.save(&dir.join(format!("{stem}.ckpt.json")))?;

    println!("{stem}: final test accuracy {:.4}", result.final_test_acc);
    if let Some(d) = result.trace.as_ref().and_then(|t| t.final_mean_delta()) {
        println!("final mean delta {d:.4} rad");
    }
    println!("wrote {}", csv.display());
    Ok(csv)
}

#[derive(Serialize)]
struct PermuteSummary<'a> {
    experiment: &'a str,
    kind: String,
    classes: usize,
    seed: u64,
    base_seed: u64,
    permutations: &'a [LabelPermutation],
    final_accuracies: &'a [f64],
    stats: SpreadStats,
}

pub fn permute(config: &Path, jobs: Option<usize>) -> Result<PathBuf> {
    let (cli, rc) = load(config, Command::Permute)?;
    if jobs == Some(0) {
        return Err(Error::config("jobs", "must be at least 1"));
    }
    let jobs = jobs.or(cli.jobs).unwrap_or(1);
    let n = cli.n_perms.expect("checked by run_config");
    let base_seed = cli.base_seed.expect("checked by run_config");
    let dir = cli.experiment_dir()?;
    let (train, test) = rc.dataset.load(rc.classes)?;

    let perms: Vec<LabelPermutation> = (0..n as u64)
        .map(|i| {
            if cli.fixed_permutation.unwrap_or(false) {
                LabelPermutation::identity(rc.classes)
            } else {
                random_permutation(rc.classes, base_seed + i)
            }
        })
        .collect();
    let rep = exchangeability_with_permutations(&rc, &train, &test, perms, jobs)?;

    for (i, r) in rep.runs.iter().enumerate() {
        write_result(&dir, &format!("{}_perm{i}", report::run_file_stem(r)), r)?;
    }
    let summary = dir.join("summary.json");
    report::write_json(
        &summary,
        &PermuteSummary {
            experiment: &rc.experiment,
            kind: rc.head.to_string(),
            classes: rc.classes,
            seed: rc.seed,
            base_seed,
            permutations: &rep.permutations,
            final_accuracies: &rep.final_accuracies,
            stats: rep.stats,
        },
    )?;
    let s = rep.stats;
    println!(
        "{n} permutations: mean {:.4} std {:.4} min {:.4} max {:.4}",
        s.mean, s.std, s.min, s.max
    );
    println!("wrote {}", summary.display());
    Ok(summary)
}

pub fn compare_hadamard(config: &Path) -> Result<PathBuf> {
    let (cli, rc) = load(config, Command::CompareHadamard)?;
    let d_had = cli.d_had.expect("checked by run_config");
    let dir = cli.experiment_dir()?;
    let (train, test) = rc.dataset.load(rc.classes)?;
    let rep = hadamard_comparison(rc.classes, d_had, &rc, &train, &test)?;

    for r in [&rep.hadamard, &rep.orthoplex] {
        write_result(&dir, &report::run_file_stem(r), r)?;
    }
    let path = dir.join("comparison.json");
    report::write_json(&path, &rep)?;
    println!(
        "K={} hadamard d={} acc {:.4}, orthoplex d={} acc {:.4}, delta {:+.4}",
        rep.classes, rep.hadamard_dim, rep.hadamard_acc, rep.orthoplex_dim, rep.orthoplex_acc, rep.delta
    );
    println!("wrote {}", path.display());
    Ok(path)
}
