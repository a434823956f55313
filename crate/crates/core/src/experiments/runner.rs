use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::config::{HeadKind, RunConfig};
use super::stationarity::{evaluate, snapshot_from_features, StationarityTrace};
use crate::data::{batches, permute_labels, random_permutation, Dataset, LabelPermutation};
use crate::error::{Error, Result};
use crate::nn::{AdamState, ClassifierHead, Network};
use crate::polytope::embedding_dim;
use crate::polytope::PolytopeKind;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    /// Mean training loss of each epoch.
    pub train_loss: Vec<f64>,
    /// Test accuracy after each epoch.
    pub test_acc: Vec<f64>,
    /// Mean feature norm on the test set after each epoch.
    pub mean_feature_norm: Vec<f64>,
    pub final_test_acc: f64,
    /// Present for fixed heads only.
    pub trace: Option<StationarityTrace>,
    /// Not serialized, so result files stay byte-identical across reruns.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Equality ignores `wall_time`.
impl PartialEq for RunResult {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.train_loss == other.train_loss
            && self.test_acc == other.test_acc
            && self.mean_feature_norm == other.mean_feature_norm
            && self.final_test_acc == other.final_test_acc
            && self.trace == other.trace
    }
}

fn check_data(config: &RunConfig, train: &Dataset, test: &Dataset) -> Result<()> {
    for (name, ds) in [("train", train), ("test", test)] {
        if ds.classes != config.classes {
            return Err(Error::config(
                "classes",
                format!("{name} set has {} classes, config says {}", ds.classes, config.classes),
            ));
        }
    }
    if train.input_dim() != test.input_dim() {
        return Err(Error::shape(format!(
            "train inputs have {} columns, test inputs {}",
            train.input_dim(),
            test.input_dim()
        )));
    }
    if train.is_empty() {
        return Err(Error::config("dataset", "training set is empty"));
    }
    Ok(())
}

/// Trains one network and returns its curves plus the final network.
pub fn train_run_with_network(config: &RunConfig, train: &Dataset, test: &Dataset) -> Result<(RunResult, Network)> {
    config.validate()?;
    check_data(config, train, test)?;
    let started = Instant::now();

    let mut net = Network::mlp(train.input_dim(), &config.hidden, config.head_init()?, config.seed)?;
    let mut adam = AdamState::new(config.optimizer, &net.param_sizes());
    let fixed = net.head().fixed_weights().cloned();
    let mut trace = fixed.as_ref().map(|_| StationarityTrace::default());

    if let (Some(w), Some(t)) = (&fixed, trace.as_mut()) {
        let eval = evaluate(&net, test)?;
        t.push(snapshot_from_features(w, &eval.features, &test.labels, 0)?)?;
    }

    let mut train_loss = Vec::with_capacity(config.epochs);
    let mut test_acc = Vec::with_capacity(config.epochs);
    let mut mean_feature_norm = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let mut total = 0.0;
        for batch in batches(train.len(), config.batch_size, config.seed, epoch as u64)? {
            let x = train.inputs.select_rows(&batch);
            let y: Vec<usize> = batch.iter().map(|&i| train.labels[i]).collect();
            let (loss, grads) = net.backward(&x, &y)?;
            adam.step(&mut net.params_mut(), &grads.slices())?;
            total += loss * batch.len() as f64;
        }
        train_loss.push(total / train.len() as f64);

        let eval = evaluate(&net, test)?;
        test_acc.push(eval.accuracy(&test.labels));
        mean_feature_norm.push(eval.mean_feature_norm());
        if let (Some(w), Some(t)) = (&fixed, trace.as_mut()) {
            if epoch % config.trace_every == 0 || epoch == config.epochs {
                t.push(snapshot_from_features(w, &eval.features, &test.labels, epoch)?)?;
            }
        }
    }

    if let (Some(w), ClassifierHead::Fixed(after)) = (&fixed, net.head()) {
        debug_assert_eq!(w, after, "fixed head changed during training");
    }

    let final_test_acc = match test_acc.last() {
        Some(&a) => a,
        None => evaluate(&net, test)?.accuracy(&test.labels),
    };
    let result = RunResult {
        config: config.clone(),
        train_loss,
        test_acc,
        mean_feature_norm,
        final_test_acc,
        trace,
        wall_time: started.elapsed(),
    };
    Ok((result, net))
}

/// Full training loop: shuffled batches → forward → cross-entropy → backward
/// → Adam, with test evaluation after each epoch.
pub fn train_run(config: &RunConfig, train: &Dataset, test: &Dataset) -> Result<RunResult> {
    train_run_with_network(config, train, test).map(|(r, _)| r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadStats {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl SpreadStats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        SpreadStats {
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeabilityReport {
    pub permutations: Vec<LabelPermutation>,
    pub final_accuracies: Vec<f64>,
    pub stats: SpreadStats,
    pub runs: Vec<RunResult>,
}

/// Trains one model per random label permutation (seed `base_seed + i`) and
/// summarizes the spread of final accuracies.
pub fn exchangeability_experiment(
    config: &RunConfig,
    train: &Dataset,
    test: &Dataset,
    n_perms: usize,
    base_seed: u64,
    jobs: usize,
) -> Result<ExchangeabilityReport> {
    if n_perms < 2 {
        return Err(Error::config("n_perms", "at least 2 permutations are required"));
    }
    let perms = (0..n_perms as u64)
        .map(|i| random_permutation(config.classes, base_seed + i))
        .collect();
    exchangeability_with_permutations(config, train, test, perms, jobs)
}

/// Same as [`exchangeability_experiment`] with caller-chosen permutations.
///
/// The permutation is applied consistently to train and test labels; the
/// network seed is shared, so runs differ only in which class each label is
/// assigned to. Up to `jobs` runs train in parallel and results are gathered
/// by permutation index.
pub fn exchangeability_with_permutations(
    config: &RunConfig,
    train: &Dataset,
    test: &Dataset,
    perms: Vec<LabelPermutation>,
    jobs: usize,
) -> Result<ExchangeabilityReport> {
    if perms.len() < 2 {
        return Err(Error::config("n_perms", "at least 2 permutations are required"));
    }
    config.validate()?;
    let runs = run_indexed(perms.len(), jobs, |i| {
        let p = &perms[i];
        train_run(config, &permute_labels(train, p)?, &permute_labels(test, p)?)
    })?;
    let final_accuracies: Vec<f64> = runs.iter().map(|r| r.final_test_acc).collect();
    Ok(ExchangeabilityReport {
        stats: SpreadStats::of(&final_accuracies),
        final_accuracies,
        permutations: perms,
        runs,
    })
}

/// Runs `f(0..n)` on up to `jobs` worker threads and returns results in index order.
fn run_indexed<T, F>(n: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let workers = jobs.clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..n).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let out = f(i);
                slots.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|slot| slot.expect("every index is visited"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub classes: usize,
    pub hadamard_dim: usize,
    pub orthoplex_dim: usize,
    pub hadamard_acc: f64,
    pub orthoplex_acc: f64,
    /// orthoplex_acc − hadamard_acc
    pub delta: f64,
    pub hadamard: RunResult,
    pub orthoplex: RunResult,
}

/// Trains a Hadamard head of dimension `hadamard_dim` and an orthoplex head at
/// its natural dimension on identical data and seeds.
pub fn hadamard_comparison(
    classes: usize,
    hadamard_dim: usize,
    config: &RunConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<ComparisonReport> {
    if hadamard_dim == 0 || !hadamard_dim.is_power_of_two() {
        return Err(Error::InvalidHadamardOrder(hadamard_dim));
    }
    let mut had_cfg = config.clone();
    had_cfg.classes = classes;
    had_cfg.head = HeadKind::Hadamard;
    had_cfg.hadamard_dim = Some(hadamard_dim);
    had_cfg.trainable_dim = None;

    let mut ortho_cfg = had_cfg.clone();
    ortho_cfg.head = HeadKind::Orthoplex;
    ortho_cfg.hadamard_dim = None;

    let hadamard = train_run(&had_cfg, train, test)?;
    let orthoplex = train_run(&ortho_cfg, train, test)?;
    Ok(ComparisonReport {
        classes,
        hadamard_dim,
        orthoplex_dim: embedding_dim(PolytopeKind::Orthoplex, classes)?,
        hadamard_acc: hadamard.final_test_acc,
        orthoplex_acc: orthoplex.final_test_acc,
        delta: orthoplex.final_test_acc - hadamard.final_test_acc,
        hadamard,
        orthoplex,
    })
}
