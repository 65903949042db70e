use std::time::Instant;

use crate::dataio::LabeledDataset;
use crate::error::{mismatch, Error, Result};
use crate::experiment::config::RunConfig;
use crate::learning::{train_epoch, OptimizerState};
use crate::network::Network;
use crate::scalar::Scalar;

const EVAL_CHUNK: usize = 1000;

/// Per-epoch test accuracy of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub config: RunConfig,
    pub per_epoch_accuracy: Vec<f64>,
    pub final_accuracy: f64,
    pub wall_time_seconds: f64,
}

impl TrainReport {
    /// Equality ignoring wall time.
    pub fn same_results(&self, other: &Self) -> bool {
        self.config == other.config
            && self.per_epoch_accuracy == other.per_epoch_accuracy
            && self.final_accuracy == other.final_accuracy
    }
}

/// Reports for a grid of runs, in grid order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepRecord {
    pub reports: Vec<TrainReport>,
}

/// A finished run together with its trained network.
#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub report: TrainReport,
    pub network: Network<T>,
}

/// Fraction of samples whose predicted digit matches the target's class.
pub fn evaluate<T: Scalar>(net: &Network<T>, test: &LabeledDataset<T>) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::InvalidValue(
            "cannot evaluate on an empty dataset".into(),
        ));
    }
    if test.input_width() != net.input_width() {
        return Err(mismatch(
            "evaluate input",
            net.input_width(),
            test.input_width(),
        ));
    }
    let mut correct = 0usize;
    let indices: Vec<usize> = (0..test.len()).collect();
    for chunk in indices.chunks(EVAL_CHUNK) {
        let (inputs, _) = test.gather(chunk)?;
        let predicted = net.predict_batch(&inputs)?;
        correct += chunk
            .iter()
            .zip(predicted)
            .filter(|&(&i, p)| test.label(i) == p)
            .count();
    }
    Ok(correct as f64 / test.len() as f64)
}

/// Builds the configured network, trains it for `config.epochs` epochs and
/// evaluates on `test` after each one. `on_epoch` receives the 1-based
/// epoch number and that epoch's accuracy.
pub fn train_with_progress<T: Scalar>(
    config: &RunConfig,
    train: &LabeledDataset<T>,
    test: &LabeledDataset<T>,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    let started = Instant::now();
    let hp = config.hyperparams::<T>();
    let mut network = Network::build(config.input_width(), &config.layer_specs(), config.seed)?;
    let mut state = OptimizerState::new(hp.optimizer, &network);
    let mut per_epoch_accuracy = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        train_epoch(
            &mut network,
            train,
            &hp,
            &mut state,
            config.seed,
            epoch as u64,
        )?;
        let accuracy = evaluate(&network, test)?;
        on_epoch(epoch + 1, accuracy);
        per_epoch_accuracy.push(accuracy);
    }
    let report = TrainReport {
        config: *config,
        final_accuracy: *per_epoch_accuracy.last().expect("epochs >= 1"),
        per_epoch_accuracy,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(TrainOutcome { report, network })
}

pub fn train<T: Scalar>(
    config: &RunConfig,
    train: &LabeledDataset<T>,
    test: &LabeledDataset<T>,
) -> Result<TrainReport> {
    Ok(train_with_progress(config, train, test, |_, _| {})?.report)
}

/// Runs every configuration; `on_epoch` receives the grid index as well.
pub fn sweep_with_progress<T: Scalar>(
    grid: &[RunConfig],
    train: &LabeledDataset<T>,
    test: &LabeledDataset<T>,
    mut on_epoch: impl FnMut(usize, usize, f64),
) -> Result<SweepRecord> {
    if grid.is_empty() {
        return Err(Error::InvalidValue("sweep grid is empty".into()));
    }
    for config in grid {
        config.validate()?;
    }
    let mut reports = Vec::with_capacity(grid.len());
    for (i, config) in grid.iter().enumerate() {
        let outcome = train_with_progress(config, train, test, |e, a| on_epoch(i, e, a))?;
        reports.push(outcome.report);
    }
    Ok(SweepRecord { reports })
}

pub fn sweep<T: Scalar>(
    grid: &[RunConfig],
    train: &LabeledDataset<T>,
    test: &LabeledDataset<T>,
) -> Result<SweepRecord> {
    sweep_with_progress(grid, train, test, |_, _, _| {})
}
