//! Argument parsing and command execution for the `depthnet` binary.
//!
//! [`parse_args`] is pure: it turns argv into a [`Command`] or a
//! [`UsageError`] without touching the filesystem. [`run`] validates every
//! referenced path up front and only then starts loading data or training.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use depthnet::dataio::{parse_idx_images, parse_idx_labels, read_idx_file, MnistFiles};
use depthnet::experiment::{
    emit, evaluate, format_accuracy, named_grid, sweep_with_progress, train_with_progress,
    EmitFormat, Overrides, Preset, RunConfig, SweepRecord, DEFAULT_WIDTH,
};
use depthnet::network::checkpoint;
use depthnet::{LossKind, Mnist, OptimizerKind};

pub const DEFAULT_DATA_DIR: &str = "data/mnist";

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Inspect {
        data_dir: PathBuf,
    },
    Train {
        config: RunConfig,
        data_dir: PathBuf,
        outputs: Outputs,
    },
    Eval {
        checkpoint: PathBuf,
        data_dir: PathBuf,
    },
    Sweep {
        grid: GridSource,
        base_seed: u64,
        preset: Preset,
        overrides: Overrides,
        data_dir: PathBuf,
        outputs: Outputs,
    },
}

/// Where result files go. `checkpoint` is only meaningful for `train`.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub format: EmitFormat,
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridSource {
    Named(String),
    File(PathBuf),
}

/// Bad command line. `Display` gives clap's message, which names the
/// offending token.
#[derive(Debug)]
pub struct UsageError {
    message: String,
    /// `--help` and `--version` come through here too and are not failures.
    informational: bool,
}

impl UsageError {
    pub fn is_informational(&self) -> bool {
        self.informational
    }

    pub fn exit_code(&self) -> i32 {
        if self.informational {
            0
        } else {
            2
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message.trim_end())
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(
    name = "depthnet",
    version,
    about = "Train and evaluate fully connected MNIST classifiers of varying depth"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Print IDX header fields and pixel ranges of the four MNIST files.
    Inspect {
        #[arg(long, default_value = DEFAULT_DATA_DIR)]
        data_dir: PathBuf,
    },
    /// Train one network, evaluating on the test set after every epoch.
    Train {
        /// Number of hidden layers.
        #[arg(long)]
        hidden: usize,
        #[arg(long, default_value_t = DEFAULT_WIDTH)]
        width: usize,
        #[arg(long, default_value_t = 50)]
        batch_size: usize,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        optim: OptimArgs,
        #[command(flatten)]
        io: IoArgs,
        /// Save the trained network here.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Report test accuracy of a saved network.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = DEFAULT_DATA_DIR)]
        data_dir: PathBuf,
    },
    /// Train every configuration of a grid.
    Sweep {
        /// Built-in grid name (`table1`).
        #[arg(
            long,
            conflicts_with = "grid_file",
            required_unless_present = "grid_file"
        )]
        grid: Option<String>,
        /// CSV with columns hidden_layers,batch_size,epochs and optional neurons,seed.
        #[arg(long)]
        grid_file: Option<PathBuf>,
        /// Row i of a grid without explicit seeds uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        optim: OptimArgs,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Args, Debug)]
struct OptimArgs {
    #[arg(long, default_value = "replication", value_parser = parse_with::<Preset>)]
    preset: Preset,
    /// Learning rate; the default depends on optimizer and loss.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, value_parser = parse_with::<LossKind>)]
    loss: Option<LossKind>,
    #[arg(long, value_parser = parse_with::<OptimizerKind>)]
    optimizer: Option<OptimizerKind>,
}

#[derive(Args, Debug)]
struct IoArgs {
    #[arg(long, default_value = DEFAULT_DATA_DIR)]
    data_dir: PathBuf,
    /// Write per-epoch results here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_with::<EmitFormat>)]
    format: EmitFormat,
}

fn parse_with<T: std::str::FromStr<Err = depthnet::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: depthnet::Error| e.to_string())
}

impl OptimArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            learning_rate: self.lr,
            loss: self.loss,
            optimizer: self.optimizer,
        }
    }
}

impl IoArgs {
    fn outputs(self, checkpoint: Option<PathBuf>) -> Outputs {
        Outputs {
            report: self.out,
            format: self.format,
            checkpoint,
        }
    }
}

/// Parses a full argv, program name first.
pub fn parse_args<I, S>(argv: I) -> Result<Command, UsageError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError {
        message: e.render().to_string(),
        informational: !e.use_stderr(),
    })?;
    let command = match cli.command {
        Sub::Inspect { data_dir } => Command::Inspect { data_dir },
        Sub::Train {
            hidden,
            width,
            batch_size,
            epochs,
            seed,
            optim,
            io,
            checkpoint,
        } => {
            let config = RunConfig {
                hidden_layers: hidden,
                neurons_per_layer: width,
                batch_size,
                epochs,
                seed,
                preset: optim.preset,
                overrides: optim.overrides(),
            };
            config.validate().map_err(|e| UsageError {
                message: format!("error: {e}"),
                informational: false,
            })?;
            Command::Train {
                config,
                data_dir: io.data_dir.clone(),
                outputs: io.outputs(checkpoint),
            }
        }
        Sub::Eval {
            checkpoint,
            data_dir,
        } => Command::Eval {
            checkpoint,
            data_dir,
        },
        Sub::Sweep {
            grid,
            grid_file,
            seed,
            optim,
            io,
        } => {
            let grid = match (grid, grid_file) {
                (Some(name), None) => GridSource::Named(name),
                (None, Some(path)) => GridSource::File(path),
                _ => unreachable!("clap enforces exactly one grid source"),
            };
            Command::Sweep {
                grid,
                base_seed: seed,
                preset: optim.preset,
                overrides: optim.overrides(),
                data_dir: io.data_dir.clone(),
                outputs: io.outputs(None),
            }
        }
    };
    Ok(command)
}

/// Executes a command, writing the summary line to `stdout` and progress to
/// standard error.
pub fn run(command: &Command, stdout: &mut impl Write) -> anyhow::Result<()> {
    match command {
        Command::Inspect { data_dir } => inspect(data_dir, stdout),
        Command::Train {
            config,
            data_dir,
            outputs,
        } => run_train(config, data_dir, outputs, stdout),
        Command::Eval {
            checkpoint,
            data_dir,
        } => run_eval(checkpoint, data_dir, stdout),
        Command::Sweep {
            grid,
            base_seed,
            preset,
            overrides,
            data_dir,
            outputs,
        } => {
            let configs = resolve_grid(grid, *base_seed, *preset, *overrides)?;
            run_sweep(&configs, data_dir, outputs, stdout)
        }
    }
}

fn inspect(data_dir: &Path, stdout: &mut impl Write) -> anyhow::Result<()> {
    let files = MnistFiles::locate(data_dir)?;
    let mut counts = Vec::new();
    for (images, labels) in [
        (&files.train_images, &files.train_labels),
        (&files.test_images, &files.test_labels),
    ] {
        let raw = parse_idx_images(&read_idx_file(images)?)
            .with_context(|| format!("parsing {}", images.display()))?;
        let (lo, hi) = raw
            .pixels
            .iter()
            .fold((u8::MAX, u8::MIN), |(lo, hi), &p| (lo.min(p), hi.max(p)));
        writeln!(
            stdout,
            "{}: magic=0x{:08x} count={} rows={} cols={} pixel_min={lo} pixel_max={hi}",
            images.display(),
            depthnet::dataio::IMAGES_MAGIC,
            raw.count,
            raw.rows,
            raw.cols
        )?;
        let lab = parse_idx_labels(&read_idx_file(labels)?)
            .with_context(|| format!("parsing {}", labels.display()))?;
        let mut histogram = [0usize; 10];
        for &l in &lab.labels {
            histogram[l as usize] += 1;
        }
        writeln!(
            stdout,
            "{}: magic=0x{:08x} count={} label_counts={:?}",
            labels.display(),
            depthnet::dataio::LABELS_MAGIC,
            lab.count,
            histogram
        )?;
        if raw.count != lab.count {
            bail!(
                "{} has {} images but {} has {} labels",
                images.display(),
                raw.count,
                labels.display(),
                lab.count
            );
        }
        counts.push(raw.count);
    }
    writeln!(stdout, "inspect: ok train={} test={}", counts[0], counts[1])?;
    Ok(())
}

fn run_train(
    config: &RunConfig,
    data_dir: &Path,
    outputs: &Outputs,
    stdout: &mut impl Write,
) -> anyhow::Result<()> {
    MnistFiles::locate(data_dir)?;
    check_writable(outputs)?;
    let data: Mnist<f64> = Mnist::load(data_dir)?;
    eprintln!(
        "training {} hidden x {} ({}), batch {}, {} epochs, seed {}",
        config.hidden_layers,
        config.neurons_per_layer,
        config.preset,
        config.batch_size,
        config.epochs,
        config.seed
    );
    let outcome = train_with_progress(config, &data.train, &data.test, |epoch, acc| {
        eprintln!("epoch {epoch} test_accuracy {}", format_accuracy(acc));
    })?;
    if let Some(path) = &outputs.checkpoint {
        checkpoint::save(&outcome.network, path)
            .with_context(|| format!("writing checkpoint {}", path.display()))?;
    }
    let record = SweepRecord {
        reports: vec![outcome.report.clone()],
    };
    write_report(&record, outputs)?;
    writeln!(
        stdout,
        "train: hidden_layers={} neurons={} batch_size={} epochs={} seed={} final_accuracy={}",
        config.hidden_layers,
        config.neurons_per_layer,
        config.batch_size,
        config.epochs,
        config.seed,
        format_accuracy(outcome.report.final_accuracy)
    )?;
    Ok(())
}

fn run_eval(
    checkpoint_path: &Path,
    data_dir: &Path,
    stdout: &mut impl Write,
) -> anyhow::Result<()> {
    if !checkpoint_path.is_file() {
        bail!("checkpoint {} does not exist", checkpoint_path.display());
    }
    MnistFiles::locate(data_dir)?;
    let net = checkpoint::load::<f64>(checkpoint_path)
        .with_context(|| format!("reading checkpoint {}", checkpoint_path.display()))?;
    let data: Mnist<f64> = Mnist::load(data_dir)?;
    let accuracy = evaluate(&net, &data.test)?;
    writeln!(
        stdout,
        "eval: samples={} accuracy={}",
        data.test.len(),
        format_accuracy(accuracy)
    )?;
    Ok(())
}

fn run_sweep(
    configs: &[RunConfig],
    data_dir: &Path,
    outputs: &Outputs,
    stdout: &mut impl Write,
) -> anyhow::Result<()> {
    MnistFiles::locate(data_dir)?;
    check_writable(outputs)?;
    let data: Mnist<f64> = Mnist::load(data_dir)?;
    let record = sweep_with_progress(configs, &data.train, &data.test, |row, epoch, acc| {
        eprintln!(
            "row {row} epoch {epoch} test_accuracy {}",
            format_accuracy(acc)
        );
    })?;
    write_report(&record, outputs)?;
    let finals: Vec<String> = record
        .reports
        .iter()
        .map(|r| format_accuracy(r.final_accuracy))
        .collect();
    writeln!(
        stdout,
        "sweep: runs={} final_accuracy={}",
        record.reports.len(),
        finals.join(",")
    )?;
    Ok(())
}

/// One row of a user-supplied grid file.
#[derive(Debug, Deserialize)]
struct GridRow {
    hidden_layers: usize,
    batch_size: usize,
    epochs: usize,
    neurons: Option<usize>,
    seed: Option<u64>,
}

pub fn resolve_grid(
    grid: &GridSource,
    base_seed: u64,
    preset: Preset,
    overrides: Overrides,
) -> anyhow::Result<Vec<RunConfig>> {
    let mut configs = match grid {
        GridSource::Named(name) => named_grid(name, base_seed, preset)?,
        GridSource::File(path) => {
            let mut reader = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_path(path)
                .with_context(|| format!("opening grid file {}", path.display()))?;
            let mut configs = Vec::new();
            for (i, row) in reader.deserialize::<GridRow>().enumerate() {
                let row =
                    row.with_context(|| format!("grid file {} row {}", path.display(), i + 1))?;
                configs.push(
                    RunConfig::new(row.hidden_layers, row.batch_size, row.epochs)
                        .with_width(row.neurons.unwrap_or(DEFAULT_WIDTH))
                        .with_seed(row.seed.unwrap_or(base_seed.wrapping_add(i as u64)))
                        .with_preset(preset),
                );
            }
            configs
        }
    };
    if configs.is_empty() {
        bail!("grid has no rows");
    }
    for config in &mut configs {
        config.overrides = overrides;
        config.validate()?;
    }
    Ok(configs)
}

fn check_writable(outputs: &Outputs) -> anyhow::Result<()> {
    for path in outputs.report.iter().chain(&outputs.checkpoint) {
        let parent = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        if !parent.is_dir() {
            bail!("output directory {} does not exist", parent.display());
        }
        if path.is_dir() {
            bail!("output path {} is a directory", path.display());
        }
    }
    Ok(())
}

fn write_report(record: &SweepRecord, outputs: &Outputs) -> anyhow::Result<()> {
    if let Some(path) = &outputs.report {
        fs::write(path, emit(record, outputs.format))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
