use std::fmt;
use std::str::FromStr;

use crate::dataio::{MNIST_CLASSES, MNIST_PIXELS};
use crate::error::{Error, Result};
use crate::learning::{Hyperparams, LossKind, OptimizerKind};
use crate::network::{ActivationKind, LayerSpec};
use crate::scalar::Scalar;

pub const DEFAULT_WIDTH: usize = 500;

/// Bundled choices of activation, loss and optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Sigmoid layers, quadratic cost, plain minibatch SGD with η = 3.
    PaperMath,
    /// Relu hidden layers, identity output with softmax cross-entropy, Adam(0.001).
    Replication,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Self::PaperMath => "paper-math",
            Self::Replication => "replication",
        }
    }

    pub fn hidden_activation(self) -> ActivationKind {
        match self {
            Self::PaperMath => ActivationKind::Sigmoid,
            Self::Replication => ActivationKind::Relu,
        }
    }

    pub fn loss(self) -> LossKind {
        match self {
            Self::PaperMath => LossKind::Quadratic,
            Self::Replication => LossKind::SoftmaxCrossEntropy,
        }
    }

    pub fn optimizer(self) -> OptimizerKind {
        match self {
            Self::PaperMath => OptimizerKind::Sgd,
            Self::Replication => OptimizerKind::Adam,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-math" => Ok(Self::PaperMath),
            "replication" => Ok(Self::Replication),
            _ => Err(Error::InvalidValue(format!("unknown preset {s:?}"))),
        }
    }
}

/// Per-run replacements for preset defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub learning_rate: Option<f64>,
    pub loss: Option<LossKind>,
    pub optimizer: Option<OptimizerKind>,
}

/// One training run: architecture, schedule, seed and optimizer choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub hidden_layers: usize,
    pub neurons_per_layer: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub preset: Preset,
    pub overrides: Overrides,
}

impl RunConfig {
    pub fn new(hidden_layers: usize, batch_size: usize, epochs: usize) -> Self {
        Self {
            hidden_layers,
            neurons_per_layer: DEFAULT_WIDTH,
            batch_size,
            epochs,
            seed: 0,
            preset: Preset::Replication,
            overrides: Overrides::default(),
        }
    }

    pub fn with_width(self, neurons_per_layer: usize) -> Self {
        Self {
            neurons_per_layer,
            ..self
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_preset(self, preset: Preset) -> Self {
        Self { preset, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hidden_layers", self.hidden_layers),
            ("neurons_per_layer", self.neurons_per_layer),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if let Some(lr) = self.overrides.learning_rate {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::Config(format!(
                    "learning rate must be positive, got {lr}"
                )));
            }
        }
        Ok(())
    }

    pub fn loss(&self) -> LossKind {
        self.overrides.loss.unwrap_or(self.preset.loss())
    }

    pub fn optimizer(&self) -> OptimizerKind {
        self.overrides.optimizer.unwrap_or(self.preset.optimizer())
    }

    /// Output activation implied by the loss: logits for cross-entropy,
    /// sigmoid for the quadratic cost.
    pub fn output_activation(&self) -> ActivationKind {
        match self.loss() {
            LossKind::SoftmaxCrossEntropy => ActivationKind::Identity,
            LossKind::Quadratic => ActivationKind::Sigmoid,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.overrides
            .learning_rate
            .unwrap_or(match (self.optimizer(), self.loss()) {
                (OptimizerKind::Adam, _) => 0.001,
                (OptimizerKind::Sgd, LossKind::Quadratic) => 3.0,
                (OptimizerKind::Sgd, LossKind::SoftmaxCrossEntropy) => 0.1,
            })
    }

    /// `784 → hidden_layers × neurons_per_layer → 10`.
    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        let hidden = LayerSpec::new(self.neurons_per_layer, self.preset.hidden_activation());
        let mut specs = vec![hidden; self.hidden_layers];
        specs.push(LayerSpec::new(MNIST_CLASSES, self.output_activation()));
        specs
    }

    pub fn input_width(&self) -> usize {
        MNIST_PIXELS
    }

    pub fn hyperparams<T: Scalar>(&self) -> Hyperparams<T> {
        let base = match self.optimizer() {
            OptimizerKind::Sgd => Hyperparams::sgd(self.batch_size, self.epochs),
            OptimizerKind::Adam => Hyperparams::adam(self.batch_size, self.epochs),
        };
        Hyperparams {
            eta: T::from_f64_lossy(self.learning_rate()),
            loss: self.loss(),
            ..base
        }
    }
}

/// A row of the published hidden-layer / batch-size / epoch table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub hidden_layers: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub reported_accuracy: f64,
}

const fn row(
    hidden_layers: usize,
    batch_size: usize,
    epochs: usize,
    reported_accuracy: f64,
) -> Table1Row {
    Table1Row {
        hidden_layers,
        batch_size,
        epochs,
        reported_accuracy,
    }
}

pub const TABLE1: [Table1Row; 12] = [
    row(2, 50, 50, 0.9726),
    row(3, 50, 20, 0.9645),
    row(3, 50, 50, 0.9656),
    row(4, 50, 20, 0.9632),
    row(4, 100, 20, 0.9581),
    row(4, 50, 50, 0.9732),
    row(4, 100, 50, 0.9656),
    row(5, 50, 40, 0.9709),
    row(6, 50, 20, 0.9591),
    row(7, 50, 20, 0.9567),
    row(8, 50, 20, 0.9619),
    row(9, 50, 20, 0.9592),
];

impl Table1Row {
    /// Allowed deviation from the reported accuracy when replicating this
    /// row: ±0.03 for the deep 20-epoch rows the published curves show as
    /// noisy, ±0.02 otherwise.
    pub fn tolerance(&self) -> f64 {
        if self.hidden_layers >= 6 && self.epochs == 20 {
            0.03
        } else {
            0.02
        }
    }
}

/// The twelve table rows as run configurations; row `i` uses seed `base_seed + i`.
pub fn table1_grid(base_seed: u64, preset: Preset) -> Vec<RunConfig> {
    TABLE1
        .iter()
        .enumerate()
        .map(|(i, r)| {
            RunConfig::new(r.hidden_layers, r.batch_size, r.epochs)
                .with_seed(base_seed.wrapping_add(i as u64))
                .with_preset(preset)
        })
        .collect()
}

/// Built-in grids by name.
pub fn named_grid(name: &str, base_seed: u64, preset: Preset) -> Result<Vec<RunConfig>> {
    match name {
        "table1" => Ok(table1_grid(base_seed, preset)),
        _ => Err(Error::InvalidValue(format!(
            "unknown grid {name:?}; available: table1"
        ))),
    }
}
