use std::fmt;
use std::str::FromStr;

use crate::dataio::{minibatches, LabeledDataset};
use crate::error::{Error, Result};
use crate::learning::backprop::{backprop_batch, Gradients};
use crate::learning::loss::LossKind;
use crate::network::Network;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sgd => "sgd",
            Self::Adam => "adam",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(Self::Sgd),
            "adam" => Ok(Self::Adam),
            _ => Err(Error::InvalidValue(format!("unknown optimizer {s:?}"))),
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams<T> {
    /// Learning rate η.
    pub eta: T,
    /// Minibatch size m.
    pub batch_size: usize,
    pub epochs: usize,
    pub loss: LossKind,
    pub optimizer: OptimizerKind,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Scalar> Hyperparams<T> {
    /// Plain SGD on the quadratic cost with η = 3.
    pub fn sgd(batch_size: usize, epochs: usize) -> Self {
        Self {
            eta: lit(3.0),
            batch_size,
            epochs,
            loss: LossKind::Quadratic,
            optimizer: OptimizerKind::Sgd,
            beta1: lit(0.9),
            beta2: lit(0.999),
            epsilon: lit(1e-8),
        }
    }

    /// Adam(η = 0.001, β₁ = 0.9, β₂ = 0.999, ε = 1e-8) on softmax cross-entropy.
    pub fn adam(batch_size: usize, epochs: usize) -> Self {
        Self {
            eta: lit(0.001),
            loss: LossKind::SoftmaxCrossEntropy,
            optimizer: OptimizerKind::Adam,
            ..Self::sgd(batch_size, epochs)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > T::zero()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.eta
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        let unit = |b: T| b >= T::zero() && b < T::one();
        if !unit(self.beta1) || !unit(self.beta2) {
            return Err(Error::Config(format!(
                "Adam betas must lie in [0, 1), got {} and {}",
                self.beta1, self.beta2
            )));
        }
        if !(self.epsilon > T::zero()) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// `w ← w − η ∂C/∂w` and `b ← b − η ∂C/∂b` for every parameter.
pub fn gd_step<T: Scalar>(net: &mut Network<T>, grads: &Gradients<T>, eta: T) -> Result<()> {
    grads.check_shapes(net)?;
    for (layer, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
        for (w, &d) in layer
            .weights
            .as_mut_slice()
            .iter_mut()
            .zip(g.weights.as_slice())
        {
            *w -= eta * d;
        }
        for (b, &d) in layer
            .biases
            .as_mut_slice()
            .iter_mut()
            .zip(g.biases.as_slice())
        {
            *b -= eta * d;
        }
    }
    Ok(())
}

/// First and second moment estimates for Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub first: Gradients<T>,
    pub second: Gradients<T>,
    pub step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(net: &Network<T>) -> Self {
        Self {
            first: Gradients::zeros_like(net),
            second: Gradients::zeros_like(net),
            step: 0,
        }
    }
}

/// One Adam update with bias-corrected moments:
/// `w ← w − η m̂ / (√v̂ + ε)`.
pub fn adam_step<T: Scalar>(
    net: &mut Network<T>,
    grads: &Gradients<T>,
    state: &mut AdamState<T>,
    hp: &Hyperparams<T>,
) -> Result<()> {
    grads.check_shapes(net)?;
    state.first.check_shapes(net)?;
    state.second.check_shapes(net)?;
    state.step += 1;
    let t = i32::try_from(state.step).unwrap_or(i32::MAX);
    let (b1, b2) = (hp.beta1, hp.beta2);
    let correct1 = T::one() - b1.powi(t);
    let correct2 = T::one() - b2.powi(t);
    let params = net.layers_mut().iter_mut().flat_map(|l| {
        l.weights
            .as_mut_slice()
            .iter_mut()
            .chain(l.biases.as_mut_slice())
    });
    for (((p, g), m), v) in params
        .zip(grads.values())
        .zip(state.first.values_mut())
        .zip(state.second.values_mut())
    {
        *m = b1 * *m + (T::one() - b1) * g;
        *v = b2 * *v + (T::one() - b2) * g * g;
        let m_hat = *m / correct1;
        let v_hat = *v / correct2;
        *p -= hp.eta * m_hat / (v_hat.sqrt() + hp.epsilon);
    }
    Ok(())
}

/// Optimizer memory carried between minibatches and epochs.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerState<T> {
    Sgd,
    Adam(AdamState<T>),
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(kind: OptimizerKind, net: &Network<T>) -> Self {
        match kind {
            OptimizerKind::Sgd => Self::Sgd,
            OptimizerKind::Adam => Self::Adam(AdamState::new(net)),
        }
    }

    /// Applies one update from the minibatch mean gradient.
    pub fn apply(
        &mut self,
        net: &mut Network<T>,
        mean_grads: &Gradients<T>,
        hp: &Hyperparams<T>,
    ) -> Result<()> {
        match self {
            Self::Sgd => gd_step(net, mean_grads, hp.eta),
            Self::Adam(state) => adam_step(net, mean_grads, state, hp),
        }
    }
}

/// What happened during one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochSummary<T> {
    /// Number of parameter updates applied (one per minibatch).
    pub updates: usize,
    /// Mean per-sample training cost, measured before each batch's update.
    pub mean_cost: T,
}

/// One pass over `ds` in minibatches shuffled with `seed ^ epoch_index`.
///
/// Each batch's per-sample gradients are summed in sample order, divided by
/// the batch length, and handed to the optimizer.
pub fn train_epoch<T: Scalar>(
    net: &mut Network<T>,
    ds: &LabeledDataset<T>,
    hp: &Hyperparams<T>,
    state: &mut OptimizerState<T>,
    seed: u64,
    epoch_index: u64,
) -> Result<EpochSummary<T>> {
    hp.validate()?;
    let mut updates = 0;
    let mut total_cost = T::zero();
    for batch in minibatches(ds, hp.batch_size, seed ^ epoch_index)? {
        let (cost, sum) = backprop_batch(net, &batch.inputs, &batch.targets, hp.loss)?;
        total_cost += cost;
        state.apply(net, &sum.mean_of(batch.len()), hp)?;
        updates += 1;
    }
    Ok(EpochSummary {
        updates,
        mean_cost: total_cost / T::from_usize(ds.len()).unwrap(),
    })
}

/// Minibatch stochastic gradient descent epoch: every batch applies
/// `w ← w − (η/m) Σ_j ∂C_{x_j}/∂w`.
pub fn sgd_epoch<T: Scalar>(
    net: &mut Network<T>,
    ds: &LabeledDataset<T>,
    hp: &Hyperparams<T>,
    seed: u64,
    epoch_index: u64,
) -> Result<EpochSummary<T>> {
    train_epoch(net, ds, hp, &mut OptimizerState::Sgd, seed, epoch_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::backprop::{backprop, full_batch_gradient, LayerGradients};
    use crate::linalg::{Matrix, Vector};
    use crate::network::{ActivationKind, Layer, LayerSpec};

    fn scalar_net(w: f64) -> Network<f64> {
        let layer = Layer {
            weights: Matrix::from_rows(&[[w]]).unwrap(),
            biases: Vector::from_vec(vec![0.0]),
            activation: ActivationKind::Identity,
        };
        Network::from_layers(1, vec![layer]).unwrap()
    }

    fn scalar_grads(g: f64) -> Gradients<f64> {
        Gradients {
            layers: vec![LayerGradients {
                weights: Matrix::from_rows(&[[g]]).unwrap(),
                biases: Vector::from_vec(vec![g]),
            }],
        }
    }

    #[test]
    fn gd_step_substitution() {
        let mut net = scalar_net(2.0);
        gd_step(&mut net, &scalar_grads(2.0), 0.1).unwrap();
        assert_eq!(net.layers()[0].weights[(0, 0)], 1.8);
    }

    #[test]
    fn gd_step_zero_eta_or_zero_grad_is_noop() {
        let net =
            Network::<f64>::build(3, &[LayerSpec::new(2, ActivationKind::Sigmoid)], 4).unwrap();
        let x = Vector::from_vec(vec![0.2, 0.4, 0.6]);
        let (_, g) = backprop(
            &net,
            &x,
            &Vector::from_vec(vec![1.0, 0.0]),
            LossKind::Quadratic,
        )
        .unwrap();
        let mut a = net.clone();
        gd_step(&mut a, &g, 0.0).unwrap();
        assert_eq!(a, net);
        let mut b = net.clone();
        gd_step(&mut b, &Gradients::zeros_like(&net), 0.5).unwrap();
        assert_eq!(b, net);
    }

    #[test]
    fn gd_step_rejects_mismatched_grads() {
        let mut net =
            Network::<f64>::build(3, &[LayerSpec::new(2, ActivationKind::Sigmoid)], 4).unwrap();
        assert!(gd_step(&mut net, &scalar_grads(1.0), 0.1).is_err());
    }

    #[test]
    fn gd_step_reverses_exactly_on_dyadic_values() {
        // every weight, gradient and product is a short dyadic rational, so no rounding occurs
        let mut net =
            Network::<f64>::build(4, &[LayerSpec::new(3, ActivationKind::Sigmoid)], 1).unwrap();
        for (i, w) in net.layers_mut()[0]
            .weights
            .as_mut_slice()
            .iter_mut()
            .enumerate()
        {
            *w = (i as f64 - 6.0) / 64.0;
        }
        let original = net.clone();
        let mut g = Gradients::zeros_like(&net);
        for (i, v) in g.values_mut().enumerate() {
            *v = (i as f64 * 3.0 - 20.0) / 32.0;
        }
        gd_step(&mut net, &g, 0.25).unwrap();
        assert_ne!(net, original);
        gd_step(&mut net, &g, -0.25).unwrap();
        assert_eq!(net, original);
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let net = Network::<f64>::build(3, &[LayerSpec::new(2, ActivationKind::Relu)], 2).unwrap();
        let mut moved = net.clone();
        let mut state = AdamState::new(&net);
        adam_step(
            &mut moved,
            &Gradients::zeros_like(&net),
            &mut state,
            &Hyperparams::adam(1, 1),
        )
        .unwrap();
        assert_eq!(moved, net);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn adam_first_step_with_zero_betas() {
        // m = 4, v = 16 so m̂ = 4, v̂ = 16 and the step is 0.1 * 4 / (sqrt(16) + 1e-8)
        let mut net = scalar_net(1.0);
        let hp = Hyperparams {
            eta: 0.1,
            beta1: 0.0,
            beta2: 0.0,
            epsilon: 1e-8,
            ..Hyperparams::adam(1, 1)
        };
        let mut state = AdamState::new(&net);
        adam_step(&mut net, &scalar_grads(4.0), &mut state, &hp).unwrap();
        let step = 1.0 - net.layers()[0].weights[(0, 0)];
        assert!((step - 0.4 / (4.0 + 1e-8)).abs() < 1e-15);
        assert!((step - 0.1).abs() < 1e-8);
    }

    #[test]
    fn adam_bias_correction_with_default_betas() {
        // bias correction makes the first step about η·sign(g)
        let mut net = scalar_net(0.0);
        let hp = Hyperparams::adam(1, 1);
        let mut state = AdamState::new(&net);
        adam_step(&mut net, &scalar_grads(-3.0), &mut state, &hp).unwrap();
        assert!((net.layers()[0].weights[(0, 0)] - 0.001).abs() < 1e-10);
    }

    #[test]
    fn adam_is_deterministic() {
        let net =
            Network::<f64>::build(3, &[LayerSpec::new(2, ActivationKind::Sigmoid)], 9).unwrap();
        let (_, g) = backprop(
            &net,
            &Vector::from_vec(vec![0.1, 0.2, 0.3]),
            &Vector::from_vec(vec![0.0, 1.0]),
            LossKind::Quadratic,
        )
        .unwrap();
        let run = || {
            let mut n = net.clone();
            let mut s = AdamState::new(&net);
            for _ in 0..3 {
                adam_step(&mut n, &g, &mut s, &Hyperparams::adam(1, 1)).unwrap();
            }
            (n, s)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn hyperparams_validation() {
        assert!(Hyperparams::<f64>::sgd(10, 1).validate().is_ok());
        assert!(Hyperparams::<f64> {
            eta: 0.0,
            ..Hyperparams::sgd(10, 1)
        }
        .validate()
        .is_err());
        assert!(Hyperparams::<f64> {
            beta1: 1.0,
            ..Hyperparams::adam(10, 1)
        }
        .validate()
        .is_err());
        assert!(Hyperparams::<f64> {
            epsilon: 0.0,
            ..Hyperparams::adam(10, 1)
        }
        .validate()
        .is_err());
        assert!(Hyperparams::<f64>::sgd(0, 1).validate().is_err());
    }

    fn four_samples() -> LabeledDataset<f64> {
        let inputs = [[0.1, 0.9], [0.8, 0.2], [0.5, 0.5], [0.0, 1.0]]
            .iter()
            .map(|r| Vector::from_vec(r.to_vec()))
            .collect();
        let targets = [0, 1, 1, 0]
            .iter()
            .map(|&c| crate::dataio::one_hot_n(c, 2).unwrap())
            .collect();
        LabeledDataset::new(inputs, targets).unwrap()
    }

    #[test]
    fn one_update_per_sample_when_m_is_one() {
        let ds = four_samples();
        let mut net = Network::<f64>::build(
            2,
            &[
                LayerSpec::new(3, ActivationKind::Sigmoid),
                LayerSpec::new(2, ActivationKind::Sigmoid),
            ],
            0,
        )
        .unwrap();
        let summary = sgd_epoch(&mut net, &ds, &Hyperparams::sgd(1, 1), 0, 0).unwrap();
        assert_eq!(summary.updates, 4);
    }

    #[test]
    fn sgd_epoch_rejects_oversized_batch() {
        let ds = four_samples();
        let mut net =
            Network::<f64>::build(2, &[LayerSpec::new(2, ActivationKind::Sigmoid)], 0).unwrap();
        assert!(sgd_epoch(&mut net, &ds, &Hyperparams::sgd(5, 1), 0, 0).is_err());
    }

    #[test]
    fn mean_gradient_matches_full_batch() {
        let ds = four_samples();
        let net = Network::<f64>::build(
            2,
            &[
                LayerSpec::new(3, ActivationKind::Tanh),
                LayerSpec::new(2, ActivationKind::Sigmoid),
            ],
            5,
        )
        .unwrap();
        let mut sum = Gradients::zeros_like(&net);
        for i in 0..ds.len() {
            let (_, g) = backprop(
                &net,
                &Vector::from_vec(ds.input(i).to_vec()),
                &Vector::from_vec(ds.target(i).to_vec()),
                LossKind::Quadratic,
            )
            .unwrap();
            sum.add_assign(&g).unwrap();
        }
        let (_, full) = full_batch_gradient(&net, &ds, LossKind::Quadratic).unwrap();
        assert!(sum.mean_of(ds.len()).max_abs_diff(&full).unwrap() <= 1e-12);
    }

    fn random_dataset(n: usize, seed: u64) -> LabeledDataset<f64> {
        let mut rng = crate::rng::SplitMix64::new(seed);
        let xs = (0..n)
            .map(|_| Vector::from_vec(vec![rng.next_f64(), rng.next_f64()]))
            .collect();
        let ys = (0..n)
            .map(|_| {
                let mut y = vec![0.0; 2];
                y[rng.below(2) as usize] = 1.0;
                Vector::from_vec(y)
            })
            .collect();
        LabeledDataset::new(xs, ys).unwrap()
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn dyadic_steps_reverse_exactly(
            ws in proptest::collection::vec(-256i32..256, 6),
            gs in proptest::collection::vec(-256i32..256, 6),
            shift in 0u32..6,
        ) {
            let mut net = Network::<f64>::build(2, &[LayerSpec::new(2, ActivationKind::Sigmoid)], 0).unwrap();
            for (w, &k) in net.layers_mut()[0].weights.as_mut_slice().iter_mut().zip(&ws[..4]) {
                *w = k as f64 / 128.0;
            }
            for (b, &k) in net.layers_mut()[0].biases.as_mut_slice().iter_mut().zip(&ws[4..]) {
                *b = k as f64 / 128.0;
            }
            let mut g = Gradients::zeros_like(&net);
            for (v, &k) in g.values_mut().zip(&gs) {
                *v = k as f64 / 64.0;
            }
            let eta = 1.0 / (1u64 << shift) as f64;
            let original = net.clone();
            gd_step(&mut net, &g, eta).unwrap();
            gd_step(&mut net, &g, -eta).unwrap();
            proptest::prop_assert_eq!(net, original);
        }

        #[test]
        fn steps_reverse_up_to_rounding(seed in proptest::prelude::any::<u64>(), eta in 1e-4f64..1.0) {
            let net = Network::<f64>::build(3, &[LayerSpec::new(4, ActivationKind::Tanh), LayerSpec::new(2, ActivationKind::Sigmoid)], seed).unwrap();
            let x = Vector::from_vec(vec![0.1, 0.7, 0.4]);
            let y = Vector::from_vec(vec![1.0, 0.0]);
            let (_, g) = backprop(&net, &x, &y, LossKind::Quadratic).unwrap();
            let mut moved = net.clone();
            gd_step(&mut moved, &g, eta).unwrap();
            gd_step(&mut moved, &g, -eta).unwrap();
            for (a, b) in moved.layers().iter().zip(net.layers()) {
                proptest::prop_assert!(a.weights.max_abs_diff(&b.weights).unwrap() <= 1e-15);
            }
        }

        #[test]
        fn epoch_applies_one_update_per_batch(n in 1usize..40, m in 1usize..40, seed in proptest::prelude::any::<u64>()) {
            proptest::prop_assume!(m <= n);
            let ds = random_dataset(n, seed);
            let mut net = Network::<f64>::build(2, &[LayerSpec::new(2, ActivationKind::Sigmoid)], seed).unwrap();
            let summary = sgd_epoch(&mut net, &ds, &Hyperparams::sgd(m, 1), seed, 3).unwrap();
            proptest::prop_assert_eq!(summary.updates, n.div_ceil(m));
        }

        #[test]
        fn training_is_bit_deterministic(seed in proptest::prelude::any::<u64>(), m in 1usize..8, adam in proptest::prelude::any::<bool>()) {
            let ds = random_dataset(12, seed);
            let specs = [LayerSpec::new(3, ActivationKind::Relu), LayerSpec::new(2, ActivationKind::Identity)];
            let hp = if adam { Hyperparams::adam(m, 2) } else { Hyperparams { loss: LossKind::SoftmaxCrossEntropy, eta: 0.1, ..Hyperparams::sgd(m, 2) } };
            let run = || {
                let mut net = Network::<f64>::build(2, &specs, seed).unwrap();
                let mut state = OptimizerState::new(hp.optimizer, &net);
                for epoch in 0..2 {
                    train_epoch(&mut net, &ds, &hp, &mut state, seed, epoch).unwrap();
                }
                net.layers().iter().flat_map(|l| l.weights.as_slice().iter().chain(l.biases.as_slice()).map(|v| v.to_bits()).collect::<Vec<_>>()).collect::<Vec<u64>>()
            };
            proptest::prop_assert_eq!(run(), run());
        }

        #[test]
        fn zero_learning_rate_is_a_noop(seed in proptest::prelude::any::<u64>()) {
            let ds = random_dataset(8, seed);
            let net = Network::<f64>::build(2, &[LayerSpec::new(3, ActivationKind::Sigmoid), LayerSpec::new(2, ActivationKind::Sigmoid)], seed).unwrap();
            let (_, g) = full_batch_gradient(&net, &ds, LossKind::Quadratic).unwrap();
            let mut moved = net.clone();
            gd_step(&mut moved, &g, 0.0).unwrap();
            proptest::prop_assert_eq!(moved, net);
        }
    }
}
