use crate::error::{mismatch, Error, Result};
use crate::linalg::{affine, argmax, gemm, transpose_into, Matrix, Vector};
use crate::network::ActivationKind;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

/// Width and nonlinearity of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub width: usize,
    pub activation: ActivationKind,
}

impl LayerSpec {
    pub fn new(width: usize, activation: ActivationKind) -> Self {
        Self { width, activation }
    }
}

/// Parameters of one layer: `weights` is `width × fan_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub weights: Matrix<T>,
    pub biases: Vector<T>,
    pub activation: ActivationKind,
}

impl<T: Scalar> Layer<T> {
    #[inline]
    pub fn width(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn fan_in(&self) -> usize {
        self.weights.cols()
    }

    pub fn spec(&self) -> LayerSpec {
        LayerSpec::new(self.width(), self.activation)
    }
}

/// A fully connected feed-forward network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    input_width: usize,
    layers: Vec<Layer<T>>,
}

/// Everything computed by a per-sample forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace<T> {
    /// Weighted inputs `z` of each layer.
    pub zs: Vec<Vector<T>>,
    /// The input followed by each layer's activation.
    pub activations: Vec<Vector<T>>,
}

impl<T: Scalar> ForwardTrace<T> {
    pub fn output(&self) -> &Vector<T> {
        self.activations
            .last()
            .expect("trace holds at least the input")
    }
}

/// Forward pass over a batch; row `r` of every matrix belongs to sample `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchTrace<T> {
    pub zs: Vec<Matrix<T>>,
    pub activations: Vec<Matrix<T>>,
}

impl<T: Scalar> BatchTrace<T> {
    pub fn output(&self) -> &Matrix<T> {
        self.activations
            .last()
            .expect("trace holds at least the input")
    }
}

impl<T: Scalar> Network<T> {
    /// Builds a network with Gaussian weights of standard deviation
    /// `1/sqrt(fan_in)` and zero biases. Weights are drawn layer by layer in
    /// row-major order from a single SplitMix64 stream seeded with `seed`.
    pub fn build(input_width: usize, specs: &[LayerSpec], seed: u64) -> Result<Self> {
        validate_specs(input_width, specs)?;
        let mut rng = SplitMix64::new(seed);
        let mut fan_in = input_width;
        let mut layers = Vec::with_capacity(specs.len());
        for spec in specs {
            let std = 1.0 / (fan_in as f64).sqrt();
            let weights = Matrix::from_fn(spec.width, fan_in, |_, _| {
                T::from_f64_lossy(rng.next_gaussian() * std)
            });
            layers.push(Layer {
                weights,
                biases: Vector::zeros(spec.width),
                activation: spec.activation,
            });
            fan_in = spec.width;
        }
        Ok(Self {
            input_width,
            layers,
        })
    }

    /// Assembles a network from explicit parameters, checking the shape chain.
    pub fn from_layers(input_width: usize, layers: Vec<Layer<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidValue(
                "network needs at least one layer".into(),
            ));
        }
        let mut fan_in = input_width;
        for (l, layer) in layers.iter().enumerate() {
            if layer.fan_in() != fan_in {
                return Err(mismatch(
                    "layer chain",
                    format!("layer {l} expects {} inputs", layer.fan_in()),
                    format!("previous width {fan_in}"),
                ));
            }
            if layer.biases.len() != layer.width() {
                return Err(mismatch(
                    "layer bias",
                    format!("layer {l} width {}", layer.width()),
                    format!("bias of {}", layer.biases.len()),
                ));
            }
            fan_in = layer.width();
        }
        Ok(Self {
            input_width,
            layers,
        })
    }

    #[inline]
    pub fn input_width(&self) -> usize {
        self.input_width
    }

    #[inline]
    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(self.input_width, Layer::width)
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Layer::spec).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.biases.len())
            .sum()
    }

    /// Layer-by-layer `z = W a + b`, `a = f(z)`.
    pub fn forward(&self, x: &Vector<T>) -> Result<ForwardTrace<T>> {
        if x.len() != self.input_width {
            return Err(mismatch("forward input", self.input_width, x.len()));
        }
        let mut zs = Vec::with_capacity(self.layers.len());
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.clone());
        for layer in &self.layers {
            let z = affine(&layer.weights, activations.last().unwrap(), &layer.biases)?;
            let kind = layer.activation;
            activations.push(z.map(|v| kind.apply(v)));
            zs.push(z);
        }
        Ok(ForwardTrace { zs, activations })
    }

    /// Final-layer activation for one input.
    pub fn output(&self, x: &Vector<T>) -> Result<Vector<T>> {
        Ok(self.forward(x)?.activations.pop().unwrap())
    }

    /// Forward pass over the rows of `inputs`. Bit-identical, row by row, to
    /// [`Network::forward`].
    pub fn forward_batch(&self, inputs: &Matrix<T>) -> Result<BatchTrace<T>> {
        if inputs.cols() != self.input_width {
            return Err(mismatch(
                "forward_batch input",
                self.input_width,
                inputs.cols(),
            ));
        }
        let m = inputs.rows();
        let mut zs = Vec::with_capacity(self.layers.len());
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(inputs.clone());
        let mut wt = Vec::new();
        for layer in &self.layers {
            let (out, fan_in) = layer.weights.shape();
            wt.resize(out * fan_in, T::zero());
            transpose_into(out, fan_in, layer.weights.as_slice(), &mut wt);
            let mut z = vec![T::zero(); m * out];
            gemm(
                m,
                fan_in,
                out,
                activations.last().unwrap().as_slice(),
                &wt,
                &mut z,
            );
            for row in z.chunks_exact_mut(out) {
                for (v, &b) in row.iter_mut().zip(layer.biases.as_slice()) {
                    *v += b;
                }
            }
            let kind = layer.activation;
            let a: Vec<T> = z.iter().map(|&v| kind.apply(v)).collect();
            zs.push(Matrix::new(m, out, z)?);
            activations.push(Matrix::new(m, out, a)?);
        }
        Ok(BatchTrace { zs, activations })
    }

    /// Digit with the highest output activation, lowest index on ties.
    pub fn predict(&self, x: &Vector<T>) -> Result<usize> {
        self.check_classifier()?;
        Ok(self.output(x)?.argmax().unwrap())
    }

    /// [`Network::predict`] for every row of `inputs`.
    pub fn predict_batch(&self, inputs: &Matrix<T>) -> Result<Vec<usize>> {
        self.check_classifier()?;
        let trace = self.forward_batch(inputs)?;
        let out = trace.output();
        Ok((0..out.rows())
            .map(|r| argmax(out.row(r)).unwrap())
            .collect())
    }

    fn check_classifier(&self) -> Result<()> {
        if self.output_width() != crate::dataio::MNIST_CLASSES {
            return Err(Error::Config(format!(
                "prediction needs a {}-unit output layer, network has {}",
                crate::dataio::MNIST_CLASSES,
                self.output_width()
            )));
        }
        Ok(())
    }
}

fn validate_specs(input_width: usize, specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::InvalidValue(
            "network needs at least one layer".into(),
        ));
    }
    if input_width == 0 {
        return Err(Error::InvalidValue("input width must be positive".into()));
    }
    if let Some(l) = specs.iter().position(|s| s.width == 0) {
        return Err(Error::InvalidValue(format!("layer {l} has width 0")));
    }
    Ok(())
}

/// Index of the largest entry in `values`, lowest index on ties.
pub fn predict_from_output<T: Scalar>(values: &[T]) -> Option<usize> {
    argmax(values)
}
