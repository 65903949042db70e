use crate::dataio::LabeledDataset;
use crate::error::{mismatch, Result};
use crate::learning::loss::{cost_slice, output_delta_into, LossKind};
use crate::linalg::{gemm, max_abs_diff, outer, transpose_into, transpose_mul, Matrix, Vector};
use crate::network::Network;
use crate::scalar::Scalar;

/// `∂C/∂W` and `∂C/∂b` for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients<T> {
    pub weights: Matrix<T>,
    pub biases: Vector<T>,
}

/// Parameter-shaped gradient of the cost, one entry per network layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<LayerGradients<T>>,
}

impl<T: Scalar> Gradients<T> {
    /// All-zero gradients shaped like `net`'s parameters.
    pub fn zeros_like(net: &Network<T>) -> Self {
        Self {
            layers: net
                .layers()
                .iter()
                .map(|l| LayerGradients {
                    weights: Matrix::zeros(l.width(), l.fan_in()),
                    biases: Vector::zeros(l.width()),
                })
                .collect(),
        }
    }

    /// Fails unless shapes mirror `net` exactly.
    pub fn check_shapes(&self, net: &Network<T>) -> Result<()> {
        if self.layers.len() != net.depth() {
            return Err(mismatch("gradient depth", net.depth(), self.layers.len()));
        }
        for (l, (g, p)) in self.layers.iter().zip(net.layers()).enumerate() {
            if g.weights.shape() != p.weights.shape() || g.biases.len() != p.biases.len() {
                return Err(mismatch(
                    "gradient shape",
                    format!(
                        "layer {l} params {:?}+{}",
                        p.weights.shape(),
                        p.biases.len()
                    ),
                    format!("grads {:?}+{}", g.weights.shape(), g.biases.len()),
                ));
            }
        }
        Ok(())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        let shapes = |g: &Self| {
            g.layers
                .iter()
                .map(|l| (l.weights.shape(), l.biases.len()))
                .collect::<Vec<_>>()
        };
        if shapes(self) != shapes(other) {
            return Err(mismatch(
                "gradients",
                format!("{:?}", shapes(self)),
                format!("{:?}", shapes(other)),
            ));
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.values_mut().zip(other.values()) {
            *a += b;
        }
        Ok(())
    }

    /// Divides every entry by `count`.
    pub fn mean_of(mut self, count: usize) -> Self {
        let d = T::from_usize(count).expect("count fits the scalar type");
        for v in self.values_mut() {
            *v /= d;
        }
        self
    }

    pub fn scale(mut self, factor: T) -> Self {
        for v in self.values_mut() {
            *v *= factor;
        }
        self
    }

    /// Every entry, layer by layer, weights before biases.
    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.layers.iter().flat_map(|l| {
            l.weights
                .as_slice()
                .iter()
                .chain(l.biases.as_slice())
                .copied()
        })
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut T> + '_ {
        self.layers.iter_mut().flat_map(|l| {
            l.weights
                .as_mut_slice()
                .iter_mut()
                .chain(l.biases.as_mut_slice())
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same(other)?;
        Ok(self
            .layers
            .iter()
            .zip(&other.layers)
            .map(|(a, b)| {
                max_abs_diff(a.weights.as_slice(), b.weights.as_slice())
                    .max(max_abs_diff(a.biases.as_slice(), b.biases.as_slice()))
            })
            .fold(T::zero(), T::max))
    }
}

fn check_loss_fits<T: Scalar>(net: &Network<T>, loss: LossKind) -> Result<()> {
    loss.check_output_activation(net.layers().last().expect("nonempty network").activation)
}

/// Per-sample cost and gradient by backpropagation.
///
/// The output error is `δᴸ = ∂C/∂aᴸ ⊙ f'(zᴸ)`; earlier layers use
/// `δˡ = (Wˡ⁺¹)ᵀ δˡ⁺¹ ⊙ f'(zˡ)`. Weight gradients are `δˡ (aˡ⁻¹)ᵀ` and bias
/// gradients are `δˡ`.
pub fn backprop<T: Scalar>(
    net: &Network<T>,
    x: &Vector<T>,
    y: &Vector<T>,
    loss: LossKind,
) -> Result<(T, Gradients<T>)> {
    check_loss_fits(net, loss)?;
    if y.len() != net.output_width() {
        return Err(mismatch("backprop target", net.output_width(), y.len()));
    }
    let trace = net.forward(x)?;
    let layers = net.layers();
    let last = layers.len() - 1;
    let output = trace.output();
    let cost = cost_slice(loss, output.as_slice(), y.as_slice());

    let mut delta = Vector::zeros(output.len());
    output_delta_into(
        loss,
        output.as_slice(),
        y.as_slice(),
        trace.zs[last].as_slice(),
        layers[last].activation,
        delta.as_mut_slice(),
    );

    let mut grads = Vec::with_capacity(layers.len());
    for l in (0..layers.len()).rev() {
        grads.push(LayerGradients {
            weights: outer(&delta, &trace.activations[l]),
            biases: delta.clone(),
        });
        if l > 0 {
            let kind = layers[l - 1].activation;
            let back = transpose_mul(&layers[l].weights, &delta)?;
            let fprime = trace.zs[l - 1].map(|z| kind.derivative(z));
            delta = back.hadamard(&fprime)?;
        }
    }
    grads.reverse();
    Ok((cost, Gradients { layers: grads }))
}

/// Summed cost and summed gradient over the rows of a batch.
///
/// Every entry accumulates over samples in row order starting from zero, so
/// the result is bit-identical to adding per-sample [`backprop`] results in
/// the same order.
pub fn backprop_batch<T: Scalar>(
    net: &Network<T>,
    inputs: &Matrix<T>,
    targets: &Matrix<T>,
    loss: LossKind,
) -> Result<(T, Gradients<T>)> {
    check_loss_fits(net, loss)?;
    if targets.cols() != net.output_width() || targets.rows() != inputs.rows() {
        return Err(mismatch(
            "backprop_batch targets",
            format!("{}x{}", inputs.rows(), net.output_width()),
            format!("{}x{}", targets.rows(), targets.cols()),
        ));
    }
    let m = inputs.rows();
    let trace = net.forward_batch(inputs)?;
    let layers = net.layers();
    let last = layers.len() - 1;
    let output = trace.output();

    let mut cost = T::zero();
    let out_w = output.cols();
    let mut delta = vec![T::zero(); m * out_w];
    for r in 0..m {
        cost += cost_slice(loss, output.row(r), targets.row(r));
        output_delta_into(
            loss,
            output.row(r),
            targets.row(r),
            trace.zs[last].row(r),
            layers[last].activation,
            &mut delta[r * out_w..(r + 1) * out_w],
        );
    }

    let mut grads = Vec::with_capacity(layers.len());
    let mut delta_t = Vec::new();
    for l in (0..layers.len()).rev() {
        let (width, fan_in) = layers[l].weights.shape();
        delta_t.resize(m * width, T::zero());
        transpose_into(m, width, &delta, &mut delta_t);
        let mut dw = vec![T::zero(); width * fan_in];
        gemm(
            width,
            m,
            fan_in,
            &delta_t,
            trace.activations[l].as_slice(),
            &mut dw,
        );
        let mut db = vec![T::zero(); width];
        for row in delta.chunks_exact(width) {
            for (b, &d) in db.iter_mut().zip(row) {
                *b += d;
            }
        }
        grads.push(LayerGradients {
            weights: Matrix::new(width, fan_in, dw)?,
            biases: Vector::from_vec(db),
        });
        if l > 0 {
            let mut back = vec![T::zero(); m * fan_in];
            gemm(
                m,
                width,
                fan_in,
                &delta,
                layers[l].weights.as_slice(),
                &mut back,
            );
            let kind = layers[l - 1].activation;
            for (b, &z) in back.iter_mut().zip(trace.zs[l - 1].as_slice()) {
                *b *= kind.derivative(z);
            }
            delta = back;
        }
    }
    grads.reverse();
    Ok((cost, Gradients { layers: grads }))
}

/// Mean cost and mean gradient over a whole dataset, samples in index order.
pub fn full_batch_gradient<T: Scalar>(
    net: &Network<T>,
    ds: &LabeledDataset<T>,
    loss: LossKind,
) -> Result<(T, Gradients<T>)> {
    let all: Vec<usize> = (0..ds.len()).collect();
    let (inputs, targets) = ds.gather(&all)?;
    let (cost, grads) = backprop_batch(net, &inputs, &targets, loss)?;
    let n = T::from_usize(ds.len()).unwrap();
    Ok((cost / n, grads.mean_of(ds.len())))
}

/// Mean cost of `net` over a dataset.
pub fn dataset_cost<T: Scalar>(
    net: &Network<T>,
    ds: &LabeledDataset<T>,
    loss: LossKind,
) -> Result<T> {
    let all: Vec<usize> = (0..ds.len()).collect();
    let (inputs, targets) = ds.gather(&all)?;
    let trace = net.forward_batch(&inputs)?;
    let out = trace.output();
    let total: T = (0..out.rows())
        .map(|r| cost_slice(loss, out.row(r), targets.row(r)))
        .sum();
    Ok(total / T::from_usize(ds.len()).unwrap())
}
