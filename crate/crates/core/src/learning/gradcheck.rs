use crate::error::{Error, Result};
use crate::learning::backprop::backprop;
use crate::learning::loss::{cost, LossKind};
use crate::linalg::Vector;
use crate::network::Network;
use crate::scalar::{lit, Scalar};

/// Outcome of comparing backprop against central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport<T> {
    pub max_relative_error: T,
    /// `(layer, flat index)` of the worst parameter; the flat index counts
    /// weights row-major, then biases.
    pub worst: (usize, usize),
    pub parameters_checked: usize,
}

/// `|g − ĝ| / max(1e-12, |g| + |ĝ|)`.
pub fn relative_error<T: Scalar>(analytic: T, numeric: T) -> T {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(lit(1e-12))
}

/// Checks every weight and bias gradient from [`backprop`] against
/// `(C(p + ε) − C(p − ε)) / 2ε`.
pub fn grad_check<T: Scalar>(
    net: &Network<T>,
    x: &Vector<T>,
    y: &Vector<T>,
    loss: LossKind,
    epsilon: T,
) -> Result<GradCheckReport<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidValue(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let (_, grads) = backprop(net, x, y, loss)?;
    let mut probe = net.clone();
    let two_eps = epsilon + epsilon;
    let mut report = GradCheckReport {
        max_relative_error: T::zero(),
        worst: (0, 0),
        parameters_checked: 0,
    };
    for (l, g) in grads.layers.iter().enumerate() {
        let analytic: Vec<T> = g
            .weights
            .as_slice()
            .iter()
            .chain(g.biases.as_slice())
            .copied()
            .collect();
        let n_weights = g.weights.as_slice().len();
        for (i, &a) in analytic.iter().enumerate() {
            let original = *param(&mut probe, l, i, n_weights);
            *param(&mut probe, l, i, n_weights) = original + epsilon;
            let plus = cost(loss, &probe.output(x)?, y)?;
            *param(&mut probe, l, i, n_weights) = original - epsilon;
            let minus = cost(loss, &probe.output(x)?, y)?;
            *param(&mut probe, l, i, n_weights) = original;
            let numeric = (plus - minus) / two_eps;
            let err = relative_error(a, numeric);
            if err > report.max_relative_error {
                report.max_relative_error = err;
                report.worst = (l, i);
            }
            report.parameters_checked += 1;
        }
    }
    Ok(report)
}

fn param<T: Scalar>(net: &mut Network<T>, layer: usize, i: usize, n_weights: usize) -> &mut T {
    let layer = &mut net.layers_mut()[layer];
    if i < n_weights {
        &mut layer.weights.as_mut_slice()[i]
    } else {
        &mut layer.biases.as_mut_slice()[i - n_weights]
    }
}
