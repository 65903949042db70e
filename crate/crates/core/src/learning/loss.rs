use std::fmt;
use std::str::FromStr;

use crate::error::{mismatch, Error, Result};
use crate::linalg::Vector;
use crate::network::ActivationKind;
use crate::scalar::{lit, Scalar};

/// Per-sample cost function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// `½ Σ_j (y_j − a_j)²`.
    Quadratic,
    /// `−Σ_j y_j log softmax(a)_j`, where `a` are logits from an identity output layer.
    SoftmaxCrossEntropy,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Quadratic => "quadratic",
            Self::SoftmaxCrossEntropy => "xent",
        }
    }

    /// Checks that the output layer's activation suits this loss.
    pub fn check_output_activation(self, activation: ActivationKind) -> Result<()> {
        if self == Self::SoftmaxCrossEntropy && activation != ActivationKind::Identity {
            return Err(Error::Config(format!(
                "softmax cross-entropy needs an identity output layer, found {activation}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" | "mse" => Ok(Self::Quadratic),
            "xent" | "softmax_cross_entropy" | "cross-entropy" => Ok(Self::SoftmaxCrossEntropy),
            _ => Err(Error::InvalidValue(format!("unknown loss {s:?}"))),
        }
    }
}

/// Numerically stable softmax (inputs shifted by their maximum).
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub(crate) fn cost_slice<T: Scalar>(loss: LossKind, a: &[T], y: &[T]) -> T {
    match loss {
        LossKind::Quadratic => {
            let mut acc = T::zero();
            for (&aj, &yj) in a.iter().zip(y) {
                let d = yj - aj;
                acc += d * d;
            }
            lit::<T>(0.5) * acc
        }
        LossKind::SoftmaxCrossEntropy => {
            let max = a.iter().copied().fold(T::neg_infinity(), T::max);
            let log_total = a.iter().map(|&z| (z - max).exp()).sum::<T>().ln();
            let mut acc = T::zero();
            for (&zj, &yj) in a.iter().zip(y) {
                if yj != T::zero() {
                    acc += yj * (zj - max - log_total);
                }
            }
            -acc
        }
    }
}

/// Cost of output `a` (or logits) against target `y`.
pub fn cost<T: Scalar>(loss: LossKind, a: &Vector<T>, y: &Vector<T>) -> Result<T> {
    if a.len() != y.len() {
        return Err(mismatch("cost", a.len(), y.len()));
    }
    Ok(cost_slice(loss, a.as_slice(), y.as_slice()))
}

/// Writes `∂C/∂z` of the output layer into `delta`.
pub(crate) fn output_delta_into<T: Scalar>(
    loss: LossKind,
    a: &[T],
    y: &[T],
    z: &[T],
    activation: ActivationKind,
    delta: &mut [T],
) {
    match loss {
        LossKind::Quadratic => {
            for j in 0..delta.len() {
                delta[j] = (a[j] - y[j]) * activation.derivative(z[j]);
            }
        }
        LossKind::SoftmaxCrossEntropy => {
            for (d, (p, &yj)) in delta.iter_mut().zip(softmax(z).into_iter().zip(y)) {
                *d = p - yj;
            }
        }
    }
}

/// Output-layer error `δ = ∂C/∂z`: `(a − y) ⊙ f'(z)` for the quadratic cost,
/// `softmax(z) − y` for softmax cross-entropy.
pub fn output_delta<T: Scalar>(
    loss: LossKind,
    a: &Vector<T>,
    y: &Vector<T>,
    z: &Vector<T>,
    activation: ActivationKind,
) -> Result<Vector<T>> {
    if a.len() != y.len() || a.len() != z.len() {
        return Err(mismatch(
            "output_delta",
            format!("a: {}, z: {}", a.len(), z.len()),
            format!("y: {}", y.len()),
        ));
    }
    loss.check_output_activation(activation)?;
    let mut delta = Vector::zeros(a.len());
    output_delta_into(
        loss,
        a.as_slice(),
        y.as_slice(),
        z.as_slice(),
        activation,
        delta.as_mut_slice(),
    );
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::one_hot;

    fn v(data: &[f64]) -> Vector<f64> {
        Vector::from_vec(data.to_vec())
    }

    #[test]
    fn quadratic_cost_examples() {
        let y: Vector<f64> = one_hot(4).unwrap();
        assert_eq!(cost(LossKind::Quadratic, &y, &y).unwrap(), 0.0);
        assert_eq!(
            cost(LossKind::Quadratic, &v(&[0.0, 0.0]), &v(&[1.0, 0.0])).unwrap(),
            0.5
        );
    }

    #[test]
    fn uniform_logits_cost_ln_ten() {
        let y: Vector<f64> = one_hot(2).unwrap();
        let c = cost(LossKind::SoftmaxCrossEntropy, &v(&[0.3; 10]), &y).unwrap();
        assert!((c - 10f64.ln()).abs() < 1e-12);
        assert_eq!(format!("{c:.6}"), "2.302585");
    }

    #[test]
    fn cross_entropy_survives_huge_logits() {
        let y = v(&[0.0, 1.0]);
        let c = cost(LossKind::SoftmaxCrossEntropy, &v(&[1000.0, 0.0]), &y).unwrap();
        assert!((c - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn cost_length_mismatch() {
        assert!(cost(LossKind::Quadratic, &v(&[1.0]), &v(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn delta_vanishes_at_target() {
        let y = v(&[0.0, 1.0, 0.0]);
        let z = v(&[0.3, -0.2, 2.0]);
        let d = output_delta(LossKind::Quadratic, &y, &y, &z, ActivationKind::Sigmoid).unwrap();
        assert!(d.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn quadratic_identity_delta() {
        let d = output_delta(
            LossKind::Quadratic,
            &v(&[2.0]),
            &v(&[0.0]),
            &v(&[2.0]),
            ActivationKind::Identity,
        )
        .unwrap();
        assert_eq!(d.as_slice(), &[2.0]);
    }

    #[test]
    fn softmax_delta_uniform_logits() {
        let y: Vector<f64> = one_hot(0).unwrap();
        let z = v(&[0.0; 10]);
        let d = output_delta(
            LossKind::SoftmaxCrossEntropy,
            &z,
            &y,
            &z,
            ActivationKind::Identity,
        )
        .unwrap();
        assert!((d[0] - (0.1 - 1.0)).abs() < 1e-15);
        for j in 1..10 {
            assert!((d[j] - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_entropy_requires_identity_output() {
        let y = v(&[1.0, 0.0]);
        let z = v(&[0.0, 0.0]);
        assert!(matches!(
            output_delta(
                LossKind::SoftmaxCrossEntropy,
                &z,
                &y,
                &z,
                ActivationKind::Sigmoid
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn loss_names_parse() {
        assert_eq!(
            "quadratic".parse::<LossKind>().unwrap(),
            LossKind::Quadratic
        );
        assert_eq!(
            "xent".parse::<LossKind>().unwrap(),
            LossKind::SoftmaxCrossEntropy
        );
        assert!("hinge".parse::<LossKind>().is_err());
    }
}
