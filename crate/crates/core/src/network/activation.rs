use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::scalar::Scalar;

/// Neuron nonlinearity `f` together with its derivative `f'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    Sigmoid,
    Relu,
    Tanh,
    Identity,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 4] = [Self::Sigmoid, Self::Relu, Self::Tanh, Self::Identity];

    #[inline]
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Self::Sigmoid => sigmoid(z),
            Self::Relu => {
                if z > T::zero() {
                    z
                } else {
                    T::zero()
                }
            }
            Self::Tanh => z.tanh(),
            Self::Identity => z,
        }
    }

    /// `f'(z)`. The relu derivative at `0` is `0`.
    #[inline]
    pub fn derivative<T: Scalar>(self, z: T) -> T {
        match self {
            Self::Sigmoid => {
                let s = sigmoid(z);
                s * (T::one() - s)
            }
            Self::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::Tanh => {
                let t = z.tanh();
                T::one() - t * t
            }
            Self::Identity => T::one(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sigmoid => "sigmoid",
            Self::Relu => "relu",
            Self::Tanh => "tanh",
            Self::Identity => "identity",
        }
    }
}

#[inline]
fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// `f(z)`.
pub fn activate<T: Scalar>(kind: ActivationKind, z: T) -> T {
    kind.apply(z)
}

/// `f'(z)`.
pub fn activate_prime<T: Scalar>(kind: ActivationKind, z: T) -> T {
    kind.derivative(z)
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidValue(format!("unknown activation {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigmoid_values() {
        assert_eq!(activate(ActivationKind::Sigmoid, 0.0f64), 0.5);
        // 1 / (1 + e^-1) = 0.7310585786300049
        assert!((activate(ActivationKind::Sigmoid, 1.0f64) - 0.7310586).abs() < 1e-6);
        assert_eq!(activate_prime(ActivationKind::Sigmoid, 0.0f64), 0.25);
    }

    #[test]
    fn identity_derivative_is_one() {
        for z in [-1e6, -1.0, 0.0, 3.5, 1e9] {
            assert_eq!(activate_prime(ActivationKind::Identity, z), 1.0f64);
        }
    }

    #[test]
    fn relu_kink_convention() {
        assert_eq!(activate_prime(ActivationKind::Relu, 0.0f64), 0.0);
        assert_eq!(activate_prime(ActivationKind::Relu, 1e-300f64), 1.0);
        assert_eq!(activate(ActivationKind::Relu, -2.0f64), 0.0);
    }

    #[test]
    fn names_round_trip() {
        for k in ActivationKind::ALL {
            assert_eq!(k.name().parse::<ActivationKind>().unwrap(), k);
        }
        assert!("softplus".parse::<ActivationKind>().is_err());
    }

    proptest! {
        #[test]
        fn sigmoid_strictly_inside_unit_interval(z in -30.0f64..30.0) {
            let s = activate(ActivationKind::Sigmoid, z);
            prop_assert!(s > 0.0 && s < 1.0);
        }

        #[test]
        fn relu_nonnegative(z in -1e6f64..1e6) {
            prop_assert!(activate(ActivationKind::Relu, z) >= 0.0);
        }

        #[test]
        fn derivatives_match_central_differences(z in -4.0f64..4.0) {
            for kind in ActivationKind::ALL {
                if kind == ActivationKind::Relu && z.abs() < 1e-3 {
                    continue;
                }
                let h = 1e-6;
                let fd = (kind.apply(z + h) - kind.apply(z - h)) / (2.0 * h);
                prop_assert!((fd - kind.derivative(z)).abs() < 1e-8, "{kind} at {z}");
            }
        }
    }
}
