use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Closed-form smooth signal with exact derivatives of any order.
///
/// Serialized as an internally tagged object, e.g.
/// `{"kind": "sin", "amplitude": 1.0, "omega": 6.283185307179586, "phase": 0.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "snake_case",
    bound(
        serialize = "T: Serialize",
        deserialize = "T: Deserialize<'de> + Default"
    )
)]
pub enum Signal<T> {
    Constant {
        value: T,
    },
    /// `Σ_i coeffs[i] tⁱ`.
    Poly {
        coeffs: Vec<T>,
    },
    /// `amplitude · sin(omega t + phase)`.
    Sin {
        amplitude: T,
        omega: T,
        #[serde(default)]
        phase: T,
    },
    /// `amplitude · exp(rate t)`.
    Exp {
        amplitude: T,
        rate: T,
    },
    Sum {
        terms: Vec<Signal<T>>,
    },
    Product {
        factors: Vec<Signal<T>>,
    },
    Scale {
        factor: T,
        signal: Box<Signal<T>>,
    },
}

impl<T: Scalar> Signal<T> {
    pub fn zero() -> Self {
        Signal::Constant { value: T::zero() }
    }

    pub fn constant(value: T) -> Self {
        Signal::Constant { value }
    }

    pub fn sin(amplitude: T, omega: T, phase: T) -> Self {
        Signal::Sin {
            amplitude,
            omega,
            phase,
        }
    }

    pub fn cos(amplitude: T, omega: T) -> Self {
        Signal::Sin {
            amplitude,
            omega,
            phase: T::frac_pi_2(),
        }
    }

    pub fn exp(amplitude: T, rate: T) -> Self {
        Signal::Exp { amplitude, rate }
    }

    pub fn poly(coeffs: Vec<T>) -> Self {
        Signal::Poly { coeffs }
    }

    pub fn scaled(self, factor: T) -> Self {
        Signal::Scale {
            factor,
            signal: Box::new(self),
        }
    }

    /// `Σ c_k s_k`, dropping zero coefficients.
    pub fn linear_combination(terms: &[(T, &Signal<T>)]) -> Self {
        let terms: Vec<Signal<T>> = terms
            .iter()
            .filter(|(c, _)| !c.is_zero())
            .map(|&(c, s)| {
                if c == T::one() {
                    s.clone()
                } else {
                    s.clone().scaled(c)
                }
            })
            .collect();
        match terms.len() {
            0 => Self::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Signal::Sum { terms },
        }
    }

    #[inline]
    pub fn value(&self, t: T) -> T {
        self.derivative(0, t)
    }

    /// Exact `n`-th time derivative at `t`.
    pub fn derivative(&self, n: usize, t: T) -> T {
        match self {
            Signal::Constant { value } => {
                if n == 0 {
                    *value
                } else {
                    T::zero()
                }
            }
            Signal::Poly { coeffs } => {
                let mut acc = T::zero();
                for (i, &c) in coeffs.iter().enumerate().skip(n).rev() {
                    // c · i!/(i-n)!
                    let falling = ((i - n + 1)..=i).fold(T::one(), |f, m| f * T::lit(m as f64));
                    acc = acc * t + c * falling;
                }
                // Horner above multiplied by t once per term past index n.
                acc
            }
            Signal::Sin {
                amplitude,
                omega,
                phase,
            } => {
                let shift = T::frac_pi_2() * T::lit(n as f64);
                *amplitude * omega.powi(n as i32) * (*omega * t + *phase + shift).sin()
            }
            Signal::Exp { amplitude, rate } => *amplitude * rate.powi(n as i32) * (*rate * t).exp(),
            Signal::Sum { terms } => terms
                .iter()
                .fold(T::zero(), |acc, s| acc + s.derivative(n, t)),
            Signal::Product { factors } => product_derivative(factors, n, t),
            Signal::Scale { factor, signal } => *factor * signal.derivative(n, t),
        }
    }

    /// Values of derivatives `0..=n` at `t`.
    pub fn derivatives(&self, n: usize, t: T) -> Vec<T> {
        (0..=n).map(|k| self.derivative(k, t)).collect()
    }

    /// Same expression tree over another scalar type.
    pub fn cast<U: Scalar>(&self) -> Signal<U> {
        let c = |x: &T| U::lit(x.as_f64());
        match self {
            Signal::Constant { value } => Signal::Constant { value: c(value) },
            Signal::Poly { coeffs } => Signal::Poly {
                coeffs: coeffs.iter().map(c).collect(),
            },
            Signal::Sin {
                amplitude,
                omega,
                phase,
            } => Signal::Sin {
                amplitude: c(amplitude),
                omega: c(omega),
                phase: c(phase),
            },
            Signal::Exp { amplitude, rate } => Signal::Exp {
                amplitude: c(amplitude),
                rate: c(rate),
            },
            Signal::Sum { terms } => Signal::Sum {
                terms: terms.iter().map(Signal::cast).collect(),
            },
            Signal::Product { factors } => Signal::Product {
                factors: factors.iter().map(Signal::cast).collect(),
            },
            Signal::Scale { factor, signal } => Signal::Scale {
                factor: c(factor),
                signal: Box::new(signal.cast()),
            },
        }
    }

    /// Largest angular frequency present, if any sinusoid occurs.
    /// Frequencies inside a product add up.
    pub fn max_angular_frequency(&self) -> Option<T> {
        match self {
            Signal::Sin { omega, .. } if !omega.is_zero() => Some(omega.abs()),
            Signal::Sum { terms } => terms
                .iter()
                .filter_map(|s| s.max_angular_frequency())
                .reduce(|a, b| a.max(b)),
            Signal::Product { factors } => factors
                .iter()
                .filter_map(|s| s.max_angular_frequency())
                .reduce(|a, b| a + b),
            Signal::Scale { signal, .. } => signal.max_angular_frequency(),
            _ => None,
        }
    }
}

fn product_derivative<T: Scalar>(factors: &[Signal<T>], n: usize, t: T) -> T {
    match factors {
        [] => {
            if n == 0 {
                T::one()
            } else {
                T::zero()
            }
        }
        [only] => only.derivative(n, t),
        [first, rest @ ..] => {
            // Leibniz rule.
            let mut acc = T::zero();
            let mut binom = T::one();
            for k in 0..=n {
                acc += binom * first.derivative(k, t) * product_derivative(rest, n - k, t);
                binom = binom * T::lit((n - k) as f64) / T::lit((k + 1) as f64);
            }
            acc
        }
    }
}
