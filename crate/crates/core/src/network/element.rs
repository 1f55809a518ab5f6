//! Two-terminal element library.
//!
//! Series strings that contain a capacitor relate current and voltage through
//! an integral; those are differentiated once so the relation becomes
//! polynomial in `d/dt`:
//!
//! ```text
//! series RC :  V̇ = r İ + I / c            p = (1/c, r),      q = (0, 1)
//! series LC :  V̇ = ℓ Ï + I / c            p = (1/c, 0, ℓ),   q = (0, 1)
//! series RLC:  V̇ = ℓ Ï + r İ + I / c      p = (1/c, r, ℓ),   q = (0, 1)
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::CoefficientVector;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElementError {
    #[error("{kind} needs ν ≥ {required}, network has ν = {nu}")]
    OrderTooSmall {
        kind: ElementKind,
        required: usize,
        nu: usize,
    },
    #[error("{kind} value `{name}` must be strictly positive and finite, got {value}")]
    NonPositiveValue {
        kind: ElementKind,
        name: &'static str,
        value: f64,
    },
    #[error("{kind} takes {expected} values, got {found}")]
    ValueCount {
        kind: ElementKind,
        expected: usize,
        found: usize,
    },
    #[error("unknown element kind `{0}`")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Resistor,
    Inductor,
    Capacitor,
    SeriesRl,
    SeriesRc,
    SeriesLc,
    SeriesRlc,
}

impl ElementKind {
    /// Short name used by netlist documents.
    pub fn tag(self) -> &'static str {
        match self {
            ElementKind::Resistor => "r",
            ElementKind::Inductor => "l",
            ElementKind::Capacitor => "c",
            ElementKind::SeriesRl => "rl",
            ElementKind::SeriesRc => "rc",
            ElementKind::SeriesLc => "lc",
            ElementKind::SeriesRlc => "rlc",
        }
    }

    /// Value names in the order `from_values` expects them.
    pub fn value_names(self) -> &'static [&'static str] {
        match self {
            ElementKind::Resistor => &["r"],
            ElementKind::Inductor => &["l"],
            ElementKind::Capacitor => &["c"],
            ElementKind::SeriesRl => &["r", "l"],
            ElementKind::SeriesRc => &["r", "c"],
            ElementKind::SeriesLc => &["l", "c"],
            ElementKind::SeriesRlc => &["r", "l", "c"],
        }
    }

    pub fn min_order(self) -> usize {
        match self {
            ElementKind::Resistor => 0,
            ElementKind::Inductor
            | ElementKind::Capacitor
            | ElementKind::SeriesRl
            | ElementKind::SeriesRc => 1,
            ElementKind::SeriesLc | ElementKind::SeriesRlc => 2,
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::Resistor => "resistor",
            ElementKind::Inductor => "inductor",
            ElementKind::Capacitor => "capacitor",
            ElementKind::SeriesRl => "series RL",
            ElementKind::SeriesRc => "series RC",
            ElementKind::SeriesLc => "series LC",
            ElementKind::SeriesRlc => "series RLC",
        })
    }
}

impl FromStr for ElementKind {
    type Err = ElementError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "r" => ElementKind::Resistor,
            "l" => ElementKind::Inductor,
            "c" => ElementKind::Capacitor,
            "rl" => ElementKind::SeriesRl,
            "rc" => ElementKind::SeriesRc,
            "lc" => ElementKind::SeriesLc,
            "rlc" => ElementKind::SeriesRlc,
            _ => return Err(ElementError::UnknownKind(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element<T> {
    Resistor { r: T },
    Inductor { l: T },
    Capacitor { c: T },
    SeriesRl { r: T, l: T },
    SeriesRc { r: T, c: T },
    SeriesLc { l: T, c: T },
    SeriesRlc { r: T, l: T, c: T },
}

impl<T: Scalar> Element<T> {
    /// Builds an element from its kind and values ordered as in
    /// [`ElementKind::value_names`].
    pub fn from_values(kind: ElementKind, values: &[T]) -> Result<Self, ElementError> {
        let expected = kind.value_names().len();
        if values.len() != expected {
            return Err(ElementError::ValueCount {
                kind,
                expected,
                found: values.len(),
            });
        }
        let v = values;
        Ok(match kind {
            ElementKind::Resistor => Element::Resistor { r: v[0] },
            ElementKind::Inductor => Element::Inductor { l: v[0] },
            ElementKind::Capacitor => Element::Capacitor { c: v[0] },
            ElementKind::SeriesRl => Element::SeriesRl { r: v[0], l: v[1] },
            ElementKind::SeriesRc => Element::SeriesRc { r: v[0], c: v[1] },
            ElementKind::SeriesLc => Element::SeriesLc { l: v[0], c: v[1] },
            ElementKind::SeriesRlc => Element::SeriesRlc {
                r: v[0],
                l: v[1],
                c: v[2],
            },
        })
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Resistor { .. } => ElementKind::Resistor,
            Element::Inductor { .. } => ElementKind::Inductor,
            Element::Capacitor { .. } => ElementKind::Capacitor,
            Element::SeriesRl { .. } => ElementKind::SeriesRl,
            Element::SeriesRc { .. } => ElementKind::SeriesRc,
            Element::SeriesLc { .. } => ElementKind::SeriesLc,
            Element::SeriesRlc { .. } => ElementKind::SeriesRlc,
        }
    }

    pub fn values(&self) -> Vec<T> {
        match *self {
            Element::Resistor { r } => vec![r],
            Element::Inductor { l } => vec![l],
            Element::Capacitor { c } => vec![c],
            Element::SeriesRl { r, l } => vec![r, l],
            Element::SeriesRc { r, c } => vec![r, c],
            Element::SeriesLc { l, c } => vec![l, c],
            Element::SeriesRlc { r, l, c } => vec![r, l, c],
        }
    }

    /// `(p, q)` padded with zeros to length `nu + 1`.
    pub fn coefficients(
        &self,
        nu: usize,
    ) -> Result<(CoefficientVector<T>, CoefficientVector<T>), ElementError> {
        let kind = self.kind();
        for (&name, &value) in kind.value_names().iter().zip(&self.values()) {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(ElementError::NonPositiveValue {
                    kind,
                    name,
                    value: value.as_f64(),
                });
            }
        }
        if nu < kind.min_order() {
            return Err(ElementError::OrderTooSmall {
                kind,
                required: kind.min_order(),
                nu,
            });
        }
        let (o, z) = (T::one(), T::zero());
        let (p, q): (Vec<T>, Vec<T>) = match *self {
            Element::Resistor { r } => (vec![r], vec![o]),
            Element::Inductor { l } => (vec![z, l], vec![o]),
            Element::Capacitor { c } => (vec![o], vec![z, c]),
            Element::SeriesRl { r, l } => (vec![r, l], vec![o]),
            Element::SeriesRc { r, c } => (vec![o / c, r], vec![z, o]),
            Element::SeriesLc { l, c } => (vec![o / c, z, l], vec![z, o]),
            Element::SeriesRlc { r, l, c } => (vec![o / c, r, l], vec![z, o]),
        };
        Ok((
            CoefficientVector::padded(&p, nu + 1),
            CoefficientVector::padded(&q, nu + 1),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pq(e: Element<f64>, nu: usize) -> (Vec<f64>, Vec<f64>) {
        let (p, q) = e.coefficients(nu).unwrap();
        (p.as_slice().to_vec(), q.as_slice().to_vec())
    }

    #[test]
    fn resistor() {
        assert_eq!(pq(Element::Resistor { r: 2.0 }, 0), (vec![2.0], vec![1.0]));
        assert_eq!(
            pq(Element::Resistor { r: 2.0 }, 2),
            (vec![2.0, 0.0, 0.0], vec![1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn series_rl() {
        assert_eq!(
            pq(Element::SeriesRl { r: 1.0, l: 0.5 }, 1),
            (vec![1.0, 0.5], vec![1.0, 0.0])
        );
    }

    #[test]
    fn capacitor_and_inductor() {
        assert_eq!(
            pq(Element::Capacitor { c: 3.0 }, 1),
            (vec![1.0, 0.0], vec![0.0, 3.0])
        );
        assert_eq!(
            pq(Element::Inductor { l: 4.0 }, 1),
            (vec![0.0, 4.0], vec![1.0, 0.0])
        );
    }

    #[test]
    fn series_strings_with_capacitors() {
        assert_eq!(
            pq(
                Element::SeriesRlc {
                    r: 2.0,
                    l: 3.0,
                    c: 0.5
                },
                2
            ),
            (vec![2.0, 2.0, 3.0], vec![0.0, 1.0, 0.0])
        );
        assert_eq!(
            pq(Element::SeriesRc { r: 2.0, c: 0.25 }, 1),
            (vec![4.0, 2.0], vec![0.0, 1.0])
        );
        assert_eq!(
            pq(Element::SeriesLc { l: 2.0, c: 0.5 }, 2),
            (vec![2.0, 0.0, 2.0], vec![0.0, 1.0, 0.0])
        );
    }

    #[test]
    fn order_too_small() {
        let err = Element::SeriesRlc {
            r: 1.0,
            l: 1.0,
            c: 1.0,
        }
        .coefficients(1)
        .unwrap_err();
        assert_eq!(
            err,
            ElementError::OrderTooSmall {
                kind: ElementKind::SeriesRlc,
                required: 2,
                nu: 1
            }
        );
        assert!(Element::Capacitor { c: 1.0 }.coefficients(0).is_err());
        assert!(Element::Resistor { r: 1.0 }.coefficients(0).is_ok());
    }

    #[test]
    fn rejects_nonpositive_values() {
        assert!(matches!(
            Element::SeriesRl { r: 1.0, l: 0.0 }.coefficients(1),
            Err(ElementError::NonPositiveValue { name: "l", .. })
        ));
        assert!(Element::Resistor { r: -1.0 }.coefficients(0).is_err());
    }

    #[test]
    fn kinds_parse_and_build() {
        for kind in [
            ElementKind::Resistor,
            ElementKind::Inductor,
            ElementKind::Capacitor,
            ElementKind::SeriesRl,
            ElementKind::SeriesRc,
            ElementKind::SeriesLc,
            ElementKind::SeriesRlc,
        ] {
            assert_eq!(kind.tag().parse::<ElementKind>().unwrap(), kind);
            let values = vec![1.5; kind.value_names().len()];
            let e = Element::from_values(kind, &values).unwrap();
            assert_eq!(e.kind(), kind);
            assert_eq!(e.values(), values);
            let (p, q) = e.coefficients(kind.min_order()).unwrap();
            assert!(p.as_slice().iter().all(|&x| x >= 0.0) && !p.is_zero());
            assert!(q.as_slice().iter().all(|&x| x >= 0.0) && !q.is_zero());
        }
        assert!("x".parse::<ElementKind>().is_err());
        assert!(matches!(
            Element::<f64>::from_values(ElementKind::SeriesRl, &[1.0]),
            Err(ElementError::ValueCount {
                expected: 2,
                found: 1,
                ..
            })
        ));
    }
}
