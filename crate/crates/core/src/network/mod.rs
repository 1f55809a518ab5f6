//! Generalized electrical networks: a directed open graph whose edges obey
//!
//! ```text
//! Σ_j p_kj dʲI_k/dtʲ = Σ_j q_kj dʲV_k/dtʲ,   j = 0..=ν
//! ```
//!
//! with nonnegative, nonzero coefficient vectors `p_k`, `q_k`.

mod element;
mod homogeneous;

use std::fmt;

use nalgebra::Complex;
use thiserror::Error;

use crate::graph::{DirectedGraph, VertexPartition};
use crate::scalar::Scalar;

pub use element::{Element, ElementError, ElementKind};
pub use homogeneous::{rank1_analysis, rank1_check, HomogeneousForm, Rank1Analysis, Rank1Fit};

/// Which coefficient family a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Current-side coefficients.
    P,
    /// Voltage-side coefficients.
    Q,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::P => "P",
            Family::Q => "Q",
        })
    }
}

/// Coefficients of `d⁰/dt⁰ ..= dᵛ/dtᵛ`, lowest order first.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<T>(Vec<T>);

impl<T: Scalar> CoefficientVector<T> {
    pub fn new(entries: Vec<T>) -> Self {
        Self(entries)
    }

    pub fn from_slice(entries: &[T]) -> Self {
        Self(entries.to_vec())
    }

    /// `entries` zero-padded to `len`.
    pub fn padded(entries: &[T], len: usize) -> Self {
        let mut v = entries.to_vec();
        v.resize(len.max(entries.len()), T::zero());
        Self(v)
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self(self.0.iter().map(|&x| x * factor).collect())
    }

    /// Highest index whose coefficient exceeds `rel_eps` times the largest
    /// coefficient; `None` when the vector is zero.
    pub fn effective_order(&self, rel_eps: T) -> Option<usize> {
        let cutoff = self.max_abs() * rel_eps;
        if self.max_abs().is_zero() {
            return None;
        }
        self.0.iter().rposition(|x| x.abs() > cutoff)
    }

    /// Evaluates the polynomial `Σ_j c_j s^j` (Horner).
    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        self.0
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| {
                acc * s + Complex::new(c, T::zero())
            })
    }

    pub fn eval_real(&self, s: T) -> T {
        self.0.iter().rev().fold(T::zero(), |acc, &c| acc * s + c)
    }

    /// Complex roots of `Σ_j c_j s^j` after trimming negligible leading terms.
    pub fn roots(&self) -> Vec<Complex<T>> {
        let Some(order) = self.effective_order(T::lit(1e-12)) else {
            return Vec::new();
        };
        if order == 0 {
            return Vec::new();
        }
        let lead = self.0[order];
        let companion = nalgebra::DMatrix::<T>::from_fn(order, order, |r, c| {
            if r + 1 == c {
                T::one()
            } else if r + 1 == order {
                -self.0[c] / lead
            } else {
                T::zero()
            }
        });
        companion.complex_eigenvalues().iter().copied().collect()
    }
}

/// One invariant violation found by [`GeneralizedNetwork::validate`].
/// `edge` is 0-based; `Display` prints it 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SelfLoop {
        edge: usize,
    },
    Disconnected,
    PartitionSize {
        partition: usize,
        vertices: usize,
    },
    EdgeCount {
        family: Family,
        expected: usize,
        found: usize,
    },
    Length {
        edge: usize,
        family: Family,
        expected: usize,
        found: usize,
    },
    NegativeCoefficient {
        edge: usize,
        family: Family,
        index: usize,
    },
    NonFiniteCoefficient {
        edge: usize,
        family: Family,
        index: usize,
    },
    ShortCircuit {
        edge: usize,
    },
    OpenCircuit {
        edge: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::SelfLoop { edge } => write!(f, "self-loop edge {}", edge + 1),
            Violation::Disconnected => f.write_str("disconnected graph"),
            Violation::PartitionSize {
                partition,
                vertices,
            } => write!(
                f,
                "partition covers {partition} vertices but graph has {vertices}"
            ),
            Violation::EdgeCount {
                family,
                expected,
                found,
            } => write!(
                f,
                "{family} has {found} coefficient vectors, expected one per edge ({expected})"
            ),
            Violation::Length {
                edge,
                family,
                expected,
                found,
            } => write!(
                f,
                "length mismatch: {family} vector of edge {} has {found} entries, expected {expected}",
                edge + 1
            ),
            Violation::NegativeCoefficient {
                edge,
                family,
                index,
            } => write!(f, "negative coefficient {family}[{index}] on edge {}", edge + 1),
            Violation::NonFiniteCoefficient {
                edge,
                family,
                index,
            } => write!(f, "non-finite coefficient {family}[{index}] on edge {}", edge + 1),
            Violation::ShortCircuit { edge } => write!(f, "short-circuit edge {}", edge + 1),
            Violation::OpenCircuit { edge } => write!(f, "open-circuit edge {}", edge + 1),
        }
    }
}

/// Outcome of validation; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
    #[error(
        "not reducible: coefficient family {family} has numerical rank {rank} \
         (second/first singular value ratio {singular_ratio:.3e})"
    )]
    NotReducible {
        family: Family,
        rank: usize,
        singular_ratio: f64,
    },
}

/// A network `(G, V_b, ν, P, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedNetwork<T> {
    graph: DirectedGraph,
    partition: VertexPartition,
    nu: usize,
    p: Vec<CoefficientVector<T>>,
    q: Vec<CoefficientVector<T>>,
}

impl<T: Scalar> GeneralizedNetwork<T> {
    /// Assembles a network without checking it; see [`Self::validate`].
    pub fn new(
        graph: DirectedGraph,
        partition: VertexPartition,
        nu: usize,
        p: Vec<CoefficientVector<T>>,
        q: Vec<CoefficientVector<T>>,
    ) -> Self {
        Self {
            graph,
            partition,
            nu,
            p,
            q,
        }
    }

    /// Like [`Self::new`] but rejects networks that fail validation.
    pub fn checked(
        graph: DirectedGraph,
        partition: VertexPartition,
        nu: usize,
        p: Vec<CoefficientVector<T>>,
        q: Vec<CoefficientVector<T>>,
    ) -> Result<Self, NetworkError> {
        let net = Self::new(graph, partition, nu, p, q);
        let report = net.validate();
        if report.is_valid() {
            Ok(net)
        } else {
            Err(NetworkError::Invalid(report))
        }
    }

    /// Builds a network from element shorthands, one per edge.
    pub fn from_elements(
        graph: DirectedGraph,
        partition: VertexPartition,
        nu: usize,
        elements: &[Element<T>],
    ) -> Result<Self, ElementError> {
        let (p, q) = elements
            .iter()
            .map(|e| e.coefficients(nu))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .unzip();
        Ok(Self::new(graph, partition, nu, p, q))
    }

    #[inline]
    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    #[inline]
    pub fn partition(&self) -> &VertexPartition {
        &self.partition
    }

    #[inline]
    pub fn nu(&self) -> usize {
        self.nu
    }

    #[inline]
    pub fn p(&self) -> &[CoefficientVector<T>] {
        &self.p
    }

    #[inline]
    pub fn q(&self) -> &[CoefficientVector<T>] {
        &self.q
    }

    /// Checks every structural and sign invariant and reports all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let e = self.graph.edge_count();
        for (k, edge) in self.graph.edges().iter().enumerate() {
            if edge.tail == edge.head {
                violations.push(Violation::SelfLoop { edge: k });
            }
        }
        if !self.graph.is_connected() {
            violations.push(Violation::Disconnected);
        }
        if self.partition.vertex_count() != self.graph.vertex_count() {
            violations.push(Violation::PartitionSize {
                partition: self.partition.vertex_count(),
                vertices: self.graph.vertex_count(),
            });
        }
        for (family, vectors) in [(Family::P, &self.p), (Family::Q, &self.q)] {
            if vectors.len() != e {
                violations.push(Violation::EdgeCount {
                    family,
                    expected: e,
                    found: vectors.len(),
                });
            }
            for (k, v) in vectors.iter().enumerate() {
                if v.len() != self.nu + 1 {
                    violations.push(Violation::Length {
                        edge: k,
                        family,
                        expected: self.nu + 1,
                        found: v.len(),
                    });
                }
                for (j, &x) in v.as_slice().iter().enumerate() {
                    if !x.is_finite() {
                        violations.push(Violation::NonFiniteCoefficient {
                            edge: k,
                            family,
                            index: j,
                        });
                    } else if x < T::zero() {
                        violations.push(Violation::NegativeCoefficient {
                            edge: k,
                            family,
                            index: j,
                        });
                    }
                }
                if v.is_zero() {
                    violations.push(match family {
                        Family::P => Violation::ShortCircuit { edge: k },
                        Family::Q => Violation::OpenCircuit { edge: k },
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<(), NetworkError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(NetworkError::Invalid(report))
        }
    }

    /// Extracts `p̃, q̃, λ, γ` and `Γ = diag(γ/λ)`; fails when either
    /// coefficient family is not numerically rank one.
    pub fn homogeneous_form(&self, rtol: T) -> Result<HomogeneousForm<T>, NetworkError> {
        self.ensure_valid()?;
        HomogeneousForm::from_families(&self.p, &self.q, rtol)
    }

    pub fn is_homogeneous(&self, rtol: T) -> bool {
        self.homogeneous_form(rtol).is_ok()
    }

    /// Same network with edge `k` reversed. Coefficients are unchanged.
    pub fn with_reversed_edge(&self, k: usize) -> Self {
        let edges: Vec<(usize, usize)> = self
            .graph
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let e = if i == k { e.reversed() } else { *e };
                (e.tail, e.head)
            })
            .collect();
        let graph = DirectedGraph::new(self.graph.vertex_count(), edges)
            .expect("reversal keeps vertex ids valid");
        Self {
            graph,
            ..self.clone()
        }
    }

    /// Per-edge admittance `q_k(s) / p_k(s)`.
    pub fn edge_admittance(&self, k: usize, s: Complex<T>) -> Complex<T> {
        self.q[k].eval(s) / self.p[k].eval(s)
    }
}
