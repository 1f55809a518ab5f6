//! Time-domain Kron reduction of generalized linear electrical networks.
//!
//! A network is a directed graph whose edges obey linear constant-coefficient
//! differential relations between edge current and edge voltage. When the
//! current-side and voltage-side coefficient vectors each span a
//! one-dimensional space, the internal vertices can be eliminated exactly:
//! the reduced network lives on the boundary vertices, has the same
//! differentiation order, and produces the same boundary currents for every
//! smooth boundary potential.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix double precision.

// `!(x > 0)` is the NaN-rejecting form used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod graph;
pub mod io;
pub mod network;
pub mod reduction;
pub mod scalar;
pub mod simulation;

mod error;

pub use error::{Error, ExitCode};
pub use graph::{DirectedGraph, Edge, GraphError, IncidenceMatrix, VertexPartition};
pub use network::{
    rank1_check, CoefficientVector, Element, ElementKind, Family, GeneralizedNetwork,
    HomogeneousForm, NetworkError, ValidationReport, Violation,
};
pub use reduction::{
    injection_map, kron_reduce, laplacian_to_graph, schur_complement, ReducedNetwork,
    ReductionError,
};
pub use scalar::Scalar;
pub use simulation::{
    compare_equivalence, simulate_original, simulate_reduced, simulate_series_chain,
    simulate_with_injection, Excitation, Grid, TransientSkip,
};

/// Double-precision network.
pub type Network = GeneralizedNetwork<f64>;
/// Double-precision reduced network.
pub type Reduced = ReducedNetwork<f64>;
/// Double-precision coefficient vector.
pub type Coefficients = CoefficientVector<f64>;
/// Double-precision excitation signal.
pub type Signal = simulation::Signal<f64>;
/// Double-precision sampled trace.
pub type Trace = simulation::Trace<f64>;

/// Single-precision network.
pub type Network32 = GeneralizedNetwork<f32>;
/// Single-precision reduced network.
pub type Reduced32 = ReducedNetwork<f32>;
