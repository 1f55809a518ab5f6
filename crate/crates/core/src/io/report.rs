use serde::Serialize;

use crate::network::ValidationReport;
use crate::reduction::ReducedNetwork;
use crate::scalar::Scalar;

/// Pretty JSON with a trailing newline.
pub fn to_pretty_json<S: Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSummary {
    pub valid: bool,
    pub violations: Vec<String>,
}

impl From<&ValidationReport> for ValidationSummary {
    fn from(r: &ValidationReport) -> Self {
        Self {
            valid: r.is_valid(),
            violations: r.violations.iter().map(ToString::to_string).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReduceReport {
    pub eliminated_vertices: usize,
    pub vertices_before: usize,
    pub vertices_after: usize,
    pub edges_before: usize,
    pub edges_after: usize,
    /// `‖B̂Γ̂B̂ᵀ − S‖_max`.
    pub schur_residual: f64,
    pub boundary_ids: Vec<usize>,
    pub weights: Vec<f64>,
    pub p_basis: Vec<f64>,
    pub q_basis: Vec<f64>,
}

impl<T: Scalar> From<&ReducedNetwork<T>> for ReduceReport {
    fn from(red: &ReducedNetwork<T>) -> Self {
        let f = |x: &[T]| x.iter().map(|v| v.as_f64()).collect();
        let after = red.boundary_ids().len();
        Self {
            eliminated_vertices: red.eliminated_vertices(),
            vertices_before: after + red.eliminated_vertices(),
            vertices_after: after,
            edges_before: red.source_edge_count(),
            edges_after: red.network().graph().edge_count(),
            schur_residual: red.schur_residual().as_f64(),
            boundary_ids: red.boundary_ids().to_vec(),
            weights: f(red.weights()),
            p_basis: f(red.p_basis().as_slice()),
            q_basis: f(red.q_basis().as_slice()),
        }
    }
}
