//! Kron reduction: Schur complement of the Γ-weighted Laplacian onto the
//! boundary vertices, and reconstruction of the reduced graph it realizes.

use nalgebra::{Cholesky, DMatrix, Dyn};
use thiserror::Error;

use crate::graph::{DirectedGraph, GraphError, IncidenceMatrix, VertexPartition};
use crate::network::{CoefficientVector, GeneralizedNetwork, HomogeneousForm, NetworkError};
use crate::scalar::Scalar;

/// Largest tolerated condition estimate of the internal Laplacian block.
pub const MAX_CONDITION: f64 = 1e12;

/// Off-diagonal entries below this fraction of the largest off-diagonal
/// magnitude are not edges.
pub const EDGE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(
        "internal Laplacian block is numerically singular (condition estimate {condition:.3e})"
    )]
    SingularInternalBlock { condition: f64 },
    #[error("not a weighted Laplacian: {0}")]
    NotLaplacian(String),
    #[error("reconstructed reduced graph is disconnected")]
    DisconnectedReduction,
    #[error("network has no internal vertices")]
    NoInternalVertices,
}

/// The four blocks of a Laplacian under a boundary/internal partition.
#[derive(Debug, Clone)]
pub struct LaplacianBlocks<T: Scalar> {
    pub bb: DMatrix<T>,
    pub bi: DMatrix<T>,
    pub ib: DMatrix<T>,
    pub ii: DMatrix<T>,
}

impl<T: Scalar> LaplacianBlocks<T> {
    pub fn split(
        laplacian: &DMatrix<T>,
        partition: &VertexPartition,
    ) -> Result<Self, ReductionError> {
        let n = partition.vertex_count();
        if laplacian.nrows() != n || laplacian.ncols() != n {
            return Err(GraphError::PartitionSize {
                partition: n,
                rows: laplacian.nrows(),
            }
            .into());
        }
        let pick = |rows: &[usize], cols: &[usize]| {
            DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
                laplacian[(rows[r] - 1, cols[c] - 1)]
            })
        };
        let (b, i) = (partition.boundary(), partition.internal());
        Ok(Self {
            bb: pick(b, b),
            bi: pick(b, i),
            ib: pick(i, b),
            ii: pick(i, i),
        })
    }
}

/// Result of eliminating the internal vertices of a weighted Laplacian.
#[derive(Debug, Clone)]
pub struct Elimination<T: Scalar> {
    /// `L_bb − L_bi L_ii⁻¹ L_ib`.
    pub schur: DMatrix<T>,
    /// `−L_ii⁻¹ L_ib`: internal potentials induced by boundary potentials.
    pub potential_map: DMatrix<T>,
    factor: Option<Cholesky<T, Dyn>>,
}

impl<T: Scalar> Elimination<T> {
    pub fn new(
        laplacian: &DMatrix<T>,
        partition: &VertexPartition,
    ) -> Result<Self, ReductionError> {
        let blocks = LaplacianBlocks::split(laplacian, partition)?;
        let ni = blocks.ii.nrows();
        if ni == 0 {
            return Ok(Self {
                schur: blocks.bb,
                potential_map: DMatrix::zeros(0, partition.boundary().len()),
                factor: None,
            });
        }
        let chol = factor_internal_block(blocks.ii)?;
        let potential_map = -chol.solve(&blocks.ib);
        let mut schur = blocks.bb + &blocks.bi * &potential_map;
        symmetrize(&mut schur);
        Ok(Self {
            schur,
            potential_map,
            factor: Some(chol),
        })
    }

    /// `L_ii⁻¹ rhs`; `rhs` has one row per internal vertex.
    pub fn solve_internal(&self, rhs: &DMatrix<T>) -> DMatrix<T> {
        match &self.factor {
            Some(chol) => chol.solve(rhs),
            None => DMatrix::zeros(0, rhs.ncols()),
        }
    }

    /// `F = −L_bi L_ii⁻¹`: boundary-equivalent image of internal injections.
    /// Equal to the transpose of the potential map by symmetry of `L`.
    pub fn injection_map(&self) -> DMatrix<T> {
        self.potential_map.transpose()
    }
}

fn factor_internal_block<T: Scalar>(ii: DMatrix<T>) -> Result<Cholesky<T, Dyn>, ReductionError> {
    let chol = Cholesky::new(ii).ok_or(ReductionError::SingularInternalBlock {
        condition: f64::INFINITY,
    })?;
    // Lower bound on cond(L_ii) from the factor's diagonal.
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((T::max_value().unwrap(), T::zero()), |(lo, hi), &d| {
            (lo.min(d), hi.max(d))
        });
    let condition = if lo > T::zero() {
        ((hi / lo) * (hi / lo)).as_f64()
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(ReductionError::SingularInternalBlock { condition });
    }
    Ok(chol)
}

fn symmetrize<T: Scalar>(m: &mut DMatrix<T>) {
    let half = T::lit(0.5);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let avg = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// `L_bb − L_bi L_ii⁻¹ L_ib` over the boundary vertices (ascending id order).
pub fn schur_complement<T: Scalar>(
    laplacian: &DMatrix<T>,
    partition: &VertexPartition,
) -> Result<DMatrix<T>, ReductionError> {
    Ok(Elimination::new(laplacian, partition)?.schur)
}

pub fn max_abs_off_diagonal<T: Scalar>(m: &DMatrix<T>) -> T {
    let mut peak = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                peak = peak.max(m[(i, j)].abs());
            }
        }
    }
    peak
}

/// Reads a graph and positive edge weights off a weighted Laplacian.
///
/// One edge per vertex pair `i < j` with `L[i,j] < −ε`, oriented `i → j`,
/// weight `−L[i,j]`. Vertex ids are the 1-based row indices.
pub fn laplacian_to_graph<T: Scalar>(
    laplacian: &DMatrix<T>,
) -> Result<(DirectedGraph, Vec<T>), ReductionError> {
    let n = laplacian.nrows();
    if n == 0 || laplacian.ncols() != n {
        return Err(ReductionError::NotLaplacian(format!(
            "expected a nonempty square matrix, got {}x{}",
            n,
            laplacian.ncols()
        )));
    }
    let scale = laplacian.amax();
    let off_peak = max_abs_off_diagonal(laplacian);
    let edge_eps = off_peak * T::tol(EDGE_THRESHOLD, 16.0);
    let loose = scale * T::tol(1e-9, 1024.0);
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for i in 0..n {
        let row_sum = laplacian.row(i).sum();
        if row_sum.abs() > loose {
            return Err(ReductionError::NotLaplacian(format!(
                "row {} sums to {:.3e}",
                i + 1,
                row_sum.as_f64()
            )));
        }
        for j in (i + 1)..n {
            let (a, b) = (laplacian[(i, j)], laplacian[(j, i)]);
            if (a - b).abs() > loose {
                return Err(ReductionError::NotLaplacian(format!(
                    "asymmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            let w = -(a + b) * T::lit(0.5);
            if -w > loose {
                return Err(ReductionError::NotLaplacian(format!(
                    "positive off-diagonal {:.3e} at ({}, {})",
                    (-w).as_f64(),
                    i + 1,
                    j + 1
                )));
            }
            if w > edge_eps {
                edges.push((i + 1, j + 1));
                weights.push(w);
            }
        }
    }
    let graph = DirectedGraph::new(n, edges)?;
    if !graph.is_connected() {
        return Err(ReductionError::DisconnectedReduction);
    }
    Ok((graph, weights))
}

/// A network on the boundary vertices only, terminal-equivalent to its source.
#[derive(Debug, Clone)]
pub struct ReducedNetwork<T: Scalar> {
    network: GeneralizedNetwork<T>,
    boundary_ids: Vec<usize>,
    weights: Vec<T>,
    schur: DMatrix<T>,
    form: HomogeneousForm<T>,
    eliminated: usize,
    source_edges: usize,
}

impl<T: Scalar> ReducedNetwork<T> {
    /// Reduced network; its vertex `i` is `boundary_ids()[i - 1]` of the source.
    #[inline]
    pub fn network(&self) -> &GeneralizedNetwork<T> {
        &self.network
    }

    #[inline]
    pub fn boundary_ids(&self) -> &[usize] {
        &self.boundary_ids
    }

    /// `Γ̂`, one weight per reduced edge.
    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Schur complement of the source Γ-Laplacian.
    #[inline]
    pub fn schur(&self) -> &DMatrix<T> {
        &self.schur
    }

    /// Homogeneous form of the source network.
    #[inline]
    pub fn form(&self) -> &HomogeneousForm<T> {
        &self.form
    }

    #[inline]
    pub fn p_basis(&self) -> &CoefficientVector<T> {
        &self.form.p_basis
    }

    #[inline]
    pub fn q_basis(&self) -> &CoefficientVector<T> {
        &self.form.q_basis
    }

    #[inline]
    pub fn eliminated_vertices(&self) -> usize {
        self.eliminated
    }

    #[inline]
    pub fn source_edge_count(&self) -> usize {
        self.source_edges
    }

    pub fn incidence(&self) -> IncidenceMatrix {
        self.network
            .graph()
            .incidence()
            .expect("reduced graph has no self-loops")
    }

    /// `B̂ Γ̂ B̂ᵀ`.
    pub fn laplacian(&self) -> DMatrix<T> {
        self.network
            .graph()
            .laplacian(&self.weights)
            .expect("reduced weights are positive")
    }

    /// `‖B̂ Γ̂ B̂ᵀ − S‖_max`.
    pub fn schur_residual(&self) -> T {
        (self.laplacian() - &self.schur).amax()
    }
}

/// Eliminates every internal vertex of a network whose coefficient families
/// are rank one. A network without internal vertices comes back in
/// homogeneous normal form with parallel edges merged.
pub fn kron_reduce<T: Scalar>(
    net: &GeneralizedNetwork<T>,
    rtol: T,
) -> Result<ReducedNetwork<T>, ReductionError> {
    let form = net.homogeneous_form(rtol)?;
    let laplacian = net.graph().laplacian(&form.weights)?;
    let schur = schur_complement(&laplacian, net.partition())?;
    let (graph, weights) = laplacian_to_graph(&schur)?;
    let nb = graph.vertex_count();
    let partition = VertexPartition::all_boundary(nb)?;
    let p = vec![form.p_basis.clone(); weights.len()];
    let q = weights.iter().map(|&w| form.q_basis.scaled(w)).collect();
    let network = GeneralizedNetwork::new(graph, partition, net.nu(), p, q);
    Ok(ReducedNetwork {
        network,
        boundary_ids: net.partition().boundary().to_vec(),
        weights,
        schur,
        form,
        eliminated: net.partition().internal().len(),
        source_edges: net.graph().edge_count(),
    })
}

/// `F = −B_bΓB_iᵀ (B_iΓB_iᵀ)⁻¹`, mapping internal injections (columns, in
/// ascending internal id order) to boundary injections (rows, ascending
/// boundary id order). Columns sum to one.
pub fn injection_map<T: Scalar>(
    net: &GeneralizedNetwork<T>,
    rtol: T,
) -> Result<DMatrix<T>, ReductionError> {
    let form = net.homogeneous_form(rtol)?;
    if net.partition().internal().is_empty() {
        return Err(ReductionError::NoInternalVertices);
    }
    let laplacian = net.graph().laplacian(&form.weights)?;
    Ok(Elimination::new(&laplacian, net.partition())?.injection_map())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Element;

    fn path(weights: &[f64]) -> (DMatrix<f64>, VertexPartition) {
        let g = DirectedGraph::new(3, [(1, 3), (3, 2)]).unwrap();
        (
            g.laplacian(weights).unwrap(),
            VertexPartition::from_boundary(3, [1, 2]).unwrap(),
        )
    }

    /// Gaussian elimination of the last row/column of a dense matrix.
    fn eliminate_last(m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows() - 1;
        DMatrix::from_fn(n, n, |i, j| m[(i, j)] - m[(i, n)] * m[(n, j)] / m[(n, n)])
    }

    #[test]
    fn path_schur_is_series_conductance() {
        let (l, part) = path(&[1.0, 1.0]);
        let s = schur_complement(&l, &part).unwrap();
        let oracle = eliminate_last(&l);
        assert!((s - &oracle).amax() < 1e-15);
        assert!((oracle[(0, 0)] - 0.5).abs() < 1e-15 && (oracle[(0, 1)] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_internal_returns_laplacian() {
        let (l, _) = path(&[1.0, 2.0]);
        let all = VertexPartition::all_boundary(3).unwrap();
        assert_eq!(schur_complement(&l, &all).unwrap(), l);
    }

    #[test]
    fn y_to_delta() {
        let g = DirectedGraph::new(4, [(1, 4), (2, 4), (4, 3)]).unwrap();
        let l = g.laplacian(&[1.0, 1.0, 1.0]).unwrap();
        let part = VertexPartition::from_boundary(4, [1, 2, 3]).unwrap();
        let s = schur_complement(&l, &part).unwrap();
        // R_Δ = (R1R2 + R2R3 + R3R1) / R_opposite = 3 for unit arms.
        let g_delta: f64 = 1.0 / 3.0;
        for i in 0..3 {
            for j in 0..3 {
                let want: f64 = if i == j { 2.0 * g_delta } else { -g_delta };
                assert!((s[(i, j)] - want).abs() < 1e-15);
            }
        }
        let (graph, w) = laplacian_to_graph(&s).unwrap();
        let edges: Vec<_> = graph.edges().iter().map(|e| (e.tail, e.head)).collect();
        assert_eq!(edges, vec![(1, 2), (1, 3), (2, 3)]);
        assert!(w.iter().all(|&x: &f64| (x - g_delta).abs() < 1e-15));
    }

    #[test]
    fn graph_from_two_by_two() {
        let (g, w) =
            laplacian_to_graph(&DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5])).unwrap();
        assert_eq!(g.edges(), &[crate::graph::Edge::new(1, 2)]);
        assert_eq!(w, vec![0.5]);
        let (_, w) =
            laplacian_to_graph(&DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])).unwrap();
        assert_eq!(w, vec![1.0]);
    }

    #[test]
    fn non_laplacian_inputs_rejected() {
        let positive = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        assert!(matches!(
            laplacian_to_graph(&positive),
            Err(ReductionError::NotLaplacian(_))
        ));
        let row_sum = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0]);
        assert!(laplacian_to_graph(&row_sum).is_err());
        let split = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, -1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0, 1.0,
            ],
        );
        assert_eq!(
            laplacian_to_graph(&split).unwrap_err(),
            ReductionError::DisconnectedReduction
        );
    }

    #[test]
    fn singular_internal_block_detected() {
        // Vertex 3 is internal and isolated: its Laplacian row is zero.
        let g = DirectedGraph::new(3, [(1, 2)]).unwrap();
        let l = g.laplacian(&[1.0]).unwrap();
        let part = VertexPartition::from_boundary(3, [1, 2]).unwrap();
        assert!(matches!(
            schur_complement(&l, &part),
            Err(ReductionError::SingularInternalBlock { .. })
        ));
    }

    fn rl_path(rl: &[(f64, f64)]) -> GeneralizedNetwork<f64> {
        let g = DirectedGraph::new(3, [(1, 3), (3, 2)]).unwrap();
        let part = VertexPartition::from_boundary(3, [1, 2]).unwrap();
        let elements: Vec<_> = rl
            .iter()
            .map(|&(r, l)| Element::SeriesRl { r, l })
            .collect();
        GeneralizedNetwork::from_elements(g, part, 1, &elements).unwrap()
    }

    #[test]
    fn rl_series_reduces_to_summed_impedance() {
        let red = kron_reduce(&rl_path(&[(1.0, 2.0), (2.0, 4.0)]), 1e-9).unwrap();
        let net = red.network();
        assert_eq!(net.graph().edge_count(), 1);
        // Effective element: p̂ / q̂₀ = (r₁ + r₂, ℓ₁ + ℓ₂).
        let p = net.p()[0].as_slice();
        let q0 = net.q()[0].as_slice()[0];
        assert!((p[0] / q0 - 3.0).abs() < 1e-13);
        assert!((p[1] / q0 - 6.0).abs() < 1e-13);
        assert_eq!(red.eliminated_vertices(), 1);
        assert_eq!(red.source_edge_count(), 2);
        assert!(red.schur_residual() < 1e-15);
    }

    #[test]
    fn example1_rejected() {
        let g = DirectedGraph::new(3, [(1, 3), (3, 2)]).unwrap();
        let part = VertexPartition::from_boundary(3, [1, 2]).unwrap();
        let net = GeneralizedNetwork::new(
            g,
            part,
            1,
            vec![
                CoefficientVector::from_slice(&[1.0, 0.0]),
                CoefficientVector::from_slice(&[0.0, 1.0]),
            ],
            vec![
                CoefficientVector::from_slice(&[1.0, 0.0]),
                CoefficientVector::from_slice(&[1.0, 0.0]),
            ],
        );
        assert!(matches!(
            kron_reduce(&net, 1e-9),
            Err(ReductionError::Network(NetworkError::NotReducible {
                rank: 2,
                ..
            }))
        ));
    }

    #[test]
    fn reduction_without_internal_vertices_merges_parallel_edges() {
        let g = DirectedGraph::new(2, [(1, 2), (2, 1)]).unwrap();
        let part = VertexPartition::all_boundary(2).unwrap();
        let net = GeneralizedNetwork::from_elements(
            g,
            part,
            0,
            &[Element::Resistor { r: 1.0 }, Element::Resistor { r: 1.0 }],
        )
        .unwrap();
        let red = kron_reduce(&net, 1e-9).unwrap();
        assert_eq!(red.weights(), &[2.0]);
        let again = kron_reduce(red.network(), 1e-9).unwrap();
        assert_eq!(again.weights(), red.weights());
        assert_eq!(again.network(), red.network());
    }

    #[test]
    fn injection_map_current_divider() {
        let f = injection_map(&rl_path(&[(1.0, 1.0), (1.0, 1.0)]), 1e-9).unwrap();
        assert!((f[(0, 0)] - 0.5).abs() < 1e-15 && (f[(1, 0)] - 0.5).abs() < 1e-15);
        // Γ = diag(1, 3): resistive edges r = 1 and 1/3.
        let g = DirectedGraph::new(3, [(1, 3), (3, 2)]).unwrap();
        let part = VertexPartition::from_boundary(3, [1, 2]).unwrap();
        let net = GeneralizedNetwork::from_elements(
            g,
            part,
            0,
            &[
                Element::Resistor { r: 1.0 },
                Element::Resistor { r: 1.0 / 3.0 },
            ],
        )
        .unwrap();
        let f = injection_map(&net, 1e-9).unwrap();
        let f: DMatrix<f64> = f;
        assert!((f[(0, 0)] - 0.25).abs() < 1e-15);
        assert!((f[(1, 0)] - 0.75).abs() < 1e-15);
        assert!((f.column(0).sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn injection_map_needs_internal_vertex() {
        let g = DirectedGraph::new(2, [(1, 2)]).unwrap();
        let part = VertexPartition::all_boundary(2).unwrap();
        let net =
            GeneralizedNetwork::from_elements(g, part, 0, &[Element::Resistor { r: 1.0 }]).unwrap();
        assert_eq!(
            injection_map(&net, 1e-9).unwrap_err(),
            ReductionError::NoInternalVertices
        );
    }

    #[test]
    fn single_precision_reduction() {
        let g = DirectedGraph::new(4, [(1, 4), (2, 4), (4, 3)]).unwrap();
        let part = VertexPartition::from_boundary(4, [1, 2, 3]).unwrap();
        let net =
            GeneralizedNetwork::from_elements(g, part, 0, &[Element::Resistor { r: 1.0f32 }; 3])
                .unwrap();
        let red = kron_reduce(&net, f32::default_rank_rtol()).unwrap();
        assert_eq!(red.weights().len(), 3);
        assert!(red.weights().iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-6));
    }
}
