//! Directed open graphs, incidence matrices and weighted Laplacians.
//!
//! Vertex ids are 1-based (`1..=v`). Edge indices are 0-based positions in
//! the edge list; the edge list order fixes the column order of the
//! incidence matrix.

use nalgebra::DMatrix;
use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("edge {} references unknown vertex {vertex} (graph has {vertex_count} vertices)", edge + 1)]
    UnknownEdgeVertex {
        edge: usize,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("edge {} is a self-loop on vertex {vertex}", edge + 1)]
    SelfLoop { edge: usize, vertex: usize },
    #[error("partition references unknown vertex {vertex} (graph has {vertex_count} vertices)")]
    UnknownPartitionVertex { vertex: usize, vertex_count: usize },
    #[error("vertex {vertex} appears in both the boundary and the internal set")]
    OverlappingPartition { vertex: usize },
    #[error("vertex {vertex} is neither boundary nor internal")]
    IncompletePartition { vertex: usize },
    #[error("boundary vertex set is empty")]
    EmptyBoundary,
    #[error("edge {} has nonpositive weight {weight}", edge + 1)]
    NonPositiveWeight { edge: usize, weight: f64 },
    #[error("expected {expected} weights, got {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("partition covers {partition} vertices but the matrix has {rows} rows")]
    PartitionSize { partition: usize, rows: usize },
}

/// Directed edge `tail -> head`.
///
/// Edge indices are 0-based in the API; messages print them 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

impl Edge {
    pub fn new(tail: usize, head: usize) -> Self {
        Self { tail, head }
    }

    pub fn reversed(self) -> Self {
        Self {
            tail: self.head,
            head: self.tail,
        }
    }
}

/// A finite directed graph on the vertex set `1..=vertex_count`.
///
/// Parallel edges are allowed. Self-loops are representable so that
/// validation can report them, but [`DirectedGraph::incidence`] rejects them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl DirectedGraph {
    pub fn new<I>(vertex_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if vertex_count == 0 {
            return Err(GraphError::NoVertices);
        }
        let edges: Vec<Edge> = edges
            .into_iter()
            .map(|(tail, head)| Edge { tail, head })
            .collect();
        for (k, edge) in edges.iter().enumerate() {
            for vertex in [edge.tail, edge.head] {
                if vertex == 0 || vertex > vertex_count {
                    return Err(GraphError::UnknownEdgeVertex {
                        edge: k,
                        vertex,
                        vertex_count,
                    });
                }
            }
        }
        Ok(Self {
            vertex_count,
            edges,
        })
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Index of the first self-loop, if any.
    pub fn find_self_loop(&self) -> Option<usize> {
        self.edges.iter().position(|e| e.tail == e.head)
    }

    /// True iff every pair of vertices is joined by a path that may traverse
    /// edges against their direction.
    pub fn is_connected(&self) -> bool {
        let mut components = UnionFind::<usize>::new(self.vertex_count);
        let mut merged = 0;
        for edge in &self.edges {
            if components.union(edge.tail - 1, edge.head - 1) {
                merged += 1;
            }
        }
        merged + 1 == self.vertex_count
    }

    /// Builds the vertex-by-edge incidence matrix: `-1` at the tail, `+1` at
    /// the head of every edge.
    pub fn incidence(&self) -> Result<IncidenceMatrix, GraphError> {
        if let Some(edge) = self.find_self_loop() {
            return Err(GraphError::SelfLoop {
                edge,
                vertex: self.edges[edge].tail,
            });
        }
        let mut matrix = DMatrix::<i8>::zeros(self.vertex_count, self.edges.len());
        for (k, edge) in self.edges.iter().enumerate() {
            matrix[(edge.tail - 1, k)] = -1;
            matrix[(edge.head - 1, k)] = 1;
        }
        Ok(IncidenceMatrix { matrix })
    }

    /// Shorthand for `weighted_laplacian(&self.incidence()?, weights)`.
    pub fn laplacian<T: Scalar>(&self, weights: &[T]) -> Result<DMatrix<T>, GraphError> {
        weighted_laplacian(&self.incidence()?, weights)
    }
}

/// Incidence matrix of a loop-free directed graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    matrix: DMatrix<i8>,
}

impl IncidenceMatrix {
    #[inline]
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    #[inline]
    pub fn as_matrix(&self) -> &DMatrix<i8> {
        &self.matrix
    }

    /// Entry for 1-based `vertex` and 0-based `edge`.
    #[inline]
    pub fn entry(&self, vertex: usize, edge: usize) -> i8 {
        self.matrix[(vertex - 1, edge)]
    }

    pub fn to_scalar<T: Scalar>(&self) -> DMatrix<T> {
        self.matrix.map(|x| T::lit(f64::from(x)))
    }

    /// 0-based (tail row, head row) of column `edge`.
    fn endpoints(&self, edge: usize) -> (usize, usize) {
        let column = self.matrix.column(edge);
        let tail = column.iter().position(|&x| x == -1);
        let head = column.iter().position(|&x| x == 1);
        match (tail, head) {
            (Some(t), Some(h)) => (t, h),
            _ => unreachable!("incidence column {edge} lacks a tail or head"),
        }
    }

    /// Splits the rows into the boundary block and the internal block, each
    /// in ascending vertex-id order.
    pub fn split_rows(
        &self,
        partition: &VertexPartition,
    ) -> Result<(DMatrix<i8>, DMatrix<i8>), GraphError> {
        if partition.vertex_count() != self.rows() {
            return Err(GraphError::PartitionSize {
                partition: partition.vertex_count(),
                rows: self.rows(),
            });
        }
        let pick = |ids: &[usize]| {
            DMatrix::from_fn(ids.len(), self.cols(), |r, c| self.matrix[(ids[r] - 1, c)])
        };
        Ok((pick(partition.boundary()), pick(partition.internal())))
    }
}

/// Which block of a partition a vertex lives in, with its row inside that block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Boundary(usize),
    Internal(usize),
}

/// Split of `1..=v` into boundary and internal vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexPartition {
    boundary: Vec<usize>,
    internal: Vec<usize>,
    blocks: Vec<Block>,
}

impl VertexPartition {
    /// Every vertex not listed in `boundary` is internal.
    pub fn from_boundary<I>(vertex_count: usize, boundary: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut is_boundary = vec![false; vertex_count];
        for vertex in boundary {
            if vertex == 0 || vertex > vertex_count {
                return Err(GraphError::UnknownPartitionVertex {
                    vertex,
                    vertex_count,
                });
            }
            is_boundary[vertex - 1] = true;
        }
        Self::from_flags(&is_boundary)
    }

    /// Explicit two-set constructor; the sets must partition `1..=vertex_count`.
    pub fn new(
        vertex_count: usize,
        boundary: &[usize],
        internal: &[usize],
    ) -> Result<Self, GraphError> {
        let mut seen: Vec<Option<bool>> = vec![None; vertex_count];
        for (&vertex, flag) in boundary
            .iter()
            .map(|v| (v, true))
            .chain(internal.iter().map(|v| (v, false)))
        {
            if vertex == 0 || vertex > vertex_count {
                return Err(GraphError::UnknownPartitionVertex {
                    vertex,
                    vertex_count,
                });
            }
            match seen[vertex - 1] {
                Some(prev) if prev != flag => {
                    return Err(GraphError::OverlappingPartition { vertex })
                }
                _ => seen[vertex - 1] = Some(flag),
            }
        }
        let flags = seen
            .iter()
            .enumerate()
            .map(|(i, s)| s.ok_or(GraphError::IncompletePartition { vertex: i + 1 }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_flags(&flags)
    }

    /// All vertices on the boundary.
    pub fn all_boundary(vertex_count: usize) -> Result<Self, GraphError> {
        Self::from_flags(&vec![true; vertex_count])
    }

    fn from_flags(is_boundary: &[bool]) -> Result<Self, GraphError> {
        let mut boundary = Vec::new();
        let mut internal = Vec::new();
        let mut blocks = Vec::with_capacity(is_boundary.len());
        for (i, &flag) in is_boundary.iter().enumerate() {
            if flag {
                blocks.push(Block::Boundary(boundary.len()));
                boundary.push(i + 1);
            } else {
                blocks.push(Block::Internal(internal.len()));
                internal.push(i + 1);
            }
        }
        if boundary.is_empty() {
            return Err(GraphError::EmptyBoundary);
        }
        Ok(Self {
            boundary,
            internal,
            blocks,
        })
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.blocks.len()
    }

    /// Boundary vertex ids, ascending.
    #[inline]
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Internal vertex ids, ascending.
    #[inline]
    pub fn internal(&self) -> &[usize] {
        &self.internal
    }

    #[inline]
    pub fn block(&self, vertex: usize) -> Block {
        self.blocks[vertex - 1]
    }

    #[inline]
    pub fn is_boundary(&self, vertex: usize) -> bool {
        matches!(self.block(vertex), Block::Boundary(_))
    }
}

/// `B W Bᵀ` for diagonal `W = diag(weights)`, assembled edge by edge.
pub fn weighted_laplacian<T: Scalar>(
    incidence: &IncidenceMatrix,
    weights: &[T],
) -> Result<DMatrix<T>, GraphError> {
    if weights.len() != incidence.cols() {
        return Err(GraphError::WeightCount {
            expected: incidence.cols(),
            found: weights.len(),
        });
    }
    let n = incidence.rows();
    let mut laplacian = DMatrix::<T>::zeros(n, n);
    for (k, &w) in weights.iter().enumerate() {
        // NaN fails this comparison too.
        if !(w > T::zero()) || !w.is_finite() {
            return Err(GraphError::NonPositiveWeight {
                edge: k,
                weight: w.as_f64(),
            });
        }
        let (t, h) = incidence.endpoints(k);
        laplacian[(t, t)] += w;
        laplacian[(h, h)] += w;
        laplacian[(t, h)] -= w;
        laplacian[(h, t)] -= w;
    }
    Ok(laplacian)
}
