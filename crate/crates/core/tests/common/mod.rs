//! Generators, oracles and shared property checks for the integration suites.
#![allow(dead_code)]

use std::f64::consts::TAU;

use kron_core::graph::weighted_laplacian;
use kron_core::io::{parse_netlist, serialize_netlist};
use kron_core::{
    kron_reduce, Coefficients, DirectedGraph, Element, ElementKind, Excitation, Network, Signal,
    VertexPartition,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const RTOL: f64 = 1e-9;

/// `cases` runs, no regression files (integration tests have no `lib.rs` to anchor them).
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// A connected graph with positive weights and a boundary of at least two vertices.
#[derive(Debug, Clone)]
pub struct Case {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub weights: Vec<f64>,
    pub boundary: Vec<usize>,
}

impl Case {
    pub fn graph(&self) -> DirectedGraph {
        DirectedGraph::new(self.vertices, self.edges.iter().copied()).unwrap()
    }

    pub fn partition(&self) -> VertexPartition {
        VertexPartition::from_boundary(self.vertices, self.boundary.iter().copied()).unwrap()
    }

    pub fn internal(&self) -> Vec<usize> {
        (1..=self.vertices)
            .filter(|v| !self.boundary.contains(v))
            .collect()
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        self.graph().laplacian(&self.weights).unwrap()
    }

    /// Resistors with conductance equal to the weight.
    pub fn resistive(&self) -> Network {
        let elements: Vec<_> = self
            .weights
            .iter()
            .map(|&w| Element::Resistor { r: 1.0 / w })
            .collect();
        Network::from_elements(self.graph(), self.partition(), 0, &elements).unwrap()
    }

    /// Series RL edges `r = 1/w`, `l = tau/w`.
    pub fn rl(&self, tau: f64) -> Network {
        let elements: Vec<_> = self
            .weights
            .iter()
            .map(|&w| Element::SeriesRl {
                r: 1.0 / w,
                l: tau / w,
            })
            .collect();
        Network::from_elements(self.graph(), self.partition(), 1, &elements).unwrap()
    }

    /// Same graph with vertex ids mapped through `perm` (1-based, `perm[v-1]`).
    pub fn relabeled(&self, perm: &[usize]) -> Case {
        let mut boundary: Vec<usize> = self.boundary.iter().map(|&v| perm[v - 1]).collect();
        boundary.sort_unstable();
        Case {
            vertices: self.vertices,
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| (perm[a - 1], perm[b - 1]))
                .collect(),
            weights: self.weights.clone(),
            boundary,
        }
    }
}

fn log_weight() -> impl Strategy<Value = f64> {
    (-2.0..=2.0f64).prop_map(|x| 10f64.powf(x))
}

/// Random spanning tree plus extra edges, random orientation, weights
/// log-uniform in `[1e-2, 1e2]`.
pub fn case(max_vertices: usize, max_edges: usize) -> impl Strategy<Value = Case> {
    (2..=max_vertices).prop_flat_map(move |v| {
        let tree = prop::collection::vec((0.0..1.0f64, any::<bool>(), log_weight()), v - 1);
        let extra = prop::collection::vec(
            (0..v, 1..v, log_weight()),
            0..=max_edges.saturating_sub(v - 1),
        );
        let boundary = prop::collection::vec(any::<bool>(), v);
        (Just(v), tree, extra, boundary).prop_map(|(v, tree, extra, flags)| {
            let mut edges = Vec::new();
            let mut weights = Vec::new();
            for (i, (frac, flip, w)) in tree.into_iter().enumerate() {
                let child = i + 2;
                let parent = 1 + ((frac * (child - 1) as f64) as usize).min(child - 2);
                edges.push(if flip {
                    (child, parent)
                } else {
                    (parent, child)
                });
                weights.push(w);
            }
            for (a, off, w) in extra {
                edges.push((a + 1, (a + off) % v + 1));
                weights.push(w);
            }
            let mut boundary: Vec<usize> = (1..=v).filter(|&i| flags[i - 1]).collect();
            for extra in [1, v] {
                if boundary.len() < 2 && !boundary.contains(&extra) {
                    boundary.push(extra);
                }
            }
            boundary.sort_unstable();
            Case {
                vertices: v,
                edges,
                weights,
                boundary,
            }
        })
    })
}

/// Case together with a permutation that fixes boundary ids and shuffles internal ones.
pub fn case_with_internal_shuffle(
    max_vertices: usize,
    max_edges: usize,
) -> impl Strategy<Value = (Case, Vec<usize>)> {
    case(max_vertices, max_edges).prop_flat_map(|c| {
        let internal = c.internal();
        (Just(c), Just(internal.clone()).prop_shuffle()).prop_map(move |(c, shuffled)| {
            let mut perm: Vec<usize> = (1..=c.vertices).collect();
            for (&from, &to) in internal.iter().zip(&shuffled) {
                perm[from - 1] = to;
            }
            (c, perm)
        })
    })
}

/// Eliminates internal vertices one at a time by star-mesh updates.
pub fn sequential_schur(laplacian: &DMatrix<f64>, boundary: &[usize]) -> DMatrix<f64> {
    let mut keep: Vec<usize> = (1..=laplacian.nrows()).collect();
    let mut l = laplacian.clone();
    while let Some(pos) = keep.iter().position(|v| !boundary.contains(v)) {
        let n = l.nrows();
        let pivot = l[(pos, pos)];
        let mut next = DMatrix::zeros(n - 1, n - 1);
        let idx: Vec<usize> = (0..n).filter(|&i| i != pos).collect();
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                next[(r, c)] = l[(i, j)] - l[(i, pos)] * l[(pos, j)] / pivot;
            }
        }
        l = next;
        keep.remove(pos);
    }
    l
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Laplacian closure within absolute `tol`: symmetric, zero row sums,
/// nonpositive off-diagonal. Also positive semidefinite with a
/// one-dimensional kernel.
pub fn check_laplacian(l: &DMatrix<f64>, tol: f64) -> Result<(), TestCaseError> {
    let n = l.nrows();
    prop_assert!(max_abs(&(l - l.transpose())) <= tol);
    for i in 0..n {
        let sum = l.row(i).sum();
        prop_assert!(sum.abs() <= tol, "row {} sums to {:e}", i + 1, sum);
        for j in (0..n).filter(|&j| j != i) {
            prop_assert!(l[(i, j)] <= tol, "positive off-diagonal {:e}", l[(i, j)]);
        }
    }
    if n > 1 {
        let scale = max_abs(l);
        let mut eig: Vec<f64> = l
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eig.sort_by(f64::total_cmp);
        prop_assert!(eig[0] >= -1e-10, "eigenvalue {:e}", eig[0]);
        prop_assert!(eig[0].abs() <= 1e-12 * scale * n as f64);
        prop_assert!(
            eig[1] > 1e-9 * scale,
            "kernel dimension exceeds one: {:?}",
            &eig[..2]
        );
    }
    Ok(())
}

pub fn check_schur_residual(c: &Case) -> Result<(), TestCaseError> {
    let red = kron_reduce(&c.resistive(), RTOL).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let oracle = sequential_schur(&c.laplacian(), &c.boundary);
    let scale = max_abs(&oracle).max(1.0);
    prop_assert!(red.schur_residual() <= 1e-10 * scale);
    prop_assert!(max_abs(&(red.laplacian() - &oracle)) <= 1e-9 * scale);
    check_laplacian(red.schur(), 1e-11)?;
    Ok(())
}

pub fn check_scale_invariance(c: &Case, factors: &[f64]) -> Result<(), TestCaseError> {
    let net = c.rl(0.5);
    let scaled = Network::new(
        net.graph().clone(),
        net.partition().clone(),
        net.nu(),
        net.p()
            .iter()
            .zip(factors)
            .map(|(p, &f)| p.scaled(f))
            .collect(),
        net.q()
            .iter()
            .zip(factors)
            .map(|(q, &f)| q.scaled(f))
            .collect(),
    );
    let a = kron_reduce(&net, RTOL).unwrap();
    let b = kron_reduce(&scaled, RTOL).unwrap();
    for (x, y) in a.form().weights.iter().zip(&b.form().weights) {
        prop_assert!((x - y).abs() <= RTOL * x.abs());
    }
    prop_assert_eq!(a.network().graph(), b.network().graph());
    let scale = max_abs(&a.laplacian());
    prop_assert!(max_abs(&(a.laplacian() - b.laplacian())) <= 1e-9 * scale);
    for (x, y) in [(a.p_basis(), b.p_basis()), (a.q_basis(), b.q_basis())] {
        for (u, v) in x.as_slice().iter().zip(y.as_slice()) {
            prop_assert!((u - v).abs() <= RTOL);
        }
    }
    Ok(())
}

pub fn check_relabeling(c: &Case, perm: &[usize]) -> Result<(), TestCaseError> {
    let a = kron_reduce(&c.rl(0.5), RTOL).unwrap();
    let b = kron_reduce(&c.relabeled(perm).rl(0.5), RTOL).unwrap();
    prop_assert_eq!(a.boundary_ids(), b.boundary_ids());
    prop_assert_eq!(a.network().graph(), b.network().graph());
    let scale = max_abs(&a.laplacian());
    prop_assert!(max_abs(&(a.laplacian() - b.laplacian())) <= 1e-10 * scale);
    Ok(())
}

pub fn check_reorientation(c: &Case, flips: &[bool]) -> Result<(), TestCaseError> {
    let net = c.rl(0.5);
    let mut flipped = net.clone();
    for (k, _) in flips.iter().enumerate().filter(|(_, &f)| f) {
        flipped = flipped.with_reversed_edge(k);
    }
    let w = net.homogeneous_form(RTOL).unwrap().weights;
    prop_assert_eq!(
        net.graph().laplacian(&w).unwrap(),
        flipped.graph().laplacian(&w).unwrap()
    );
    let a = kron_reduce(&net, RTOL).unwrap();
    let b = kron_reduce(&flipped, RTOL).unwrap();
    prop_assert_eq!(a.network(), b.network());
    Ok(())
}

pub fn check_sequential_elimination(c: &Case) -> Result<(), TestCaseError> {
    let block = kron_reduce(&c.resistive(), RTOL).unwrap();
    let seq = sequential_schur(&c.laplacian(), &c.boundary);
    let scale = max_abs(&seq).max(1.0);
    prop_assert!(max_abs(&(block.schur() - &seq)) <= 1e-9 * scale);
    Ok(())
}

pub fn check_netlist_round_trip(net: &Network) -> Result<(), TestCaseError> {
    let text = serialize_netlist(net);
    let back: Network = parse_netlist(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&back, net);
    prop_assert_eq!(serialize_netlist(&back), text);
    Ok(())
}

pub const ALL_KINDS: [ElementKind; 7] = [
    ElementKind::Resistor,
    ElementKind::Inductor,
    ElementKind::Capacitor,
    ElementKind::SeriesRl,
    ElementKind::SeriesRc,
    ElementKind::SeriesLc,
    ElementKind::SeriesRlc,
];

/// One `kind` element per edge, values `base` scaled so edge `k` has
/// conductance-like weight `c.weights[k]`: resistances and inductances
/// divided by it, capacitances multiplied.
pub fn homogeneous(c: &Case, kind: ElementKind, base: &[f64]) -> Network {
    let names = kind.value_names();
    let elements: Vec<_> = c
        .weights
        .iter()
        .map(|&w| {
            let values: Vec<f64> = names
                .iter()
                .zip(base)
                .map(|(&n, &b)| if n == "c" { b * w } else { b / w })
                .collect();
            Element::from_values(kind, &values).unwrap()
        })
        .collect();
    Network::from_elements(c.graph(), c.partition(), kind.min_order(), &elements).unwrap()
}

/// Rails `1..6`, `7..12`, rungs `i → i+6`; edge `k` (1-based) is series RL `k·(1, 0.5)`.
pub fn rl_ladder() -> Network {
    let mut edges: Vec<(usize, usize)> = (1..6).map(|i| (i, i + 1)).collect();
    edges.extend((7..12).map(|i| (i, i + 1)));
    edges.extend((1..=6).map(|i| (i, i + 6)));
    let elements: Vec<_> = (1..=edges.len())
        .map(|k| Element::SeriesRl {
            r: k as f64,
            l: 0.5 * k as f64,
        })
        .collect();
    let graph = DirectedGraph::new(12, edges).unwrap();
    let part = VertexPartition::from_boundary(12, [1, 12]).unwrap();
    Network::from_elements(graph, part, 1, &elements).unwrap()
}

pub fn ladder_excitation() -> Excitation<f64> {
    Excitation::new()
        .with_boundary(1, Signal::sin(1.0, TAU, 0.0))
        .with_boundary(12, Signal::zero())
}

pub fn cv(x: &[f64]) -> Coefficients {
    Coefficients::from_slice(x)
}

/// Example 1: a resistor then an inductor in series, `1 → 3 → 2`.
pub fn example1() -> Network {
    let g = DirectedGraph::new(3, [(1, 3), (3, 2)]).unwrap();
    let part = VertexPartition::from_boundary(3, [1, 2]).unwrap();
    Network::new(
        g,
        part,
        1,
        vec![cv(&[1.0, 0.0]), cv(&[0.0, 1.0])],
        vec![cv(&[1.0, 0.0]), cv(&[1.0, 0.0])],
    )
}

/// Example 2: same graph, `p` and `q` families both rank two.
pub fn example2() -> Network {
    let g = DirectedGraph::new(3, [(1, 3), (3, 2)]).unwrap();
    let part = VertexPartition::from_boundary(3, [1, 2]).unwrap();
    Network::new(
        g,
        part,
        1,
        vec![cv(&[0.0, 1.0]), cv(&[1.0, 0.0])],
        vec![cv(&[1.0, 0.0]), cv(&[0.0, 1.0])],
    )
}

/// Five-point central first derivative at interior sample `k`.
pub fn d1(y: &[f64], k: usize, h: f64) -> f64 {
    (-y[k + 2] + 8.0 * y[k + 1] - 8.0 * y[k - 1] + y[k - 2]) / (12.0 * h)
}

/// Laplacian of `edges` with unit-free weights, re-derived through the incidence matrix.
pub fn incidence_laplacian(g: &DirectedGraph, w: &[f64]) -> DMatrix<f64> {
    weighted_laplacian(&g.incidence().unwrap(), w).unwrap()
}
