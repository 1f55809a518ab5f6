//! Time-domain simulation of original and reduced networks.
//!
//! Sign convention: `I_{0}` is the current injected into the network at a
//! vertex, so `I_0 = −B I_1` and the boundary currents satisfy
//!
//! ```text
//! p̃(D) I_{0b} = −S q̃(D) ψ_b − F p̃(D) I_{0i}
//! ```
//!
//! with `S` the Schur complement and `F` the injection map. Every run starts
//! at rest.

mod frequency;
mod ode;
mod signal;
mod trace;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use frequency::{
    edgewise_admittance, frequency_certificate, frequency_response_original,
    frequency_response_reduced, sample_frequencies, FrequencyReport, FrequencySample,
};
pub use ode::{effective_order, solve_lcc_ode, solve_lcc_system, Grid, ORDER_EPS};
pub use signal::Signal;
pub use trace::{compare_traces, Channel, ChannelError, ChannelKind, EquivalenceReport, Trace};

use crate::graph::VertexPartition;
use crate::network::{CoefficientVector, GeneralizedNetwork, NetworkError};
use crate::reduction::{injection_map, kron_reduce, Elimination, ReducedNetwork, ReductionError};
use crate::scalar::Scalar;

/// Minimum steps per period of the fastest excitation sinusoid.
pub const MIN_STEPS_PER_PERIOD: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("ODE coefficients are numerically zero")]
    ZeroCoefficients,
    #[error("initial state has {found} entries, ODE order is {expected}")]
    InitialState { expected: usize, found: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("transient skip {0} leaves no samples to compare")]
    InvalidSkip(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("channel mismatch: {0}")]
    ChannelMismatch(String),
    #[error("boundary vertex {0} has no excitation")]
    MissingExcitation(usize),
    #[error("vertex {vertex}: {reason}")]
    UnexpectedExcitation { vertex: usize, reason: &'static str },
    #[error("injection map is {rows}×{cols}, expected {expected_rows}×{expected_cols}")]
    InjectionDimension {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("s = {re}{im:+}i is a pole: p̃ has a root at {root_re}{root_im:+}i")]
    Pole {
        re: f64,
        im: f64,
        root_re: f64,
        root_im: f64,
    },
    #[error("singular admittance block at s = {re}{im:+}i")]
    SingularAdmittance { re: f64, im: f64 },
    #[error("not a series chain: {0}")]
    NotSeriesChain(String),
}

impl From<NetworkError> for SimulationError {
    fn from(e: NetworkError) -> Self {
        SimulationError::Reduction(e.into())
    }
}

/// Boundary potentials and internal current injections, keyed by vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation<T> {
    pub boundary: BTreeMap<usize, Signal<T>>,
    pub injections: BTreeMap<usize, Signal<T>>,
}

impl<T> Default for Excitation<T> {
    fn default() -> Self {
        Self {
            boundary: BTreeMap::new(),
            injections: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> Excitation<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every boundary vertex driven by the zero signal.
    pub fn at_rest(partition: &VertexPartition) -> Self {
        Self {
            boundary: partition
                .boundary()
                .iter()
                .map(|&v| (v, Signal::zero()))
                .collect(),
            injections: BTreeMap::new(),
        }
    }

    pub fn with_boundary(mut self, vertex: usize, signal: Signal<T>) -> Self {
        self.boundary.insert(vertex, signal);
        self
    }

    pub fn with_injection(mut self, vertex: usize, signal: Signal<T>) -> Self {
        self.injections.insert(vertex, signal);
        self
    }

    pub fn has_injections(&self) -> bool {
        !self.injections.is_empty()
    }

    /// Every boundary vertex needs a potential; injections only at internal
    /// vertices.
    pub fn check(&self, partition: &VertexPartition) -> Result<(), SimulationError> {
        let n = partition.vertex_count();
        for &v in self.boundary.keys() {
            if v == 0 || v > n {
                return Err(SimulationError::UnexpectedExcitation {
                    vertex: v,
                    reason: "no such vertex",
                });
            }
            if !partition.is_boundary(v) {
                return Err(SimulationError::UnexpectedExcitation {
                    vertex: v,
                    reason: "potential prescribed at an internal vertex",
                });
            }
        }
        for &v in self.injections.keys() {
            if v == 0 || v > n {
                return Err(SimulationError::UnexpectedExcitation {
                    vertex: v,
                    reason: "no such vertex",
                });
            }
            if partition.is_boundary(v) {
                return Err(SimulationError::UnexpectedExcitation {
                    vertex: v,
                    reason: "injection at a boundary vertex",
                });
            }
        }
        if let Some(&v) = partition
            .boundary()
            .iter()
            .find(|v| !self.boundary.contains_key(v))
        {
            return Err(SimulationError::MissingExcitation(v));
        }
        Ok(())
    }

    /// Boundary signals in the order of `ids`.
    fn boundary_signals(&self, ids: &[usize]) -> Result<Vec<&Signal<T>>, SimulationError> {
        ids.iter()
            .map(|v| {
                self.boundary
                    .get(v)
                    .ok_or(SimulationError::MissingExcitation(*v))
            })
            .collect()
    }

    /// Injection signals in the order of `ids`, zero where absent.
    fn injection_signals(&self, ids: &[usize]) -> Vec<Signal<T>> {
        ids.iter()
            .map(|v| self.injections.get(v).cloned().unwrap_or_else(Signal::zero))
            .collect()
    }

    /// `α·self`.
    pub fn scaled(&self, alpha: T) -> Self {
        let scale = |m: &BTreeMap<usize, Signal<T>>| {
            m.iter()
                .map(|(&v, s)| (v, s.clone().scaled(alpha)))
                .collect()
        };
        Self {
            boundary: scale(&self.boundary),
            injections: scale(&self.injections),
        }
    }

    /// Vertexwise sum of two excitations.
    pub fn superpose(&self, other: &Self) -> Self {
        let add = |a: &BTreeMap<usize, Signal<T>>, b: &BTreeMap<usize, Signal<T>>| {
            let mut out = a.clone();
            for (&v, s) in b {
                let merged = match out.remove(&v) {
                    Some(prev) => Signal::Sum {
                        terms: vec![prev, s.clone()],
                    },
                    None => s.clone(),
                };
                out.insert(v, merged);
            }
            out
        };
        Self {
            boundary: add(&self.boundary, &other.boundary),
            injections: add(&self.injections, &other.injections),
        }
    }

    pub fn max_angular_frequency(&self) -> Option<T> {
        self.boundary
            .values()
            .chain(self.injections.values())
            .filter_map(Signal::max_angular_frequency)
            .reduce(|a, b| a.max(b))
    }
}

/// Traces produced by one simulation run.
#[derive(Debug, Clone)]
pub struct SimulationOutput<T: Scalar> {
    /// `I_{0b}`, one channel per boundary vertex id.
    pub boundary_currents: Trace<T>,
    /// `ψ_i`, one channel per internal vertex id (original path only).
    pub internal_potentials: Option<Trace<T>>,
    /// `Î₁`, one channel per reduced edge (reduced path only).
    pub edge_currents: Option<Trace<T>>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> SimulationOutput<T> {
    /// Boundary currents followed by internal potentials, when present.
    pub fn combined(&self) -> Result<Trace<T>, SimulationError> {
        match &self.internal_potentials {
            Some(p) => self.boundary_currents.join(p),
            None => Ok(self.boundary_currents.clone()),
        }
    }
}

/// Transient window excluded before comparing traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransientSkip<T> {
    /// Ten times the slowest time constant of `p̃`, capped at a fifth of the horizon.
    Auto,
    Fixed(T),
}

impl<T: Scalar> TransientSkip<T> {
    pub fn resolve(self, p_basis: &CoefficientVector<T>, grid: &Grid<T>) -> T {
        match self {
            TransientSkip::Auto => auto_transient_skip(p_basis, grid),
            TransientSkip::Fixed(s) => s,
        }
    }
}

pub fn auto_transient_skip<T: Scalar>(p_basis: &CoefficientVector<T>, grid: &Grid<T>) -> T {
    let cap = grid.horizon() * T::lit(0.2);
    let roots = p_basis.roots();
    if roots.is_empty() {
        return T::zero();
    }
    let tiny = T::tol(1e-12, 16.0);
    let mut slowest = T::zero();
    for r in roots {
        if r.re >= -tiny {
            return cap;
        }
        slowest = slowest.max(T::one() / -r.re);
    }
    (slowest * T::lit(10.0)).min(cap)
}

/// `Σ_j c_j s⁽ʲ⁾(t)`.
fn apply<T: Scalar>(coeffs: &[T], signal: &Signal<T>, t: T) -> T {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(T::zero(), |acc, (j, &c)| acc + c * signal.derivative(j, t))
}

fn grid_warnings<T: Scalar>(exc: &Excitation<T>, grid: &Grid<T>) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(omega) = exc.max_angular_frequency() {
        let per_period = (T::two_pi() / omega / grid.dt).as_f64();
        if per_period < MIN_STEPS_PER_PERIOD {
            out.push(format!(
                "grid too coarse: {per_period:.1} steps per period of the fastest sinusoid \
                 (ω = {}), need at least {MIN_STEPS_PER_PERIOD}",
                omega.as_f64()
            ));
        }
    }
    out
}

fn boundary_channels(ids: &[usize]) -> Vec<Channel> {
    ids.iter().map(|&v| Channel::boundary_current(v)).collect()
}

/// Boundary currents and internal potentials of a homogeneous network, from
/// the Schur complement of its own Laplacian blocks.
pub fn simulate_original<T: Scalar>(
    net: &GeneralizedNetwork<T>,
    exc: &Excitation<T>,
    grid: &Grid<T>,
    rtol: T,
) -> Result<SimulationOutput<T>, SimulationError> {
    grid.check()?;
    let partition = net.partition();
    exc.check(partition)?;
    let form = net.homogeneous_form(rtol)?;
    let laplacian = net
        .graph()
        .laplacian(&form.weights)
        .map_err(ReductionError::from)?;
    let elim = Elimination::new(&laplacian, partition)?;
    let (bids, iids) = (partition.boundary(), partition.internal());
    let (nb, ni) = (bids.len(), iids.len());

    let psi = exc.boundary_signals(bids)?;
    let inj = exc.injection_signals(iids);
    let injecting = exc.has_injections();
    let (p, q) = (form.p_basis.as_slice(), form.q_basis.as_slice());
    let f_map = elim.injection_map();
    let ii_inverse = if injecting && ni > 0 {
        elim.solve_internal(&DMatrix::identity(ni, ni))
    } else {
        DMatrix::zeros(ni, ni)
    };

    let u_b = |t: T| DVector::from_iterator(nb, psi.iter().map(|s| apply(q, s, t)));
    let g_i = |t: T| DVector::from_iterator(ni, inj.iter().map(|s| apply(p, s, t)));

    let currents = solve_lcc_system(
        &form.p_basis,
        nb,
        |t, out| {
            let mut f = -(&elim.schur * u_b(t));
            if injecting {
                f -= &f_map * g_i(t);
            }
            out.copy_from_slice(f.as_slice());
        },
        grid,
    )?;
    let boundary_currents = Trace::on_grid(grid, boundary_channels(bids), currents)?;

    let internal_potentials = if ni > 0 {
        let potentials = solve_lcc_system(
            &form.q_basis,
            ni,
            |t, out| {
                let mut w = &elim.potential_map * u_b(t);
                if injecting {
                    w -= &ii_inverse * g_i(t);
                }
                out.copy_from_slice(w.as_slice());
            },
            grid,
        )?;
        let channels = iids
            .iter()
            .map(|&v| Channel::internal_potential(v))
            .collect();
        Some(Trace::on_grid(grid, channels, potentials)?)
    } else {
        None
    };

    Ok(SimulationOutput {
        boundary_currents,
        internal_potentials,
        edge_currents: None,
        warnings: grid_warnings(exc, grid),
    })
}

/// Boundary currents of a reduced network, solved edge by edge from the
/// reduced edge voltages.
pub fn simulate_reduced<T: Scalar>(
    red: &ReducedNetwork<T>,
    exc: &Excitation<T>,
    grid: &Grid<T>,
) -> Result<SimulationOutput<T>, SimulationError> {
    if let Some(&v) = exc.injections.keys().next() {
        return Err(SimulationError::UnexpectedExcitation {
            vertex: v,
            reason: "reduced network carries injections only through the injection map",
        });
    }
    simulate_reduced_inner(red, exc, None, grid)
}

fn simulate_reduced_inner<T: Scalar>(
    red: &ReducedNetwork<T>,
    exc: &Excitation<T>,
    injection: Option<(&DMatrix<T>, Vec<Signal<T>>)>,
    grid: &Grid<T>,
) -> Result<SimulationOutput<T>, SimulationError> {
    grid.check()?;
    let ids = red.boundary_ids();
    let rnet = red.network();
    for &v in exc.boundary.keys() {
        if !ids.contains(&v) {
            return Err(SimulationError::UnexpectedExcitation {
                vertex: v,
                reason: "not a boundary vertex of the reduced network",
            });
        }
    }
    let psi = exc.boundary_signals(ids)?;
    let edges = rnet.graph().edges();
    let voltages: Vec<Signal<T>> = edges
        .iter()
        .map(|e| {
            Signal::linear_combination(&[(T::one(), psi[e.head - 1]), (-T::one(), psi[e.tail - 1])])
        })
        .collect();

    // Edges sharing a p̂ are integrated together.
    let mut groups: Vec<(&CoefficientVector<T>, Vec<usize>)> = Vec::new();
    for (k, pk) in rnet.p().iter().enumerate() {
        match groups.iter_mut().find(|(p, _)| *p == pk) {
            Some((_, members)) => members.push(k),
            None => groups.push((pk, vec![k])),
        }
    }
    let n = grid.sample_count();
    let mut edge_currents = DMatrix::zeros(n, edges.len());
    for (pk, members) in &groups {
        let sol = solve_lcc_system(
            pk,
            members.len(),
            |t, out| {
                for (slot, &k) in out.iter_mut().zip(members) {
                    *slot = apply(rnet.q()[k].as_slice(), &voltages[k], t);
                }
            },
            grid,
        )?;
        for (c, &k) in members.iter().enumerate() {
            edge_currents.set_column(k, &sol.column(c));
        }
    }

    // I_{0b} = −B̂ Î₁.
    let b = red.incidence().to_scalar::<T>();
    let mut currents = -(&edge_currents * b.transpose());

    if let Some((f_map, signals)) = injection {
        let p = red.p_basis().as_slice();
        let mapped = solve_lcc_system(
            red.p_basis(),
            ids.len(),
            |t, out| {
                let g =
                    DVector::from_iterator(signals.len(), signals.iter().map(|s| apply(p, s, t)));
                out.copy_from_slice((f_map * g).as_slice());
            },
            grid,
        )?;
        currents -= mapped;
    }

    let edge_channels = (1..=edges.len()).map(Channel::edge_current).collect();
    Ok(SimulationOutput {
        boundary_currents: Trace::on_grid(grid, boundary_channels(ids), currents)?,
        internal_potentials: None,
        edge_currents: Some(Trace::on_grid(grid, edge_channels, edge_currents)?),
        warnings: grid_warnings(exc, grid),
    })
}

/// Original and reduced runs of one scenario with their comparison.
#[derive(Debug, Clone)]
pub struct EquivalenceRun<T: Scalar> {
    pub report: EquivalenceReport,
    pub original: SimulationOutput<T>,
    pub reduced: SimulationOutput<T>,
}

/// Original network with internal injections against the reduced network
/// driven by the same boundary potentials plus `F·I_{0i}` at the boundary.
#[allow(clippy::too_many_arguments)]
pub fn simulate_with_injection<T: Scalar>(
    net: &GeneralizedNetwork<T>,
    exc: &Excitation<T>,
    red: &ReducedNetwork<T>,
    f_map: &DMatrix<T>,
    grid: &Grid<T>,
    tol: f64,
    skip: TransientSkip<T>,
    rtol: T,
) -> Result<EquivalenceRun<T>, SimulationError> {
    let iids = net.partition().internal();
    let (er, ec) = (red.boundary_ids().len(), iids.len());
    if f_map.nrows() != er || f_map.ncols() != ec {
        return Err(SimulationError::InjectionDimension {
            rows: f_map.nrows(),
            cols: f_map.ncols(),
            expected_rows: er,
            expected_cols: ec,
        });
    }
    let original = simulate_original(net, exc, grid, rtol)?;
    let reduced =
        simulate_reduced_inner(red, exc, Some((f_map, exc.injection_signals(iids))), grid)?;
    finish(original, reduced, red.p_basis(), grid, tol, skip)
}

/// Reduces `net`, simulates both paths and compares boundary currents.
pub fn compare_equivalence<T: Scalar>(
    net: &GeneralizedNetwork<T>,
    exc: &Excitation<T>,
    grid: &Grid<T>,
    tol: f64,
    skip: TransientSkip<T>,
    rtol: T,
) -> Result<EquivalenceRun<T>, SimulationError> {
    exc.check(net.partition())?;
    let red = kron_reduce(net, rtol)?;
    if exc.has_injections() {
        let f_map = injection_map(net, rtol)?;
        return simulate_with_injection(net, exc, &red, &f_map, grid, tol, skip, rtol);
    }
    let original = simulate_original(net, exc, grid, rtol)?;
    let reduced = simulate_reduced(&red, exc, grid)?;
    finish(original, reduced, red.p_basis(), grid, tol, skip)
}

fn finish<T: Scalar>(
    original: SimulationOutput<T>,
    reduced: SimulationOutput<T>,
    p_basis: &CoefficientVector<T>,
    grid: &Grid<T>,
    tol: f64,
    skip: TransientSkip<T>,
) -> Result<EquivalenceRun<T>, SimulationError> {
    let skip = skip.resolve(p_basis, grid);
    let mut report = compare_traces(
        &original.boundary_currents,
        &reduced.boundary_currents,
        tol,
        skip,
    )?;
    report.warnings = original.warnings.clone();
    Ok(EquivalenceRun {
        report,
        original,
        reduced,
    })
}

fn poly_mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

/// Boundary currents of a two-terminal series chain by direct elimination,
/// for any coefficient families.
///
/// With `i` the chain current from the lower-id terminal `a` to `b`:
/// `(Σ_k p_k Π_{j≠k} q_j)(D) i = (Π_j q_j)(D)(ψ_b − ψ_a)`, `I_{0a} = i`,
/// `I_{0b} = −i`.
pub fn simulate_series_chain<T: Scalar>(
    net: &GeneralizedNetwork<T>,
    exc: &Excitation<T>,
    grid: &Grid<T>,
) -> Result<SimulationOutput<T>, SimulationError> {
    grid.check()?;
    let partition = net.partition();
    exc.check(partition)?;
    if exc.has_injections() {
        return Err(SimulationError::NotSeriesChain(
            "internal injections are not supported".into(),
        ));
    }
    let bids = partition.boundary();
    if bids.len() != 2 {
        return Err(SimulationError::NotSeriesChain(format!(
            "{} boundary vertices, need 2",
            bids.len()
        )));
    }
    let graph = net.graph();
    let n = graph.vertex_count();
    if graph.edge_count() + 1 != n || !graph.is_connected() {
        return Err(SimulationError::NotSeriesChain(
            "graph is not a simple path".into(),
        ));
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (k, e) in graph.edges().iter().enumerate() {
        incident[e.tail].push(k);
        incident[e.head].push(k);
    }
    let (a, b) = (bids[0], bids[1]);
    for (v, edges) in incident.iter().enumerate().skip(1) {
        let want = if v == a || v == b { 1 } else { 2 };
        if edges.len() != want {
            return Err(SimulationError::NotSeriesChain(format!(
                "vertex {v} has degree {}",
                edges.len()
            )));
        }
    }

    // Walk a → b; every edge enters the sums the same way whatever its
    // orientation.
    let mut order = Vec::with_capacity(graph.edge_count());
    let (mut v, mut prev) = (a, usize::MAX);
    while v != b {
        let k = *incident[v]
            .iter()
            .find(|&&k| k != prev)
            .expect("path vertex has an onward edge");
        let e = graph.edges()[k];
        v = if e.tail == v { e.head } else { e.tail };
        prev = k;
        order.push(k);
    }

    let (p, q) = (net.p(), net.q());
    let mut num = vec![T::zero()];
    for &k in &order {
        let mut term = p[k].as_slice().to_vec();
        for &j in order.iter().filter(|&&j| j != k) {
            term = poly_mul(&term, q[j].as_slice());
        }
        num = poly_add(&num, &term);
    }
    let rhs = order
        .iter()
        .fold(vec![T::one()], |acc, &j| poly_mul(&acc, q[j].as_slice()));

    let drop = Signal::linear_combination(&[
        (T::one(), &exc.boundary[&b]),
        (-T::one(), &exc.boundary[&a]),
    ]);
    let chain = CoefficientVector::new(num);
    let i = solve_lcc_ode(&chain, |t| apply(&rhs, &drop, t), &[], grid)?;
    let samples = DMatrix::from_fn(i.len(), 2, |k, c| if c == 0 { i[k] } else { -i[k] });
    Ok(SimulationOutput {
        boundary_currents: Trace::on_grid(grid, boundary_channels(bids), samples)?,
        internal_potentials: None,
        edge_currents: None,
        warnings: grid_warnings(exc, grid),
    })
}
