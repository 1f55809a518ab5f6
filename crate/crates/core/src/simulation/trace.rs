use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use super::ode::Grid;
use super::SimulationError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// Current injected at a boundary vertex.
    BoundaryCurrent,
    /// Potential of an internal vertex.
    InternalPotential,
    /// Current through an edge, tail to head.
    EdgeCurrent,
}

/// What a trace column holds: a quantity and the vertex or edge id (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Channel {
    pub kind: ChannelKind,
    pub id: usize,
}

impl Channel {
    pub fn boundary_current(vertex: usize) -> Self {
        Self {
            kind: ChannelKind::BoundaryCurrent,
            id: vertex,
        }
    }

    pub fn internal_potential(vertex: usize) -> Self {
        Self {
            kind: ChannelKind::InternalPotential,
            id: vertex,
        }
    }

    pub fn edge_current(edge: usize) -> Self {
        Self {
            kind: ChannelKind::EdgeCurrent,
            id: edge,
        }
    }

    /// Column header: `I0b_<vid>`, `psi0i_<vid>` or `I1_<eid>`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.kind {
            ChannelKind::BoundaryCurrent => "I0b",
            ChannelKind::InternalPotential => "psi0i",
            ChannelKind::EdgeCurrent => "I1",
        };
        write!(f, "{prefix}_{}", self.id)
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (prefix, id) = s
            .rsplit_once('_')
            .ok_or_else(|| format!("channel label `{s}` has no `_<id>` suffix"))?;
        let id: usize = id
            .parse()
            .map_err(|_| format!("channel label `{s}` has a non-numeric id"))?;
        let kind = match prefix {
            "I0b" => ChannelKind::BoundaryCurrent,
            "psi0i" => ChannelKind::InternalPotential,
            "I1" => ChannelKind::EdgeCurrent,
            _ => return Err(format!("unknown channel prefix in `{s}`")),
        };
        Ok(Self { kind, id })
    }
}

/// Uniformly sampled multichannel signal. Row `k` is time `t0 + k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T: Scalar> {
    t0: T,
    dt: T,
    channels: Vec<Channel>,
    samples: DMatrix<T>,
}

impl<T: Scalar> Trace<T> {
    pub fn new(
        t0: T,
        dt: T,
        channels: Vec<Channel>,
        samples: DMatrix<T>,
    ) -> Result<Self, SimulationError> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(SimulationError::InvalidGrid(format!(
                "trace dt must be positive, got {}",
                dt.as_f64()
            )));
        }
        if samples.nrows() < 2 {
            return Err(SimulationError::InvalidGrid(format!(
                "trace needs at least 2 samples, got {}",
                samples.nrows()
            )));
        }
        if samples.ncols() != channels.len() {
            return Err(SimulationError::ChannelMismatch(format!(
                "{} channel labels for {} columns",
                channels.len(),
                samples.ncols()
            )));
        }
        Ok(Self {
            t0,
            dt,
            channels,
            samples,
        })
    }

    pub fn on_grid(
        grid: &Grid<T>,
        channels: Vec<Channel>,
        samples: DMatrix<T>,
    ) -> Result<Self, SimulationError> {
        Self::new(grid.t0, grid.dt, channels, samples)
    }

    #[inline]
    pub fn t0(&self) -> T {
        self.t0
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.dt
    }

    #[inline]
    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Samples × channels.
    #[inline]
    pub fn samples(&self) -> &DMatrix<T> {
        &self.samples
    }

    #[inline]
    pub fn sample_count(&self) -> usize {
        self.samples.nrows()
    }

    #[inline]
    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    #[inline]
    pub fn time(&self, k: usize) -> T {
        self.t0 + self.dt * T::lit(k as f64)
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.sample_count()).map(|k| self.time(k)).collect()
    }

    pub fn position(&self, channel: Channel) -> Option<usize> {
        self.channels.iter().position(|&c| c == channel)
    }

    /// Samples of one channel.
    pub fn column(&self, channel: Channel) -> Option<Vec<T>> {
        self.position(channel)
            .map(|j| self.samples.column(j).iter().copied().collect())
    }

    /// Side-by-side concatenation of two traces on the same grid.
    pub fn join(&self, other: &Trace<T>) -> Result<Self, SimulationError> {
        same_grid(self, other)?;
        let (n, a, b) = (
            self.sample_count(),
            self.channel_count(),
            other.channel_count(),
        );
        let samples = DMatrix::from_fn(n, a + b, |k, j| {
            if j < a {
                self.samples[(k, j)]
            } else {
                other.samples[(k, j - a)]
            }
        });
        let mut channels = self.channels.clone();
        channels.extend_from_slice(&other.channels);
        Self::new(self.t0, self.dt, channels, samples)
    }

    /// Traces built from the same grid compare exactly; this allows last-bit
    /// differences from independent grid arithmetic.
    fn grid_matches(&self, other: &Trace<T>) -> bool {
        let close =
            |a: T, b: T| (a - b).abs() <= T::tol(1e-12, 8.0) * T::one().max(a.abs()).max(b.abs());
        close(self.t0, other.t0)
            && close(self.dt, other.dt)
            && self.sample_count() == other.sample_count()
    }
}

fn same_grid<T: Scalar>(a: &Trace<T>, b: &Trace<T>) -> Result<(), SimulationError> {
    if a.grid_matches(b) {
        Ok(())
    } else {
        Err(SimulationError::GridMismatch(format!(
            "(t0={}, dt={}, n={}) vs (t0={}, dt={}, n={})",
            a.t0.as_f64(),
            a.dt.as_f64(),
            a.sample_count(),
            b.t0.as_f64(),
            b.dt.as_f64(),
            b.sample_count()
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelError {
    pub channel: String,
    pub max_abs_error: f64,
    pub rms_error: f64,
}

/// Outcome of [`compare_traces`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub passed: bool,
    pub tolerance: f64,
    pub max_abs_error: f64,
    pub rms_error: f64,
    /// Largest magnitude in the reference trace over the window.
    pub reference_peak: f64,
    /// Transient window excluded from the comparison, in time units.
    pub skip: f64,
    pub window_start: f64,
    pub samples_compared: usize,
    pub channels: Vec<ChannelError>,
    pub warnings: Vec<String>,
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: max abs error {:.3e} (tol {:.1e}), rms {:.3e}, window [{}, end], {} samples",
            if self.passed { "PASS" } else { "FAIL" },
            self.max_abs_error,
            self.tolerance,
            self.rms_error,
            self.window_start,
            self.samples_compared
        )?;
        for c in &self.channels {
            writeln!(
                f,
                "  {:<12} max {:.3e}  rms {:.3e}",
                c.channel, c.max_abs_error, c.rms_error
            )?;
        }
        for w in &self.warnings {
            writeln!(f, "  warning: {w}")?;
        }
        Ok(())
    }
}

/// Compares `b` against the reference `a` over `[t0 + skip, t_end]`.
pub fn compare_traces<T: Scalar>(
    a: &Trace<T>,
    b: &Trace<T>,
    tol: f64,
    skip: T,
) -> Result<EquivalenceReport, SimulationError> {
    same_grid(a, b)?;
    if a.channels != b.channels {
        return Err(SimulationError::ChannelMismatch(format!(
            "[{}] vs [{}]",
            labels(a),
            labels(b)
        )));
    }
    if !(skip >= T::zero()) {
        return Err(SimulationError::InvalidSkip(skip.as_f64()));
    }
    // First sample at or after t0 + skip, forgiving rounding in skip/dt.
    let start = ((skip / a.dt).as_f64() - 1e-9).ceil().max(0.0) as usize;
    let n = a.sample_count();
    if start >= n {
        return Err(SimulationError::InvalidSkip(skip.as_f64()));
    }
    let count = n - start;
    let mut channels = Vec::with_capacity(a.channel_count());
    let (mut max_all, mut sq_all, mut peak) = (0.0f64, 0.0f64, 0.0f64);
    for (j, ch) in a.channels.iter().enumerate() {
        let (mut max, mut sq) = (0.0f64, 0.0f64);
        for k in start..n {
            let (x, y) = (a.samples[(k, j)].as_f64(), b.samples[(k, j)].as_f64());
            let e = (x - y).abs();
            // NaN must not pass.
            max = if e.is_nan() || max.is_nan() {
                f64::NAN
            } else {
                max.max(e)
            };
            sq += e * e;
            peak = peak.max(x.abs());
        }
        max_all = if max.is_nan() || max_all.is_nan() {
            f64::NAN
        } else {
            max_all.max(max)
        };
        sq_all += sq;
        channels.push(ChannelError {
            channel: ch.label(),
            max_abs_error: max,
            rms_error: (sq / count as f64).sqrt(),
        });
    }
    let total = (count * a.channel_count()).max(1) as f64;
    Ok(EquivalenceReport {
        passed: max_all <= tol,
        tolerance: tol,
        max_abs_error: max_all,
        rms_error: (sq_all / total).sqrt(),
        reference_peak: peak,
        skip: skip.as_f64(),
        window_start: a.time(start).as_f64(),
        samples_compared: count,
        channels,
        warnings: Vec::new(),
    })
}

fn labels<T: Scalar>(t: &Trace<T>) -> String {
    t.channels
        .iter()
        .map(Channel::label)
        .collect::<Vec<_>>()
        .join(", ")
}
