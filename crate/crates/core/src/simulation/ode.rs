//! Fixed-step integration of `Σ_j c_j y⁽ʲ⁾ = f(t)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::SimulationError;
use crate::network::CoefficientVector;
use crate::scalar::Scalar;

/// Leading coefficients below this fraction of the largest are dropped.
pub const ORDER_EPS: f64 = 1e-12;

/// Uniform time grid `t0, t0 + dt, …, t0 + n·dt` with `n = round((t_end − t0)/dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub t0: T,
    pub t_end: T,
    pub dt: T,
}

impl<T: Scalar> Grid<T> {
    pub fn new(t0: T, t_end: T, dt: T) -> Result<Self, SimulationError> {
        let grid = Self { t0, t_end, dt };
        grid.check()?;
        Ok(grid)
    }

    /// Grid with `steps` steps over `[t0, t_end]`.
    pub fn with_steps(t0: T, t_end: T, steps: usize) -> Result<Self, SimulationError> {
        Self::new(t0, t_end, (t_end - t0) / T::lit(steps.max(1) as f64))
    }

    pub fn check(&self) -> Result<(), SimulationError> {
        let finite = self.t0.is_finite() && self.t_end.is_finite() && self.dt.is_finite();
        if !finite {
            return Err(SimulationError::InvalidGrid("non-finite grid value".into()));
        }
        if !(self.dt > T::zero()) {
            return Err(SimulationError::InvalidGrid(format!(
                "dt must be positive, got {}",
                self.dt.as_f64()
            )));
        }
        if !(self.t_end > self.t0) {
            return Err(SimulationError::InvalidGrid(format!(
                "t_end ({}) must exceed t0 ({})",
                self.t_end.as_f64(),
                self.t0.as_f64()
            )));
        }
        if self.dt > (self.t_end - self.t0) * (T::one() + T::default_epsilon() * T::lit(4.0)) {
            return Err(SimulationError::InvalidGrid(
                "dt longer than the horizon".into(),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.t_end - self.t0) / self.dt).as_f64().round().max(0.0) as usize
    }

    pub fn sample_count(&self) -> usize {
        self.steps() + 1
    }

    #[inline]
    pub fn time(&self, k: usize) -> T {
        self.t0 + self.dt * T::lit(k as f64)
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.sample_count()).map(|k| self.time(k))
    }

    pub fn horizon(&self) -> T {
        self.dt * T::lit(self.steps() as f64)
    }
}

/// Effective order `m` of `coeffs`, or an error when all are negligible.
pub fn effective_order<T: Scalar>(coeffs: &CoefficientVector<T>) -> Result<usize, SimulationError> {
    coeffs
        .effective_order(T::tol(ORDER_EPS, 4.0))
        .ok_or(SimulationError::ZeroCoefficients)
}

/// Solves one scalar ODE; `initial` holds `y, y', …, y⁽ᵐ⁻¹⁾` at `t0`, or is
/// empty for a start at rest.
pub fn solve_lcc_ode<T, F>(
    coeffs: &CoefficientVector<T>,
    forcing: F,
    initial: &[T],
    grid: &Grid<T>,
) -> Result<Vec<T>, SimulationError>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let m = effective_order(coeffs)?;
    if !initial.is_empty() && initial.len() != m {
        return Err(SimulationError::InitialState {
            expected: m,
            found: initial.len(),
        });
    }
    let out = integrate(coeffs, 1, |t, f| f[0] = forcing(t), initial, grid)?;
    Ok(out.column(0).iter().copied().collect())
}

/// Solves `channels` independent ODEs sharing `coeffs`, all starting at rest.
/// `forcing(t, out)` writes one value per channel. Returns samples × channels.
pub fn solve_lcc_system<T, F>(
    coeffs: &CoefficientVector<T>,
    channels: usize,
    forcing: F,
    grid: &Grid<T>,
) -> Result<DMatrix<T>, SimulationError>
where
    T: Scalar,
    F: FnMut(T, &mut [T]),
{
    integrate(coeffs, channels, forcing, &[], grid)
}

fn integrate<T, F>(
    coeffs: &CoefficientVector<T>,
    ch: usize,
    mut forcing: F,
    initial: &[T],
    grid: &Grid<T>,
) -> Result<DMatrix<T>, SimulationError>
where
    T: Scalar,
    F: FnMut(T, &mut [T]),
{
    grid.check()?;
    let m = effective_order(coeffs)?;
    let c = coeffs.as_slice();
    let n = grid.sample_count();
    let mut out = DMatrix::zeros(n, ch);
    let mut f0 = vec![T::zero(); ch];

    if m == 0 {
        for k in 0..n {
            forcing(grid.time(k), &mut f0);
            for j in 0..ch {
                out[(k, j)] = f0[j] / c[0];
            }
        }
        return Ok(out);
    }

    // state[i * ch + j] = i-th derivative of channel j.
    let mut state = vec![T::zero(); m * ch];
    if !initial.is_empty() {
        for (i, &v) in initial.iter().enumerate() {
            state[i * ch..(i + 1) * ch].fill(v);
        }
    }
    let lead = c[m];
    let rhs = |x: &[T], f: &[T], dx: &mut [T]| {
        dx[..(m - 1) * ch].copy_from_slice(&x[ch..]);
        for j in 0..ch {
            let mut acc = f[j];
            for i in 0..m {
                acc -= c[i] * x[i * ch + j];
            }
            dx[(m - 1) * ch + j] = acc / lead;
        }
    };

    let h = grid.dt;
    let half = h * T::lit(0.5);
    let sixth = h / T::lit(6.0);
    let len = state.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![T::zero(); len],
        vec![T::zero(); len],
        vec![T::zero(); len],
        vec![T::zero(); len],
        vec![T::zero(); len],
    );
    let mut fmid = vec![T::zero(); ch];
    let mut f1 = vec![T::zero(); ch];

    forcing(grid.time(0), &mut f0);
    for j in 0..ch {
        out[(0, j)] = state[j];
    }
    for k in 1..n {
        let t = grid.time(k - 1);
        forcing(t + half, &mut fmid);
        forcing(grid.time(k), &mut f1);

        rhs(&state, &f0, &mut k1);
        axpy(&state, half, &k1, &mut tmp);
        rhs(&tmp, &fmid, &mut k2);
        axpy(&state, half, &k2, &mut tmp);
        rhs(&tmp, &fmid, &mut k3);
        axpy(&state, h, &k3, &mut tmp);
        rhs(&tmp, &f1, &mut k4);
        for i in 0..len {
            state[i] += sixth * (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]);
        }
        for j in 0..ch {
            out[(k, j)] = state[j];
        }
        std::mem::swap(&mut f0, &mut f1);
    }
    Ok(out)
}

#[inline]
fn axpy<T: Scalar>(x: &[T], a: T, y: &[T], out: &mut [T]) {
    for ((o, &xi), &yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}
