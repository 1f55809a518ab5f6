//! Boundary admittance `Y(s)` with `I_{0b} = −Y(s) ψ_b` under `d/dt → s`.

use nalgebra::{Complex, ComplexField, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::SimulationError;
use crate::network::{CoefficientVector, GeneralizedNetwork};
use crate::reduction::{schur_complement, ReducedNetwork, ReductionError};
use crate::scalar::Scalar;

/// Annulus the certificate samples from.
pub const SAMPLE_RADIUS: (f64, f64) = (0.1, 10.0);
/// Radius of the excluded disk around each root of `p̃` and `q̃`.
pub const ROOT_EXCLUSION: f64 = 1e-3;

/// `p(s)`, or a pole error naming the nearest root when `p(s)` vanishes to
/// working precision.
fn eval_nonzero<T: Scalar>(
    p: &CoefficientVector<T>,
    s: Complex<T>,
) -> Result<Complex<T>, SimulationError> {
    let value = p.eval(s);
    let r = ComplexField::modulus(s);
    let scale = p
        .as_slice()
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * r + c.abs());
    if ComplexField::modulus(value) <= scale * T::default_epsilon() * T::lit(64.0) {
        let root = p
            .roots()
            .into_iter()
            .min_by(|a, b| {
                let (da, db) = (ComplexField::modulus(*a - s), ComplexField::modulus(*b - s));
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(s);
        return Err(SimulationError::Pole {
            re: s.re.as_f64(),
            im: s.im.as_f64(),
            root_re: root.re.as_f64(),
            root_im: root.im.as_f64(),
        });
    }
    Ok(value)
}

fn scaled<T: Scalar>(m: &DMatrix<T>, factor: Complex<T>) -> DMatrix<Complex<T>> {
    m.map(|x| factor * Complex::new(x, T::zero()))
}

/// `(q̃(s)/p̃(s)) · S` with `S` the Schur complement of the Γ-Laplacian.
pub fn frequency_response_original<T: Scalar>(
    net: &GeneralizedNetwork<T>,
    s: Complex<T>,
    rtol: T,
) -> Result<DMatrix<Complex<T>>, SimulationError> {
    let form = net.homogeneous_form(rtol)?;
    let factor = form.q_basis.eval(s) / eval_nonzero(&form.p_basis, s)?;
    let laplacian = net
        .graph()
        .laplacian(&form.weights)
        .map_err(ReductionError::from)?;
    let schur = schur_complement(&laplacian, net.partition())?;
    Ok(scaled(&schur, factor))
}

/// `(q̃(s)/p̃(s)) · B̂Γ̂B̂ᵀ`.
pub fn frequency_response_reduced<T: Scalar>(
    red: &ReducedNetwork<T>,
    s: Complex<T>,
) -> Result<DMatrix<Complex<T>>, SimulationError> {
    let factor = red.q_basis().eval(s) / eval_nonzero(red.p_basis(), s)?;
    Ok(scaled(&red.laplacian(), factor))
}

/// Admittance from the complex Laplacian `B diag(q_k(s)/p_k(s)) Bᵀ` with the
/// internal vertices eliminated by LU. Needs no homogeneity.
pub fn edgewise_admittance<T: Scalar>(
    net: &GeneralizedNetwork<T>,
    s: Complex<T>,
) -> Result<DMatrix<Complex<T>>, SimulationError> {
    let graph = net.graph();
    let n = graph.vertex_count();
    let zero = Complex::new(T::zero(), T::zero());
    let mut y = DMatrix::from_element(n, n, zero);
    for (k, e) in graph.edges().iter().enumerate() {
        if e.tail == e.head {
            continue;
        }
        let yk = net.q()[k].eval(s) / eval_nonzero(&net.p()[k], s)?;
        let (a, b) = (e.tail - 1, e.head - 1);
        y[(a, a)] += yk;
        y[(b, b)] += yk;
        y[(a, b)] -= yk;
        y[(b, a)] -= yk;
    }
    let part = net.partition();
    let (bids, iids) = (part.boundary(), part.internal());
    let pick = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| y[(rows[r] - 1, cols[c] - 1)])
    };
    let bb = pick(bids, bids);
    if iids.is_empty() {
        return Ok(bb);
    }
    let singular = || SimulationError::SingularAdmittance {
        re: s.re.as_f64(),
        im: s.im.as_f64(),
    };
    let eliminated = pick(iids, iids)
        .lu()
        .solve(&pick(iids, bids))
        .ok_or_else(singular)?;
    let out = bb - pick(bids, iids) * eliminated;
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(singular());
    }
    Ok(out)
}

/// `n` points of the annulus `0.1 ≤ |s| ≤ 10`, log-uniform in radius and
/// uniform in angle, none within `1e-3` of a point of `avoid`.
pub fn sample_frequencies(avoid: &[Complex<f64>], n: usize, seed: u64) -> Vec<Complex<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (SAMPLE_RADIUS.0.ln(), SAMPLE_RADIUS.1.ln());
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = rng.random_range(lo..=hi).exp();
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let s = Complex::from_polar(r, theta);
        if avoid.iter().all(|&z| (s - z).norm() > ROOT_EXCLUSION) {
            out.push(s);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySample {
    pub re: f64,
    pub im: f64,
    /// Largest entrywise relative error, original against reduced.
    pub relative_error: f64,
    /// Same, edgewise elimination of the original against reduced.
    pub edgewise_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    pub seed: u64,
    pub max_relative_error: f64,
    pub edgewise_max_relative_error: f64,
    pub samples: Vec<FrequencySample>,
}

/// Entrywise `|a − b| / max(|a|, |b|, 1e-12·peak)`, maximized.
pub fn max_relative_error<T: Scalar>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>) -> f64 {
    let m = |z: &Complex<T>| ComplexField::modulus(*z).as_f64();
    let peak = a.iter().chain(b.iter()).map(m).fold(0.0, f64::max);
    let floor = 1e-12 * peak;
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let den = m(x).max(m(y)).max(floor);
            if den == 0.0 {
                0.0
            } else {
                m(&(*x - *y)) / den
            }
        })
        .fold(0.0, |acc, e| {
            if e.is_nan() || acc.is_nan() {
                f64::NAN
            } else {
                acc.max(e)
            }
        })
}

/// Compares original and reduced admittances at `n` seeded random points
/// away from the roots of `p̃` and `q̃`.
pub fn frequency_certificate<T: Scalar>(
    net: &GeneralizedNetwork<T>,
    red: &ReducedNetwork<T>,
    n: usize,
    seed: u64,
    rtol: T,
) -> Result<FrequencyReport, SimulationError> {
    let to_f64 = |z: Complex<T>| Complex::new(z.re.as_f64(), z.im.as_f64());
    let avoid: Vec<Complex<f64>> = red
        .p_basis()
        .roots()
        .into_iter()
        .chain(red.q_basis().roots())
        .map(to_f64)
        .collect();
    let mut samples = Vec::with_capacity(n);
    for s in sample_frequencies(&avoid, n, seed) {
        let st = Complex::new(T::lit(s.re), T::lit(s.im));
        let reduced = frequency_response_reduced(red, st)?;
        let original = frequency_response_original(net, st, rtol)?;
        let edgewise = edgewise_admittance(net, st)?;
        samples.push(FrequencySample {
            re: s.re,
            im: s.im,
            relative_error: max_relative_error(&original, &reduced),
            edgewise_relative_error: max_relative_error(&edgewise, &reduced),
        });
    }
    let worst = |f: fn(&FrequencySample) -> f64| {
        samples.iter().map(f).fold(0.0, |a: f64, e| {
            if e.is_nan() || a.is_nan() {
                f64::NAN
            } else {
                a.max(e)
            }
        })
    };
    Ok(FrequencyReport {
        seed,
        max_relative_error: worst(|s| s.relative_error),
        edgewise_max_relative_error: worst(|s| s.edgewise_relative_error),
        samples,
    })
}
