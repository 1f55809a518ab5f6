use nalgebra::{DMatrix, DVector};

use super::{CoefficientVector, Family, NetworkError};
use crate::scalar::Scalar;

/// Common direction of a rank-one family: `vectors[k] = scales[k] * basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Fit<T> {
    /// Nonnegative, largest entry equal to one.
    pub basis: CoefficientVector<T>,
    /// Strictly positive.
    pub scales: Vec<T>,
}

/// Singular-value diagnostics of a coefficient family, each vector first
/// scaled to unit max entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Analysis<T> {
    /// Descending.
    pub singular_values: Vec<T>,
    /// Count of singular values above `rtol` times the largest.
    pub rank: usize,
    /// `σ₂ / σ₁`, zero when there is only one singular value.
    pub singular_ratio: T,
    pub fit: Option<Rank1Fit<T>>,
}

/// Numerical rank analysis of the matrix whose columns are `vectors`.
///
/// The family is accepted when `σ₂ ≤ rtol·σ₁` and every vector is reproduced
/// by `scale·basis` to within `rtol` of its own largest entry.
pub fn rank1_analysis<T: Scalar>(vectors: &[CoefficientVector<T>], rtol: T) -> Rank1Analysis<T> {
    let empty = Rank1Analysis {
        singular_values: Vec::new(),
        rank: 0,
        singular_ratio: T::zero(),
        fit: None,
    };
    let Some(first) = vectors.first() else {
        return empty;
    };
    let n = first.len();
    if n == 0 || vectors.iter().any(|v| v.len() != n) {
        return empty;
    }
    // Columns scaled to unit max so the rank ignores per-edge magnitude.
    let m = DMatrix::from_fn(n, vectors.len(), |r, c| {
        let peak = vectors[c].max_abs();
        let x = vectors[c].as_slice()[r];
        if peak > T::zero() {
            x / peak
        } else {
            x
        }
    });
    let svd = m.svd(true, false);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let singular_values: Vec<T> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma1 = singular_values[0];
    if !(sigma1 > T::zero()) {
        return Rank1Analysis {
            singular_values,
            ..empty
        };
    }
    let rank = singular_values
        .iter()
        .filter(|&&s| s > rtol * sigma1)
        .count();
    let singular_ratio = singular_values.get(1).map_or(T::zero(), |&s| s / sigma1);

    let fit = if rank == 1 {
        let u = svd.u.as_ref().expect("left singular vectors requested");
        fit_direction(vectors, u.column(order[0]).into_owned(), rtol)
    } else {
        None
    };
    Rank1Analysis {
        singular_values,
        rank,
        singular_ratio,
        fit,
    }
}

fn fit_direction<T: Scalar>(
    vectors: &[CoefficientVector<T>],
    mut direction: DVector<T>,
    rtol: T,
) -> Option<Rank1Fit<T>> {
    if direction.sum() < T::zero() {
        direction.neg_mut();
    }
    for (j, x) in direction.iter_mut().enumerate() {
        let structural_zero = vectors.iter().all(|v| v.as_slice()[j].is_zero());
        if structural_zero || *x < T::zero() {
            *x = T::zero();
        }
    }
    let peak = direction.amax();
    if !(peak > T::zero()) {
        return None;
    }
    direction /= peak;
    let norm2 = direction.norm_squared();
    let mut scales = Vec::with_capacity(vectors.len());
    for v in vectors {
        let v = DVector::from_column_slice(v.as_slice());
        let scale = v.dot(&direction) / norm2;
        if !(scale > T::zero()) {
            return None;
        }
        let residual = (&v - &direction * scale).amax();
        if residual > rtol * v.amax() {
            return None;
        }
        scales.push(scale);
    }
    Some(Rank1Fit {
        basis: CoefficientVector::new(direction.iter().copied().collect()),
        scales,
    })
}

/// Rank-one test: `Some` with the normalized basis and positive scales when
/// the family spans a one-dimensional space.
pub fn rank1_check<T: Scalar>(vectors: &[CoefficientVector<T>], rtol: T) -> Option<Rank1Fit<T>> {
    rank1_analysis(vectors, rtol).fit
}

/// Shared-basis form of a network satisfying the rank-one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousForm<T> {
    /// `p̃`, largest entry one.
    pub p_basis: CoefficientVector<T>,
    /// `q̃`, largest entry one.
    pub q_basis: CoefficientVector<T>,
    /// `λ_k` with `p_k = λ_k p̃`.
    pub p_scales: Vec<T>,
    /// `γ_k` with `q_k = γ_k q̃`.
    pub q_scales: Vec<T>,
    /// `Γ_kk = γ_k / λ_k`.
    pub weights: Vec<T>,
}

impl<T: Scalar> HomogeneousForm<T> {
    pub fn from_families(
        p: &[CoefficientVector<T>],
        q: &[CoefficientVector<T>],
        rtol: T,
    ) -> Result<Self, NetworkError> {
        let fit = |vectors, family| {
            let analysis = rank1_analysis(vectors, rtol);
            let (rank, ratio) = (analysis.rank, analysis.singular_ratio);
            analysis.fit.ok_or(NetworkError::NotReducible {
                family,
                rank,
                singular_ratio: ratio.as_f64(),
            })
        };
        let pf = fit(p, Family::P)?;
        let qf = fit(q, Family::Q)?;
        let weights = qf
            .scales
            .iter()
            .zip(&pf.scales)
            .map(|(&g, &l)| g / l)
            .collect();
        Ok(Self {
            p_basis: pf.basis,
            q_basis: qf.basis,
            p_scales: pf.scales,
            q_scales: qf.scales,
            weights,
        })
    }

    pub fn weight_matrix(&self) -> DMatrix<T> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.weights))
    }
}
