//! Classical (Torgerson) multidimensional scaling of a distance matrix,
//! plus projection onto leading principal axes for plotting.

use nalgebra::DMatrix;

use crate::error::{Result, ShapeError};
use crate::linalg::{fix_axis_signs, pca, symmetric_eigen_sorted};
use crate::shape::DistanceMatrix;

/// Euclidean coordinates recovered from a distance matrix.
#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    /// K x d coordinates, centered, columns ordered by eigenvalue.
    pub coords: DMatrix<f64>,
    /// Embedding dimension actually used (requested d capped at K-1).
    pub d: usize,
    /// Double-centered Gram eigenvalues for the returned axes, descending.
    /// Axes with non-positive eigenvalues contribute zero coordinates.
    pub eigenvalues: Vec<f64>,
    /// Residual misfit sqrt(sum (d_ij - |x_i - x_j|)^2 / sum d_ij^2).
    pub stress: f64,
    /// |sum of negative eigenvalues| / sum |eigenvalues| over the full
    /// spectrum; large values flag strongly non-Euclidean distances.
    pub negative_mass: f64,
}

/// Classical MDS: double-center the squared distances into a Gram matrix
/// B = -1/2 J D^2 J, eigendecompose, and scale the top-d eigenvectors by
/// the square roots of their (non-negative-clamped) eigenvalues. Exact for
/// distances that are Euclidean in d dimensions.
pub fn classical_mds(distances: &DistanceMatrix, d: usize) -> Result<EmbeddingResult> {
    if d < 1 {
        return Err(ShapeError::InvalidArgument("d must be at least 1".into()));
    }
    let k = distances.len();
    if k < 2 {
        return Err(ShapeError::InsufficientData(
            "embedding needs at least 2 points".into(),
        ));
    }
    let values = &distances.values;
    for i in 0..k {
        for j in 0..k {
            if values[(i, j)] < 0.0 {
                return Err(ShapeError::InvalidArgument(format!(
                    "negative distance at ({}, {})",
                    distances.ids[i], distances.ids[j]
                )));
            }
        }
    }

    // B = -1/2 J D^2 J via explicit row/column/grand means.
    let sq = values.map(|v| v * v);
    let row_means: Vec<f64> = (0..k).map(|i| sq.row(i).sum() / k as f64).collect();
    let grand = row_means.iter().sum::<f64>() / k as f64;
    let mut gram = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand);
        }
    }
    let (eigenvalues, mut vectors) = symmetric_eigen_sorted(gram);
    fix_axis_signs(&mut vectors, None);

    let d_eff = d.min(k - 1);
    let mut coords = DMatrix::zeros(k, d_eff);
    for j in 0..d_eff {
        let scale = eigenvalues[j].max(0.0).sqrt();
        for i in 0..k {
            coords[(i, j)] = vectors[(i, j)] * scale;
        }
    }

    let abs_total: f64 = eigenvalues.iter().map(|v| v.abs()).sum();
    let neg_total: f64 = eigenvalues.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
    let negative_mass = if abs_total > 0.0 {
        neg_total / abs_total
    } else {
        0.0
    };

    let stress = stress_of(values, &coords);
    Ok(EmbeddingResult {
        coords,
        d: d_eff,
        eigenvalues: eigenvalues[..d_eff].to_vec(),
        stress,
        negative_mass,
    })
}

fn stress_of(distances: &DMatrix<f64>, coords: &DMatrix<f64>) -> f64 {
    let k = distances.nrows();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            let fitted = (coords.row(i) - coords.row(j)).norm();
            let target = distances[(i, j)];
            num += (target - fitted) * (target - fitted);
            den += target * target;
        }
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        0.0
    }
}

/// Projects embedding coordinates onto their top-k principal axes with the
/// largest-entry-positive sign convention. Classical MDS coordinates are
/// already principal-axis ordered, so for them this reproduces the first k
/// columns up to sign; the projection is still computed, not assumed.
pub fn pca_axes(embedding: &EmbeddingResult, k: usize) -> Result<DMatrix<f64>> {
    if k > embedding.d {
        return Err(ShapeError::InvalidArgument(format!(
            "k = {k} exceeds embedding dimension {}",
            embedding.d
        )));
    }
    if k < 1 {
        return Err(ShapeError::InvalidArgument("k must be at least 1".into()));
    }
    let out = pca(&embedding.coords, k)?;
    Ok(out.scores)
}
