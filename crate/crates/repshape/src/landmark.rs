//! Landmark displacement analysis: per-landmark motion between two
//! optimally aligned preshapes, magnitude ranking, contraction versus
//! expansion labels, and PCA of the displacement field.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, ShapeError};
use crate::linalg;
use crate::shape::{align, PreShape};

/// Rows are the per-landmark displacement vectors delta_z = (Z_a)_row -
/// (Z_b O*)_row between the reference and the aligned comparison.
#[derive(Debug, Clone)]
pub struct DisplacementField {
    pub delta: DMatrix<f64>,
    pub ref_id: String,
    pub cmp_id: String,
    pub rho: f64,
}

impl DisplacementField {
    pub fn m_landmarks(&self) -> usize {
        self.delta.nrows()
    }

    /// Euclidean norm of each landmark's displacement vector.
    pub fn magnitudes(&self) -> Vec<f64> {
        (0..self.delta.nrows())
            .map(|i| self.delta.row(i).norm())
            .collect()
    }
}

/// Displacement field Z_a - Z_b O*, with O* the orthogonal transform
/// aligning the comparison `z_b` onto the reference `z_a`, i.e. the one
/// with Tr[Z_a^T Z_b O*] = cos(rho). By the chordal identity the field's
/// squared Frobenius norm is 2 - 2 cos(rho).
pub fn displacement_field(
    z_a: &PreShape,
    z_b: &PreShape,
    ref_id: &str,
    cmp_id: &str,
) -> Result<DisplacementField> {
    let alignment = align(z_b, z_a)?;
    let delta = z_a.data() - z_b.data() * &alignment.o_star;
    Ok(DisplacementField {
        delta,
        ref_id: ref_id.to_string(),
        cmp_id: cmp_id.to_string(),
        rho: alignment.rho,
    })
}

/// Landmark indices ordered by descending displacement magnitude, with the
/// magnitudes in matching order. Ties resolve by ascending landmark index.
#[derive(Debug, Clone, Serialize)]
pub struct LandmarkRanking {
    pub order: Vec<usize>,
    pub magnitudes: Vec<f64>,
}

/// Indices of the k most and k least displaced landmarks plus the full
/// ranking. k must satisfy 1 <= k <= M/2 so the two sets cannot overlap.
pub fn rank_landmarks(
    field: &DisplacementField,
    k: usize,
) -> Result<(Vec<usize>, Vec<usize>, LandmarkRanking)> {
    let m = field.m_landmarks();
    if k < 1 || k > m / 2 {
        return Err(ShapeError::InvalidArgument(format!(
            "k = {k} outside 1..={} for M = {m}",
            m / 2
        )));
    }
    let mags = field.magnitudes();

    let mut desc: Vec<usize> = (0..m).collect();
    desc.sort_by(|&a, &b| {
        mags[b]
            .partial_cmp(&mags[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut asc: Vec<usize> = (0..m).collect();
    asc.sort_by(|&a, &b| {
        mags[a]
            .partial_cmp(&mags[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let top = desc[..k].to_vec();
    let bottom = asc[..k].to_vec();
    let magnitudes = desc.iter().map(|&i| mags[i]).collect();
    Ok((
        top,
        bottom,
        LandmarkRanking {
            order: desc,
            magnitudes,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionLabel {
    Contracted,
    Expanded,
}

/// One landmark's radial classification.
#[derive(Debug, Clone, Serialize)]
pub struct LandmarkClass {
    pub index: usize,
    pub label: MotionLabel,
    /// Radial norms agreed to within 1e-12; labeled expanded by convention.
    pub tie: bool,
}

/// Labels each listed landmark as contracted (its aligned-comparison row is
/// closer to the origin than the reference row) or expanded (further or
/// tied). `z_a` is the un-augmented reference; `z_b_aligned` must already
/// be aligned onto it.
pub fn classify_contract_expand(
    z_a: &PreShape,
    z_b_aligned: &PreShape,
    indices: &[usize],
) -> Result<Vec<LandmarkClass>> {
    if z_a.data().shape() != z_b_aligned.data().shape() {
        return Err(ShapeError::DimensionMismatch {
            left_rows: z_a.m_landmarks(),
            left_cols: z_a.n_units(),
            right_rows: z_b_aligned.m_landmarks(),
            right_cols: z_b_aligned.n_units(),
            context: " (classify_contract_expand)".into(),
        });
    }
    let m = z_a.m_landmarks();
    indices
        .iter()
        .map(|&mu| {
            if mu >= m {
                return Err(ShapeError::InvalidArgument(format!(
                    "landmark index {mu} out of range for M = {m}"
                )));
            }
            let ref_norm = z_a.data().row(mu).norm();
            let cmp_norm = z_b_aligned.data().row(mu).norm();
            let tie = (cmp_norm - ref_norm).abs() <= 1e-12;
            let label = if !tie && cmp_norm < ref_norm {
                MotionLabel::Contracted
            } else {
                MotionLabel::Expanded
            };
            Ok(LandmarkClass {
                index: mu,
                label,
                tie,
            })
        })
        .collect()
}

/// Top-two principal axes of the displacement matrix.
#[derive(Debug, Clone)]
pub struct DisplacementPca {
    /// Principal axes as columns (N x up-to-2), largest-entry-positive.
    pub components: DMatrix<f64>,
    /// Per-kept-landmark coordinates on those axes.
    pub scores: DMatrix<f64>,
    /// Fraction of total variance along each returned axis.
    pub explained_variance: Vec<f64>,
    /// Landmark indices the score rows correspond to (rows dropped under
    /// row normalization are absent).
    pub kept_rows: Vec<usize>,
    /// Fewer than two positive-variance directions exist; the second axis
    /// is not meaningful.
    pub rank_deficient: bool,
}

/// PCA of the displacement field with landmarks as samples. With
/// `row_normalize` each nonzero row is scaled to unit norm first and zero
/// rows are dropped (their indices are tracked in `kept_rows`).
pub fn displacement_pca(field: &DisplacementField, row_normalize: bool) -> Result<DisplacementPca> {
    let m = field.m_landmarks();
    let n = field.delta.ncols();
    let mut rows: Vec<usize> = Vec::with_capacity(m);
    let mut data_rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let row = field.delta.row(i);
        let norm = row.norm();
        if row_normalize {
            if norm <= 1e-15 {
                continue;
            }
            rows.push(i);
            data_rows.push(row.iter().map(|v| v / norm).collect());
        } else {
            rows.push(i);
            data_rows.push(row.iter().copied().collect());
        }
    }
    if rows.len() < 2 {
        return Err(ShapeError::InsufficientData(format!(
            "displacement PCA needs at least 2 usable rows, found {}",
            rows.len()
        )));
    }
    let flat: Vec<f64> = data_rows.iter().flatten().copied().collect();
    let matrix = DMatrix::from_row_slice(rows.len(), n, &flat);
    let out = linalg::pca(&matrix, 2)?;

    let total: f64 = out.spectrum.iter().sum();
    let axes = out.axes.ncols();
    let explained_variance: Vec<f64> = (0..axes)
        .map(|j| {
            if total > 0.0 {
                out.spectrum[j] / total
            } else {
                0.0
            }
        })
        .collect();
    let positive = out
        .spectrum
        .iter()
        .filter(|&&v| v > 1e-12 * out.spectrum.first().copied().unwrap_or(0.0).max(1e-300))
        .count();
    Ok(DisplacementPca {
        components: out.axes,
        scores: out.scores,
        explained_variance,
        kept_rows: rows,
        rank_deficient: positive < 2,
    })
}

/// Histogram with explicit bin edges (len = counts.len() + 1).
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Histogram of displacement magnitudes. Bin count defaults to the
/// Freedman-Diaconis rule and can be overridden.
pub fn magnitude_histogram(magnitudes: &[f64], bins_override: Option<usize>) -> Histogram {
    let n = magnitudes.len();
    if n == 0 {
        return Histogram {
            edges: vec![0.0, 1.0],
            counts: vec![0],
        };
    }
    let mut sorted = magnitudes.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    let bins = match bins_override {
        Some(b) => b.max(1),
        None => {
            let iqr = percentile(&sorted, 0.75) - percentile(&sorted, 0.25);
            let width = 2.0 * iqr / (n as f64).cbrt();
            if width > 0.0 && hi > lo {
                (((hi - lo) / width).ceil() as usize).clamp(1, 1000)
            } else {
                1
            }
        }
    };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let edges: Vec<f64> = (0..=bins)
        .map(|i| lo + span * i as f64 / bins as f64)
        .collect();
    let mut counts = vec![0usize; bins];
    for &v in magnitudes {
        let mut idx = ((v - lo) / span * bins as f64) as usize;
        if idx >= bins {
            idx = bins - 1;
        }
        counts[idx] += 1;
    }
    Histogram { edges, counts }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}
