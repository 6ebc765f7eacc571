//! Small shared linear-algebra helpers.

use nalgebra::DMatrix;

use crate::error::{Result, ShapeError};

/// Subtracts from each column its mean over rows. Equivalent to
/// left-multiplying by the centering matrix I - (1/M) 1 1^T.
pub fn center_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let m = x.nrows() as f64;
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / m;
        col.add_scalar_mut(-mean);
    }
    out
}

/// Frobenius inner product <a, b> = Tr[a^T b].
pub fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
/// Returns (eigenvalues, eigenvectors as columns in matching order).
pub fn symmetric_eigen_sorted(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Flips each column of `axes` (and the matching column of `scores`, if
/// given) so that the column entry of largest magnitude is positive. Ties
/// resolve to the first index in scan order, which keeps the convention
/// deterministic.
pub fn fix_axis_signs(axes: &mut DMatrix<f64>, mut scores: Option<&mut DMatrix<f64>>) {
    for j in 0..axes.ncols() {
        let col = axes.column(j);
        let mut best = 0usize;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if axes[(best, j)] < 0.0 {
            for i in 0..axes.nrows() {
                axes[(i, j)] = -axes[(i, j)];
            }
            if let Some(sc) = scores.as_deref_mut() {
                for i in 0..sc.nrows() {
                    sc[(i, j)] = -sc[(i, j)];
                }
            }
        }
    }
}

/// Principal component analysis of `x` with rows as samples.
///
/// Columns are centered before the decomposition. Returns the top `k`
/// axes (ncols x k, sign-fixed), the per-row scores (nrows x k), and the
/// full squared-singular-value spectrum in descending order.
pub struct PcaOutput {
    pub axes: DMatrix<f64>,
    pub scores: DMatrix<f64>,
    pub spectrum: Vec<f64>,
}

pub fn pca(x: &DMatrix<f64>, k: usize) -> Result<PcaOutput> {
    let centered = center_columns(x);
    let svd = centered.clone().svd(true, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| ShapeError::Numerical("SVD did not produce singular vectors".into()))?;
    let r = svd.singular_values.len();
    let k = k.min(r);

    let mut spectrum: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    // nalgebra returns singular values sorted descending; assert rather than trust.
    debug_assert!(spectrum.windows(2).all(|w| w[0] >= w[1] - 1e-9));
    spectrum.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));

    let mut axes = DMatrix::zeros(x.ncols(), k);
    for j in 0..k {
        for i in 0..x.ncols() {
            axes[(i, j)] = v_t[(j, i)];
        }
    }
    let mut scores = &centered * &axes;
    fix_axis_signs(&mut axes, Some(&mut scores));
    Ok(PcaOutput {
        axes,
        scores,
        spectrum,
    })
}

/// Validates that every entry is finite, reporting the first offending
/// (row, col) in row-major scan order.
pub fn check_finite(x: &DMatrix<f64>) -> Result<()> {
    for row in 0..x.nrows() {
        for col in 0..x.ncols() {
            if !x[(row, col)].is_finite() {
                return Err(ShapeError::NonFinite { row, col });
            }
        }
    }
    Ok(())
}
