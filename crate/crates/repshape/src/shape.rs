//! Preshapes, optimal orthogonal alignment, and the Riemannian shape
//! distance.
//!
//! A preshape is a representation matrix with its landmarks centered at the
//! origin and scaled to unit Frobenius norm, i.e. a point on the preshape
//! hypersphere. Two preshapes have the same *shape* when one is an
//! orthogonal transform (rotation or reflection) of the other; the shape
//! distance is the angle between the preshapes after the best such
//! transform, found in closed form from an SVD.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShapeError};
use crate::linalg::{center_columns, symmetric_eigen_sorted};
use crate::repstore::RepresentationMatrix;

/// Column sums of a preshape must vanish to within this tolerance.
pub const CENTERING_TOL: f64 = 1e-10;
/// A preshape's Frobenius norm must be 1 to within this tolerance.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// A centered, unit-Frobenius-norm matrix: one point on the preshape sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct PreShape {
    data: DMatrix<f64>,
}

impl PreShape {
    /// Centers the landmarks and rescales to unit norm. Fails with
    /// `DegenerateShape` when the centered matrix has zero norm (all
    /// landmarks identical).
    pub fn from_matrix(x: &RepresentationMatrix) -> Result<Self> {
        let centered = center_columns(x.data());
        let norm = centered.norm();
        if !(norm.is_finite()) || norm <= 1e-14 * x.data().norm().max(1e-300) {
            return Err(ShapeError::DegenerateShape);
        }
        Ok(Self {
            data: centered / norm,
        })
    }

    /// Wraps a matrix that must already satisfy the preshape invariants.
    pub fn from_raw(data: DMatrix<f64>) -> Result<Self> {
        let m = data.nrows() as f64;
        for col in data.column_iter() {
            let mean = col.sum() / m;
            if mean.abs() > CENTERING_TOL {
                return Err(ShapeError::InvalidArgument(format!(
                    "matrix is not centered: column mean {mean:.3e}"
                )));
            }
        }
        let norm = data.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(ShapeError::InvalidArgument(format!(
                "matrix is not unit norm: |Z|_F = {norm:.17}"
            )));
        }
        Ok(Self { data })
    }

    /// Re-centers and re-normalizes; for matrices that are preshapes up to
    /// accumulated floating-point drift (geodesic points, padded shapes).
    pub fn from_raw_renormalized(data: DMatrix<f64>) -> Result<Self> {
        let centered = center_columns(&data);
        let norm = centered.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(ShapeError::DegenerateShape);
        }
        Ok(Self {
            data: centered / norm,
        })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn m_landmarks(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_units(&self) -> usize {
        self.data.ncols()
    }

    fn check_same_dims(&self, other: &PreShape, context: &str) -> Result<()> {
        if self.data.shape() != other.data.shape() {
            return Err(ShapeError::DimensionMismatch {
                left_rows: self.m_landmarks(),
                left_cols: self.n_units(),
                right_rows: other.m_landmarks(),
                right_cols: other.n_units(),
                context: format!(" ({context})"),
            });
        }
        Ok(())
    }
}

/// The optimal orthogonal transform between two preshapes, the trace it
/// achieves, and the resulting shape distance in radians.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub o_star: DMatrix<f64>,
    pub trace_value: f64,
    pub rho: f64,
}

/// Finds the orthogonal O* maximizing Tr[Z_j^T Z_i O]. With the SVD
/// Z_j^T Z_i = U S V^T the maximizer is O* = V U^T and the maximal trace is
/// the sum of singular values; `Z_i * O*` is then optimally aligned to
/// `Z_j`. Reflections are allowed: the search runs over the full orthogonal
/// group, so det(O*) may be -1.
pub fn align(z_i: &PreShape, z_j: &PreShape) -> Result<Alignment> {
    z_i.check_same_dims(z_j, "align")?;
    // A preshape is exactly distance 0 from itself; the SVD route would
    // return acos(1 - eps) ~ 1e-8 instead.
    if z_i.data() == z_j.data() {
        return Ok(Alignment {
            o_star: DMatrix::identity(z_i.n_units(), z_i.n_units()),
            trace_value: 1.0,
            rho: 0.0,
        });
    }
    let cross = z_j.data().transpose() * z_i.data();
    let svd = cross.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(ShapeError::Numerical("SVD failed in alignment".into())),
    };
    let trace_value: f64 = svd.singular_values.iter().sum();
    let o_star = v_t.transpose() * u.transpose();
    // rho = arccos(trace_value), evaluated through the chordal identity
    // 2 sin(rho/2) = |Z_i O* - Z_j|_F. Near rho = 0 the arccos form loses
    // half the mantissa (error ~ sqrt(eps)); the chord form does not.
    let chord = (z_i.data() * &o_star - z_j.data()).norm();
    let rho = 2.0 * (chord / 2.0).clamp(-1.0, 1.0).asin();
    Ok(Alignment {
        o_star,
        trace_value,
        rho,
    })
}

/// Riemannian shape distance between two representation matrices: the
/// preshape-sphere angle after optimal orthogonal alignment. Symmetric,
/// in [0, pi/2], and zero exactly on the orbit of translations, orthogonal
/// transforms, and positive rescalings.
pub fn shape_distance(x_i: &RepresentationMatrix, x_j: &RepresentationMatrix) -> Result<f64> {
    let z_i = PreShape::from_matrix(x_i)?;
    let z_j = PreShape::from_matrix(x_j)?;
    Ok(align(&z_i, &z_j)?.rho)
}

/// Sphere angle between two preshapes without the alignment step; the
/// baseline that shows what alignment buys. Range [0, pi].
pub fn unaligned_distance(z_i: &PreShape, z_j: &PreShape) -> Result<f64> {
    z_i.check_same_dims(z_j, "unaligned_distance")?;
    if z_i.data() == z_j.data() {
        return Ok(0.0);
    }
    // arccos(<Z_j, Z_i>) through the chord for accuracy near 0 and pi.
    let chord = (z_i.data() - z_j.data()).norm();
    Ok(2.0 * (chord / 2.0).clamp(-1.0, 1.0).asin())
}

/// Symmetric matrix of pairwise distances, keyed by shape id.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub ids: Vec<String>,
    #[serde(
        serialize_with = "serialize_values",
        deserialize_with = "deserialize_values"
    )]
    pub values: DMatrix<f64>,
}

fn serialize_values<S: serde::Serializer>(
    values: &DMatrix<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..values.nrows())
        .map(|i| values.row(i).iter().copied().collect())
        .collect();
    rows.serialize(s)
}

fn deserialize_values<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<DMatrix<f64>, D::Error> {
    let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
    let k = rows.len();
    if rows.iter().any(|r| r.len() != k) {
        return Err(serde::de::Error::custom("values matrix is not square"));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(k, k, &flat))
}

impl DistanceMatrix {
    /// Validates symmetry, a zero diagonal, and id/shape agreement.
    pub fn new(ids: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() || values.nrows() != ids.len() {
            return Err(ShapeError::InvalidArgument(format!(
                "distance matrix is {}x{} for {} ids",
                values.nrows(),
                values.ncols(),
                ids.len()
            )));
        }
        for i in 0..values.nrows() {
            if values[(i, i)].abs() > 1e-9 {
                return Err(ShapeError::InvalidArgument(format!(
                    "nonzero diagonal at {}: {:.3e}",
                    ids[i],
                    values[(i, i)]
                )));
            }
            for j in 0..i {
                if (values[(i, j)] - values[(j, i)]).abs() > 1e-9 {
                    return Err(ShapeError::InvalidArgument(format!(
                        "asymmetry between {} and {}",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        Ok(Self { ids, values })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// CSV form with an id header row and id-leading rows, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for id in &self.ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&self.ids[i]);
            for j in 0..self.len() {
                out.push(',');
                out.push_str(&format!("{:.16e}", self.values[(i, j)]));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |msg: &str| ShapeError::InvalidArgument(format!("distance CSV: {msg}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty input"))?;
        let ids: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
        let k = ids.len();
        let mut values = DMatrix::zeros(k, k);
        for (i, line) in lines.enumerate() {
            if i >= k {
                return Err(bad("more rows than header ids"));
            }
            let mut cells = line.split(',');
            let row_id = cells.next().ok_or_else(|| bad("missing row id"))?.trim();
            if row_id != ids[i] {
                return Err(bad(&format!(
                    "row id {row_id:?} does not match header id {:?}",
                    ids[i]
                )));
            }
            for (j, cell) in cells.enumerate() {
                if j >= k {
                    return Err(bad("row has too many cells"));
                }
                values[(i, j)] = cell
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| bad(&format!("bad number {:?}", cell.trim())))?;
            }
        }
        DistanceMatrix::new(ids, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("distance matrix serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: DistanceMatrix = serde_json::from_str(text)
            .map_err(|e| ShapeError::InvalidArgument(format!("distance JSON: {e}")))?;
        DistanceMatrix::new(parsed.ids, parsed.values)
    }
}

/// Pairwise distance matrix over named preshapes. Pairs of the upper
/// triangle are computed in parallel into disjoint slots, then mirrored, so
/// the result does not depend on scheduling. Per-pair failures are reported
/// with both ids, lowest pair first.
pub fn distance_matrix(shapes: &[(String, PreShape)], aligned: bool) -> Result<DistanceMatrix> {
    if shapes.len() < 2 {
        return Err(ShapeError::InsufficientData(
            "distance matrix needs at least 2 shapes".into(),
        ));
    }
    let k = shapes.len();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (ref id_i, ref z_i) = shapes[i];
            let (ref id_j, ref z_j) = shapes[j];
            let value = if aligned {
                align(z_i, z_j).map(|a| a.rho)
            } else {
                unaligned_distance(z_i, z_j)
            };
            value.map_err(|e| match e {
                ShapeError::DimensionMismatch {
                    left_rows,
                    left_cols,
                    right_rows,
                    right_cols,
                    ..
                } => ShapeError::DimensionMismatch {
                    left_rows,
                    left_cols,
                    right_rows,
                    right_cols,
                    context: format!(" (pair {id_i}, {id_j})"),
                },
                other => other,
            })
        })
        .collect();

    let mut values = DMatrix::zeros(k, k);
    for (&(i, j), result) in pairs.iter().zip(results) {
        let d = result?;
        values[(i, j)] = d;
        values[(j, i)] = d;
    }
    let ids = shapes.iter().map(|(id, _)| id.clone()).collect();
    Ok(DistanceMatrix { ids, values })
}

/// Centered linear kernel K = C X X^T C: the M x M Gram matrix of the
/// centered landmark responses.
pub fn kernel(x: &RepresentationMatrix) -> DMatrix<f64> {
    let centered = center_columns(x.data());
    &centered * centered.transpose()
}

/// Eigendecomposition of a symmetric matrix intended to be PSD. Eigenvalues
/// below -tol * trace are an error; small negatives within tolerance are
/// clamped to zero.
fn psd_eigen(k: &DMatrix<f64>, label: &str) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if k.nrows() != k.ncols() {
        return Err(ShapeError::InvalidArgument(format!(
            "{label} is not square: {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    let trace: f64 = k.diagonal().sum();
    let (mut values, vectors) = symmetric_eigen_sorted(k.clone());
    let tol = 1e-10 * trace.abs().max(f64::MIN_POSITIVE);
    for v in values.iter_mut() {
        if *v < -tol {
            return Err(ShapeError::Indefinite(format!(
                "{label} has eigenvalue {v:.3e} below -{tol:.3e}"
            )));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok((values, vectors))
}

/// Normalized Bures similarity between two PSD kernels:
/// F(K_i, K_j) / sqrt(Tr K_i * Tr K_j) with the fidelity
/// F(A, B) = Tr[(A^{1/2} B A^{1/2})^{1/2}]. Equals the cosine of the shape
/// distance between the representations the kernels came from.
pub fn nbs(k_i: &DMatrix<f64>, k_j: &DMatrix<f64>) -> Result<f64> {
    if k_i.shape() != k_j.shape() {
        return Err(ShapeError::DimensionMismatch {
            left_rows: k_i.nrows(),
            left_cols: k_i.ncols(),
            right_rows: k_j.nrows(),
            right_cols: k_j.ncols(),
            context: " (nbs)".into(),
        });
    }
    let (values_i, vectors_i) = psd_eigen(k_i, "first kernel")?;
    let trace_i: f64 = values_i.iter().sum();
    let trace_j: f64 = {
        let (values_j, _) = psd_eigen(k_j, "second kernel")?;
        values_j.iter().sum()
    };
    if trace_i <= 0.0 || trace_j <= 0.0 {
        return Err(ShapeError::InvalidArgument(
            "nbs of a zero-trace kernel is undefined".into(),
        ));
    }

    let sqrt_vals = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values_i.len(),
        values_i.iter().map(|v| v.sqrt()),
    ));
    let root_i = &vectors_i * sqrt_vals * vectors_i.transpose();
    let inner = &root_i * k_j * &root_i;
    // Symmetrize before the final decomposition; the triple product drifts
    // off symmetric by rounding.
    let inner = (&inner + inner.transpose()) * 0.5;
    let (inner_vals, _) = psd_eigen(&inner, "fidelity product")?;
    let fidelity: f64 = inner_vals.iter().map(|v| v.sqrt()).sum();
    Ok(fidelity / (trace_i * trace_j).sqrt())
}

/// Dimension of the shape space of M landmarks in N units:
/// N(M-1) - 1 - N(N-1)/2.
pub fn shape_space_dim(m_landmarks: usize, n_units: usize) -> Result<i64> {
    if m_landmarks < 2 || n_units < 1 {
        return Err(ShapeError::InvalidArgument(format!(
            "shape space needs M >= 2 and N >= 1, got M={m_landmarks}, N={n_units}"
        )));
    }
    let m = m_landmarks as i64;
    let n = n_units as i64;
    Ok(n * (m - 1) - 1 - n * (n - 1) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repstore::RepresentationMatrix;
    use approx::assert_abs_diff_eq;

    fn rep(rows: usize, cols: usize, data: &[f64]) -> RepresentationMatrix {
        RepresentationMatrix::new(DMatrix::from_row_slice(rows, cols, data)).unwrap()
    }

    #[test]
    fn preshape_already_centered_pair() {
        let x = rep(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        let z = PreShape::from_matrix(&x).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(z.data()[(0, 0)], s, epsilon = 1e-15);
        assert_abs_diff_eq!(z.data()[(1, 0)], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(z.data()[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn preshape_identical_rows_degenerate() {
        let x = rep(3, 2, &[2.0, 5.0, 2.0, 5.0, 2.0, 5.0]);
        assert!(matches!(
            PreShape::from_matrix(&x),
            Err(ShapeError::DegenerateShape)
        ));
    }

    #[test]
    fn preshape_hand_computed() {
        // Column means (1, 1); centered [[-1,-1],[-1,1],[2,0]]; norm sqrt(8).
        let x = rep(3, 2, &[0.0, 0.0, 0.0, 2.0, 3.0, 1.0]);
        let z = PreShape::from_matrix(&x).unwrap();
        let r8 = 8.0_f64.sqrt();
        let expected = [
            [-1.0 / r8, -1.0 / r8],
            [-1.0 / r8, 1.0 / r8],
            [2.0 / r8, 0.0],
        ];
        for i in 0..3 {
            for j in 0..2 {
                assert_abs_diff_eq!(z.data()[(i, j)], expected[i][j], epsilon = 1e-15);
            }
        }
        for j in 0..2 {
            assert_abs_diff_eq!(z.data().column(j).sum(), 0.0, epsilon = CENTERING_TOL);
        }
        assert_abs_diff_eq!(z.data().norm(), 1.0, epsilon = UNIT_NORM_TOL);
    }

    #[test]
    fn self_alignment_is_identity_class() {
        let x = rep(4, 3, &[0.3, 1.0, -2.0, 4.0, 0.1, 0.0, -1.0, 2.2, 0.7, 0.0, -3.0, 1.5]);
        let z = PreShape::from_matrix(&x).unwrap();
        let a = align(&z, &z).unwrap();
        assert_abs_diff_eq!(a.trace_value, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(a.rho, 0.0, epsilon = 1e-5);
        // O* is orthogonal.
        let should_be_eye = &a.o_star * a.o_star.transpose();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(should_be_eye[(i, j)], expect, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn full_invariance_group_collapses_distance() {
        let x = rep(5, 2, &[1.0, 2.0, -0.5, 0.3, 2.0, -1.0, 0.0, 0.5, -2.5, 0.0]);
        // Rotation by 0.7 rad composed with a reflection.
        let (c, s) = (0.7_f64.cos(), 0.7_f64.sin());
        let r = DMatrix::from_row_slice(2, 2, &[c, s, s, -c]);
        let mut transformed = x.data() * &r * 3.7;
        for mut row in transformed.row_iter_mut() {
            row[0] += 11.0;
            row[1] -= 4.0;
        }
        let y = RepresentationMatrix::new(transformed).unwrap();
        let d = shape_distance(&x, &y).unwrap();
        assert!(d.abs() < 1e-7, "distance {d} should vanish");
    }

    #[test]
    fn unaligned_edge_cases() {
        let x = rep(3, 2, &[0.0, 0.0, 0.0, 2.0, 3.0, 1.0]);
        let z = PreShape::from_matrix(&x).unwrap();
        // acos amplifies rounding near +/-1: |acos(1 - d)| ~ sqrt(2d).
        assert_abs_diff_eq!(unaligned_distance(&z, &z).unwrap(), 0.0, epsilon = 1e-7);
        let anti = PreShape::from_raw(-z.data().clone()).unwrap();
        assert_abs_diff_eq!(
            unaligned_distance(&z, &anti).unwrap(),
            std::f64::consts::PI,
            epsilon = 1e-7
        );
        let a = align(&z, &anti).unwrap();
        assert!(unaligned_distance(&z, &anti).unwrap() >= a.rho - 1e-10);
    }

    #[test]
    fn kernel_of_centered_unit_pair() {
        let a = 0.8;
        let x = rep(2, 1, &[a, -a]);
        let k = kernel(&x);
        assert_abs_diff_eq!(k[(0, 0)], a * a, epsilon = 1e-15);
        assert_abs_diff_eq!(k[(0, 1)], -a * a, epsilon = 1e-15);
        assert_abs_diff_eq!(k[(1, 0)], -a * a, epsilon = 1e-15);
        assert_abs_diff_eq!(k[(1, 1)], a * a, epsilon = 1e-15);
    }

    #[test]
    fn kernel_trace_is_centered_norm_squared() {
        let x = rep(4, 3, &[1.0, 0.0, 2.0, -1.0, 3.0, 0.5, 2.0, 2.0, -2.0, 0.0, 1.0, 1.0]);
        let k = kernel(&x);
        let centered = center_columns(x.data());
        assert_abs_diff_eq!(
            k.diagonal().sum(),
            centered.norm_squared(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn nbs_self_and_scale() {
        let x = rep(4, 2, &[1.0, 0.0, -1.0, 2.0, 0.5, -1.0, 3.0, 0.2]);
        let k = kernel(&x);
        assert_abs_diff_eq!(nbs(&k, &k).unwrap(), 1.0, epsilon = 1e-8);
        let scaled = &k * 4.2;
        assert_abs_diff_eq!(nbs(&k, &scaled).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn nbs_rejects_indefinite() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        let good = DMatrix::identity(2, 2);
        assert!(matches!(
            nbs(&bad, &good),
            Err(ShapeError::Indefinite(_))
        ));
    }

    #[test]
    fn distance_matrix_of_identical_shapes_is_zero() {
        let x = rep(4, 2, &[1.0, 0.0, -1.0, 2.0, 0.5, -1.0, 3.0, 0.2]);
        let z = PreShape::from_matrix(&x).unwrap();
        let shapes: Vec<(String, PreShape)> = (0..4)
            .map(|i| (format!("s{i}"), z.clone()))
            .collect();
        let d = distance_matrix(&shapes, true).unwrap();
        for v in d.values.iter() {
            assert!(v.abs() < 1e-5);
        }
    }

    #[test]
    fn distance_matrix_rejects_single_shape() {
        let x = rep(2, 1, &[1.0, -1.0]);
        let z = PreShape::from_matrix(&x).unwrap();
        assert!(distance_matrix(&[("a".into(), z)], true).is_err());
    }

    #[test]
    fn shape_space_dim_examples() {
        assert_eq!(shape_space_dim(3, 2).unwrap(), 2);
        assert_eq!(shape_space_dim(10_000, 1000).unwrap(), 9_499_499);
        assert_eq!(shape_space_dim(2, 1).unwrap(), 0);
        assert!(shape_space_dim(1, 1).is_err());
    }

    #[test]
    fn distance_csv_roundtrip() {
        let ids = vec!["a".to_string(), "b".to_string()];
        let values = DMatrix::from_row_slice(2, 2, &[0.0, 0.123456789012345, 0.123456789012345, 0.0]);
        let d = DistanceMatrix::new(ids, values).unwrap();
        let parsed = DistanceMatrix::from_csv(&d.to_csv()).unwrap();
        assert_eq!(parsed.ids, d.ids);
        assert_eq!(parsed.values[(0, 1)], d.values[(0, 1)]);
        let from_json = DistanceMatrix::from_json(&d.to_json()).unwrap();
        assert_eq!(from_json.values[(1, 0)], d.values[(1, 0)]);
    }
}
