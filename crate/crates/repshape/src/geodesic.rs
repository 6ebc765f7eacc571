//! Great-circle geodesics on the preshape sphere, tangent vectors at a
//! reference shape, and angles between representation trajectories.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Result, ShapeError};
use crate::linalg::frob_inner;
use crate::repstore::Manifest;
use crate::shape::{align, PreShape};

/// Shapes closer than this are treated as the same point on the sphere.
pub const RHO_IDENTICAL: f64 = 1e-8;
/// Below this distance the tangent formula switches to its small-angle
/// limit to avoid dividing by sin(rho).
pub const RHO_LIMIT_FORM: f64 = 1e-6;

/// Loaded preshapes keyed by manifest id.
pub type ShapeStore = BTreeMap<String, PreShape>;

/// A geodesic segment: the starting preshape, the endpoint already aligned
/// to it, and the angle between them.
#[derive(Debug, Clone)]
pub struct GeodesicSpec {
    pub z_from: PreShape,
    pub z_to_aligned: PreShape,
    pub rho: f64,
}

impl GeodesicSpec {
    /// Aligns `z_to` onto `z_from` and records the shape distance.
    pub fn connect(z_from: &PreShape, z_to: &PreShape) -> Result<Self> {
        let alignment = align(z_to, z_from)?;
        let aligned = z_to.data() * &alignment.o_star;
        Ok(Self {
            z_from: z_from.clone(),
            z_to_aligned: PreShape::from_raw_renormalized(aligned)?,
            rho: alignment.rho,
        })
    }

    /// Wraps endpoints that are already aligned, checking that the claimed
    /// angle matches their inner product.
    pub fn new(z_from: PreShape, z_to_aligned: PreShape, rho: f64) -> Result<Self> {
        let cos = frob_inner(z_from.data(), z_to_aligned.data());
        if (cos - rho.cos()).abs() > 1e-9 {
            return Err(ShapeError::InvalidArgument(format!(
                "endpoints disagree with rho: <from, to> = {cos:.12} but cos(rho) = {:.12}",
                rho.cos()
            )));
        }
        Ok(Self {
            z_from,
            z_to_aligned,
            rho,
        })
    }
}

/// Point at parameter `t` on the great circle through the segment's
/// endpoints: sin((1-t) rho)/sin(rho) * Z_from + sin(t rho)/sin(rho) * Z_to.
/// For segments shorter than `RHO_IDENTICAL` the spherical weights collapse
/// numerically, so linear interpolation plus renormalization is used.
pub fn geodesic_point(spec: &GeodesicSpec, t: f64) -> Result<PreShape> {
    if !(0.0..=1.0).contains(&t) {
        return Err(ShapeError::InvalidArgument(format!(
            "geodesic parameter t = {t} outside [0, 1]"
        )));
    }
    let blended: DMatrix<f64> = if spec.rho < RHO_IDENTICAL {
        spec.z_from.data() * (1.0 - t) + spec.z_to_aligned.data() * t
    } else {
        let s = spec.rho.sin();
        spec.z_from.data() * (((1.0 - t) * spec.rho).sin() / s)
            + spec.z_to_aligned.data() * ((t * spec.rho).sin() / s)
    };
    PreShape::from_raw_renormalized(blended)
}

/// Initial velocity of the geodesic from a reference preshape toward a
/// comparison shape: V = rho/sin(rho) * (Z* - cos(rho) Z_0), where Z* is
/// the comparison aligned to the reference. Tangent to the sphere at Z_0
/// with Frobenius norm rho.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub data: DMatrix<f64>,
    pub base: PreShape,
    pub rho: f64,
    /// Set when the comparison shares the reference's shape class; the
    /// tangent is then the zero matrix and defines no direction.
    pub degenerate: bool,
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        self.data.norm()
    }
}

pub fn tangent_at_reference(z_0: &PreShape, z_i: &PreShape) -> Result<TangentVector> {
    let alignment = align(z_i, z_0)?;
    let rho = alignment.rho;
    if rho < RHO_IDENTICAL {
        return Ok(TangentVector {
            data: DMatrix::zeros(z_0.m_landmarks(), z_0.n_units()),
            base: z_0.clone(),
            rho,
            degenerate: true,
        });
    }
    let aligned = z_i.data() * &alignment.o_star;
    let data = if rho < RHO_LIMIT_FORM {
        // rho/sin(rho) -> 1 and cos(rho) -> 1.
        &aligned - z_0.data()
    } else {
        (aligned - z_0.data() * rho.cos()) * (rho / rho.sin())
    };
    Ok(TangentVector {
        data,
        base: z_0.clone(),
        rho,
        degenerate: false,
    })
}

/// Angle in degrees between the geodesics from `z_0` toward `z_1` and
/// `z_2`, measured between their tangent vectors at `z_0`. Errors when
/// either comparison is in the reference's shape class.
pub fn geodesic_angle(z_0: &PreShape, z_1: &PreShape, z_2: &PreShape) -> Result<f64> {
    let v_1 = tangent_at_reference(z_0, z_1)?;
    let v_2 = tangent_at_reference(z_0, z_2)?;
    angle_between(&v_1, &v_2)
}

/// Angle between two tangent vectors at the same reference, in degrees.
pub fn angle_between(v_1: &TangentVector, v_2: &TangentVector) -> Result<f64> {
    if v_1.degenerate {
        return Err(ShapeError::DegenerateDirection("first comparison".into()));
    }
    if v_2.degenerate {
        return Err(ShapeError::DegenerateDirection("second comparison".into()));
    }
    let cos = frob_inner(&v_1.data, &v_2.data) / (v_1.norm() * v_2.norm());
    Ok(cos.clamp(-1.0, 1.0).acos().to_degrees())
}

/// One augmentation method's ladder of shapes, ordered by hyperparameter.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub method: String,
    pub points: Vec<TrajectoryPoint>,
    pub base_id: String,
}

#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub hyperparam: f64,
    pub shape_id: String,
}

impl Trajectory {
    pub fn new(method: String, mut points: Vec<TrajectoryPoint>, base_id: String) -> Result<Self> {
        points.sort_by(|a, b| {
            a.hyperparam
                .partial_cmp(&b.hyperparam)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in points.windows(2) {
            if w[1].hyperparam <= w[0].hyperparam {
                return Err(ShapeError::InvalidArgument(format!(
                    "trajectory {method:?}: hyperparams not strictly increasing at {} and {}",
                    w[0].shape_id, w[1].shape_id
                )));
            }
        }
        Ok(Self {
            method,
            points,
            base_id,
        })
    }

    /// Groups a manifest's representation entries into one trajectory per
    /// method label, ordered by hyperparameter. The base entry is excluded
    /// from every trajectory.
    pub fn group_from_manifest(manifest: &Manifest, base_id: &str) -> Result<Vec<Trajectory>> {
        manifest.entry(base_id)?;
        let mut by_method: BTreeMap<String, Vec<TrajectoryPoint>> = BTreeMap::new();
        for entry in manifest.representations() {
            if entry.id == base_id {
                continue;
            }
            by_method
                .entry(entry.method.clone())
                .or_default()
                .push(TrajectoryPoint {
                    hyperparam: entry.hyperparam,
                    shape_id: entry.id.clone(),
                });
        }
        by_method
            .into_iter()
            .map(|(method, points)| Trajectory::new(method, points, base_id.to_string()))
            .collect()
    }
}

/// Step-pairing rule for [`trajectory_mean_angle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// Pair step i of one trajectory with step i of the other. Requires
    /// equal lengths.
    Matched,
    /// Average over all (i, j) step combinations.
    Cartesian,
}

/// Mean angle between two trajectories plus bookkeeping about skipped
/// degenerate steps.
#[derive(Debug, Clone)]
pub struct MeanAngle {
    pub mean_deg: f64,
    pub pairs_used: usize,
    /// Shape ids whose tangent at the base was degenerate; their pairs are
    /// excluded from the mean.
    pub skipped: Vec<String>,
}

/// Mean geodesic angle at `base` between steps of two trajectories.
/// Tangents are computed once per step (in parallel); the mean sums pair
/// angles in index order, so results do not depend on thread count.
pub fn trajectory_mean_angle(
    traj_a: &Trajectory,
    traj_b: &Trajectory,
    base: &PreShape,
    shapes: &ShapeStore,
    pairing: Pairing,
) -> Result<MeanAngle> {
    if traj_a.points.is_empty() || traj_b.points.is_empty() {
        return Err(ShapeError::InsufficientData("empty trajectory".into()));
    }
    if pairing == Pairing::Matched && traj_a.points.len() != traj_b.points.len() {
        return Err(ShapeError::InvalidArgument(format!(
            "matched pairing needs equal lengths: {} has {} steps, {} has {}",
            traj_a.method,
            traj_a.points.len(),
            traj_b.method,
            traj_b.points.len()
        )));
    }

    let tangents_for = |traj: &Trajectory| -> Result<Vec<TangentVector>> {
        traj.points
            .par_iter()
            .map(|p| {
                let shape = shapes
                    .get(&p.shape_id)
                    .ok_or_else(|| ShapeError::MissingEntry(p.shape_id.clone()))?;
                tangent_at_reference(base, shape)
            })
            .collect()
    };
    let tangents_a = tangents_for(traj_a)?;
    let tangents_b = tangents_for(traj_b)?;

    let mut skipped: Vec<String> = Vec::new();
    for (t, p) in tangents_a.iter().zip(&traj_a.points) {
        if t.degenerate {
            skipped.push(p.shape_id.clone());
        }
    }
    for (t, p) in tangents_b.iter().zip(&traj_b.points) {
        if t.degenerate && !skipped.contains(&p.shape_id) {
            skipped.push(p.shape_id.clone());
        }
    }

    let pairs: Vec<(usize, usize)> = match pairing {
        Pairing::Matched => (0..tangents_a.len()).map(|i| (i, i)).collect(),
        Pairing::Cartesian => (0..tangents_a.len())
            .flat_map(|i| (0..tangents_b.len()).map(move |j| (i, j)))
            .collect(),
    };

    let mut sum = 0.0;
    let mut used = 0usize;
    for (i, j) in pairs {
        if tangents_a[i].degenerate || tangents_b[j].degenerate {
            continue;
        }
        sum += angle_between(&tangents_a[i], &tangents_b[j])?;
        used += 1;
    }
    if used == 0 {
        return Err(ShapeError::DegenerateDirection(
            "all trajectory steps".into(),
        ));
    }
    Ok(MeanAngle {
        mean_deg: sum / used as f64,
        pairs_used: used,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repstore::RepresentationMatrix;
    use approx::assert_abs_diff_eq;

    fn pre(rows: usize, cols: usize, data: &[f64]) -> PreShape {
        let x = RepresentationMatrix::new(DMatrix::from_row_slice(rows, cols, data)).unwrap();
        PreShape::from_matrix(&x).unwrap()
    }

    fn square() -> PreShape {
        pre(4, 2, &[1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0])
    }

    fn bent_square() -> PreShape {
        pre(4, 2, &[1.4, 1.3, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0])
    }

    #[test]
    fn geodesic_endpoints_are_exact() {
        let spec = GeodesicSpec::connect(&square(), &bent_square()).unwrap();
        let start = geodesic_point(&spec, 0.0).unwrap();
        let end = geodesic_point(&spec, 1.0).unwrap();
        for (a, b) in start.data().iter().zip(spec.z_from.data().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        for (a, b) in end.data().iter().zip(spec.z_to_aligned.data().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn geodesic_arc_length_parametrization() {
        let spec = GeodesicSpec::connect(&square(), &bent_square()).unwrap();
        for t in [0.25, 0.5, 0.75] {
            let point = geodesic_point(&spec, t).unwrap();
            let a = align(&point, &spec.z_from).unwrap();
            assert_abs_diff_eq!(a.rho, t * spec.rho, epsilon = 1e-8);
        }
    }

    #[test]
    fn geodesic_rejects_t_outside_unit_interval() {
        let spec = GeodesicSpec::connect(&square(), &bent_square()).unwrap();
        assert!(geodesic_point(&spec, -0.01).is_err());
        assert!(geodesic_point(&spec, 1.01).is_err());
    }

    #[test]
    fn near_identical_endpoints_interpolate_linearly() {
        let z = square();
        let spec = GeodesicSpec::connect(&z, &z).unwrap();
        assert!(spec.rho < RHO_IDENTICAL);
        let mid = geodesic_point(&spec, 0.5).unwrap();
        assert_abs_diff_eq!(mid.data().norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tangent_norm_is_rho() {
        let v = tangent_at_reference(&square(), &bent_square()).unwrap();
        assert!(!v.degenerate);
        assert_abs_diff_eq!(v.norm(), v.rho, epsilon = 1e-8);
        // Tangency to the sphere at the reference.
        assert_abs_diff_eq!(frob_inner(v.base.data(), &v.data), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn tangent_of_equivalent_shape_is_degenerate() {
        let z = square();
        let r = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let rotated = PreShape::from_raw_renormalized(z.data() * r).unwrap();
        let v = tangent_at_reference(&z, &rotated).unwrap();
        assert!(v.degenerate);
        assert_eq!(v.data.norm(), 0.0);
    }

    #[test]
    fn angle_of_shape_with_itself_is_zero() {
        let theta = geodesic_angle(&square(), &bent_square(), &bent_square()).unwrap();
        assert_abs_diff_eq!(theta, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn angle_is_symmetric_in_comparisons() {
        let other = pre(4, 2, &[1.0, 1.0, 1.3, -0.8, -1.0, -1.0, -1.0, 1.0]);
        let t1 = geodesic_angle(&square(), &bent_square(), &other).unwrap();
        let t2 = geodesic_angle(&square(), &other, &bent_square()).unwrap();
        assert_abs_diff_eq!(t1, t2, epsilon = 1e-9);
    }

    #[test]
    fn angle_errors_on_degenerate_comparison() {
        let z = square();
        assert!(matches!(
            geodesic_angle(&z, &z, &bent_square()),
            Err(ShapeError::DegenerateDirection(_))
        ));
    }

    fn store_with(entries: &[(&str, &PreShape)]) -> ShapeStore {
        entries
            .iter()
            .map(|(id, z)| (id.to_string(), (*z).clone()))
            .collect()
    }

    #[test]
    fn matched_mean_angle_of_same_trajectory_is_zero() {
        let s1 = bent_square();
        let s2 = pre(4, 2, &[1.7, 1.6, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0]);
        let store = store_with(&[("s1", &s1), ("s2", &s2)]);
        let points = vec![
            TrajectoryPoint {
                hyperparam: 0.1,
                shape_id: "s1".into(),
            },
            TrajectoryPoint {
                hyperparam: 0.2,
                shape_id: "s2".into(),
            },
        ];
        let traj = Trajectory::new("m".into(), points, "base".into()).unwrap();
        let res =
            trajectory_mean_angle(&traj, &traj, &square(), &store, Pairing::Matched).unwrap();
        assert_abs_diff_eq!(res.mean_deg, 0.0, epsilon = 1e-6);
        assert_eq!(res.pairs_used, 2);
    }

    #[test]
    fn single_step_mean_equals_geodesic_angle() {
        let s1 = bent_square();
        let s2 = pre(4, 2, &[1.0, 1.0, 1.3, -0.8, -1.0, -1.0, -1.0, 1.0]);
        let store = store_with(&[("a", &s1), ("b", &s2)]);
        let ta = Trajectory::new(
            "a".into(),
            vec![TrajectoryPoint {
                hyperparam: 0.1,
                shape_id: "a".into(),
            }],
            "base".into(),
        )
        .unwrap();
        let tb = Trajectory::new(
            "b".into(),
            vec![TrajectoryPoint {
                hyperparam: 0.1,
                shape_id: "b".into(),
            }],
            "base".into(),
        )
        .unwrap();
        let base = square();
        let res = trajectory_mean_angle(&ta, &tb, &base, &store, Pairing::Matched).unwrap();
        let direct = geodesic_angle(&base, &s1, &s2).unwrap();
        assert_abs_diff_eq!(res.mean_deg, direct, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_steps_are_skipped_not_fatal() {
        let base = square();
        let s1 = bent_square();
        let store = store_with(&[("dup", &base), ("ok", &s1)]);
        let mk = |ids: &[&str]| {
            Trajectory::new(
                "m".into(),
                ids.iter()
                    .enumerate()
                    .map(|(i, id)| TrajectoryPoint {
                        hyperparam: i as f64 + 1.0,
                        shape_id: id.to_string(),
                    })
                    .collect(),
                "base".into(),
            )
            .unwrap()
        };
        let ta = mk(&["dup", "ok"]);
        let tb = mk(&["ok", "ok"]);
        let res = trajectory_mean_angle(&ta, &tb, &base, &store, Pairing::Matched).unwrap();
        assert_eq!(res.pairs_used, 1);
        assert_eq!(res.skipped, vec!["dup".to_string()]);
        // All-degenerate fails.
        let bad = mk(&["dup"]);
        assert!(matches!(
            trajectory_mean_angle(&bad, &bad, &base, &store, Pairing::Matched),
            Err(ShapeError::DegenerateDirection(_))
        ));
    }

    #[test]
    fn trajectory_requires_strictly_increasing_hyperparams() {
        let points = vec![
            TrajectoryPoint {
                hyperparam: 0.2,
                shape_id: "a".into(),
            },
            TrajectoryPoint {
                hyperparam: 0.2,
                shape_id: "b".into(),
            },
        ];
        assert!(Trajectory::new("m".into(), points, "base".into()).is_err());
    }
}
