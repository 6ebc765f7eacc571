//! Seeded synthetic shape trajectories with known ground truth, so every
//! analysis in the toolkit can be checked end to end without training a
//! single model.
//!
//! Steps walk along an exact horizontal great circle from a random base
//! preshape, so the planted arc length and tangent direction are recovered
//! exactly by the shape machinery; nuisance transforms (rotation,
//! reflection, rescaling, translation) are layered on top per step and must
//! be removed by preshaping and alignment.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, ShapeError};
use crate::linalg::{center_columns, frob_inner, symmetric_eigen_sorted};
use crate::repstore::RepresentationMatrix;
use crate::shape::{shape_space_dim, PreShape};

/// Which nuisance transforms each generated step receives.
#[derive(Debug, Clone, Copy, Default)]
pub struct NuisanceFlags {
    pub rotate: bool,
    pub reflect: bool,
    pub translate: bool,
    pub scale: bool,
}

impl NuisanceFlags {
    pub fn all() -> Self {
        Self {
            rotate: true,
            reflect: true,
            translate: true,
            scale: true,
        }
    }
}

/// Recipe for one synthetic trajectory.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub m_landmarks: usize,
    pub n_units: usize,
    pub n_steps: usize,
    /// Arc length between consecutive steps, in radians of shape distance.
    /// Step t sits t * deform_scale from the base; keep
    /// (n_steps - 1) * deform_scale below pi/2 so distances stay in the
    /// aligned range.
    pub deform_scale: f64,
    pub nuisance: NuisanceFlags,
    pub rng_seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 2 {
            return Err(ShapeError::InvalidArgument(format!(
                "n_steps must be at least 2, got {}",
                self.n_steps
            )));
        }
        if self.deform_scale <= 0.0 || self.deform_scale.is_nan() {
            return Err(ShapeError::InvalidArgument(format!(
                "deform_scale must be positive, got {}",
                self.deform_scale
            )));
        }
        if self.m_landmarks < 2 || self.n_units < 1 {
            return Err(ShapeError::InvalidArgument(
                "need at least 2 landmarks and 1 unit".into(),
            ));
        }
        Ok(())
    }

    /// Planted arc length of each step from the base shape.
    pub fn step_magnitudes(&self) -> Vec<f64> {
        (0..self.n_steps)
            .map(|t| t as f64 * self.deform_scale)
            .collect()
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-ish random orthogonal matrix: QR of a Gaussian draw with the R
/// diagonal signs folded into Q. `det_plus_one` flips a column if needed so
/// the result is a pure rotation.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize, det_plus_one: bool) -> DMatrix<f64> {
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let qr = gaussian_matrix(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if det_plus_one && q.determinant() < 0.0 {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}

/// Projects `g` onto the horizontal tangent space of the preshape sphere at
/// `z`: centered, orthogonal to z, and with z^T h symmetric (no component
/// along the orthogonal-group orbit). Horizontal directions are exactly the
/// ones whose great circles project to shape-space geodesics.
fn horizontal_project(z: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let mut t = center_columns(g);
    let radial = frob_inner(z, &t);
    t -= z * radial;

    // Remove the vertical part z*A (A skew): solve SA + AS = z^T t - t^T z
    // with S = z^T z, diagonalizing S.
    let s = z.transpose() * z;
    let w = (z.transpose() * &t - t.transpose() * z) * 0.5;
    let (lambda, q) = symmetric_eigen_sorted(s);
    let w_tilde = q.transpose() * &w * &q;
    let n = lambda.len();
    let mut a_tilde = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let denom = lambda[i] + lambda[j];
            if denom > 1e-12 {
                a_tilde[(i, j)] = 2.0 * w_tilde[(i, j)] / denom;
            }
        }
    }
    let a = &q * a_tilde * q.transpose();
    t - z * a
}

/// Unit-norm horizontal direction at `z` from a fresh Gaussian draw.
fn horizontal_unit_direction(rng: &mut ChaCha8Rng, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    for _ in 0..16 {
        let g = gaussian_matrix(rng, z.nrows(), z.ncols());
        let h = horizontal_project(z, &g);
        let norm = h.norm();
        if norm > 1e-8 {
            return Ok(h / norm);
        }
    }
    Err(ShapeError::Numerical(
        "could not draw a horizontal direction; tangent space too small".into(),
    ))
}

fn apply_nuisance(
    rng: &mut ChaCha8Rng,
    point: &DMatrix<f64>,
    flags: &NuisanceFlags,
) -> DMatrix<f64> {
    let n = point.ncols();
    let mut out = point.clone();
    if flags.rotate || flags.reflect {
        let mut o = if flags.rotate {
            random_orthogonal(rng, n, true)
        } else {
            DMatrix::identity(n, n)
        };
        if flags.reflect && rng.random_bool(0.5) {
            for i in 0..n {
                o[(i, 0)] = -o[(i, 0)];
            }
        }
        out *= o;
    }
    if flags.scale {
        let factor: f64 = 0.5 + 2.0 * rng.random::<f64>();
        out *= factor;
    }
    if flags.translate {
        let offset: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for mut row in out.row_iter_mut() {
            for (j, &c) in offset.iter().enumerate() {
                row[j] += c;
            }
        }
    }
    out
}

fn walk_steps(
    rng: &mut ChaCha8Rng,
    z_base: &DMatrix<f64>,
    direction: &DMatrix<f64>,
    spec: &SynthSpec,
) -> Result<Vec<RepresentationMatrix>> {
    let mut out = Vec::with_capacity(spec.n_steps);
    for t in 0..spec.n_steps {
        let s = t as f64 * spec.deform_scale;
        // Exact great-circle point; t = 0 reproduces the base bit-for-bit.
        let point = if s.sin() == 0.0 {
            z_base.clone()
        } else {
            z_base * s.cos() + direction * s.sin()
        };
        let observed = apply_nuisance(rng, &point, &spec.nuisance);
        out.push(RepresentationMatrix::new(observed)?);
    }
    Ok(out)
}

/// One trajectory: step t is the base preshape moved t * deform_scale
/// radians along a fixed horizontal direction, then wrapped in the
/// requested per-step nuisance transforms. Fully reproducible from
/// `rng_seed`.
pub fn gen_trajectory(spec: &SynthSpec) -> Result<Vec<RepresentationMatrix>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let base = gaussian_matrix(&mut rng, spec.m_landmarks, spec.n_units);
    let z_base = PreShape::from_matrix(&RepresentationMatrix::new(base)?)?;
    let direction = horizontal_unit_direction(&mut rng, z_base.data())?;
    walk_steps(&mut rng, z_base.data(), &direction, spec)
}

/// Two trajectories from one base whose planted tangent directions subtend
/// `angle_target_deg` in the base's tangent space. The second direction is
/// mixed by Gram-Schmidt: d2 = cos(angle) d1 + sin(angle) h with h a unit
/// horizontal direction orthogonal to d1.
pub fn gen_two_direction_trajectories(
    spec: &SynthSpec,
    angle_target_deg: f64,
) -> Result<(Vec<RepresentationMatrix>, Vec<RepresentationMatrix>)> {
    spec.validate()?;
    if !(0.0..=90.0).contains(&angle_target_deg) {
        return Err(ShapeError::InvalidArgument(format!(
            "angle target {angle_target_deg} outside [0, 90] degrees"
        )));
    }
    if shape_space_dim(spec.m_landmarks, spec.n_units)? < 2 {
        return Err(ShapeError::InvalidArgument(format!(
            "shape space of {}x{} matrices has fewer than 2 dimensions",
            spec.m_landmarks, spec.n_units
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let base = gaussian_matrix(&mut rng, spec.m_landmarks, spec.n_units);
    let z_base = PreShape::from_matrix(&RepresentationMatrix::new(base)?)?;

    let d1 = horizontal_unit_direction(&mut rng, z_base.data())?;
    let d2 = {
        let mut ortho = None;
        for _ in 0..16 {
            let candidate = horizontal_unit_direction(&mut rng, z_base.data())?;
            let residual = &candidate - &d1 * frob_inner(&d1, &candidate);
            let norm = residual.norm();
            if norm > 1e-8 {
                ortho = Some(residual / norm);
                break;
            }
        }
        let ortho = ortho.ok_or_else(|| {
            ShapeError::Numerical("could not build an orthogonal second direction".into())
        })?;
        let theta = angle_target_deg.to_radians();
        &d1 * theta.cos() + ortho * theta.sin()
    };

    let traj_a = walk_steps(&mut rng, z_base.data(), &d1, spec)?;
    let traj_b = walk_steps(&mut rng, z_base.data(), &d2, spec)?;
    Ok((traj_a, traj_b))
}

/// Synthetic class-probability block: E models over M_eval inputs and C
/// classes, each model independently correct with probability `accuracy`.
/// Returns the per-model probability matrices and the labels.
pub fn gen_probability_block(
    n_models: usize,
    n_eval: usize,
    n_classes: usize,
    accuracy: f64,
    rng_seed: u64,
) -> Result<(Vec<DMatrix<f64>>, Vec<usize>)> {
    if n_models < 1 || n_eval < 1 || n_classes < 2 {
        return Err(ShapeError::InvalidArgument(
            "need at least 1 model, 1 input, and 2 classes".into(),
        ));
    }
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(ShapeError::InvalidArgument(format!(
            "accuracy {accuracy} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let labels: Vec<usize> = (0..n_eval).map(|_| rng.random_range(0..n_classes)).collect();
    let mut models = Vec::with_capacity(n_models);
    for _ in 0..n_models {
        let mut probs = DMatrix::zeros(n_eval, n_classes);
        for (i, &label) in labels.iter().enumerate() {
            let hit = rng.random_bool(accuracy);
            let winner = if hit {
                label
            } else {
                let mut other = rng.random_range(0..n_classes - 1);
                if other >= label {
                    other += 1;
                }
                other
            };
            let confidence = 0.55 + 0.4 * rng.random::<f64>();
            let rest = (1.0 - confidence) / (n_classes - 1) as f64;
            for j in 0..n_classes {
                probs[(i, j)] = if j == winner { confidence } else { rest };
            }
        }
        models.push(probs);
    }
    Ok((models, labels))
}
