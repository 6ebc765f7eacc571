//! Statistical analyses over shapes: ridge prediction of augmentation
//! hyperparameters with leave-one-shape-out cross-validation, the
//! augmentation-versus-seed distance scales, soft-voting ensembles, and
//! the angle/gain correlation.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ShapeError};
use crate::npy::NpyArray;
use crate::repstore::RepresentationMatrix;
use crate::shape::{align, shape_distance, PreShape};

/// Flattened aligned preshapes (rows) with the hyperparameter value each
/// one was trained at.
#[derive(Debug, Clone)]
pub struct AlignedDesign {
    /// S x (M*N), row s = row-major flattening of Z_s O*_s.
    pub features: DMatrix<f64>,
    pub targets: Vec<f64>,
    pub ref_id: String,
}

/// Aligns every shape onto the reference and flattens it into a feature
/// row. O*_s maximizes Tr[ref^T Z_s O], so all rows share the reference's
/// orientation.
pub fn build_aligned_design(
    shapes: &[&PreShape],
    targets: &[f64],
    reference: &PreShape,
    ref_id: &str,
) -> Result<AlignedDesign> {
    if shapes.len() != targets.len() {
        return Err(ShapeError::InvalidArgument(format!(
            "{} shapes but {} targets",
            shapes.len(),
            targets.len()
        )));
    }
    let (m, n) = (reference.m_landmarks(), reference.n_units());
    let rows: Vec<Vec<f64>> = shapes
        .par_iter()
        .map(|z| -> Result<Vec<f64>> {
            let alignment = align(z, reference)?;
            let aligned = z.data() * &alignment.o_star;
            let mut row = Vec::with_capacity(m * n);
            for i in 0..m {
                row.extend(aligned.row(i).iter().copied());
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(AlignedDesign {
        features: DMatrix::from_row_slice(shapes.len(), m * n, &flat),
        targets: targets.to_vec(),
        ref_id: ref_id.to_string(),
    })
}

/// Scale-free default ridge penalty: 1e-3 times the mean diagonal of the
/// sample Gram matrix.
pub fn default_ridge_lambda(design: &AlignedDesign) -> f64 {
    let s = design.features.nrows();
    let mean_diag = (0..s)
        .map(|i| design.features.row(i).norm_squared())
        .sum::<f64>()
        / s as f64;
    1e-3 * mean_diag
}

#[derive(Debug, Clone, Serialize)]
pub struct LooPrediction {
    pub predictions: Vec<f64>,
    pub r2: f64,
    /// Targets had zero variance; r2 is 0 by convention.
    pub constant_targets: bool,
}

/// Leave-one-shape-out ridge regression of the targets on the aligned
/// features, solved in the dual: the feature count M*N dwarfs the sample
/// count, so each fold solves an (S-1) x (S-1) system on the Gram matrix
/// instead. The intercept is unpenalized, handled by centering features
/// and targets within each training fold. Folds are independent and run
/// in parallel; predictions are gathered in fold order.
pub fn ridge_loo(design: &AlignedDesign, lambda: f64) -> Result<LooPrediction> {
    if lambda <= 0.0 {
        return Err(ShapeError::InvalidArgument(format!(
            "ridge lambda must be positive, got {lambda}"
        )));
    }
    let s = design.features.nrows();
    if s < 3 {
        return Err(ShapeError::InsufficientData(format!(
            "leave-one-out needs at least 3 shapes, got {s}"
        )));
    }
    let gram = &design.features * design.features.transpose();
    let y = &design.targets;

    let predictions: Vec<f64> = (0..s)
        .into_par_iter()
        .map(|held| -> Result<f64> {
            let train: Vec<usize> = (0..s).filter(|&t| t != held).collect();
            let t = train.len();
            let y_mean = train.iter().map(|&i| y[i]).sum::<f64>() / t as f64;

            // Double-center the training Gram block: equivalent to
            // subtracting the training-mean feature row from every row.
            let row_mean: Vec<f64> = train
                .iter()
                .map(|&a| train.iter().map(|&b| gram[(a, b)]).sum::<f64>() / t as f64)
                .collect();
            let grand = row_mean.iter().sum::<f64>() / t as f64;
            let mut system = DMatrix::zeros(t, t);
            for (p, &a) in train.iter().enumerate() {
                for (q, &b) in train.iter().enumerate() {
                    system[(p, q)] = gram[(a, b)] - row_mean[p] - row_mean[q] + grand;
                }
                system[(p, p)] += lambda;
            }
            let rhs = DVector::from_iterator(t, train.iter().map(|&i| y[i] - y_mean));
            let alpha = Cholesky::new(system)
                .ok_or_else(|| {
                    ShapeError::Numerical("ridge system is not positive definite".into())
                })?
                .solve(&rhs);

            let held_mean = train.iter().map(|&b| gram[(held, b)]).sum::<f64>() / t as f64;
            let cross: f64 = train
                .iter()
                .enumerate()
                .map(|(p, &b)| (gram[(held, b)] - held_mean - row_mean[p] + grand) * alpha[p])
                .sum();
            Ok(y_mean + cross)
        })
        .collect::<Result<_>>()?;

    let y_bar = y.iter().sum::<f64>() / s as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - y_bar) * (v - y_bar)).sum();
    let ss_res: f64 = y
        .iter()
        .zip(&predictions)
        .map(|(v, p)| (v - p) * (v - p))
        .sum();
    let scale: f64 = y.iter().map(|v| v * v).sum::<f64>().max(1e-300);
    let constant_targets = ss_tot <= 1e-28 * scale;
    let r2 = if constant_targets {
        0.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LooPrediction {
        predictions,
        r2,
        constant_targets,
    })
}

/// The two distance scales of one (hyperparameter level, seed pair) cell:
/// how far augmentation moved each seed's representation versus how far
/// the seeds are from each other.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalePair {
    pub d_aug: f64,
    pub d_seed: f64,
    pub hyperparam: f64,
    pub seed_pair: (i64, i64),
}

/// d_aug = (rho(X0_i, Xp_i) + rho(X0_j, Xp_j)) / 2 and
/// d_seed = (rho(X0_i, X0_j) + rho(Xp_i, Xp_j)) / 2, where X0 is the
/// un-augmented representation and Xp the one trained at hyperparameter p.
pub fn aug_seed_scales(
    x0_i: &RepresentationMatrix,
    xp_i: &RepresentationMatrix,
    x0_j: &RepresentationMatrix,
    xp_j: &RepresentationMatrix,
    hyperparam: f64,
    seed_pair: (i64, i64),
) -> Result<ScalePair> {
    let d_aug = 0.5 * (shape_distance(x0_i, xp_i)? + shape_distance(x0_j, xp_j)?);
    let d_seed = 0.5 * (shape_distance(x0_i, x0_j)? + shape_distance(xp_i, xp_j)?);
    Ok(ScalePair {
        d_aug,
        d_seed,
        hyperparam,
        seed_pair,
    })
}

/// Predicted class probabilities of E models over a shared evaluation set,
/// with the true labels.
#[derive(Debug, Clone)]
pub struct ProbabilityBlock {
    models: Vec<DMatrix<f64>>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl ProbabilityBlock {
    /// Validates that every model covers the same evaluation inputs and
    /// classes, rows are probability vectors (non-negative, summing to 1
    /// within 1e-6), and labels are valid class indices.
    pub fn new(models: Vec<DMatrix<f64>>, labels: Vec<usize>) -> Result<Self> {
        let n_classes = models.first().map(|m| m.ncols()).unwrap_or(0);
        for (e, model) in models.iter().enumerate() {
            if model.nrows() != labels.len() || model.ncols() != n_classes {
                return Err(ShapeError::DimensionMismatch {
                    left_rows: model.nrows(),
                    left_cols: model.ncols(),
                    right_rows: labels.len(),
                    right_cols: n_classes,
                    context: format!(" (model {e} vs labels/classes)"),
                });
            }
            for i in 0..model.nrows() {
                let mut sum = 0.0;
                for j in 0..n_classes {
                    let p = model[(i, j)];
                    if p < 0.0 {
                        return Err(ShapeError::InvalidArgument(format!(
                            "model {e} has negative probability at input {i}, class {j}"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > 1e-6 {
                    return Err(ShapeError::InvalidArgument(format!(
                        "model {e}, input {i}: probabilities sum to {sum:.8}, not 1"
                    )));
                }
            }
        }
        if !models.is_empty() {
            if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
                return Err(ShapeError::InvalidArgument(format!(
                    "label {bad} out of range for {n_classes} classes"
                )));
            }
        }
        Ok(Self {
            models,
            labels,
            n_classes,
        })
    }

    /// Builds a block from an E x M x C tensor (or a single M x C matrix,
    /// treated as one model).
    pub fn from_npy(tensor: &NpyArray, labels: Vec<usize>) -> Result<Self> {
        let (e, m, c) = match tensor.shape.len() {
            3 => (tensor.shape[0], tensor.shape[1], tensor.shape[2]),
            2 => (1, tensor.shape[0], tensor.shape[1]),
            r => return Err(ShapeError::RankTooLow { rank: r }),
        };
        let models = (0..e)
            .map(|k| DMatrix::from_row_slice(m, c, &tensor.data[k * m * c..(k + 1) * m * c]))
            .collect();
        Self::new(models, labels)
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Union of two blocks over the same evaluation set.
    pub fn concat(&self, other: &ProbabilityBlock) -> Result<ProbabilityBlock> {
        if self.labels != other.labels {
            return Err(ShapeError::InvalidArgument(
                "label mismatch between ensemble sides".into(),
            ));
        }
        let mut models = self.models.clone();
        models.extend(other.models.iter().cloned());
        ProbabilityBlock::new(models, self.labels.clone())
    }
}

/// Soft-voting ensemble: average the class probabilities over all models,
/// then take the argmax (ties to the lowest class index). Returns the
/// predicted classes and the accuracy against the block's labels.
pub fn ensemble_soft_vote(block: &ProbabilityBlock) -> Result<(Vec<usize>, f64)> {
    if block.models.is_empty() {
        return Err(ShapeError::EmptyEnsemble);
    }
    let m = block.labels.len();
    let e = block.models.len() as f64;
    let mut predicted = Vec::with_capacity(m);
    let mut correct = 0usize;
    for i in 0..m {
        let mut best_class = 0usize;
        let mut best_p = f64::NEG_INFINITY;
        for j in 0..block.n_classes {
            let p: f64 = block.models.iter().map(|model| model[(i, j)]).sum::<f64>() / e;
            if p > best_p {
                best_p = p;
                best_class = j;
            }
        }
        if best_class == block.labels[i] {
            correct += 1;
        }
        predicted.push(best_class);
    }
    Ok((predicted, correct as f64 / m as f64))
}

/// Ensemble gain: accuracy of the soft-voting union of both blocks minus
/// the mean accuracy of every constituent model on its own.
pub fn ensemble_gain(block_a: &ProbabilityBlock, block_b: &ProbabilityBlock) -> Result<f64> {
    if block_a.models.is_empty() || block_b.models.is_empty() {
        return Err(ShapeError::EmptyEnsemble);
    }
    let union = block_a.concat(block_b)?;
    let (_, acc_ens) = ensemble_soft_vote(&union)?;
    let mut acc_sum = 0.0;
    for model in union.models.iter() {
        let single = ProbabilityBlock {
            models: vec![model.clone()],
            labels: union.labels.clone(),
            n_classes: union.n_classes,
        };
        acc_sum += ensemble_soft_vote(&single)?.1;
    }
    Ok(acc_ens - acc_sum / union.models.len() as f64)
}

/// Pearson and Spearman correlation between geodesic angles and ensemble
/// gains. Spearman uses average ranks for ties.
pub fn angle_gain_correlation(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.len() < 3 {
        return Err(ShapeError::InsufficientData(format!(
            "correlation needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    let angles: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let gains: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let pearson = pearson_correlation(&angles, &gains)?;
    let spearman = pearson_correlation(&average_ranks(&angles), &average_ranks(&gains))?;
    Ok((pearson, spearman))
}

fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 {
        return Err(ShapeError::ZeroVariance("angles".into()));
    }
    if syy <= 0.0 {
        return Err(ShapeError::ZeroVariance("gains".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // 1-based ranks; tied values share the mean rank of their run.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}
