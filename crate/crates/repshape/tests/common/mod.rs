#![allow(dead_code)]

//! Shared oracles and fixtures. Everything here recomputes results through
//! routes independent of the library's implementation paths.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use repshape::repstore::RepresentationMatrix;
use repshape::shape::PreShape;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_rep(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RepresentationMatrix {
    RepresentationMatrix::new(gaussian(rng, rows, cols)).unwrap()
}

pub fn random_preshape(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> PreShape {
    PreShape::from_matrix(&random_rep(rng, rows, cols)).unwrap()
}

/// Brute-force shape distance for N = 2: scan the rotation angle over a
/// uniform grid crossed with reflection, entirely bypassing the SVD.
pub fn grid_distance_2d(z_i: &PreShape, z_j: &PreShape, steps: usize) -> f64 {
    let a = z_j.data().transpose() * z_i.data();
    let mut best = f64::NEG_INFINITY;
    for k in 0..steps {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
        let (c, s) = (phi.cos(), phi.sin());
        // Rotation [[c, -s], [s, c]].
        let rot = a[(0, 0)] * c + a[(0, 1)] * s - a[(1, 0)] * s + a[(1, 1)] * c;
        // Reflection [[c, s], [s, -c]].
        let refl = a[(0, 0)] * c + a[(0, 1)] * s + a[(1, 0)] * s - a[(1, 1)] * c;
        best = best.max(rot).max(refl);
    }
    best.clamp(-1.0, 1.0).acos()
}

/// Primal closed-form ridge with per-fold centering of features and
/// targets: w = (X^T X + l I)^-1 X^T y on centered data, prediction
/// y_bar + (x - x_bar) w. Independent of the library's dual solve.
pub fn primal_ridge_loo(features: &DMatrix<f64>, targets: &[f64], lambda: f64) -> Vec<f64> {
    let s = features.nrows();
    let f = features.ncols();
    let mut predictions = Vec::with_capacity(s);
    for held in 0..s {
        let train: Vec<usize> = (0..s).filter(|&t| t != held).collect();
        let t = train.len();
        let mut x = DMatrix::zeros(t, f);
        for (p, &row) in train.iter().enumerate() {
            x.row_mut(p).copy_from(&features.row(row));
        }
        let y_mean = train.iter().map(|&i| targets[i]).sum::<f64>() / t as f64;
        let col_means: Vec<f64> = (0..f).map(|j| x.column(j).sum() / t as f64).collect();
        for p in 0..t {
            for j in 0..f {
                x[(p, j)] -= col_means[j];
            }
        }
        let y = nalgebra::DVector::from_iterator(t, train.iter().map(|&i| targets[i] - y_mean));
        let mut normal = x.transpose() * &x;
        for j in 0..f {
            normal[(j, j)] += lambda;
        }
        let w = normal
            .try_inverse()
            .expect("oracle normal equations must be invertible")
            * (x.transpose() * y);
        let mut dot = 0.0;
        for j in 0..f {
            dot += (features[(held, j)] - col_means[j]) * w[j];
        }
        predictions.push(y_mean + dot);
    }
    predictions
}

/// Spearman rank correlation with average ranks, written independently of
/// the library's version.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut out = vec![0.0; n];
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Random orthogonal matrix for constructing invariance-class pairs in
/// tests; QR of a Gaussian draw with sign-fixed diagonal.
pub fn test_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let qr = gaussian(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}
