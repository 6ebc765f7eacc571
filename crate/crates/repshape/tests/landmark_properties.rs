//! Displacement-field identities and oracle comparisons.

mod common;

use approx::assert_abs_diff_eq;
use common::*;
use repshape::landmark::{
    classify_contract_expand, displacement_field, displacement_pca, rank_landmarks,
    DisplacementField, MotionLabel,
};
use repshape::shape::{align, PreShape};

#[test]
fn chordal_identity_on_random_pairs() {
    let mut rng = rng(40);
    for _ in 0..20 {
        let z_a = random_preshape(&mut rng, 14, 4);
        let z_b = random_preshape(&mut rng, 14, 4);
        let field = displacement_field(&z_a, &z_b, "a", "b").unwrap();
        assert_abs_diff_eq!(
            field.delta.norm_squared(),
            2.0 - 2.0 * field.rho.cos(),
            epsilon = 1e-8
        );
        let agreed = align(&z_b, &z_a).unwrap().rho;
        assert_abs_diff_eq!(field.rho, agreed, epsilon = 1e-12);
    }
}

#[test]
fn ranking_matches_full_sort_oracle() {
    let mut rng = rng(41);
    let z_a = random_preshape(&mut rng, 100, 6);
    let z_b = random_preshape(&mut rng, 100, 6);
    let field = displacement_field(&z_a, &z_b, "a", "b").unwrap();
    let (top, bottom, ranking) = rank_landmarks(&field, 10).unwrap();

    // Oracle: recompute row norms directly and sort them exhaustively.
    let mags: Vec<f64> = (0..100)
        .map(|i| {
            (0..6)
                .map(|j| field.delta[(i, j)] * field.delta[(i, j)])
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let mut by_desc: Vec<usize> = (0..100).collect();
    by_desc.sort_by(|&a, &b| mags[b].partial_cmp(&mags[a]).unwrap().then(a.cmp(&b)));
    let mut by_asc: Vec<usize> = (0..100).collect();
    by_asc.sort_by(|&a, &b| mags[a].partial_cmp(&mags[b]).unwrap().then(a.cmp(&b)));

    assert_eq!(top, by_desc[..10].to_vec());
    assert_eq!(bottom, by_asc[..10].to_vec());
    assert_eq!(ranking.order, by_desc);
    for (rank_pos, &idx) in ranking.order.iter().enumerate() {
        assert_eq!(ranking.magnitudes[rank_pos], mags[idx]);
    }
}

#[test]
fn classification_survives_common_orthogonal_transform() {
    let mut rng = rng(42);
    let z_a = random_preshape(&mut rng, 20, 4);
    let z_b = random_preshape(&mut rng, 20, 4);
    let aligned = {
        let a = align(&z_b, &z_a).unwrap();
        PreShape::from_raw_renormalized(z_b.data() * &a.o_star).unwrap()
    };
    let indices: Vec<usize> = (0..20).collect();
    let labels = classify_contract_expand(&z_a, &aligned, &indices).unwrap();

    let q = test_orthogonal(&mut rng, 4);
    let z_a_q = PreShape::from_raw_renormalized(z_a.data() * &q).unwrap();
    let aligned_q = PreShape::from_raw_renormalized(aligned.data() * &q).unwrap();
    let labels_q = classify_contract_expand(&z_a_q, &aligned_q, &indices).unwrap();
    for (a, b) in labels.iter().zip(&labels_q) {
        assert_eq!(a.label, b.label, "landmark {} flipped", a.index);
    }
}

#[test]
fn displacement_pca_matches_full_eigendecomposition() {
    let mut rng = rng(43);
    let delta = gaussian(&mut rng, 200, 20);
    let field = DisplacementField {
        delta: delta.clone(),
        ref_id: "a".into(),
        cmp_id: "b".into(),
        rho: 0.3,
    };
    let out = displacement_pca(&field, false).unwrap();

    // Oracle: eigenvalues of the covariance of centered rows, full
    // spectrum, computed through the covariance route rather than SVD.
    let m = 200;
    let mut centered = delta;
    for j in 0..20 {
        let mean = centered.column(j).sum() / m as f64;
        for i in 0..m {
            centered[(i, j)] -= mean;
        }
    }
    let cov = centered.transpose() * &centered;
    let eig = cov.symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let total: f64 = values.iter().sum();

    assert_abs_diff_eq!(out.explained_variance[0], values[0] / total, epsilon = 1e-9);
    assert_abs_diff_eq!(out.explained_variance[1], values[1] / total, epsilon = 1e-9);
    assert!(!out.rank_deficient);
}

#[test]
fn row_normalized_pca_uses_unit_rows() {
    let mut rng = rng(44);
    let z_a = random_preshape(&mut rng, 30, 5);
    let z_b = random_preshape(&mut rng, 30, 5);
    let field = displacement_field(&z_a, &z_b, "a", "b").unwrap();
    let out = displacement_pca(&field, true).unwrap();
    assert_eq!(out.kept_rows.len(), 30);
    // Scores project the centered unit rows onto orthonormal axes; a unit
    // row minus the mean row has norm at most 2.
    for i in 0..out.scores.nrows() {
        assert!(out.scores.row(i).norm() <= 2.0 + 1e-9);
    }
    // The axes themselves are orthonormal.
    let gram = out.components.transpose() * &out.components;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(gram[(i, j)], expect, epsilon = 1e-10);
        }
    }
}

#[test]
fn expanded_and_contracted_partition_when_no_ties() {
    let mut rng = rng(45);
    let z_a = random_preshape(&mut rng, 25, 3);
    let z_b = random_preshape(&mut rng, 25, 3);
    let aligned = {
        let a = align(&z_b, &z_a).unwrap();
        PreShape::from_raw_renormalized(z_b.data() * &a.o_star).unwrap()
    };
    let indices: Vec<usize> = (0..25).collect();
    let labels = classify_contract_expand(&z_a, &aligned, &indices).unwrap();
    let contracted = labels
        .iter()
        .filter(|l| l.label == MotionLabel::Contracted)
        .count();
    let expanded = labels
        .iter()
        .filter(|l| l.label == MotionLabel::Expanded)
        .count();
    assert_eq!(contracted + expanded, 25);
    assert!(labels.iter().all(|l| !l.tie), "random draws should not tie");
}

#[test]
fn zero_displacement_norm_squared_is_sum_of_row_norms() {
    let mut rng = rng(46);
    let delta = gaussian(&mut rng, 40, 7);
    let field = DisplacementField {
        delta,
        ref_id: "a".into(),
        cmp_id: "b".into(),
        rho: 0.2,
    };
    let sum_sq: f64 = field.magnitudes().iter().map(|v| v * v).sum();
    let direct = field.delta.norm_squared();
    assert_abs_diff_eq!(sum_sq, direct, epsilon = 1e-12 * direct.max(1.0));
}
