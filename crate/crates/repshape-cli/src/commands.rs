//! The eight batch commands. Each one reads its inputs through the
//! manifest, runs the corresponding analysis, and writes fixed-name output
//! files plus a provenance block into the output directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use repshape::analyze::{
    aug_seed_scales, build_aligned_design, default_ridge_lambda, ensemble_gain,
    ensemble_soft_vote, angle_gain_correlation, ridge_loo, ProbabilityBlock, ScalePair,
};
use repshape::geodesic::{trajectory_mean_angle, Pairing, ShapeStore, Trajectory};
use repshape::landmark::{
    classify_contract_expand, displacement_field, displacement_pca, magnitude_histogram,
    rank_landmarks,
};
use repshape::mds::{classical_mds, pca_axes};
use repshape::npy::read_npy;
use repshape::repstore::{
    load_csv_matrix, load_manifest, load_matrix, reduce_dims, save_matrix, EntryRole, Manifest,
    ManifestEntry, MatrixFormat, RepresentationMatrix,
};
use repshape::shape::{distance_matrix, DistanceMatrix, PreShape};
use repshape::synth::{
    gen_trajectory, gen_two_direction_trajectories, NuisanceFlags, SynthSpec,
};
use repshape::{Result, ShapeError};
use serde::Serialize;
use serde_json::json;

use crate::config::{AlignedMode, OutputFormat, RunConfig};
use crate::provenance::write_provenance;

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| ShapeError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    write_text(path, &text)
}

fn ensure_output_dir(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| ShapeError::Io {
        path: cfg.output_dir.clone(),
        source: e,
    })
}

fn load_entry_matrix(entry: &ManifestEntry, cfg: &RunConfig) -> Result<RepresentationMatrix> {
    let loaded = match MatrixFormat::from_path(&entry.path) {
        MatrixFormat::Npy => load_matrix(&entry.path, MatrixFormat::Npy),
        MatrixFormat::Csv => load_csv_matrix(&entry.path, cfg.csv_header),
    };
    loaded.map_err(|e| e.for_entry(&entry.id))
}

/// Loads every representation entry, reduces it to `reduce_k` principal
/// components, and reconciles unit counts (zero-padding if allowed).
fn load_reduced_matrices(
    manifest: &Manifest,
    cfg: &RunConfig,
) -> Result<Vec<(String, RepresentationMatrix)>> {
    let mut out = Vec::new();
    for entry in manifest.representations() {
        let raw = load_entry_matrix(entry, cfg)?;
        let (reduced, report) = reduce_dims(&raw, cfg.reduce_k).map_err(|e| e.for_entry(&entry.id))?;
        if report.below_variance_target() {
            eprintln!(
                "warning: entry \"{}\": kept {} components explaining only {:.1}% of variance",
                entry.id,
                report.kept_components,
                report.variance_fraction * 100.0
            );
        }
        out.push((entry.id.clone(), reduced));
    }
    if out.is_empty() {
        return Err(ShapeError::InsufficientData(
            "manifest has no representation entries".into(),
        ));
    }
    let widths: BTreeSet<usize> = out.iter().map(|(_, x)| x.n_units()).collect();
    if widths.len() > 1 {
        if !cfg.zero_pad {
            let narrow = out.iter().min_by_key(|(_, x)| x.n_units()).unwrap();
            let wide = out.iter().max_by_key(|(_, x)| x.n_units()).unwrap();
            return Err(ShapeError::InvalidArgument(format!(
                "unit counts differ after reduction: \"{}\" has {} but \"{}\" has {}; \
                 pass --zero-pad to pad the narrower matrices",
                narrow.0,
                narrow.1.n_units(),
                wide.0,
                wide.1.n_units()
            )));
        }
        let max = *widths.iter().max().unwrap();
        for (id, x) in out.iter_mut() {
            if x.n_units() < max {
                *x = x.zero_pad_to(max).map_err(|e| e.for_entry(id))?;
            }
        }
    }
    Ok(out)
}

fn preshape_all(matrices: &[(String, RepresentationMatrix)]) -> Result<Vec<(String, PreShape)>> {
    matrices
        .iter()
        .map(|(id, x)| {
            PreShape::from_matrix(x)
                .map(|z| (id.clone(), z))
                .map_err(|e| e.for_entry(id))
        })
        .collect()
}

fn store_from(shapes: &[(String, PreShape)]) -> ShapeStore {
    shapes.iter().cloned().collect()
}

fn manifest_inputs(manifest_path: &Path, manifest: &Manifest) -> Vec<PathBuf> {
    let mut inputs = vec![manifest_path.to_path_buf()];
    inputs.extend(manifest.entries.iter().map(|e| e.path.clone()));
    inputs
}

fn write_matrix_outputs(
    cfg: &RunConfig,
    stem: &str,
    matrix: &DistanceMatrix,
) -> Result<Vec<String>> {
    let mut written = Vec::new();
    if cfg.format.wants_csv() {
        let path = cfg.output_dir.join(format!("{stem}.csv"));
        write_text(&path, &matrix.to_csv())?;
        written.push(format!("{stem}.csv"));
    }
    if cfg.format.wants_json() {
        let path = cfg.output_dir.join(format!("{stem}.json"));
        write_text(&path, &matrix.to_json())?;
        written.push(format!("{stem}.json"));
    }
    Ok(written)
}

pub fn cmd_distmat(cfg: &RunConfig) -> Result<()> {
    let manifest_path = cfg.manifest_path()?;
    let manifest = load_manifest(manifest_path)?;
    let matrices = load_reduced_matrices(&manifest, cfg)?;
    let shapes = preshape_all(&matrices)?;
    ensure_output_dir(cfg)?;

    let variants: &[(&str, bool)] = match cfg.aligned {
        AlignedMode::On => &[("distmat_aligned", true)],
        AlignedMode::Off => &[("distmat_unaligned", false)],
        AlignedMode::Both => &[("distmat_aligned", true), ("distmat_unaligned", false)],
    };
    for (stem, aligned) in variants {
        let d = distance_matrix(&shapes, *aligned)?;
        write_matrix_outputs(cfg, stem, &d)?;
    }
    write_provenance(
        "distmat",
        cfg,
        &manifest_inputs(manifest_path, &manifest),
        &cfg.output_dir,
    )
}

pub fn cmd_embed(cfg: &RunConfig, distmat_file: Option<&Path>) -> Result<()> {
    let (distances, manifest, inputs) = match distmat_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ShapeError::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            let d = if path.extension().and_then(|e| e.to_str()) == Some("json") {
                DistanceMatrix::from_json(&text)?
            } else {
                DistanceMatrix::from_csv(&text)?
            };
            let manifest = match cfg.manifest_path.as_deref() {
                Some(mp) => Some(load_manifest(mp)?),
                None => None,
            };
            (d, manifest, vec![path.to_path_buf()])
        }
        None => {
            let manifest_path = cfg.manifest_path()?;
            let manifest = load_manifest(manifest_path)?;
            let matrices = load_reduced_matrices(&manifest, cfg)?;
            let shapes = preshape_all(&matrices)?;
            let aligned = cfg.aligned != AlignedMode::Off;
            let d = distance_matrix(&shapes, aligned)?;
            let inputs = manifest_inputs(manifest_path, &manifest);
            (d, Some(manifest), inputs)
        }
    };

    let k = distances.len();
    let capped = cfg.mds_dim > k.saturating_sub(1);
    if capped {
        eprintln!(
            "warning: mds_dim {} capped at {} (K - 1) for {} shapes",
            cfg.mds_dim,
            k - 1,
            k
        );
    }
    let emb = classical_mds(&distances, cfg.mds_dim)?;
    // Principal-axis view of the coordinates; identical content for
    // classical MDS up to the sign convention.
    let coords = pca_axes(&emb, emb.d)?;

    ensure_output_dir(cfg)?;
    let lookup = |id: &str| -> (String, String, String) {
        match manifest.as_ref().and_then(|m| m.entry(id).ok()) {
            Some(e) => (
                e.method.clone(),
                format!("{:.16e}", e.hyperparam),
                e.seed.to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        }
    };

    if cfg.format.wants_csv() {
        let mut text = String::from("id,method,hyperparam,seed");
        for j in 0..emb.d {
            text.push_str(&format!(",x{}", j + 1));
        }
        text.push('\n');
        for (i, id) in distances.ids.iter().enumerate() {
            let (method, hyper, seed) = lookup(id);
            text.push_str(&format!("{id},{method},{hyper},{seed}"));
            for j in 0..emb.d {
                text.push_str(&format!(",{:.16e}", coords[(i, j)]));
            }
            text.push('\n');
        }
        write_text(&cfg.output_dir.join("embedding.csv"), &text)?;
    }
    if cfg.format.wants_json() {
        let points: Vec<serde_json::Value> = distances
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let (method, _, seed) = lookup(id);
                let hyper = manifest
                    .as_ref()
                    .and_then(|m| m.entry(id).ok())
                    .map(|e| e.hyperparam);
                json!({
                    "id": id,
                    "method": method,
                    "hyperparam": hyper,
                    "seed": seed,
                    "coords": (0..emb.d).map(|j| coords[(i, j)]).collect::<Vec<f64>>(),
                })
            })
            .collect();
        write_json(&cfg.output_dir.join("embedding.json"), &json!({ "points": points }))?;
    }
    write_json(
        &cfg.output_dir.join("embedding_report.json"),
        &json!({
            "d": emb.d,
            "requested_d": cfg.mds_dim,
            "capped": capped,
            "eigenvalues": emb.eigenvalues,
            "stress": emb.stress,
            "negative_eigenvalue_mass": emb.negative_mass,
        }),
    )?;
    write_provenance("embed", cfg, &inputs, &cfg.output_dir)
}

pub fn cmd_angles(cfg: &RunConfig, base_id: &str) -> Result<()> {
    let manifest_path = cfg.manifest_path()?;
    let manifest = load_manifest(manifest_path)?;
    let matrices = load_reduced_matrices(&manifest, cfg)?;
    let shapes = preshape_all(&matrices)?;
    let store = store_from(&shapes);
    let base = store
        .get(base_id)
        .ok_or_else(|| ShapeError::MissingEntry(base_id.to_string()))?
        .clone();

    let trajectories = Trajectory::group_from_manifest(&manifest, base_id)?;
    if trajectories.is_empty() {
        return Err(ShapeError::InsufficientData(
            "no trajectories besides the base entry".into(),
        ));
    }
    let pairing = if cfg.cartesian_pairs {
        Pairing::Cartesian
    } else {
        Pairing::Matched
    };

    let n = trajectories.len();
    let mut values = repshape::nalgebra::DMatrix::zeros(n, n);
    let mut records = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let out = trajectory_mean_angle(&trajectories[i], &trajectories[j], &base, &store, pairing)?;
            for id in &out.skipped {
                eprintln!(
                    "warning: step \"{id}\" is in the base shape class; skipped from the mean"
                );
            }
            let value = cfg.angle_units.convert_degrees(out.mean_deg);
            values[(i, j)] = value;
            values[(j, i)] = value;
            records.push(json!({
                "method_a": trajectories[i].method,
                "method_b": trajectories[j].method,
                "mean_angle": value,
                "pairs_used": out.pairs_used,
                "skipped": out.skipped,
            }));
        }
    }
    let ids: Vec<String> = trajectories.iter().map(|t| t.method.clone()).collect();
    let matrix = DistanceMatrix::new(ids, values)?;

    ensure_output_dir(cfg)?;
    write_matrix_outputs(cfg, "angles", &matrix)?;
    write_json(
        &cfg.output_dir.join("angles_report.json"),
        &json!({
            "base_id": base_id,
            "pairing": if cfg.cartesian_pairs { "cartesian" } else { "matched" },
            "units": cfg.angle_units,
            "pairs": records,
        }),
    )?;
    write_provenance(
        "angles",
        cfg,
        &manifest_inputs(manifest_path, &manifest),
        &cfg.output_dir,
    )
}

pub fn cmd_landmarks(
    cfg: &RunConfig,
    ref_id: &str,
    cmp_id: &str,
    top_k: usize,
    bins: Option<usize>,
    raw_rows: bool,
    class_labels: Option<&str>,
) -> Result<()> {
    let manifest_path = cfg.manifest_path()?;
    let manifest = load_manifest(manifest_path)?;
    let matrices = load_reduced_matrices(&manifest, cfg)?;
    let shapes = preshape_all(&matrices)?;
    let store = store_from(&shapes);
    let z_ref = store
        .get(ref_id)
        .ok_or_else(|| ShapeError::MissingEntry(ref_id.to_string()))?;
    let z_cmp = store
        .get(cmp_id)
        .ok_or_else(|| ShapeError::MissingEntry(cmp_id.to_string()))?;

    let field = displacement_field(z_ref, z_cmp, ref_id, cmp_id)?;
    let (top, bottom, ranking) = rank_landmarks(&field, top_k)?;

    let aligned_cmp = {
        let alignment = repshape::shape::align(z_cmp, z_ref)?;
        PreShape::from_raw_renormalized(z_cmp.data() * &alignment.o_star)?
    };
    let all_indices: Vec<usize> = (0..field.m_landmarks()).collect();
    let labels = classify_contract_expand(z_ref, &aligned_cmp, &all_indices)?;
    let ties = labels.iter().filter(|l| l.tie).count();
    if ties > 0 {
        eprintln!("warning: {ties} landmarks have tied radial norms; labeled expanded");
    }

    let pca = displacement_pca(&field, !raw_rows)?;
    if pca.rank_deficient {
        eprintln!("warning: displacement matrix is rank-deficient; second axis is not meaningful");
    }
    let magnitudes = field.magnitudes();
    let histogram = magnitude_histogram(&magnitudes, bins);

    // Optional per-landmark class labels from a labels-role entry.
    let classes: Option<Vec<i64>> = match class_labels {
        Some(entry_id) => {
            let entry = manifest.entry(entry_id)?;
            if entry.role != EntryRole::Labels {
                return Err(ShapeError::InvalidArgument(format!(
                    "entry \"{entry_id}\" does not have the labels role"
                )));
            }
            let arr = read_npy(&entry.path)?;
            if arr.data.len() != field.m_landmarks() {
                return Err(ShapeError::InvalidArgument(format!(
                    "labels entry \"{entry_id}\" has {} values for {} landmarks",
                    arr.data.len(),
                    field.m_landmarks()
                )));
            }
            Some(arr.data.iter().map(|&v| v as i64).collect())
        }
        None => None,
    };

    ensure_output_dir(cfg)?;
    if cfg.format.wants_csv() {
        let mut text = String::from("landmark_index,magnitude,label\n");
        for (i, label) in labels.iter().enumerate() {
            let tag = match label.label {
                repshape::landmark::MotionLabel::Contracted => "contracted",
                repshape::landmark::MotionLabel::Expanded => "expanded",
            };
            text.push_str(&format!("{i},{:.16e},{tag}\n", magnitudes[i]));
        }
        write_text(&cfg.output_dir.join("landmarks.csv"), &text)?;

        let mut text = String::from(if classes.is_some() {
            "landmark_index,pc1,pc2,class\n"
        } else {
            "landmark_index,pc1,pc2\n"
        });
        for (row, &idx) in pca.kept_rows.iter().enumerate() {
            let pc2 = if pca.scores.ncols() > 1 {
                pca.scores[(row, 1)]
            } else {
                0.0
            };
            match &classes {
                Some(cls) => text.push_str(&format!(
                    "{idx},{:.16e},{:.16e},{}\n",
                    pca.scores[(row, 0)],
                    pc2,
                    cls[idx]
                )),
                None => text.push_str(&format!(
                    "{idx},{:.16e},{:.16e}\n",
                    pca.scores[(row, 0)],
                    pc2
                )),
            }
        }
        write_text(&cfg.output_dir.join("landmark_pca.csv"), &text)?;
    }
    if cfg.format.wants_json() {
        let rows: Vec<serde_json::Value> = labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                json!({
                    "landmark_index": i,
                    "magnitude": magnitudes[i],
                    "label": label.label,
                    "tie": label.tie,
                })
            })
            .collect();
        write_json(&cfg.output_dir.join("landmarks.json"), &json!({ "landmarks": rows }))?;
        let scores: Vec<serde_json::Value> = pca
            .kept_rows
            .iter()
            .enumerate()
            .map(|(row, &idx)| {
                json!({
                    "landmark_index": idx,
                    "pc1": pca.scores[(row, 0)],
                    "pc2": if pca.scores.ncols() > 1 { pca.scores[(row, 1)] } else { 0.0 },
                    "class": classes.as_ref().map(|c| c[idx]),
                })
            })
            .collect();
        write_json(&cfg.output_dir.join("landmark_pca.json"), &json!({ "scores": scores }))?;
    }
    write_json(
        &cfg.output_dir.join("landmark_report.json"),
        &json!({
            "ref_id": ref_id,
            "cmp_id": cmp_id,
            "rho": field.rho,
            "top_k": top,
            "bottom_k": bottom,
            "ranking_order": ranking.order,
            "histogram": histogram,
            "explained_variance": pca.explained_variance,
            "rank_deficient": pca.rank_deficient,
            "row_normalized": !raw_rows,
            "tied_landmarks": ties,
        }),
    )?;
    write_provenance(
        "landmarks",
        cfg,
        &manifest_inputs(manifest_path, &manifest),
        &cfg.output_dir,
    )
}

pub fn cmd_predict(cfg: &RunConfig, method: &str, base_id: &str) -> Result<()> {
    let manifest_path = cfg.manifest_path()?;
    let manifest = load_manifest(manifest_path)?;
    let matrices = load_reduced_matrices(&manifest, cfg)?;
    let shapes = preshape_all(&matrices)?;
    let store = store_from(&shapes);
    let base = store
        .get(base_id)
        .ok_or_else(|| ShapeError::MissingEntry(base_id.to_string()))?;

    let trajectories = Trajectory::group_from_manifest(&manifest, base_id)?;
    let traj = trajectories
        .iter()
        .find(|t| t.method == method)
        .ok_or_else(|| {
            ShapeError::InvalidArgument(format!("no trajectory with method \"{method}\""))
        })?;
    let mut refs = Vec::new();
    let mut targets = Vec::new();
    for p in &traj.points {
        refs.push(
            store
                .get(&p.shape_id)
                .ok_or_else(|| ShapeError::MissingEntry(p.shape_id.clone()))?,
        );
        targets.push(p.hyperparam);
    }
    let design = build_aligned_design(&refs, &targets, base, base_id)?;
    let lambda = cfg.ridge_lambda.unwrap_or_else(|| default_ridge_lambda(&design));
    let out = ridge_loo(&design, lambda)?;
    if out.constant_targets {
        eprintln!("warning: targets are constant; r2 reported as 0 by convention");
    }

    ensure_output_dir(cfg)?;
    if cfg.format.wants_csv() {
        let mut text = String::from("id,hyperparam,predicted\n");
        for (p, pred) in traj.points.iter().zip(&out.predictions) {
            text.push_str(&format!("{},{:.16e},{:.16e}\n", p.shape_id, p.hyperparam, pred));
        }
        write_text(&cfg.output_dir.join("predictions.csv"), &text)?;
    }
    if cfg.format.wants_json() {
        let rows: Vec<serde_json::Value> = traj
            .points
            .iter()
            .zip(&out.predictions)
            .map(|(p, pred)| {
                json!({
                    "id": p.shape_id,
                    "hyperparam": p.hyperparam,
                    "predicted": pred,
                })
            })
            .collect();
        write_json(&cfg.output_dir.join("predictions.json"), &json!({ "predictions": rows }))?;
    }
    write_json(
        &cfg.output_dir.join("predict_report.json"),
        &json!({
            "method": method,
            "base_id": base_id,
            "lambda": lambda,
            "r2": out.r2,
            "constant_targets": out.constant_targets,
            "n_shapes": traj.points.len(),
        }),
    )?;
    write_provenance(
        "predict",
        cfg,
        &manifest_inputs(manifest_path, &manifest),
        &cfg.output_dir,
    )
}

pub fn cmd_seedscale(cfg: &RunConfig, method: &str, baseline_method: &str) -> Result<()> {
    let manifest_path = cfg.manifest_path()?;
    let manifest = load_manifest(manifest_path)?;
    let matrices = load_reduced_matrices(&manifest, cfg)?;
    let by_id: BTreeMap<&str, &RepresentationMatrix> = matrices
        .iter()
        .map(|(id, x)| (id.as_str(), x))
        .collect();

    // Baseline (un-augmented) entry per seed.
    let mut baselines: BTreeMap<i64, &ManifestEntry> = BTreeMap::new();
    for entry in manifest.representations() {
        if entry.method == baseline_method
            && baselines.insert(entry.seed, entry).is_some()
        {
            return Err(ShapeError::InvalidArgument(format!(
                "multiple baseline entries for seed {}",
                entry.seed
            )));
        }
    }
    if baselines.len() < 2 {
        return Err(ShapeError::InsufficientData(format!(
            "need baseline entries (method \"{baseline_method}\") for at least 2 seeds, found {}",
            baselines.len()
        )));
    }

    // Augmented entries per (hyperparameter level, seed).
    let mut levels: BTreeMap<u64, (f64, BTreeMap<i64, &ManifestEntry>)> = BTreeMap::new();
    for entry in manifest.representations() {
        if entry.method == method {
            let key = entry.hyperparam.to_bits();
            let slot = levels.entry(key).or_insert_with(|| (entry.hyperparam, BTreeMap::new()));
            if slot.1.insert(entry.seed, entry).is_some() {
                return Err(ShapeError::InvalidArgument(format!(
                    "method \"{method}\": duplicate seed {} at hyperparam {}",
                    entry.seed, entry.hyperparam
                )));
            }
        }
    }
    if levels.is_empty() {
        return Err(ShapeError::InvalidArgument(format!(
            "no entries with method \"{method}\""
        )));
    }

    #[derive(Serialize)]
    struct LevelRow {
        hyperparam: f64,
        d_aug_mean: f64,
        d_aug_std: f64,
        d_seed_mean: f64,
        d_seed_std: f64,
        n_pairs: usize,
        pairs: Vec<ScalePair>,
    }

    let mut rows: Vec<LevelRow> = Vec::new();
    for (level, per_seed) in levels.values() {
        let seeds: Vec<i64> = per_seed
            .keys()
            .filter(|s| baselines.contains_key(s))
            .copied()
            .collect();
        if seeds.len() < 2 {
            return Err(ShapeError::InsufficientData(format!(
                "hyperparam level {level}: need at least 2 seeds with baselines, found {}",
                seeds.len()
            )));
        }
        let mut pairs: Vec<ScalePair> = Vec::new();
        for a in 0..seeds.len() {
            for b in (a + 1)..seeds.len() {
                let (i, j) = (seeds[a], seeds[b]);
                let x0_i = by_id[baselines[&i].id.as_str()];
                let xp_i = by_id[per_seed[&i].id.as_str()];
                let x0_j = by_id[baselines[&j].id.as_str()];
                let xp_j = by_id[per_seed[&j].id.as_str()];
                pairs.push(aug_seed_scales(x0_i, xp_i, x0_j, xp_j, *level, (i, j))?);
            }
        }
        let stats = |pick: fn(&ScalePair) -> f64| -> (f64, f64) {
            let n = pairs.len() as f64;
            let mean = pairs.iter().map(&pick).sum::<f64>() / n;
            let std = if pairs.len() > 1 {
                (pairs.iter().map(|p| (pick(p) - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            (mean, std)
        };
        let (d_aug_mean, d_aug_std) = stats(|p| p.d_aug);
        let (d_seed_mean, d_seed_std) = stats(|p| p.d_seed);
        rows.push(LevelRow {
            hyperparam: *level,
            d_aug_mean,
            d_aug_std,
            d_seed_mean,
            d_seed_std,
            n_pairs: pairs.len(),
            pairs,
        });
    }

    ensure_output_dir(cfg)?;
    if cfg.format.wants_csv() {
        let mut text =
            String::from("hyperparam,d_aug_mean,d_aug_std,d_seed_mean,d_seed_std,n_pairs\n");
        for row in &rows {
            text.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                row.hyperparam,
                row.d_aug_mean,
                row.d_aug_std,
                row.d_seed_mean,
                row.d_seed_std,
                row.n_pairs
            ));
        }
        write_text(&cfg.output_dir.join("seedscale.csv"), &text)?;
    }
    if cfg.format.wants_json() {
        write_json(
            &cfg.output_dir.join("seedscale.json"),
            &json!({
                "method": method,
                "baseline_method": baseline_method,
                "levels": rows,
            }),
        )?;
    }
    write_provenance(
        "seedscale",
        cfg,
        &manifest_inputs(manifest_path, &manifest),
        &cfg.output_dir,
    )
}

pub fn cmd_ensemble(cfg: &RunConfig, base_id: Option<&str>) -> Result<()> {
    let manifest_path = cfg.manifest_path()?;
    let manifest = load_manifest(manifest_path)?;

    let label_entries: Vec<&ManifestEntry> = manifest
        .entries
        .iter()
        .filter(|e| e.role == EntryRole::Labels)
        .collect();
    let labels_entry = match label_entries.as_slice() {
        [one] => *one,
        [] => {
            return Err(ShapeError::InvalidArgument(
                "manifest has no labels entry".into(),
            ))
        }
        _ => {
            return Err(ShapeError::InvalidArgument(
                "manifest has more than one labels entry".into(),
            ))
        }
    };
    let labels_arr = read_npy(&labels_entry.path)?;
    let labels: Vec<usize> = labels_arr
        .data
        .iter()
        .map(|&v| {
            if v < 0.0 || v.fract() != 0.0 {
                Err(ShapeError::InvalidArgument(format!(
                    "labels entry \"{}\" holds non-integer value {v}",
                    labels_entry.id
                )))
            } else {
                Ok(v as usize)
            }
        })
        .collect::<Result<_>>()?;

    let mut blocks: BTreeMap<String, ProbabilityBlock> = BTreeMap::new();
    for entry in &manifest.entries {
        if entry.role != EntryRole::ClassProbabilities {
            continue;
        }
        let tensor = read_npy(&entry.path).map_err(|e| e.for_entry(&entry.id))?;
        let block = ProbabilityBlock::from_npy(&tensor, labels.clone())
            .map_err(|e| e.for_entry(&entry.id))?;
        if blocks.insert(entry.method.clone(), block).is_some() {
            return Err(ShapeError::InvalidArgument(format!(
                "multiple probability blocks for method \"{}\"",
                entry.method
            )));
        }
    }
    if blocks.len() < 2 {
        return Err(ShapeError::InsufficientData(format!(
            "ensembling needs at least 2 probability blocks, found {}",
            blocks.len()
        )));
    }
    let methods: Vec<String> = blocks.keys().cloned().collect();

    // Optional trajectory angles for the gain/angle correlation.
    let mut angles: Option<BTreeMap<(String, String), f64>> = None;
    if let Some(base_id) = base_id {
        let matrices = load_reduced_matrices(&manifest, cfg)?;
        let shapes = preshape_all(&matrices)?;
        let store = store_from(&shapes);
        let base = store
            .get(base_id)
            .ok_or_else(|| ShapeError::MissingEntry(base_id.to_string()))?
            .clone();
        let trajectories = Trajectory::group_from_manifest(&manifest, base_id)?;
        let by_method: BTreeMap<&str, &Trajectory> = trajectories
            .iter()
            .map(|t| (t.method.as_str(), t))
            .collect();
        let pairing = if cfg.cartesian_pairs {
            Pairing::Cartesian
        } else {
            Pairing::Matched
        };
        let mut map = BTreeMap::new();
        for i in 0..methods.len() {
            for j in (i + 1)..methods.len() {
                let (ma, mb) = (&methods[i], &methods[j]);
                let ta = by_method.get(ma.as_str()).ok_or_else(|| {
                    ShapeError::InvalidArgument(format!(
                        "no representation trajectory for method \"{ma}\""
                    ))
                })?;
                let tb = by_method.get(mb.as_str()).ok_or_else(|| {
                    ShapeError::InvalidArgument(format!(
                        "no representation trajectory for method \"{mb}\""
                    ))
                })?;
                let out = trajectory_mean_angle(ta, tb, &base, &store, pairing)?;
                map.insert((ma.clone(), mb.clone()), out.mean_deg);
            }
        }
        angles = Some(map);
    }

    let mut solo = BTreeMap::new();
    for (method, block) in &blocks {
        solo.insert(method.clone(), ensemble_soft_vote(block)?.1);
    }

    let mut gain_rows: Vec<serde_json::Value> = Vec::new();
    let mut scatter: Vec<(f64, f64)> = Vec::new();
    for i in 0..methods.len() {
        for j in (i + 1)..methods.len() {
            let (ma, mb) = (&methods[i], &methods[j]);
            let gain = ensemble_gain(&blocks[ma], &blocks[mb])?;
            let angle = angles
                .as_ref()
                .and_then(|m| m.get(&(ma.clone(), mb.clone())))
                .copied();
            if let Some(a) = angle {
                scatter.push((a, gain));
            }
            gain_rows.push(json!({
                "method_a": ma,
                "method_b": mb,
                "delta_acc": gain,
                "angle_deg": angle,
            }));
        }
    }
    let correlation = if scatter.len() >= 3 {
        let (pearson, spearman) = angle_gain_correlation(&scatter)?;
        Some(json!({ "pearson": pearson, "spearman": spearman }))
    } else {
        None
    };

    ensure_output_dir(cfg)?;
    if cfg.format.wants_csv() {
        let mut text = String::from("method_a,method_b,delta_acc,angle_deg\n");
        for row in &gain_rows {
            let angle = row["angle_deg"]
                .as_f64()
                .map(|a| format!("{a:.16e}"))
                .unwrap_or_default();
            text.push_str(&format!(
                "{},{},{:.16e},{}\n",
                row["method_a"].as_str().unwrap(),
                row["method_b"].as_str().unwrap(),
                row["delta_acc"].as_f64().unwrap(),
                angle
            ));
        }
        write_text(&cfg.output_dir.join("ensemble_gains.csv"), &text)?;
    }
    if cfg.format.wants_json() {
        write_json(
            &cfg.output_dir.join("ensemble_gains.json"),
            &json!({ "pairs": gain_rows }),
        )?;
    }
    write_json(
        &cfg.output_dir.join("ensemble_report.json"),
        &json!({
            "methods": methods,
            "solo_accuracy": solo,
            "n_pairs": gain_rows.len(),
            "correlation": correlation,
            "base_id": base_id,
        }),
    )?;
    write_provenance(
        "ensemble",
        cfg,
        &manifest_inputs(manifest_path, &manifest),
        &cfg.output_dir,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_synth(
    cfg: &RunConfig,
    spec: &SynthSpec,
    angle_target: Option<f64>,
) -> Result<()> {
    ensure_output_dir(cfg)?;
    let as_csv = cfg.format == OutputFormat::Csv;
    let (ext, format) = if as_csv {
        ("csv", MatrixFormat::Csv)
    } else {
        ("npy", MatrixFormat::Npy)
    };

    let mut entries: Vec<serde_json::Value> = Vec::new();
    let mut write_steps = |label: &str,
                           steps: &[RepresentationMatrix],
                           include_base: bool|
     -> Result<()> {
        for (t, step) in steps.iter().enumerate() {
            if t == 0 && !include_base {
                continue;
            }
            let (id, method, hyperparam) = if t == 0 {
                ("base".to_string(), "none".to_string(), 0.0)
            } else {
                (
                    format!("{label}_{t:03}"),
                    label.to_string(),
                    t as f64 * spec.deform_scale,
                )
            };
            let filename = format!("{id}.{ext}");
            save_matrix(&cfg.output_dir.join(&filename), step, format)?;
            entries.push(json!({
                "id": id,
                "path": filename,
                "method": method,
                "hyperparam": hyperparam,
                "seed": spec.rng_seed,
                "layer": "synthetic",
                "role": "representation",
            }));
        }
        Ok(())
    };

    match angle_target {
        Some(angle) => {
            let (steps_a, steps_b) = gen_two_direction_trajectories(spec, angle)?;
            write_steps("dir_a", &steps_a, true)?;
            write_steps("dir_b", &steps_b, false)?;
        }
        None => {
            let steps = gen_trajectory(spec)?;
            write_steps("planted", &steps, true)?;
        }
    }

    let manifest_path = cfg.output_dir.join("manifest.json");
    write_json(&manifest_path, &json!({ "entries": entries }))?;
    write_json(
        &cfg.output_dir.join("synth_report.json"),
        &json!({
            "m_landmarks": spec.m_landmarks,
            "n_units": spec.n_units,
            "n_steps": spec.n_steps,
            "deform_scale": spec.deform_scale,
            "rng_seed": spec.rng_seed,
            "angle_target": angle_target,
            "nuisance": {
                "rotate": spec.nuisance.rotate,
                "reflect": spec.nuisance.reflect,
                "translate": spec.nuisance.translate,
                "scale": spec.nuisance.scale,
            },
            "step_magnitudes": spec.step_magnitudes(),
        }),
    )?;
    // Round-trip through the ingestion path so downstream commands see a
    // valid manifest.
    load_manifest(&manifest_path)?;
    write_provenance("synth", cfg, &[], &cfg.output_dir)
}

pub fn nuisance_from_flags(
    rotate: bool,
    reflect: bool,
    translate: bool,
    scale: bool,
    all: bool,
) -> NuisanceFlags {
    if all {
        NuisanceFlags::all()
    } else {
        NuisanceFlags {
            rotate,
            reflect,
            translate,
            scale,
        }
    }
}
