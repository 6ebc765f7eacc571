//! repshape: shape-space analysis of neural representation matrices.
//!
//! Every subcommand reads shapes through a manifest, writes fixed-name
//! outputs into the output directory, and leaves a provenance block beside
//! them. Outputs are deterministic for fixed inputs regardless of the
//! thread count; only provenance.json carries a timestamp.

mod commands;
mod config;
mod provenance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use repshape::synth::SynthSpec;

use crate::config::{AlignedMode, AngleUnits, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "repshape",
    version,
    about = "Shape-space analysis of neural network representation matrices",
    after_help = "\
Output files (fixed names, written under --output-dir):
  distmat    distmat_aligned.{csv,json} and/or distmat_unaligned.{csv,json}
  embed      embedding.{csv,json}, embedding_report.json
  angles     angles.{csv,json}, angles_report.json
  landmarks  landmarks.{csv,json}, landmark_pca.{csv,json}, landmark_report.json
  predict    predictions.{csv,json}, predict_report.json
  seedscale  seedscale.{csv,json}
  ensemble   ensemble_gains.{csv,json}, ensemble_report.json
  synth      <id>.npy (or .csv), manifest.json, synth_report.json
Every command also writes provenance.json (the only file with a timestamp).

Exit codes: 0 success, 2 input validation failure, 3 numerical failure."
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Experiment manifest (key=value records or JSON with an "entries" array)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    /// key=value config file; command-line flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Keep at most this many principal components per representation
    #[arg(long, global = true)]
    reduce_k: Option<usize>,

    /// Distance variant: on, off, or both
    #[arg(long, global = true)]
    aligned: Option<String>,

    /// Directory for output files
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Output format: json, csv, or both
    #[arg(long, global = true)]
    format: Option<String>,

    /// Angle units in outputs: degrees or radians
    #[arg(long, global = true)]
    angle_units: Option<String>,

    /// Ridge penalty; omit for the scale-free default
    #[arg(long, global = true)]
    ridge_lambda: Option<f64>,

    /// Embedding dimension (capped at K - 1)
    #[arg(long, global = true)]
    mds_dim: Option<usize>,

    /// Worker threads for pairwise loops; omit for automatic
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Zero-pad narrower representations instead of rejecting them
    #[arg(long, global = true)]
    zero_pad: bool,

    /// Input CSV matrices carry a header row to skip
    #[arg(long, global = true)]
    csv_header: bool,

    /// Average trajectory angles over all step pairs instead of matched indices
    #[arg(long, global = true)]
    cartesian_pairs: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise shape distance matrix over all manifest representations
    Distmat,

    /// Classical MDS embedding of a distance matrix (computed or given)
    Embed {
        /// Previously written distance matrix (.csv or .json); skips recomputation
        #[arg(long)]
        distmat_file: Option<PathBuf>,
    },

    /// Mean geodesic angles between augmentation trajectories
    Angles {
        /// Manifest id of the un-augmented reference shape
        #[arg(long)]
        base_id: String,
    },

    /// Landmark displacement analysis between two shapes
    Landmarks {
        /// Manifest id of the reference shape
        #[arg(long)]
        ref_id: String,
        /// Manifest id of the comparison shape
        #[arg(long)]
        cmp_id: String,
        /// How many top/bottom landmarks to report (1 <= k <= M/2)
        #[arg(long, default_value_t = 25)]
        top_k: usize,
        /// Histogram bin count; omit for the Freedman-Diaconis rule
        #[arg(long)]
        bins: Option<usize>,
        /// PCA on raw displacement rows instead of row-normalized ones
        #[arg(long)]
        raw_rows: bool,
        /// Labels-role manifest entry giving one class per landmark
        #[arg(long)]
        class_labels: Option<String>,
    },

    /// Leave-one-shape-out ridge prediction of a method's hyperparameters
    Predict {
        /// Augmentation method label to predict within
        #[arg(long)]
        method: String,
        /// Manifest id of the un-augmented reference shape
        #[arg(long)]
        base_id: String,
    },

    /// Augmentation-vs-seed distance scales per hyperparameter level
    Seedscale {
        /// Augmentation method label
        #[arg(long)]
        method: String,
        /// Method label of the un-augmented baseline entries
        #[arg(long, default_value = "none")]
        baseline_method: String,
    },

    /// Pairwise soft-voting ensemble gains and the angle/gain correlation
    Ensemble {
        /// Reference shape id; enables trajectory angles and correlation
        #[arg(long)]
        base_id: Option<String>,
    },

    /// Generate a synthetic trajectory dataset with a manifest
    Synth {
        #[arg(long, default_value_t = 40)]
        m_landmarks: usize,
        #[arg(long, default_value_t = 6)]
        n_units: usize,
        #[arg(long, default_value_t = 9)]
        steps: usize,
        /// Arc length between consecutive steps, radians
        #[arg(long, default_value_t = 0.1)]
        deform_scale: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Plant two trajectories subtending this angle (degrees) instead of one
        #[arg(long)]
        angle: Option<f64>,
        /// Apply random rotations per step
        #[arg(long)]
        rotate: bool,
        /// Apply random reflections per step
        #[arg(long)]
        reflect: bool,
        /// Apply random translations per step
        #[arg(long)]
        translate: bool,
        /// Apply random positive rescalings per step
        #[arg(long)]
        scale_nuisance: bool,
        /// Shorthand for all four nuisance transforms
        #[arg(long)]
        all_nuisances: bool,
    },
}

fn build_config(args: &GlobalArgs) -> repshape::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        cfg.load_file(path)?;
    }
    if let Some(v) = &args.manifest {
        cfg.manifest_path = Some(v.clone());
    }
    if let Some(v) = args.reduce_k {
        cfg.reduce_k = v;
    }
    if let Some(v) = &args.aligned {
        cfg.aligned = AlignedMode::parse(v)?;
    }
    if let Some(v) = &args.output_dir {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = &args.format {
        cfg.format = OutputFormat::parse(v)?;
    }
    if let Some(v) = &args.angle_units {
        cfg.angle_units = AngleUnits::parse(v)?;
    }
    if let Some(v) = args.ridge_lambda {
        cfg.ridge_lambda = Some(v);
    }
    if let Some(v) = args.mds_dim {
        cfg.mds_dim = v;
    }
    if let Some(v) = args.threads {
        cfg.threads = Some(v);
    }
    if args.zero_pad {
        cfg.zero_pad = true;
    }
    if args.csv_header {
        cfg.csv_header = true;
    }
    if args.cartesian_pairs {
        cfg.cartesian_pairs = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> repshape::Result<()> {
    let cfg = build_config(&cli.global)?;
    if let Some(threads) = cfg.threads {
        // Thread count only changes scheduling of pairwise loops, never the
        // numbers; results are written to disjoint slots and reduced in
        // index order.
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| repshape::ShapeError::InvalidArgument(e.to_string()))?;
    }
    match &cli.command {
        Command::Distmat => commands::cmd_distmat(&cfg),
        Command::Embed { distmat_file } => commands::cmd_embed(&cfg, distmat_file.as_deref()),
        Command::Angles { base_id } => commands::cmd_angles(&cfg, base_id),
        Command::Landmarks {
            ref_id,
            cmp_id,
            top_k,
            bins,
            raw_rows,
            class_labels,
        } => commands::cmd_landmarks(
            &cfg,
            ref_id,
            cmp_id,
            *top_k,
            *bins,
            *raw_rows,
            class_labels.as_deref(),
        ),
        Command::Predict { method, base_id } => commands::cmd_predict(&cfg, method, base_id),
        Command::Seedscale {
            method,
            baseline_method,
        } => commands::cmd_seedscale(&cfg, method, baseline_method),
        Command::Ensemble { base_id } => commands::cmd_ensemble(&cfg, base_id.as_deref()),
        Command::Synth {
            m_landmarks,
            n_units,
            steps,
            deform_scale,
            seed,
            angle,
            rotate,
            reflect,
            translate,
            scale_nuisance,
            all_nuisances,
        } => {
            let spec = SynthSpec {
                m_landmarks: *m_landmarks,
                n_units: *n_units,
                n_steps: *steps,
                deform_scale: *deform_scale,
                nuisance: commands::nuisance_from_flags(
                    *rotate,
                    *reflect,
                    *translate,
                    *scale_nuisance,
                    *all_nuisances,
                ),
                rng_seed: *seed,
            };
            commands::cmd_synth(&cfg, &spec, *angle)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
