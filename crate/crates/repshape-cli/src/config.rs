//! Effective run configuration: defaults, overridden by a key=value config
//! file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use repshape::{Result, ShapeError};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignedMode {
    On,
    Off,
    Both,
}

impl AlignedMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "on" => Ok(AlignedMode::On),
            "off" => Ok(AlignedMode::Off),
            "both" => Ok(AlignedMode::Both),
            other => Err(ShapeError::InvalidArgument(format!(
                "aligned must be on, off or both, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(ShapeError::InvalidArgument(format!(
                "format must be json, csv or both, got {other:?}"
            ))),
        }
    }

    pub fn wants_json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    pub fn wants_csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnits {
    Degrees,
    Radians,
}

impl AngleUnits {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "degrees" => Ok(AngleUnits::Degrees),
            "radians" => Ok(AngleUnits::Radians),
            other => Err(ShapeError::InvalidArgument(format!(
                "angle-units must be degrees or radians, got {other:?}"
            ))),
        }
    }

    pub fn convert_degrees(self, value_deg: f64) -> f64 {
        match self {
            AngleUnits::Degrees => value_deg,
            AngleUnits::Radians => value_deg.to_radians(),
        }
    }
}

/// Everything a command needs beyond its own arguments.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub manifest_path: Option<PathBuf>,
    pub reduce_k: usize,
    pub aligned: AlignedMode,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub angle_units: AngleUnits,
    /// None selects the scale-free default (1e-3 x mean Gram diagonal).
    pub ridge_lambda: Option<f64>,
    pub mds_dim: usize,
    /// None lets rayon pick.
    pub threads: Option<usize>,
    pub zero_pad: bool,
    pub csv_header: bool,
    pub cartesian_pairs: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest_path: None,
            reduce_k: repshape::repstore::DEFAULT_REDUCE_K,
            aligned: AlignedMode::On,
            output_dir: PathBuf::from("out"),
            format: OutputFormat::Both,
            angle_units: AngleUnits::Degrees,
            ridge_lambda: None,
            mds_dim: 200,
            threads: None,
            zero_pad: false,
            csv_header: false,
            cartesian_pairs: false,
        }
    }
}

impl RunConfig {
    /// Applies one config-file line. Unknown keys are an error so typos do
    /// not silently fall back to defaults.
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad_num = |k: &str, v: &str| {
            ShapeError::InvalidArgument(format!("config key {k}: bad value {v:?}"))
        };
        match key {
            "manifest" => self.manifest_path = Some(PathBuf::from(value)),
            "reduce_k" => {
                self.reduce_k = value.parse().map_err(|_| bad_num(key, value))?;
            }
            "aligned" => self.aligned = AlignedMode::parse(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "format" => self.format = OutputFormat::parse(value)?,
            "angle_units" => self.angle_units = AngleUnits::parse(value)?,
            "ridge_lambda" => {
                if value == "auto" {
                    self.ridge_lambda = None;
                } else {
                    self.ridge_lambda = Some(value.parse().map_err(|_| bad_num(key, value))?);
                }
            }
            "mds_dim" => self.mds_dim = value.parse().map_err(|_| bad_num(key, value))?,
            "threads" => {
                if value == "auto" {
                    self.threads = None;
                } else {
                    self.threads = Some(value.parse().map_err(|_| bad_num(key, value))?);
                }
            }
            "zero_pad" => self.zero_pad = parse_bool(key, value)?,
            "csv_header" => self.csv_header = parse_bool(key, value)?,
            "cartesian_pairs" => self.cartesian_pairs = parse_bool(key, value)?,
            other => {
                return Err(ShapeError::InvalidArgument(format!(
                    "unknown config key {other:?}"
                )))
            }
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| ShapeError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ShapeError::Parse {
                path: path.to_path_buf(),
                message: format!("expected key=value, got {line:?}"),
            })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.reduce_k < 1 {
            return Err(ShapeError::InvalidArgument("reduce_k must be >= 1".into()));
        }
        if self.mds_dim < 1 {
            return Err(ShapeError::InvalidArgument("mds_dim must be >= 1".into()));
        }
        if let Some(l) = self.ridge_lambda {
            if l <= 0.0 {
                return Err(ShapeError::InvalidArgument(
                    "ridge_lambda must be positive".into(),
                ));
            }
        }
        if let Some(t) = self.threads {
            if t < 1 {
                return Err(ShapeError::InvalidArgument("threads must be >= 1".into()));
            }
        }
        Ok(())
    }

    pub fn manifest_path(&self) -> Result<&Path> {
        self.manifest_path
            .as_deref()
            .ok_or_else(|| ShapeError::InvalidArgument("--manifest is required".into()))
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "on" => Ok(true),
        "false" | "0" | "off" => Ok(false),
        other => Err(ShapeError::InvalidArgument(format!(
            "config key {key}: expected a boolean, got {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# comment\nreduce_k = 50\naligned = both\nridge_lambda = 0.5\nthreads = 2\n",
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        cfg.load_file(&path).unwrap();
        assert_eq!(cfg.reduce_k, 50);
        assert_eq!(cfg.aligned, AlignedMode::Both);
        assert_eq!(cfg.ridge_lambda, Some(0.5));
        assert_eq!(cfg.threads, Some(2));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "reduce_q = 50\n").unwrap();
        let mut cfg = RunConfig::default();
        assert!(cfg.load_file(&path).is_err());
    }

    #[test]
    fn validation_catches_bad_ranges() {
        let cfg = RunConfig {
            ridge_lambda: Some(-1.0),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
