//! Ingestion and persistence of representation matrices, PCA reduction,
//! and experiment manifests.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShapeError};
use crate::linalg;
use crate::npy;

/// Variance fraction below which a reduction is reported as lossy enough
/// to warrant a warning.
pub const VARIANCE_WARN_THRESHOLD: f64 = 0.75;

/// Default number of principal components kept when reducing wide matrices.
pub const DEFAULT_REDUCE_K: usize = 1000;

/// M landmarks (probe inputs) by N units (activations), the raw input to
/// every shape computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationMatrix {
    data: DMatrix<f64>,
}

impl RepresentationMatrix {
    /// Validates finiteness and minimal dimensions (M >= 2, N >= 1).
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() < 2 || data.ncols() < 1 {
            return Err(ShapeError::InvalidArgument(format!(
                "representation matrix must be at least 2x1, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        linalg::check_finite(&data)?;
        Ok(Self { data })
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

    /// Appends zero columns until the matrix has `n` units. Zero columns do
    /// not change pairwise landmark geometry, so shape distances are
    /// unaffected by the padding.
    pub fn zero_pad_to(&self, n: usize) -> Result<Self> {
        if n < self.n_units() {
            return Err(ShapeError::InvalidArgument(format!(
                "cannot pad {} units down to {}",
                self.n_units(),
                n
            )));
        }
        let mut data = DMatrix::zeros(self.m_landmarks(), n);
        data.view_mut((0, 0), self.data.shape()).copy_from(&self.data);
        Ok(Self { data })
    }
}

/// File formats understood by [`load_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Npy,
    Csv,
}

impl MatrixFormat {
    /// Picks the format from the file extension, defaulting to CSV for
    /// anything that is not `.npy`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("npy") => MatrixFormat::Npy,
            _ => MatrixFormat::Csv,
        }
    }
}

/// Loads a 2-D real array. Arrays of higher rank are accepted and flattened
/// by collapsing all non-leading axes into one, so an M x C x H x W stack of
/// feature maps becomes an M x CHW matrix.
pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<RepresentationMatrix> {
    match format {
        MatrixFormat::Npy => {
            let arr = npy::read_npy(path)?;
            matrix_from_npy(path, arr)
        }
        MatrixFormat::Csv => load_csv_matrix(path, false),
    }
}

fn matrix_from_npy(path: &Path, arr: npy::NpyArray) -> Result<RepresentationMatrix> {
    if arr.shape.len() < 2 {
        return Err(ShapeError::RankTooLow {
            rank: arr.shape.len(),
        });
    }
    let m = arr.shape[0];
    let n: usize = arr.shape[1..].iter().product();
    if m * n != arr.data.len() {
        return Err(ShapeError::Parse {
            path: path.to_path_buf(),
            message: "shape does not match payload length".into(),
        });
    }
    // npy payloads are C-order (row-major); DMatrix stores column-major.
    let data = DMatrix::from_row_slice(m, n, &arr.data);
    RepresentationMatrix::new(data)
}

/// Loads a CSV matrix, one landmark per row. `skip_header` drops the first
/// line before parsing.
pub fn load_csv_matrix(path: &Path, skip_header: bool) -> Result<RepresentationMatrix> {
    let file = File::open(path).map_err(|e| ShapeError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let reader = BufReader::new(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| ShapeError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if lineno == 0 && skip_header {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .enumerate()
            .map(|(col, cell)| {
                cell.trim().parse::<f64>().map_err(|_| ShapeError::Parse {
                    path: path.to_path_buf(),
                    message: format!("row {lineno}, column {col}: not a number: {:?}", cell.trim()),
                })
            })
            .collect::<Result<_>>()?;
        if let Some(w) = width {
            if row.len() != w {
                return Err(ShapeError::Parse {
                    path: path.to_path_buf(),
                    message: format!("row {lineno} has {} columns, expected {w}", row.len()),
                });
            }
        } else {
            width = Some(row.len());
        }
        rows.push(row);
    }
    let n = width.ok_or_else(|| ShapeError::Parse {
        path: path.to_path_buf(),
        message: "empty file".into(),
    })?;
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    RepresentationMatrix::new(DMatrix::from_row_slice(rows.len(), n, &flat))
}

/// Saves a matrix. npy output is bit-exact under reload.
pub fn save_matrix(path: &Path, x: &RepresentationMatrix, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Npy => {
            let rows: Vec<f64> = (0..x.m_landmarks())
                .flat_map(|i| x.data().row(i).iter().copied().collect::<Vec<_>>())
                .collect();
            npy::write_npy_f64(path, &[x.m_landmarks(), x.n_units()], &rows)
        }
        MatrixFormat::Csv => {
            let file = File::create(path).map_err(|e| ShapeError::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            let mut w = BufWriter::new(file);
            for i in 0..x.m_landmarks() {
                let row: Vec<String> = x
                    .data()
                    .row(i)
                    .iter()
                    .map(|v| format!("{v:.16e}"))
                    .collect();
                writeln!(w, "{}", row.join(",")).map_err(|e| ShapeError::Io {
                    path: path.to_path_buf(),
                    source: e,
                })?;
            }
            w.flush().map_err(|e| ShapeError::Io {
                path: path.to_path_buf(),
                source: e,
            })
        }
    }
}

/// What a PCA reduction kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub kept_components: usize,
    pub variance_fraction: f64,
}

impl ReductionReport {
    /// True when the kept components explain less variance than the
    /// reporting threshold. Callers warn; this is never an error.
    pub fn below_variance_target(&self) -> bool {
        self.variance_fraction < VARIANCE_WARN_THRESHOLD
    }
}

/// Projects `x` onto its top-k principal axes (columns centered over the M
/// rows first). When N <= k the matrix is returned unchanged with a
/// variance fraction of 1. Axis signs follow the largest-entry-positive
/// convention so repeated runs agree bit-for-bit.
pub fn reduce_dims(
    x: &RepresentationMatrix,
    k: usize,
) -> Result<(RepresentationMatrix, ReductionReport)> {
    if k < 1 {
        return Err(ShapeError::InvalidArgument("k must be at least 1".into()));
    }
    let (m, n) = (x.m_landmarks(), x.n_units());
    if n <= k {
        return Ok((
            x.clone(),
            ReductionReport {
                kept_components: n,
                variance_fraction: 1.0,
            },
        ));
    }
    // Centered rank is at most M-1, so axes past that carry no variance.
    let kept = k.min(m.saturating_sub(1)).min(n);
    let out = linalg::pca(x.data(), kept)?;
    let total: f64 = out.spectrum.iter().sum();
    let retained: f64 = out.spectrum.iter().take(kept).sum();
    let variance_fraction = if total > 0.0 { retained / total } else { 1.0 };
    Ok((
        RepresentationMatrix::new(out.scores)?,
        ReductionReport {
            kept_components: kept,
            variance_fraction,
        },
    ))
}

/// What a manifest entry points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryRole {
    Representation,
    ClassProbabilities,
    Labels,
}

impl EntryRole {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "representation" => Some(EntryRole::Representation),
            "class-probabilities" => Some(EntryRole::ClassProbabilities),
            "labels" => Some(EntryRole::Labels),
            _ => None,
        }
    }
}

/// One shape (or probability block / label vector) in an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub method: String,
    #[serde(default)]
    pub hyperparam: f64,
    #[serde(default)]
    pub seed: i64,
    #[serde(default)]
    pub layer: String,
    #[serde(default = "default_role")]
    pub role: EntryRole,
}

fn default_role() -> EntryRole {
    EntryRole::Representation
}

/// Validated collection of experiment entries, in file order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct ManifestDoc {
    entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn entry(&self, id: &str) -> Result<&ManifestEntry> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| ShapeError::MissingEntry(id.to_string()))
    }

    pub fn representations(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries
            .iter()
            .filter(|e| e.role == EntryRole::Representation)
    }
}

/// Parses a manifest file. A leading `{` selects the JSON form (a document
/// with an `"entries"` array); anything else is treated as the key=value
/// record format, records separated by blank lines, `#` starting a comment.
/// Relative entry paths resolve against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| ShapeError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut entries = if text.trim_start().starts_with('{') {
        let doc: ManifestDoc = serde_json::from_str(&text).map_err(|e| ShapeError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        doc.entries
    } else {
        parse_kv_entries(path, &text)?
    };

    let base = path.parent().unwrap_or(Path::new("."));
    for entry in &mut entries {
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
    }
    validate_manifest(Manifest { entries })
}

fn parse_kv_entries(path: &Path, text: &str) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    let mut current: Vec<(String, String)> = Vec::new();
    let flush = |fields: &mut Vec<(String, String)>,
                 entries: &mut Vec<ManifestEntry>|
     -> Result<()> {
        if fields.is_empty() {
            return Ok(());
        }
        entries.push(entry_from_fields(path, std::mem::take(fields))?);
        Ok(())
    };
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            flush(&mut current, &mut entries)?;
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ShapeError::Parse {
            path: path.to_path_buf(),
            message: format!("expected key=value, got {line:?}"),
        })?;
        current.push((key.trim().to_string(), value.trim().to_string()));
    }
    flush(&mut current, &mut entries)?;
    Ok(entries)
}

fn entry_from_fields(path: &Path, fields: Vec<(String, String)>) -> Result<ManifestEntry> {
    let mut entry = ManifestEntry {
        id: String::new(),
        path: PathBuf::new(),
        method: String::new(),
        hyperparam: 0.0,
        seed: 0,
        layer: String::new(),
        role: EntryRole::Representation,
    };
    let bad = |msg: String| ShapeError::Parse {
        path: path.to_path_buf(),
        message: msg,
    };
    for (key, value) in fields {
        match key.as_str() {
            "id" => entry.id = value,
            "path" => entry.path = PathBuf::from(value),
            "method" => entry.method = value,
            "hyperparam" => {
                entry.hyperparam = value
                    .parse()
                    .map_err(|_| bad(format!("hyperparam is not a number: {value:?}")))?
            }
            "seed" => {
                entry.seed = value
                    .parse()
                    .map_err(|_| bad(format!("seed is not an integer: {value:?}")))?
            }
            "layer" => entry.layer = value,
            "role" => {
                entry.role = EntryRole::parse(&value)
                    .ok_or_else(|| bad(format!("unknown role: {value:?}")))?
            }
            other => return Err(bad(format!("unknown manifest key: {other:?}"))),
        }
    }
    if entry.id.is_empty() {
        return Err(bad("entry is missing an id".into()));
    }
    if entry.path.as_os_str().is_empty() {
        return Err(bad(format!("entry \"{}\" is missing a path", entry.id)));
    }
    Ok(entry)
}

fn validate_manifest(manifest: Manifest) -> Result<Manifest> {
    let mut seen = BTreeSet::new();
    for entry in &manifest.entries {
        if !seen.insert(entry.id.clone()) {
            return Err(ShapeError::DuplicateId(entry.id.clone()));
        }
        if !entry.path.exists() {
            return Err(ShapeError::UnresolvablePath {
                id: entry.id.clone(),
                path: entry.path.clone(),
            });
        }
    }
    // All representations in one analysis must agree on the landmark count;
    // check cheaply from headers without loading full payloads.
    let mut first: Option<(&str, usize)> = None;
    for entry in manifest.representations() {
        let m = peek_landmark_count(&entry.path)?;
        match first {
            None => first = Some((&entry.id, m)),
            Some((id_a, m_a)) => {
                if m != m_a {
                    return Err(ShapeError::LandmarkCountMismatch {
                        id_a: id_a.to_string(),
                        m_a,
                        id_b: entry.id.clone(),
                        m_b: m,
                    });
                }
            }
        }
    }
    Ok(manifest)
}

/// Reads just enough of a matrix file to learn its leading dimension.
/// CSV files are counted by raw non-empty lines; a header row, if any,
/// counts like a landmark, which stays consistent across entries of the
/// same format.
pub fn peek_landmark_count(path: &Path) -> Result<usize> {
    match MatrixFormat::from_path(path) {
        MatrixFormat::Npy => {
            let file = File::open(path).map_err(|e| ShapeError::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            let mut reader = BufReader::new(file);
            let mut head = vec![0u8; 12];
            use std::io::Read;
            reader.read_exact(&mut head).map_err(|e| ShapeError::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            let (len, start) = match head[6] {
                1 => (u16::from_le_bytes([head[8], head[9]]) as usize, 10),
                _ => (
                    u32::from_le_bytes([head[8], head[9], head[10], head[11]]) as usize,
                    12,
                ),
            };
            if start + len < head.len() {
                return Err(ShapeError::Parse {
                    path: path.to_path_buf(),
                    message: "malformed header: dict length too small".into(),
                });
            }
            let mut rest = vec![0u8; start + len - head.len()];
            reader.read_exact(&mut rest).map_err(|e| ShapeError::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            let mut header = head[start.min(head.len())..].to_vec();
            header.extend_from_slice(&rest);
            let header = String::from_utf8_lossy(&header);
            let idx = header.find("'shape'").ok_or_else(|| ShapeError::Parse {
                path: path.to_path_buf(),
                message: "malformed header: missing shape".into(),
            })?;
            let rest = &header[idx..];
            let open = rest.find('(').ok_or_else(|| ShapeError::Parse {
                path: path.to_path_buf(),
                message: "malformed header: missing shape tuple".into(),
            })?;
            let dims = &rest[open + 1..];
            let first = dims
                .split([',', ')'])
                .next()
                .and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(|| ShapeError::Parse {
                    path: path.to_path_buf(),
                    message: "malformed header: bad shape tuple".into(),
                })?;
            Ok(first)
        }
        MatrixFormat::Csv => {
            let file = File::open(path).map_err(|e| ShapeError::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            let reader = BufReader::new(file);
            let mut count = 0usize;
            for line in reader.lines() {
                let line = line.map_err(|e| ShapeError::Io {
                    path: path.to_path_buf(),
                    source: e,
                })?;
                if !line.trim().is_empty() {
                    count += 1;
                }
            }
            Ok(count)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::npy::write_npy_f64;
    use approx::assert_abs_diff_eq;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> RepresentationMatrix {
        RepresentationMatrix::new(DMatrix::from_row_slice(rows, cols, data)).unwrap()
    }

    #[test]
    fn csv_parse_3x2() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "1,2\n3,4\n5,6\n").unwrap();
        let x = load_matrix(&path, MatrixFormat::Csv).unwrap();
        assert_eq!(x.m_landmarks(), 3);
        assert_eq!(x.n_units(), 2);
        assert_eq!(x.data()[(2, 0)], 5.0);
        assert_eq!(x.data()[(1, 1)], 4.0);
    }

    #[test]
    fn csv_header_skipped_on_request() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "u0,u1\n1,2\n3,4\n").unwrap();
        assert!(load_csv_matrix(&path, false).is_err());
        let x = load_csv_matrix(&path, true).unwrap();
        assert_eq!(x.m_landmarks(), 2);
    }

    #[test]
    fn higher_rank_npy_flattens_trailing_axes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("feat.npy");
        let data: Vec<f64> = (0..10 * 3 * 2 * 2).map(|i| i as f64).collect();
        write_npy_f64(&path, &[10, 3, 2, 2], &data).unwrap();
        let x = load_matrix(&path, MatrixFormat::Npy).unwrap();
        assert_eq!((x.m_landmarks(), x.n_units()), (10, 12));
        // C-order flattening keeps each landmark's block contiguous.
        assert_eq!(x.data()[(1, 0)], 12.0);
        assert_eq!(x.data()[(0, 11)], 11.0);
    }

    #[test]
    fn nan_entry_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.npy");
        write_npy_f64(&path, &[2, 2], &[1.0, 2.0, f64::NAN, 4.0]).unwrap();
        match load_matrix(&path, MatrixFormat::Npy) {
            Err(ShapeError::NonFinite { row, col }) => assert_eq!((row, col), (1, 0)),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn rank_one_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.npy");
        crate::npy::write_npy_f64(&path, &[5], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(matches!(
            load_matrix(&path, MatrixFormat::Npy),
            Err(ShapeError::RankTooLow { rank: 1 })
        ));
    }

    #[test]
    fn reduce_noop_when_narrow() {
        let x = mat(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let (y, report) = reduce_dims(&x, 1000).unwrap();
        assert_eq!(y, x);
        assert_eq!(report.variance_fraction, 1.0);
        assert_eq!(report.kept_components, 2);
    }

    #[test]
    fn reduce_rejects_zero_k() {
        let x = mat(2, 1, &[0.0, 1.0]);
        assert!(reduce_dims(&x, 0).is_err());
    }

    #[test]
    fn rank_two_matrix_keeps_all_variance_at_k2() {
        // 50x10 matrix of rank 2: outer products of two fixed vectors.
        let m = 50;
        let n = 10;
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let a = (i as f64 * 0.37).sin();
                let b = (i as f64 * 0.11).cos();
                data[i * n + j] = a * (j as f64 + 1.0) + b * ((j * j) as f64 - 3.0);
            }
        }
        let x = mat(m, n, &data);
        let (y, report) = reduce_dims(&x, 2).unwrap();
        assert_eq!(y.n_units(), 2);
        assert_abs_diff_eq!(report.variance_fraction, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn reduce_is_idempotent() {
        let mut data = Vec::with_capacity(20 * 6);
        for i in 0..20 {
            for j in 0..6 {
                data.push(((i * 7 + j * 3) as f64 * 0.61).sin() + (j as f64) * 0.2);
            }
        }
        let x = mat(20, 6, &data);
        let (y1, _) = reduce_dims(&x, 3).unwrap();
        let (y2, r2) = reduce_dims(&y1, 3).unwrap();
        assert_eq!(y1, y2);
        assert_abs_diff_eq!(r2.variance_fraction, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_pad_preserves_rows() {
        let x = mat(2, 1, &[1.0, -1.0]);
        let y = x.zero_pad_to(3).unwrap();
        assert_eq!(y.n_units(), 3);
        assert_eq!(y.data()[(0, 0)], 1.0);
        assert_eq!(y.data()[(0, 2)], 0.0);
    }

    fn write_entry_files(dir: &Path, names: &[(&str, usize)]) {
        for (name, m) in names {
            let data: Vec<f64> = (0..m * 2).map(|i| i as f64).collect();
            write_npy_f64(&dir.join(name), &[*m, 2], &data).unwrap();
        }
    }

    #[test]
    fn manifest_kv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        write_entry_files(dir.path(), &[("a.npy", 4), ("b.npy", 4), ("c.npy", 4)]);
        let manifest = "\
# three entries
id = base
path = a.npy
method = none
hyperparam = 0
seed = 42
layer = l2

id = s1
path = b.npy
method = blur
hyperparam = 0.1
seed = 42
layer = l2

id = s2
path = c.npy
method = blur
hyperparam = 0.2
seed = 42
layer = l2
";
        let path = dir.path().join("manifest.txt");
        std::fs::write(&path, manifest).unwrap();
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.entries.len(), 3);
        assert_eq!(m.entries[0].id, "base");
        assert_eq!(m.entries[1].hyperparam, 0.1);
        assert_eq!(m.entries[2].id, "s2");
    }

    #[test]
    fn manifest_duplicate_id_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_entry_files(dir.path(), &[("a.npy", 4)]);
        let manifest = "id = x\npath = a.npy\n\nid = x\npath = a.npy\n";
        let path = dir.path().join("manifest.txt");
        std::fs::write(&path, manifest).unwrap();
        assert!(matches!(
            load_manifest(&path),
            Err(ShapeError::DuplicateId(id)) if id == "x"
        ));
    }

    #[test]
    fn manifest_landmark_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_entry_files(dir.path(), &[("a.npy", 100), ("b.npy", 99)]);
        let manifest = "id = a\npath = a.npy\n\nid = b\npath = b.npy\n";
        let path = dir.path().join("manifest.txt");
        std::fs::write(&path, manifest).unwrap();
        match load_manifest(&path) {
            Err(ShapeError::LandmarkCountMismatch { m_a, m_b, .. }) => {
                assert_eq!((m_a, m_b), (100, 99));
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn manifest_missing_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = "id = a\npath = nowhere.npy\n";
        let path = dir.path().join("manifest.txt");
        std::fs::write(&path, manifest).unwrap();
        assert!(matches!(
            load_manifest(&path),
            Err(ShapeError::UnresolvablePath { .. })
        ));
    }

    #[test]
    fn manifest_json_form() {
        let dir = tempfile::tempdir().unwrap();
        write_entry_files(dir.path(), &[("a.npy", 4)]);
        let manifest = r#"{"entries": [
            {"id": "a", "path": "a.npy", "method": "crop",
             "hyperparam": 0.6, "seed": 7, "layer": "avgpool",
             "role": "representation"}
        ]}"#;
        let path = dir.path().join("manifest.json");
        std::fs::write(&path, manifest).unwrap();
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.entries[0].method, "crop");
        assert_eq!(m.entries[0].seed, 7);
    }
}
