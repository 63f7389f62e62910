//! File formats: raw little-endian arrays, dataset and model directories,
//! CSV tables and the content manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use imblab_core::dataset::{Dataset, HeavyTailedSpec, InputDistribution, Provenance};
use imblab_core::model::LinearModel;
use imblab_core::Matrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// Shortest round-trip decimal; scientific notation outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn f64_bytes(xs: &[f64]) -> Vec<u8> {
    xs.iter().flat_map(|x| x.to_le_bytes()).collect()
}

pub fn u32_bytes(xs: &[u32]) -> Vec<u8> {
    xs.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn read_bytes(path: &Path, width: usize, expected: usize) -> Result<Vec<u8>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.len() != width * expected {
        return Err(CliError::Format {
            path: path.into(),
            message: format!("expected {} bytes, found {}", width * expected, bytes.len()),
        });
    }
    Ok(bytes)
}

pub fn read_f64s(path: &Path, expected: usize) -> Result<Vec<f64>, CliError> {
    let bytes = read_bytes(path, 8, expected)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

pub fn read_u32s(path: &Path, expected: usize) -> Result<Vec<u32>, CliError> {
    let bytes = read_bytes(path, 4, expected)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4-byte chunk")))
        .collect())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.into(),
        message: e.to_string(),
    })
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// Rows of already formatted fields.
pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// A directory whose written files are tracked for the manifest.
pub struct OutputDir {
    root: PathBuf,
    written: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, CliError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(OutputDir {
            root,
            written: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Write `bytes` at the `/`-separated relative path `rel`.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_csv(&mut self, rel: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        self.write(rel, &csv_bytes(header, rows))
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        self.write(rel, &json_bytes(value))
    }

    /// Hashes of everything written so far, keyed by relative path.
    pub fn hashes(&self) -> &BTreeMap<String, String> {
        &self.written
    }

    /// Write `MANIFEST.json` listing every file written through this handle.
    pub fn finish(mut self) -> Result<Manifest, CliError> {
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            files: self.written.clone(),
        };
        self.write("MANIFEST.json", &json_bytes(&manifest))?;
        Ok(manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    /// Relative path to SHA-256 hex digest.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        read_json(&dir.join("MANIFEST.json"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProvenanceMeta {
    HeavyTailed {
        m: u32,
        distribution: InputDistribution,
        seed: u64,
        extra_tier: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        input_dim: Option<usize>,
    },
    Sampled {
        distribution: InputDistribution,
        seed: u64,
    },
    SimpleImbalanced,
    Custom,
}

impl ProvenanceMeta {
    fn of(p: &Provenance) -> Self {
        match p {
            Provenance::HeavyTailed(s) => ProvenanceMeta::HeavyTailed {
                m: s.m,
                distribution: s.distribution,
                seed: s.seed,
                extra_tier: s.extra_tier,
                input_dim: s.input_dim,
            },
            Provenance::Sampled { distribution, seed } => ProvenanceMeta::Sampled {
                distribution: *distribution,
                seed: *seed,
            },
            Provenance::SimpleImbalanced => ProvenanceMeta::SimpleImbalanced,
            Provenance::Custom => ProvenanceMeta::Custom,
        }
    }

    fn to_core(&self) -> Provenance {
        match self {
            ProvenanceMeta::HeavyTailed {
                m,
                distribution,
                seed,
                extra_tier,
                input_dim,
            } => Provenance::HeavyTailed(HeavyTailedSpec {
                m: *m,
                distribution: *distribution,
                seed: *seed,
                extra_tier: *extra_tier,
                input_dim: *input_dim,
            }),
            ProvenanceMeta::Sampled { distribution, seed } => Provenance::Sampled {
                distribution: *distribution,
                seed: *seed,
            },
            ProvenanceMeta::SimpleImbalanced => Provenance::SimpleImbalanced,
            ProvenanceMeta::Custom => Provenance::Custom,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format_version: u32,
    pub classes: usize,
    pub samples: usize,
    pub input_dim: usize,
    pub has_weights: bool,
    /// Runs of equal class mass as `[classes, mass per class]`.
    pub tiers: Vec<(usize, f64)>,
    pub provenance: ProvenanceMeta,
}

fn rel(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}/{name}")
    }
}

/// Write `meta.json`, `inputs.f64`, `labels.u32` and, for weighted data,
/// `weights.f64` under `prefix`.
pub fn write_dataset(out: &mut OutputDir, prefix: &str, ds: &Dataset) -> Result<(), CliError> {
    let meta = DatasetMeta {
        format_version: FORMAT_VERSION,
        classes: ds.num_classes(),
        samples: ds.num_samples(),
        input_dim: ds.input_dim(),
        has_weights: ds.sample_weights().is_some(),
        tiers: ds.freq().tiers(),
        provenance: ProvenanceMeta::of(ds.provenance()),
    };
    out.write_json(&rel(prefix, "meta.json"), &meta)?;
    out.write(&rel(prefix, "inputs.f64"), &f64_bytes(ds.inputs().as_slice()))?;
    out.write(&rel(prefix, "labels.u32"), &u32_bytes(ds.labels()))?;
    if let Some(w) = ds.sample_weights() {
        out.write(&rel(prefix, "weights.f64"), &f64_bytes(w))?;
    }
    Ok(())
}

pub fn read_dataset(dir: &Path) -> Result<Dataset, CliError> {
    let meta: DatasetMeta = read_json(&dir.join("meta.json"))?;
    if meta.format_version != FORMAT_VERSION {
        return Err(CliError::Format {
            path: dir.join("meta.json"),
            message: format!("unsupported format version {}", meta.format_version),
        });
    }
    let (n, d) = (meta.samples, meta.input_dim);
    let inputs = read_f64s(&dir.join("inputs.f64"), n * d)?;
    let labels = read_u32s(&dir.join("labels.u32"), n)?;
    let weights = if meta.has_weights {
        Some(read_f64s(&dir.join("weights.f64"), n)?)
    } else {
        None
    };
    let x = Matrix::from_vec(n, d, inputs)?;
    Ok(Dataset::from_parts(x, labels, weights, meta.classes)?.with_provenance(meta.provenance.to_core()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub format_version: u32,
    pub classes: usize,
    pub input_dim: usize,
    pub bias: bool,
}

/// `meta.json`, `W.f64` (classes × input_dim, row-major) and `b.f64`.
pub fn write_model(out: &mut OutputDir, prefix: &str, model: &LinearModel) -> Result<(), CliError> {
    let meta = ModelMeta {
        format_version: FORMAT_VERSION,
        classes: model.num_classes(),
        input_dim: model.input_dim(),
        bias: model.has_bias(),
    };
    out.write_json(&rel(prefix, "meta.json"), &meta)?;
    out.write(&rel(prefix, "W.f64"), &f64_bytes(model.weights().as_slice()))?;
    if let Some(b) = model.bias() {
        out.write(&rel(prefix, "b.f64"), &f64_bytes(&b))?;
    }
    Ok(())
}

pub fn read_model(dir: &Path) -> Result<LinearModel, CliError> {
    let meta: ModelMeta = read_json(&dir.join("meta.json"))?;
    let (c, d) = (meta.classes, meta.input_dim);
    let w = Matrix::from_vec(c, d, read_f64s(&dir.join("W.f64"), c * d)?)?;
    let b = if meta.bias {
        Some(read_f64s(&dir.join("b.f64"), c)?)
    } else {
        None
    };
    Ok(LinearModel::from_parts(&w, b.as_deref())?)
}
