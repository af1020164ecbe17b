//! Tabular outputs with units, written as CSV or JSON next to a provenance sidecar.

use super::config::OutputFormat;
use super::HarnessError;
use crate::rng::RNG_ALGORITHM;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Int(k) => json!(k),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// One output table. `summary` carries fitted scalars (gains, time constants).
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: BTreeMap<String, f64>,
}

impl Artifact {
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        Artifact {
            name: name.to_string(),
            columns: columns.iter().map(|(n, u)| Column { name: n.to_string(), unit: u.to_string() }).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of {}", self.name);
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: f64) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Numeric values of one column, skipping non-numeric cells.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column_index(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match r[k] {
                Cell::Num(x) => Some(x),
                Cell::Int(i) => Some(i as f64),
                _ => None,
            })
            .collect()
    }

    /// Serialized data payload.
    pub fn payload(&self, format: OutputFormat, config_hash: &str) -> Result<Vec<u8>, HarnessError> {
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let header: Vec<String> =
                    self.columns.iter().map(|c| if c.unit.is_empty() { c.name.clone() } else { format!("{} [{}]", c.name, c.unit) }).collect();
                w.write_record(&header).map_err(|e| HarnessError::Io(e.to_string()))?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv_text)).map_err(|e| HarnessError::Io(e.to_string()))?;
                }
                w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))
            }
            OutputFormat::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| Value::Object(self.columns.iter().zip(row).map(|(c, v)| (c.name.clone(), v.json())).collect::<Map<_, _>>()))
                    .collect();
                let doc = json!({
                    "artifact": self.name,
                    "config_sha256": config_hash,
                    "columns": self.columns,
                    "summary": self.summary,
                    "records": records,
                });
                let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| HarnessError::Io(e.to_string()))?;
                bytes.push(b'\n');
                Ok(bytes)
            }
        }
    }
}

/// Sidecar `<artifact>.meta.json`: everything needed to regenerate and check the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub artifact: String,
    pub file: String,
    pub sha256: String,
    pub config_sha256: String,
    pub seed: u64,
    pub code_version: String,
    pub rng: String,
    pub columns: Vec<Column>,
    pub summary: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub config_hash: String,
    pub seed: u64,
}

/// Writes payload and sidecar; returns the payload path.
pub fn write_artifact(ctx: &RunContext, artifact: &Artifact) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(&ctx.out_dir).map_err(|e| HarnessError::Io(format!("{}: {e}", ctx.out_dir.display())))?;
    let file = format!("{}.{}", artifact.name, ctx.format.extension());
    let payload = artifact.payload(ctx.format, &ctx.config_hash)?;
    let path = ctx.out_dir.join(&file);
    std::fs::write(&path, &payload).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let meta = ArtifactMeta {
        artifact: artifact.name.clone(),
        file,
        sha256: hex::encode(Sha256::digest(&payload)),
        config_sha256: ctx.config_hash.clone(),
        seed: ctx.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        rng: RNG_ALGORITHM.to_string(),
        columns: artifact.columns.clone(),
        summary: artifact.summary.clone(),
    };
    let meta_path = ctx.out_dir.join(format!("{}.meta.json", artifact.name));
    let mut text = serde_json::to_vec_pretty(&meta).map_err(|e| HarnessError::Io(e.to_string()))?;
    text.push(b'\n');
    std::fs::write(&meta_path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", meta_path.display())))?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyEntry {
    pub artifact: String,
    pub ok: bool,
    pub detail: String,
}

/// Re-hashes every payload listed by a sidecar in `dir`.
pub fn verify_dir(dir: &Path) -> Result<Vec<VerifyEntry>, HarnessError> {
    let listing = std::fs::read_dir(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    let mut metas: Vec<PathBuf> = listing
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".meta.json")))
        .collect();
    metas.sort();
    let mut out = Vec::new();
    for path in metas {
        let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let entry = match serde_json::from_str::<ArtifactMeta>(&text) {
            Err(e) => VerifyEntry { artifact: path.display().to_string(), ok: false, detail: format!("unreadable sidecar: {e}") },
            Ok(meta) => match std::fs::read(dir.join(&meta.file)) {
                Err(e) => VerifyEntry { artifact: meta.artifact, ok: false, detail: format!("{}: {e}", meta.file) },
                Ok(bytes) => {
                    let digest = hex::encode(Sha256::digest(&bytes));
                    let ok = digest == meta.sha256;
                    let detail = if ok { format!("{} sha256 ok", meta.file) } else { format!("{} sha256 {digest} != {}", meta.file, meta.sha256) };
                    VerifyEntry { artifact: meta.artifact, ok, detail }
                }
            },
        };
        out.push(entry);
    }
    Ok(out)
}
