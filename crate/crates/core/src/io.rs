//! CSV ingestion, result documents and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{EdgeRecord, Network, NodeKind, NodeRecord};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), line, message: message.into() }
}

/// Data rows of a headed CSV file, numbered from 1 after the header.
fn read_rows(path: &Path, columns: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let header = reader.headers().map_err(|e| parse_err(path, 0, e.to_string()))?.clone();
    let mut index = Vec::with_capacity(columns.len());
    for col in columns {
        match header.iter().position(|h| h.eq_ignore_ascii_case(col)) {
            Some(i) => index.push(Some(i)),
            None if *col == "value" || *col == "weight" || *col == "kind" => index.push(None),
            None => return Err(parse_err(path, 0, format!("missing column `{col}`"))),
        }
    }
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 1;
        let record = record.map_err(|e| parse_err(path, line, e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push((
            line,
            index.iter().map(|i| i.and_then(|i| record.get(i)).unwrap_or("").to_string()).collect(),
        ));
    }
    Ok(rows)
}

fn parse_number(path: &Path, line: usize, field: &str, raw: &str, default: f64) -> Result<f64> {
    if raw.is_empty() {
        return Ok(default);
    }
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(path, line, format!("{field} `{raw}` is not a number")))
}

pub fn read_nodes(path: &Path) -> Result<Vec<NodeRecord>> {
    read_rows(path, &["id", "kind", "value"])?
        .into_iter()
        .map(|(line, f)| {
            if f[0].is_empty() {
                return Err(parse_err(path, line, "empty node id"));
            }
            let kind = if f[1].is_empty() {
                NodeKind::Firm
            } else {
                f[1].parse::<NodeKind>().map_err(|_| parse_err(path, line, format!("unknown kind `{}`", f[1])))?
            };
            let value = parse_number(path, line, "value", &f[2], 0.0)?;
            Ok(NodeRecord::new(f[0].clone(), kind, value))
        })
        .collect()
}

pub fn read_edges(path: &Path) -> Result<Vec<EdgeRecord>> {
    read_rows(path, &["source", "target", "weight"])?
        .into_iter()
        .map(|(line, f)| {
            if f[0].is_empty() || f[1].is_empty() {
                return Err(parse_err(path, line, "empty endpoint"));
            }
            let weight = parse_number(path, line, "weight", &f[2], 1.0)?;
            Ok(EdgeRecord::new(f[0].clone(), f[1].clone(), weight))
        })
        .collect()
}

/// Builds a network from an edge file and an optional node file. Without a
/// node file, nodes are the edge endpoints (firms of value 0).
pub fn load_network(nodes: Option<&Path>, edges: &Path, ownership: bool, directed: bool) -> Result<Network> {
    let edge_rows = read_edges(edges)?;
    let node_rows = match nodes {
        Some(p) => read_nodes(p)?,
        None => {
            let mut ids: Vec<&str> =
                edge_rows.iter().flat_map(|e| [e.source.as_str(), e.target.as_str()]).collect();
            ids.sort_unstable();
            ids.dedup();
            ids.into_iter().map(|id| NodeRecord::firm(id, 0.0)).collect()
        }
    };
    Network::build(node_rows, edge_rows, directed || ownership, ownership)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// Everything needed to rerun a command and check it saw the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Arguments after the program name, without output/timing flags.
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunManifest {
    pub fn new(command: Vec<String>) -> Self {
        RunManifest {
            command,
            inputs: Vec::new(),
            parameters: BTreeMap::new(),
            seed: None,
            version: VERSION.to_string(),
            timing: None,
        }
    }

    /// Records the digest of an input file; `shown` is the path as given on
    /// the command line, `actual` where it was read from.
    pub fn add_input(&mut self, role: &str, shown: &str, actual: &Path) -> Result<()> {
        self.inputs.push(InputDigest {
            role: role.to_string(),
            path: shown.to_string(),
            sha256: sha256_file(actual)?,
        });
        Ok(())
    }

    /// Fails with `DigestMismatch` if any input changed. Relative paths
    /// resolve against `base`.
    pub fn verify_inputs(&self, base: &Path) -> Result<()> {
        for input in &self.inputs {
            let path = resolve(base, &input.path);
            if sha256_file(&path)? != input.sha256 {
                return Err(Error::DigestMismatch(input.path.clone()));
            }
        }
        Ok(())
    }
}

pub fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
    pub exit_code: i32,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        ErrorInfo { code: e.code().to_string(), message: e.to_string(), exit_code: e.exit_code() }
    }
}

/// The single output format of every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub manifest: RunManifest,
    pub measure: String,
    pub parameters: BTreeMap<String, Value>,
    pub scores: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl ResultDocument {
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Usage(e.to_string()))?;
        Ok(to_json_string(&value))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "<document>".into(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(0, |e| e.exit_code)
    }
}

/// Pretty JSON with every float written to 17 significant digits.
pub fn to_json_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter::default());
    value.serialize(&mut ser).expect("serializing a JSON value cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}

#[derive(Default)]
struct SciFormatter {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

/// JSON number for a float; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn score_map(ids: &[String], values: &[f64]) -> Value {
    Value::Object(ids.iter().cloned().zip(values.iter().map(|&v| num(v))).collect())
}

pub fn matrix_value(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect())).collect())
}
