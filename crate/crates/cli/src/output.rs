//! Run manifests and rendering of tables as JSON or CSV.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Embedded in every output. Carries no timestamps so reruns are
/// byte-identical; those go to the `.run.json` sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub geometry: String,
    pub geometry_sha256: String,
    pub order: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub log_cy: bool,
    pub experimental: bool,
    pub stages: Vec<String>,
    pub warnings: Vec<String>,
}

/// Command result before rendering.
#[derive(Debug, Clone)]
pub struct Table {
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn render(manifest: &Manifest, table: &Table, format: Format) -> Result<String, String> {
    match format {
        Format::Json => {
            let doc = json!({ "manifest": manifest, "data": table.json });
            serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| e.to_string())
        }
        Format::Csv => {
            let mut out = format!(
                "# manifest: {}\n",
                serde_json::to_string(manifest).map_err(|e| e.to_string())?
            );
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.header).map_err(|e| e.to_string())?;
            for row in &table.rows {
                w.write_record(row).map_err(|e| e.to_string())?;
            }
            let bytes = w.into_inner().map_err(|e| e.to_string())?;
            out.push_str(&String::from_utf8(bytes).map_err(|e| e.to_string())?);
            Ok(out)
        }
    }
}

fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".run.json");
    path.with_file_name(name)
}

/// Writes to `path` (plus the timestamped sidecar) or to stdout.
pub fn emit(
    rendered: &str,
    manifest: &Manifest,
    path: Option<&Path>,
    started_at: &str,
    cache_hits: &[String],
) -> std::io::Result<()> {
    let Some(path) = path else {
        std::io::stdout().write_all(rendered.as_bytes())?;
        return Ok(());
    };
    write_atomic(path, rendered.as_bytes())?;
    let run = json!({
        "manifest": manifest,
        "started_at": started_at,
        "finished_at": chrono::Utc::now().to_rfc3339(),
        "cache_hits": cache_hits,
        "outputs": [{ "path": path.display().to_string(), "sha256": sha256_hex(rendered.as_bytes()) }],
    });
    let text = serde_json::to_string_pretty(&run).map_err(std::io::Error::other)? + "\n";
    write_atomic(&sidecar_path(path), text.as_bytes())
}
