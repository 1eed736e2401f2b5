use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_EVALUATION: u8 = 3;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }

    /// Configuration errors map to exit 2, everything else to exit 3.
    pub fn from_core(e: statgeo_core::Error) -> Self {
        let code = if e.is_config() { EXIT_CONFIG } else { EXIT_EVALUATION };
        CliError { code, message: e.to_string() }
    }

    pub fn at_point(point: &[f64], e: statgeo_core::Error) -> Self {
        let code = if e.is_config() { EXIT_CONFIG } else { EXIT_EVALUATION };
        CliError { code, message: format!("at point {point:?}: {e}") }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub results: Vec<Value>,
    pub summary: Value,
    pub pass: bool,
    pub duration_seconds: Option<f64>,
}

impl RunReport {
    pub fn new(command: &'static str, config: Value, results: Vec<Value>, summary: Value) -> Self {
        let pass = results.iter().all(|r| r.get("pass").and_then(Value::as_bool).unwrap_or(true))
            && summary.get("pass").and_then(Value::as_bool).unwrap_or(true);
        RunReport {
            tool: "statgeo",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            results,
            summary,
            pass,
            duration_seconds: None,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => render_text(&serde_json::to_value(self).expect("report serializes")),
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.6e}"),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        Value::Null => Some("-".into()),
        _ => None,
    }
}

fn short_vector(v: &Value) -> Option<String> {
    let items = v.as_array()?;
    let parts: Option<Vec<String>> = items.iter().map(|x| x.as_f64().map(|f| format!("{f:.6}"))).collect();
    Some(format!("[{}]", parts?.join(", ")))
}

/// Text view of the JSON report: header, one line per point with its scalar
/// fields, and the summary.
fn render_text(report: &Value) -> String {
    let mut out = String::new();
    let get = |k: &str| report.get(k).cloned().unwrap_or(Value::Null);
    out.push_str(&format!(
        "{} {} {}\n",
        get("tool").as_str().unwrap_or(""),
        get("version").as_str().unwrap_or(""),
        get("command").as_str().unwrap_or("")
    ));
    if let Some(results) = report.get("results").and_then(Value::as_array) {
        for (i, r) in results.iter().enumerate() {
            let mut line = format!("[{i}]");
            if let Some(p) = r.get("point").and_then(short_vector) {
                line.push_str(&format!(" x={p}"));
            }
            if let Some(map) = r.as_object() {
                for (k, v) in map {
                    if k == "point" {
                        continue;
                    }
                    if let Some(s) = scalar(v) {
                        line.push_str(&format!(" {k}={s}"));
                    }
                }
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    if let Some(map) = report.get("summary").and_then(Value::as_object) {
        for (k, v) in map {
            if let Some(s) = scalar(v) {
                out.push_str(&format!("{k}: {s}\n"));
            }
        }
    }
    let pass = get("pass").as_bool().unwrap_or(false);
    out.push_str(if pass { "PASS\n" } else { "FAIL\n" });
    if let Some(d) = get("duration_seconds").as_f64() {
        out.push_str(&format!("duration: {d:.3}s\n"));
    }
    out
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so a reader never sees a partial report.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::config(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
