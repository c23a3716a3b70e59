//! Self-describing CSV and JSON artifacts.
//!
//! CSV files start with `#` comment lines carrying the schema version and
//! the JSON-encoded run configuration, followed by a header row. Complex
//! values are written as `<name>_re,<name>_im` pairs and grid fields in
//! radial-major order. Bodies are deterministic; the only timestamp lives
//! in `manifest.json`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use cgo_core::grid::{GridField, Region};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const SCHEMA: &str = "cgo-csv/1";

/// One output directory plus the configuration embedded in every file.
pub struct Sink {
    dir: PathBuf,
    command: &'static str,
    config: Value,
    written: Vec<String>,
}

impl Sink {
    pub fn new<T: Serialize>(dir: &Path, command: &'static str, config: &T) -> Result<Sink, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut config = serde_json::to_value(config).map_err(|e| CliError::Usage(e.to_string()))?;
        if let Value::Object(m) = &mut config {
            // The output location does not change the numbers.
            m.remove("out");
        }
        Ok(Sink { dir: dir.to_path_buf(), command, config, written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Opens a CSV file and writes the comment preamble and header.
    pub fn csv(&mut self, name: &str, header: &[String]) -> Result<CsvOut, CliError> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut buf = BufWriter::new(file);
        let cfg = json!({ "command": self.command, "config": self.config });
        writeln!(buf, "# schema: {SCHEMA}").and_then(|_| writeln!(buf, "# config: {cfg}")).map_err(|e| CliError::io(&path, e))?;
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(header).map_err(|e| CliError::Csv(path.clone(), e))?;
        self.written.push(name.to_string());
        Ok(CsvOut { w, path })
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes the flat config file that reproduces this run via `--config`.
    pub fn run_config(&mut self) -> Result<(), CliError> {
        let path = self.path("run.cfg");
        fs::write(&path, to_flat_config(&self.config)).map_err(|e| CliError::io(&path, e))?;
        self.written.push("run.cfg".into());
        Ok(())
    }

    /// Writes `manifest.json` with the config, outputs, summary and checks.
    pub fn finish(mut self, summary: Value, checks: Value) -> Result<(), CliError> {
        self.run_config()?;
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let manifest = json!({
            "schema": SCHEMA,
            "command": self.command,
            "config": self.config,
            "versions": { "cgo": env!("CARGO_PKG_VERSION") },
            "timestamp_unix": stamp,
            "outputs": self.written,
            "summary": summary,
            "checks": checks,
        });
        let path = self.path("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Usage(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}

pub struct CsvOut {
    w: csv::Writer<BufWriter<File>>,
    path: PathBuf,
}

impl CsvOut {
    pub fn row(&mut self, cells: &[String]) -> Result<(), CliError> {
        self.w.write_record(cells).map_err(|e| CliError::Csv(self.path.clone(), e))
    }

    pub fn close(mut self) -> Result<(), CliError> {
        self.w.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

pub fn f(v: f64) -> String {
    format!("{v:e}")
}

pub fn c(v: Complex64) -> [String; 2] {
    [f(v.re), f(v.im)]
}

pub fn opt_c(v: Option<Complex64>) -> [String; 2] {
    v.map(c).unwrap_or_default()
}

/// `name_re, name_im` header pairs.
pub fn complex_cols(names: &[&str]) -> Vec<String> {
    names.iter().flat_map(|n| [format!("{n}_re"), format!("{n}_im")]).collect()
}

/// A named per-node column computed from `(radial, angular)` indices.
pub type ExtraColumn<'a> = (&'a str, &'a dyn Fn(usize, usize) -> String);

/// Header and rows for a set of fields on one grid.
pub fn grid_csv(sink: &mut Sink, name: &str, fields: &[(&str, &GridField)], extra: Option<ExtraColumn>) -> Result<(), CliError> {
    let g = &fields[0].1.grid;
    let radial = if g.region == Region::Interior { "r" } else { "s" };
    let mut header = vec![radial.to_string(), "phi".to_string()];
    if let Some((col, _)) = extra {
        header.push(col.to_string());
    }
    header.extend(complex_cols(&fields.iter().map(|(n, _)| *n).collect::<Vec<_>>()));
    let mut out = sink.csv(name, &header)?;
    for i in 0..g.n_r {
        for j in 0..g.n_phi {
            let mut row = vec![f(g.radial_nodes[i]), f(g.angular_nodes[j])];
            if let Some((_, cell)) = extra {
                row.push(cell(i, j));
            }
            for (_, fld) in fields {
                row.extend(c(fld.values[[i, j]]));
            }
            out.row(&row)?;
        }
    }
    out.close()
}

/// Flattens a JSON object into `key = value` lines with flag-style keys.
pub fn to_flat_config(config: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(m) = config {
        for (k, v) in m {
            let key = k.replace('_', "-");
            let val = match v {
                Value::Null => continue,
                Value::Bool(false) => continue,
                Value::String(s) => s.clone(),
                Value::Array(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                other => other.to_string(),
            };
            out.push_str(&format!("{key} = {val}\n"));
        }
    }
    out
}

/// Parses a flat config file into flags to be placed before the
/// command-line flags (which therefore take precedence).
pub fn config_flags(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut flags = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected `key = value`", path.display(), n + 1)))?;
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        if k == "config" {
            return Err(CliError::Usage(format!("{}:{}: nested config files are not supported", path.display(), n + 1)));
        }
        match v {
            "true" => flags.push(format!("--{k}")),
            "false" => {}
            _ => flags.push(format!("--{k}={v}")),
        }
    }
    Ok(flags)
}
