//! Output assembly with a provenance header and atomic file writes.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use pdc_lhv::config::ExperimentConfig;

pub const ARTIFACT: &str = "pdc-lhv";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip scientific form, `.` decimal point.
pub fn csv_float(x: f64) -> String {
    format!("{x:e}")
}

pub struct Output {
    verb: &'static str,
    config: Value,
    seed: u64,
    json: bool,
    notes: Vec<(String, String)>,
    lines: Vec<String>,
    result: Value,
}

impl Output {
    pub fn new(verb: &'static str, config: &ExperimentConfig, json: bool) -> Self {
        Self {
            verb,
            config: config.to_json(),
            seed: config.seed,
            json,
            notes: Vec::new(),
            lines: Vec::new(),
            result: Value::Null,
        }
    }

    /// Extra `key: value` line in the header block.
    pub fn note(&mut self, key: &str, value: &str) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn line(&mut self, text: &str) {
        self.lines.push(text.to_string());
    }

    pub fn set_result(&mut self, value: Value) {
        self.result = value;
    }

    fn render(&self) -> String {
        if self.json {
            let notes: Map<String, Value> =
                self.notes.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
            let doc = json!({
                "provenance": {
                    "artifact": ARTIFACT,
                    "version": VERSION,
                    "verb": self.verb,
                    "seed": self.seed,
                    "config": self.config,
                    "notes": notes,
                },
                "result": self.result,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
            text.push('\n');
            text
        } else {
            let mut text = format!(
                "# {ARTIFACT} {VERSION}\n# verb: {}\n# seed: {}\n# config: {}\n",
                self.verb, self.seed, self.config
            );
            for (k, v) in &self.notes {
                text.push_str(&format!("# {k}: {v}\n"));
            }
            for l in &self.lines {
                text.push_str(l);
                text.push('\n');
            }
            text
        }
    }

    /// Writes to `path` through a temporary file in the same directory, or to
    /// stdout when no path is given.
    pub fn finish(&self, path: Option<&Path>) -> std::io::Result<()> {
        let text = self.render();
        match path {
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()
            }
            Some(path) => {
                let dir = match path.parent() {
                    Some(p) if !p.as_os_str().is_empty() => p,
                    _ => Path::new("."),
                };
                let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
                tmp.write_all(text.as_bytes())?;
                tmp.as_file().sync_all()?;
                tmp.persist(path).map_err(|e| e.error)?;
                Ok(())
            }
        }
    }
}
