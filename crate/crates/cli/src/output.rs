use std::io::Write;
use std::path::{Path, PathBuf};

use ctlab_core::{Error, ErrorKind, Result};
use serde_json::{json, Value};
use tempfile::NamedTempFile;

/// Files produced by one command, written only after the command succeeds.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn add_json(&mut self, name: impl Into<String>, value: &Value) {
        let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
        text.push('\n');
        self.add(name, text);
    }

    /// Stage every file in `dir`, then rename them into place, so a failure
    /// while writing leaves no partial outputs.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let mut tmp = NamedTempFile::new_in(dir)?;
            tmp.write_all(contents)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::new();
        for (tmp, target) in staged {
            tmp.persist(&target).map_err(|e| Error::IoFailure(e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}

pub const EXIT_CATALOG_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Validation | ErrorKind::Io => EXIT_VALIDATION,
        ErrorKind::Budget | ErrorKind::Numerical => EXIT_BUDGET,
    }
}

/// Machine-readable error object printed on stderr.
pub fn error_object(e: &Error) -> Value {
    let kind = match e.kind() {
        ErrorKind::Validation => "validation",
        ErrorKind::Io => "io",
        ErrorKind::Budget => "budget",
        ErrorKind::Numerical => "numerical",
    };
    json!({ "error": { "kind": kind, "message": e.to_string(), "exit_code": exit_code(e) } })
}

/// Unit map keyed by JSON pointer.
pub fn units(entries: &[(&str, &str)]) -> Value {
    Value::Object(entries.iter().map(|(k, v)| (k.to_string(), Value::String(v.to_string()))).collect())
}
