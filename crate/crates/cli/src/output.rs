//! Result documents and delimited files. Wall-clock data lives only in the
//! `metadata` object, so `result` bodies are byte-identical across runs.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use kite_core::codesign::ErrorRecord;
use kite_core::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf() }
    }

    pub fn path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        Ok(self.dir.join(name))
    }

    pub fn create(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name)?)?))
    }

    pub fn csv(&self, name: &str) -> Result<csv::Writer<File>> {
        csv::Writer::from_path(self.path(name)?).map_err(csv_err)
    }

    /// Writer with an explicit header, for rows serialized as tuples.
    pub fn table(&self, name: &str, header: &[&str]) -> Result<csv::Writer<File>> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(self.path(name)?).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        Ok(w)
    }

    /// Writes `{metadata, result}` to `name` and echoes it on stdout.
    pub fn document<T: Serialize>(
        &self,
        name: &str,
        command: &str,
        clock: &Clock,
        extra: Value,
        result: &T,
    ) -> Result<()> {
        let doc = json!({
            "metadata": clock.metadata(command, extra),
            "result": result,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(json_err)?;
        std::fs::write(self.path(name)?, format!("{text}\n"))?;
        println!("{text}");
        Ok(())
    }
}

pub fn csv_err(e: csv::Error) -> Error {
    Error::Parse { what: "csv output".into(), msg: e.to_string() }
}

pub fn json_err(e: serde_json::Error) -> Error {
    Error::Parse { what: "json".into(), msg: e.to_string() }
}

pub fn error_record(e: &Error) -> String {
    json!({ "error": ErrorRecord::from(e) }).to_string()
}

/// Start time of a command.
pub struct Clock {
    started: Instant,
    created: u64,
}

impl Clock {
    pub fn start() -> Self {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self { started: Instant::now(), created }
    }

    pub fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    fn metadata(&self, command: &str, extra: Value) -> Value {
        let mut meta = json!({
            "tool": "kitecd",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "created_unix": self.created,
            "elapsed_s": self.elapsed(),
            "jobs": rayon::current_num_threads(),
        });
        if let (Value::Object(m), Value::Object(x)) = (&mut meta, extra) {
            m.extend(x);
        }
        meta
    }
}
