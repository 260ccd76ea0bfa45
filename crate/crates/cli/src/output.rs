//! CSV and JSON artifacts.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::failure::Failure;

/// 17 significant digits: every f64 survives the round trip.
pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Blank for a value that does not apply.
pub fn maybe(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

/// The output directory and the files written into it.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), Failure> {
        let path = self.dir.join(name);
        let fail = |e: csv::Error| Failure::io(&path, e);
        let mut w = csv::Writer::from_path(&path).map_err(fail)?;
        w.write_record(header).map_err(fail)?;
        for row in rows {
            w.write_record(row).map_err(fail)?;
        }
        w.flush().map_err(|e| Failure::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::io(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|e| Failure::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }
}
