//! Output layout `out/<subcommand>/<config-hash>/`, CSV tables and JSON manifests.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{LabError, Result};

/// Directory owned by one run. Files inside carry the hash in their names.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub path: PathBuf,
    pub hash: String,
    pub subcommand: String,
}

impl RunDir {
    pub fn create(config: &RunConfig, subcommand: &str) -> Result<Self> {
        let hash = config.hash();
        let path = config.output.dir.join(subcommand).join(&hash);
        fs::create_dir_all(&path).map_err(|e| LabError::io(format!("creating {}", path.display()), e))?;
        Ok(Self { path, hash, subcommand: subcommand.to_string() })
    }

    /// `<stem>-<hash>.<ext>` inside the run directory.
    pub fn file(&self, stem: &str, ext: &str) -> PathBuf {
        self.path.join(format!("{stem}-{}.{ext}", self.hash))
    }

    pub fn write_csv<T: Serialize>(&self, stem: &str, rows: &[T]) -> Result<PathBuf> {
        let path = self.file(stem, "csv");
        write_csv(&path, rows)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, stem: &str, value: &T) -> Result<PathBuf> {
        let path = self.file(stem, "json");
        write_json(&path, value)?;
        Ok(path)
    }

    /// Writes `manifest-<hash>.json`: the full config, its TOML text, and a wall-clock stamp.
    /// The stamp lives only here so every other file is reproducible byte for byte.
    pub fn write_manifest(&self, config: &RunConfig, details: serde_json::Value) -> Result<PathBuf> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let manifest = serde_json::json!({
            "subcommand": self.subcommand,
            "config_hash": self.hash,
            "version": env!("CARGO_PKG_VERSION"),
            "created_unix": created,
            "config": config,
            "config_toml": config.to_toml(),
            "details": details,
        });
        self.write_json("manifest", &manifest)
    }
}

/// Comma-separated, header row, LF line endings.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| LabError::io(format!("creating {}", path.display()), e))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| LabError::io(format!("writing {}", path.display()), e))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| LabError::io(format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| LabError::io(format!("writing {}", path.display()), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        t: f64,
        v: f64,
    }

    #[test]
    fn layout_and_dialect() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = RunConfig::default();
        config.output.dir = tmp.path().to_path_buf();
        let run = RunDir::create(&config, "evolve").unwrap();
        assert!(run.path.ends_with(format!("evolve/{}", config.hash())));
        let p = run.write_csv("series", &[Row { t: 0.5, v: 1e-3 }, Row { t: 1.0, v: 2.0 }]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "t,v\n0.5,0.001\n1.0,2.0\n");
        assert!(p.file_name().unwrap().to_str().unwrap().contains(&run.hash));
        let m = run.write_manifest(&config, serde_json::json!({"N": 1})).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(m).unwrap()).unwrap();
        assert_eq!(v["config_hash"], run.hash.as_str());
        assert_eq!(v["details"]["N"], 1);
    }
}
