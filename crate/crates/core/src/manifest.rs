//! Run manifest: a JSON file mapping score sources to their CSV paths and
//! declared ranges, plus run-level paths and the run seed.
//!
//! Relative paths inside a manifest resolve against the manifest's own
//! directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::score::{self, ScoreTable};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub path: PathBuf,
    /// Declared range lower bound; both bounds present means min-max
    /// normalization uses the declared range instead of the observed one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub score_sources: BTreeMap<String, SourceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boxes_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images_path: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Validation(format!("manifest serialization failed: {e}")))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        manifest.validate()?;
        Ok(manifest)
    }

    fn validate(&self) -> Result<()> {
        for (name, entry) in &self.score_sources {
            match (entry.min, entry.max) {
                (None, None) => {}
                (Some(min), Some(max)) if min < max => {}
                (Some(min), Some(max)) => {
                    return Err(Error::Validation(format!(
                        "source '{name}' declares an empty range [{min}, {max}]"
                    )));
                }
                _ => {
                    return Err(Error::Validation(format!(
                        "source '{name}' declares only one of min/max"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn declared_range(&self, source: &str) -> Option<(f64, f64)> {
        let entry = self.score_sources.get(source)?;
        Some((entry.min?, entry.max?))
    }

    /// Loads one source's score CSV, resolving its path against `base_dir`.
    pub fn load_source(&self, source: &str, base_dir: &Path) -> Result<ScoreTable> {
        let entry = self.score_sources.get(source).ok_or_else(|| Error::Lookup {
            kind: "source",
            name: source.to_string(),
        })?;
        let path = resolve(base_dir, &entry.path);
        score::load_scores(&path, source)
    }

    /// Loads and inner-joins several sources.
    pub fn load_joined(&self, sources: &[String], base_dir: &Path) -> Result<ScoreTable> {
        let tables = sources
            .iter()
            .map(|s| self.load_source(s, base_dir))
            .collect::<Result<Vec<_>>>()?;
        score::join_tables(&tables)
    }
}

fn resolve(base_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn load_and_resolve() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("beholder.csv");
        std::fs::write(
            &csv_path,
            "sample_id,filter,label,score\ns1,bonafide,bonafide,2.5\n",
        )
        .unwrap();
        let manifest_path = dir.path().join("run.json");
        let mut file = std::fs::File::create(&manifest_path).unwrap();
        write!(
            file,
            r#"{{"score_sources": {{"beholder": {{"path": "beholder.csv", "min": 1.0, "max": 5.0}}}}, "seed": 7}}"#
        )
        .unwrap();

        let manifest = RunManifest::load(&manifest_path).unwrap();
        assert_eq!(manifest.seed, 7);
        assert_eq!(manifest.declared_range("beholder"), Some((1.0, 5.0)));
        let table = manifest.load_source("beholder", dir.path()).unwrap();
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn rejects_half_declared_range() {
        let dir = tempfile::tempdir().unwrap();
        let manifest_path = dir.path().join("run.json");
        std::fs::write(
            &manifest_path,
            r#"{"score_sources": {"x": {"path": "x.csv", "min": 1.0}}}"#,
        )
        .unwrap();
        assert!(matches!(
            RunManifest::load(&manifest_path).unwrap_err(),
            Error::Validation(_)
        ));
    }

    #[test]
    fn missing_file_is_io() {
        assert!(RunManifest::load(Path::new("/nonexistent/run.json"))
            .unwrap_err()
            .is_io());
    }
}
