//! Dataset manifest: the only way a dataset enters evaluation.
//!
//! ```json
//! { "sets": [ { "set_id": 1, "hdr_path": "scene1.hdr",
//!               "ldr_entries": [ { "path": "a.png", "subjective_score": 2.5 } ] } ] }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SUBJECTIVE: f64 = 1.0;
pub const MAX_SUBJECTIVE: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub sets: Vec<ManifestSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestSet {
    pub set_id: i64,
    pub hdr_path: PathBuf,
    pub ldr_entries: Vec<LdrEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdrEntry {
    pub path: PathBuf,
    pub subjective_score: f64,
}

fn invalid(location: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::ManifestInvalid {
        location: location.into(),
        reason: reason.into(),
    }
}

/// Parses and validates a manifest document.
pub fn load_manifest(bytes: &[u8]) -> Result<DatasetManifest> {
    let manifest: DatasetManifest = serde_json::from_slice(bytes).map_err(|e| {
        invalid(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    manifest.validate()?;
    Ok(manifest)
}

/// Reads a manifest file and resolves relative image paths against its
/// directory.
pub fn load_manifest_file(path: &Path) -> Result<DatasetManifest> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut manifest = load_manifest(&bytes).map_err(|e| e.in_file(path))?;
    if let Some(base) = path.parent() {
        manifest.resolve_relative(base);
    }
    Ok(manifest)
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        if self.sets.is_empty() {
            return Err(invalid("sets", "manifest lists no image sets"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, set) in self.sets.iter().enumerate() {
            let at = format!("sets[{i}]");
            if !seen.insert(set.set_id) {
                return Err(invalid(at, format!("duplicate set_id {}", set.set_id)));
            }
            if set.ldr_entries.len() < 2 {
                return Err(invalid(
                    format!("{at}.ldr_entries"),
                    format!(
                        "TooFewItems: set {} has {} LDR entries, need at least 2",
                        set.set_id,
                        set.ldr_entries.len()
                    ),
                ));
            }
            for (j, entry) in set.ldr_entries.iter().enumerate() {
                let s = entry.subjective_score;
                if !(MIN_SUBJECTIVE..=MAX_SUBJECTIVE).contains(&s) {
                    return Err(invalid(
                        format!("{at}.ldr_entries[{j}].subjective_score"),
                        format!("{s} outside [{MIN_SUBJECTIVE}, {MAX_SUBJECTIVE}]"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn resolve_relative(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for set in &mut self.sets {
            fix(&mut set.hdr_path);
            for entry in &mut set.ldr_entries {
                fix(&mut entry.path);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(entries: &str) -> String {
        format!(r#"{{"sets":[{{"set_id":1,"hdr_path":"h.hdr","ldr_entries":[{entries}]}}]}}"#)
    }

    fn entries(n: usize) -> Vec<String> {
        (0..n)
            .map(|i| format!(r#"{{"path":"l{i}.png","subjective_score":{}}}"#, 1 + i % 8))
            .collect()
    }

    #[test]
    fn accepts_eight_entries() {
        let m = load_manifest(doc(&entries(8).join(",")).as_bytes()).unwrap();
        assert_eq!(m.sets[0].ldr_entries.len(), 8);
        assert_eq!(m.sets[0].ldr_entries[7].subjective_score, 8.0);
    }

    #[test]
    fn missing_score_is_invalid() {
        let mut e = entries(8);
        e[7] = r#"{"path":"l7.png"}"#.into();
        let err = load_manifest(doc(&e.join(",")).as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ManifestInvalid { .. }), "{err}");
    }

    #[test]
    fn invariant_violations() {
        let one = load_manifest(doc(&entries(1).join(",")).as_bytes()).unwrap_err();
        assert!(one.to_string().contains("TooFewItems"));
        let out_of_range =
            doc(r#"{"path":"a","subjective_score":0.5},{"path":"b","subjective_score":2}"#);
        assert!(matches!(
            load_manifest(out_of_range.as_bytes()),
            Err(Error::ManifestInvalid { .. })
        ));
        assert!(matches!(
            load_manifest(br#"{"sets":[]}"#),
            Err(Error::ManifestInvalid { .. })
        ));
        assert!(matches!(
            load_manifest(b"not json"),
            Err(Error::ManifestInvalid { .. })
        ));
        let unknown = r#"{"sets":[],"extra":1}"#;
        assert!(matches!(
            load_manifest(unknown.as_bytes()),
            Err(Error::ManifestInvalid { .. })
        ));
    }

    #[test]
    fn relative_paths_resolve_against_base() {
        let mut m = load_manifest(doc(&entries(2).join(",")).as_bytes()).unwrap();
        m.resolve_relative(Path::new("/data/set"));
        assert_eq!(m.sets[0].hdr_path, Path::new("/data/set/h.hdr"));
        assert_eq!(m.sets[0].ldr_entries[1].path, Path::new("/data/set/l1.png"));
    }
}
