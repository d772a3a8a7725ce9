//! The bundled model corpus and its manifest of expected verdicts.

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
pub struct ScenarioExpectation {
    pub name: String,
    /// Expected `verify` exit code.
    pub verify: i32,
    /// Substrings the counterexample transcript must contain, in order.
    #[serde(default)]
    pub fragments: Vec<String>,
}

/// A saved model that `trace` must replay to the given outcome.
#[derive(Clone, Debug, Deserialize)]
pub struct ReplayExpectation {
    pub scenario: String,
    pub model: PathBuf,
    pub exit: i32,
    #[serde(default)]
    pub fragments: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct CorpusEntry {
    pub file: PathBuf,
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<ScenarioExpectation>,
    #[serde(default)]
    pub replay: Vec<ReplayExpectation>,
}

#[derive(Deserialize)]
struct Manifest {
    entry: Vec<CorpusEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("manifest: {0}")]
    Toml(#[from] toml::de::Error),
}

/// The corpus shipped in this repository.
pub fn default_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Reads `manifest.toml` from `dir`; paths in the result are joined to `dir`.
pub fn corpus_manifest(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let path = dir.join("manifest.toml");
    let text = std::fs::read_to_string(&path).map_err(|e| CorpusError::Io(path.display().to_string(), e))?;
    let mut m: Manifest = toml::from_str(&text)?;
    for e in &mut m.entry {
        e.file = dir.join(&e.file);
        for r in &mut e.replay {
            r.model = dir.join(&r.model);
        }
    }
    Ok(m.entry)
}

/// `//~ ERROR text` annotations: (1-based line, expected message substring).
pub fn error_annotations(src: &str) -> Vec<(u32, String)> {
    src.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let (_, rest) = l.split_once("//~ ERROR")?;
            Some((i as u32 + 1, rest.trim().to_string()))
        })
        .collect()
}

/// Every `.soc` file under `dir`, recursively, sorted.
pub fn soc_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let Ok(rd) = std::fs::read_dir(&d) else { continue };
        for e in rd.flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "soc") {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

/// True if `needles` occur in `hay` in order, without overlapping.
pub fn contains_in_order(hay: &str, needles: &[String]) -> bool {
    let mut rest = hay;
    for n in needles {
        match rest.find(n.as_str()) {
            Some(i) => rest = &rest[i + n.len()..],
            None => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_has_required_entries() {
        let entries = corpus_manifest(&default_dir()).unwrap();
        let find = |f: &str, s: &str| {
            entries
                .iter()
                .filter(|e| e.file.ends_with(f))
                .flat_map(|e| &e.scenarios)
                .find(|x| x.name == s)
                .map(|x| x.verify)
        };
        assert_eq!(find("mini_tx1_vulnerable.soc", "test_secure_area_unchanged"), Some(2));
        assert_eq!(find("mini_tx1_fixed.soc", "test_secure_area_unchanged"), Some(0));
        for s in ["base_case", "inductive_step", "invariant_is_useful"] {
            assert_eq!(find("mini_tx1_fixed.soc", s), Some(0));
        }
        assert!(entries.iter().any(|e| e.file.ends_with("monitor.soc")));
        assert!(entries.iter().any(|e| e.file.ends_with("assume_assert_invariant.soc")));
        for e in &entries {
            assert!(e.file.exists(), "{}", e.file.display());
        }
    }

    #[test]
    fn annotations() {
        let a = error_annotations("module M {\n  x //~ ERROR type mismatch\n}");
        assert_eq!(a, vec![(2, "type mismatch".to_string())]);
    }

    #[test]
    fn ordered_fragments() {
        let f = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert!(contains_in_order("a b a c", &f(&["a", "a", "c"])));
        assert!(!contains_in_order("a c", &f(&["c", "a"])));
    }
}
