//! Line-oriented dataset manifests: `font_id<TAB>relative_path` per line.
//!
//! Lines starting with `#` are comments, except `#split<TAB>train|test`,
//! which tags the whole manifest. Paths are relative to the manifest's
//! directory unless absolute.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{McganError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}` (expected train or test)")),
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub font_id: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Default)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub split: Option<Split>,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl PartialEq for DatasetManifest {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.split == other.split
    }
}

impl DatasetManifest {
    pub fn new(base_dir: impl Into<PathBuf>) -> Self {
        DatasetManifest {
            entries: Vec::new(),
            split: None,
            base_dir: base_dir.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, font_id: impl Into<String>, path: impl Into<PathBuf>) -> Result<()> {
        let font_id = font_id.into();
        let path = path.into();
        check_field(&font_id, "font id")?;
        check_field(&path.to_string_lossy(), "path")?;
        if self.entries.iter().any(|e| e.font_id == font_id) {
            return Err(McganError::InvalidInput(format!("duplicate font id `{font_id}`")));
        }
        self.entries.push(ManifestEntry { font_id, path });
        Ok(())
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            self.base_dir.join(&entry.path)
        }
    }

    /// The first `n` entries (all if fewer).
    pub fn head(&self, n: usize) -> Self {
        DatasetManifest {
            entries: self.entries.iter().take(n).cloned().collect(),
            split: self.split,
            base_dir: self.base_dir.clone(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(split) = self.split {
            let _ = writeln!(out, "#split\t{split}");
        }
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}", e.font_id, e.path.display());
        }
        out
    }

    /// Writes the manifest; relative entry paths are stored verbatim.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(McganError::io(dir))?;
        }
        fs::write(path, self.to_text()).map_err(McganError::io(path))
    }

    /// Parses manifest text without touching the filesystem.
    pub fn parse(text: &str, origin: &Path, base_dir: &Path) -> Result<Self> {
        let mut m = DatasetManifest::new(base_dir);
        let mut seen = HashSet::new();
        let err = |line: usize, msg: String| McganError::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#split\t") {
                m.split = Some(rest.trim().parse().map_err(|e| err(line_no, e))?);
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(id), Some(path), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(err(line_no, "expected `font_id<TAB>path`".into()));
            };
            if id.is_empty() || path.is_empty() {
                return Err(err(line_no, "empty font id or path".into()));
            }
            if !seen.insert(id.to_string()) {
                return Err(err(line_no, format!("duplicate font id `{id}`")));
            }
            m.entries.push(ManifestEntry {
                font_id: id.to_string(),
                path: PathBuf::from(path),
            });
        }
        Ok(m)
    }

    /// Loads and checks that every referenced file exists, listing all
    /// missing ones at once.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(McganError::io(path))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let m = Self::parse(&text, path, &base)?;
        let missing: Vec<PathBuf> = m
            .entries
            .iter()
            .map(|e| m.resolve(e))
            .filter(|p| !p.is_file())
            .collect();
        if !missing.is_empty() {
            return Err(McganError::MissingFiles {
                manifest: path.to_path_buf(),
                missing,
            });
        }
        Ok(m)
    }
}

fn check_field(s: &str, what: &str) -> Result<()> {
    if s.is_empty() || s.contains(['\t', '\n', '\r']) || s.starts_with('#') {
        return Err(McganError::InvalidInput(format!(
            "{what} `{s}` is empty, starts with `#`, or contains tabs/newlines"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = DatasetManifest::new(dir.path());
        m.split = Some(Split::Train);
        for id in ["a", "b"] {
            fs::write(dir.path().join(format!("{id}.png")), b"x").unwrap();
            m.push(id, format!("{id}.png")).unwrap();
        }
        let path = dir.path().join("m.tsv");
        m.save(&path).unwrap();
        let back = DatasetManifest::load(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.resolve(&back.entries[1]), dir.path().join("b.png"));
    }

    #[test]
    fn missing_files_are_all_listed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.tsv");
        fs::write(&path, "x\tgone1.png\ny\tgone2.png\n").unwrap();
        match DatasetManifest::load(&path) {
            Err(McganError::MissingFiles { missing, .. }) => {
                assert_eq!(missing, vec![dir.path().join("gone1.png"), dir.path().join("gone2.png")]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_manifest_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.tsv");
        fs::write(&path, "").unwrap();
        assert!(DatasetManifest::load(&path).unwrap().is_empty());
    }

    #[test]
    fn parse_errors_cite_line_numbers() {
        let p = Path::new("m.tsv");
        let err = DatasetManifest::parse("a\tx.png\n\nno-tab-here\n", p, p).unwrap_err();
        assert!(matches!(err, McganError::Parse { line: 3, .. }), "{err}");
        let err = DatasetManifest::parse("a\tx.png\na\ty.png\n", p, p).unwrap_err();
        assert!(matches!(err, McganError::Parse { line: 2, .. }), "{err}");
        let err = DatasetManifest::parse("#split\tdev\n", p, p).unwrap_err();
        assert!(err.to_string().contains("m.tsv:1"), "{err}");
    }
}
