use std::fmt::Write as _;
use std::path::Path;

use crate::error::{McganError, Result};

/// Training losses as `step<TAB>term<TAB>value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossLog {
    pub records: Vec<(u64, String, f64)>,
}

impl LossLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: u64, term: &str, value: f64) {
        self.records.push((step, term.to_string(), value));
    }

    /// Values of one term in step order.
    pub fn series(&self, term: &str) -> Vec<(u64, f64)> {
        self.records
            .iter()
            .filter(|r| r.1 == term)
            .map(|r| (r.0, r.2))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (step, term, value) in &self.records {
            // `{:?}` keeps the shortest round-tripping representation.
            let _ = writeln!(out, "{step}\t{term}\t{value:?}");
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(McganError::io(dir))?;
        }
        std::fs::write(path, self.to_text()).map_err(McganError::io(path))
    }

    /// Appends to an existing log file.
    pub fn append_to(&self, path: &Path) -> Result<()> {
        use std::io::Write;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(McganError::io(dir))?;
        }
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(McganError::io(path))?;
        f.write_all(self.to_text().as_bytes()).map_err(McganError::io(path))
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut log = LossLog::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| McganError::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                msg: msg.to_string(),
            };
            let mut f = line.split('\t');
            let (Some(s), Some(t), Some(v), None) = (f.next(), f.next(), f.next(), f.next()) else {
                return Err(err("expected `step<TAB>term<TAB>value`"));
            };
            let step = s.parse().map_err(|_| err("bad step"))?;
            let value = v.parse().map_err(|_| err("bad value"))?;
            log.push(step, t, value);
        }
        Ok(log)
    }
}
