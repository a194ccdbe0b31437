//! Consistency reports: one entry per check, summary counts derived from the
//! entries, deterministic JSON.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    ExactZero,
    WithinTol,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub status: Status,
    pub residual: Value,
    pub resamples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub exact_zero: usize,
    pub within_tol: usize,
    pub failed: usize,
    pub resamples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub config: Value,
    pub summary: Summary,
    pub entries: Vec<CheckEntry>,
    pub notes: Vec<String>,
    pub wall_time_ms: f64,
}

const MAX_RESIDUAL_CHARS: usize = 160;

/// Residual rendering: exact residuals as "p/q" (clipped), floats as numbers.
pub fn render_residual<S: Scalar>(r: &S) -> Value {
    if S::EXACT {
        let mut s = r.render().as_str().unwrap_or_default().to_string();
        if s.len() > MAX_RESIDUAL_CHARS {
            s.truncate(MAX_RESIDUAL_CHARS);
            s.push('…');
        }
        Value::String(s)
    } else {
        serde_json::json!(r.mag())
    }
}

impl ConsistencyReport {
    pub fn new(config: Value) -> Self {
        ConsistencyReport { config, summary: Summary::default(), entries: vec![], notes: vec![], wall_time_ms: 0.0 }
    }

    pub fn push(&mut self, e: CheckEntry) {
        self.summary.total += 1;
        self.summary.resamples += e.resamples;
        match e.status {
            Status::ExactZero => self.summary.exact_zero += 1,
            Status::WithinTol => self.summary.within_tol += 1,
            Status::Failed => self.summary.failed += 1,
        }
        self.entries.push(e);
    }

    /// Record one check.  `ok` decides pass/fail; exact domains pass as
    /// exact-zero, floats as within-tol.
    pub fn check(&mut self, id: impl Into<String>, exact: bool, ok: bool, residual: Value, resamples: usize) {
        let status = match (ok, exact) {
            (false, _) => Status::Failed,
            (true, true) => Status::ExactZero,
            (true, false) => Status::WithinTol,
        };
        self.push(CheckEntry { id: id.into(), status, residual, resamples, detail: None });
    }

    pub fn fail(&mut self, id: impl Into<String>, detail: impl Into<String>, resamples: usize) {
        self.push(CheckEntry {
            id: id.into(),
            status: Status::Failed,
            residual: Value::Null,
            resamples,
            detail: Some(detail.into()),
        });
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    /// Append another report's entries and notes (associative).
    pub fn merge(&mut self, other: ConsistencyReport) {
        for e in other.entries {
            self.push(e);
        }
        self.notes.extend(other.notes);
        self.wall_time_ms += other.wall_time_ms;
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn first_failure(&self) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.status == Status::Failed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Write via a temporary file and rename, so readers never see a
    /// half-written report.
    pub fn write_atomic(&self, path: &Path) -> std::io::Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("report");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_tracks_entries() {
        let mut a = ConsistencyReport::new(Value::Null);
        a.check("x", true, true, Value::String("0/1".into()), 2);
        a.check("y", false, true, serde_json::json!(1e-15), 0);
        let mut b = ConsistencyReport::new(Value::Null);
        b.fail("z", "boom", 1);
        a.merge(b);
        assert_eq!(a.summary, Summary { total: 3, exact_zero: 1, within_tol: 1, failed: 1, resamples: 3 });
        assert!(!a.passed());
        assert_eq!(a.first_failure().unwrap().id, "z");
    }

    #[test]
    fn atomic_write() {
        let dir = std::env::temp_dir().join(format!("hexeq-report-{}", std::process::id()));
        let p = dir.join("r.json");
        let r = ConsistencyReport::new(serde_json::json!({"k": 1}));
        r.write_atomic(&p).unwrap();
        let back: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(back["config"]["k"], 1);
        std::fs::remove_dir_all(dir).ok();
    }
}
