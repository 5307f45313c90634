//! Structured results for axiom checks and verifications.
//!
//! Every check produces a flat list of [`CheckRecord`]s in a deterministic
//! order; the CLI renders them either as aligned text lines or as
//! line-delimited JSON.  `Warn` marks a documented deviation that a
//! corrected form resolves — it never affects the process exit status.

use serde::Serialize;
use std::fmt;

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Warn => "WARN",
            Status::Fail => "FAIL",
        })
    }
}

/// One verified identity or validation step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub suite: String,
    pub check: String,
    pub subject: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn to_text_line(&self) -> String {
        let mut line = format!("{} [{}] {}: {}", self.status, self.suite, self.check, self.subject);
        if let Some(d) = &self.detail {
            line.push_str(" — ");
            line.push_str(d);
        }
        line
    }
}

/// Ordered collection of check records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AxiomReport {
    pub records: Vec<CheckRecord>,
}

impl AxiomReport {
    pub fn new() -> Self {
        AxiomReport::default()
    }

    pub fn push(
        &mut self,
        suite: &str,
        check: &str,
        subject: impl Into<String>,
        status: Status,
        detail: Option<String>,
    ) {
        self.records.push(CheckRecord {
            suite: suite.to_string(),
            check: check.to_string(),
            subject: subject.into(),
            status,
            detail,
        });
    }

    pub fn pass(&mut self, suite: &str, check: &str, subject: impl Into<String>) {
        self.push(suite, check, subject, Status::Pass, None);
    }

    pub fn fail(&mut self, suite: &str, check: &str, subject: impl Into<String>, detail: String) {
        self.push(suite, check, subject, Status::Fail, Some(detail));
    }

    pub fn warn(&mut self, suite: &str, check: &str, subject: impl Into<String>, detail: String) {
        self.push(suite, check, subject, Status::Warn, Some(detail));
    }

    pub fn merge(&mut self, other: AxiomReport) {
        self.records.extend(other.records);
    }

    /// True when no record failed (warnings allowed).
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn first_failure(&self) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.status == Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_text_line());
            out.push('\n');
        }
        out
    }

    /// One JSON object per line, schema-stable for downstream tooling.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_rendering() {
        let mut rep = AxiomReport::new();
        rep.pass("hopf", "coassoc", "K*P");
        rep.fail("hopf", "antipode", "H", "lhs 0 vs rhs -P".into());
        assert!(!rep.passed());
        assert_eq!(rep.count(Status::Pass), 1);
        assert_eq!(
            rep.to_text(),
            "PASS [hopf] coassoc: K*P\nFAIL [hopf] antipode: H — lhs 0 vs rhs -P\n"
        );
        let jsonl = rep.to_jsonl();
        let first: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
        assert_eq!(first["status"], "pass");
        assert_eq!(first["suite"], "hopf");
        assert!(first.get("detail").is_none());
        assert_eq!(rep.first_failure().unwrap().check, "antipode");
    }
}
