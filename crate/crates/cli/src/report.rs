//! Report assembly and the exit-status contract.
//!
//! Every command produces its full report as a string (JSON object with
//! sorted keys, CSV with a header row, or plain text where documented) so
//! that identical config and seed yield byte-identical output.  Reports
//! carry no timestamps, durations, or absolute paths.

use mds_core::MdsError;

/// A finished command: the report text plus the first failed invariant, if
/// any (drives exit status 1).
pub struct Outcome {
    pub report: String,
    pub failed: Option<String>,
}

impl Outcome {
    pub fn pass(report: String) -> Self {
        Outcome { report, failed: None }
    }

    pub fn with_failure(report: String, failed: Option<String>) -> Self {
        Outcome { report, failed }
    }
}

/// Command execution failures, split by exit status.
pub enum Failure {
    /// Exit 2: configuration, usage, or report-file problems.
    Config(String),
    /// Exit 1: an evaluation refused or a check failed; the message names
    /// the invariant.
    Check(String),
}

pub type CmdResult = Result<Outcome, Failure>;

/// Map a core error to a check failure, normalizing the polar-line message
/// to the documented `polar line s=1` form.
pub fn check_failure(e: MdsError) -> Failure {
    let msg = match &e {
        MdsError::PolarLine { line, .. } => format!("polar line {}", line.replace(' ', "")),
        other => other.to_string(),
    };
    Failure::Check(msg)
}

/// Render a JSON value as the canonical report text: pretty-printed with
/// sorted keys (the serializer's map order) and a trailing newline.
pub fn json_report(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    text
}

/// Shortest round-trip decimal for a float (deterministic across runs).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_line_failure_matches_documented_form() {
        let e = MdsError::PolarLine { line: "s = 1".into(), dist: 0.0, guard: 1e-3 };
        match check_failure(e) {
            Failure::Check(msg) => assert_eq!(msg, "polar line s=1"),
            _ => panic!("wrong class"),
        }
    }

    #[test]
    fn json_reports_sort_keys() {
        let v = serde_json::json!({"zeta": 1, "alpha": 2});
        let text = json_report(&v);
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
        assert!(text.ends_with('\n'));
    }
}
