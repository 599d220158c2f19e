//! Command reports with deterministic text and JSON renderings.

use std::fmt::Write as _;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::Value;

use crate::error::Error;

pub const SCHEMA: u32 = 1;

/// Key/value pairs kept in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Fields(Vec<(String, Value)>);

impl Fields {
    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl Serialize for Fields {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Nothing was checked.
    None,
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip)]
    pub code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub inputs: Fields,
    pub results: Fields,
    pub checks: Vec<Check>,
    pub findings: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    /// Only filled when timing was requested, so default output stays byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::IllFormed(_) => "ill-formed",
        Error::UnsupportedDensity(_) => "unsupported-density",
        Error::SingularSubstitution(_) => "singular-substitution",
        Error::Parse { .. } => "parse",
        Error::Solver(_) => "solver",
        Error::Consistency(_) => "consistency",
        Error::Verification(_) => "verification",
        Error::Polynomiality(_) => "polynomiality",
        Error::Validation(_) => "validation",
        Error::Precondition(_) => "precondition",
    }
}

/// 2 for bad input, 3 for a failed verification, 4 for a solver failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::IllFormed(_)
        | Error::UnsupportedDensity(_)
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::Precondition(_) => 2,
        Error::Verification(_) | Error::Polynomiality(_) => 3,
        Error::Solver(_) | Error::Consistency(_) | Error::SingularSubstitution(_) => 4,
    }
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            inputs: Fields::default(),
            results: Fields::default(),
            checks: Vec::new(),
            findings: Vec::new(),
            verdict: Verdict::None,
            error: None,
            elapsed_ms: None,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Report {
        self.inputs.push(key, value);
        self
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) -> &mut Report {
        self.results.push(key, value);
        self
    }

    /// A result given by its canonical text.
    pub fn expr(&mut self, key: &str, value: &impl std::fmt::Display) -> &mut Report {
        self.results.push(key, value.to_string());
        self
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: Option<String>) -> &mut Report {
        self.checks.push(Check { name: name.to_string(), pass, detail });
        self.verdict = if self.checks.iter().all(|c| c.pass) { Verdict::Pass } else { Verdict::Fail };
        self
    }

    pub fn finding(&mut self, text: impl Into<String>) -> &mut Report {
        self.findings.push(text.into());
        self
    }

    pub fn fail_with(&mut self, e: &Error) -> &mut Report {
        self.error = Some(ErrorInfo { kind: error_kind(e), message: e.to_string(), code: exit_code(e) });
        self.verdict = Verdict::Error;
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::None | Verdict::Pass => 0,
            Verdict::Fail => 3,
            Verdict::Error => self.error.as_ref().map_or(2, |e| e.code),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        for (k, v) in self.inputs.iter() {
            let _ = writeln!(out, "input {k}: {}", text_value(v));
        }
        for (k, v) in self.results.iter() {
            let t = text_value(v);
            if t.contains('\n') {
                let _ = writeln!(out, "{k}:");
                for line in t.lines() {
                    let _ = writeln!(out, "  {line}");
                }
            } else {
                let _ = writeln!(out, "{k}: {t}");
            }
        }
        for c in &self.checks {
            let mark = if c.pass { "pass" } else { "FAIL" };
            match &c.detail {
                Some(d) => {
                    let _ = writeln!(out, "check {}: {mark} ({d})", c.name);
                }
                None => {
                    let _ = writeln!(out, "check {}: {mark}", c.name);
                }
            }
        }
        for f in &self.findings {
            let _ = writeln!(out, "finding: {f}");
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error ({}): {}", e.kind, e.message);
        }
        let _ = writeln!(out, "verdict: {}", verdict_text(self.verdict));
        if let Some(ms) = self.elapsed_ms {
            let _ = writeln!(out, "elapsed: {ms} ms");
        }
        out
    }
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::None => "none",
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Error => "error",
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(xs) if !xs.is_empty() && xs.iter().all(Value::is_string) => {
            xs.iter().map(|x| x.as_str().unwrap_or_default()).collect::<Vec<_>>().join("\n")
        }
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_and_codes() {
        let mut r = Report::new("x");
        assert_eq!(r.exit_code(), 0);
        r.check("a", true, None);
        assert_eq!(r.verdict, Verdict::Pass);
        r.check("b", false, Some("off by one".into()));
        assert_eq!((r.verdict, r.exit_code()), (Verdict::Fail, 3));
        r.fail_with(&Error::Solver("stuck".into()));
        assert_eq!(r.exit_code(), 4);
        assert_eq!(exit_code(&Error::Validation("eta".into())), 2);
    }

    #[test]
    fn json_keeps_field_order() {
        let mut r = Report::new("t");
        r.input("z", 1).input("a", 2).result("f", "v[1]_0");
        let j = r.to_json();
        assert!(j.find("\"z\"").unwrap() < j.find("\"a\"").unwrap());
        assert!(j.starts_with("{\n  \"schema\": 1,"));
        assert!(!j.contains("elapsed_ms"));
        assert_eq!(j, r.clone().to_json());
    }

    #[test]
    fn text_rendering() {
        let mut r = Report::new("tophier wk f0 --deg 3");
        r.result("lines", vec!["a", "b"]).finding("noted");
        let t = r.to_text();
        assert!(t.contains("lines:\n  a\n  b\n"));
        assert!(t.contains("finding: noted\n"));
        assert!(t.ends_with("verdict: none\n"));
    }
}
