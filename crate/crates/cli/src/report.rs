//! JSON-lines report stream with a summary object as the last line.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

pub struct Reporter<W: Write> {
    out: W,
    csv: bool,
    command: &'static str,
    checks: u64,
    violations: u64,
    extra: Vec<(String, Value)>,
}

impl<W: Write> Reporter<W> {
    pub fn new(out: W, command: &'static str, csv: bool) -> Self {
        Reporter { out, csv, command, checks: 0, violations: 0, extra: Vec::new() }
    }

    /// Writes one record line. Records are suppressed in CSV mode.
    pub fn record<T: Serialize>(&mut self, kind: &str, body: &T) -> io::Result<()> {
        if self.csv {
            return Ok(());
        }
        let mut value = serde_json::to_value(body).map_err(io::Error::other)?;
        match &mut value {
            Value::Object(map) => {
                map.insert("kind".into(), kind.into());
            }
            other => value = json!({ "kind": kind, "value": other.take() }),
        }
        writeln!(self.out, "{value}")
    }

    /// Writes a line verbatim, bypassing the record wrapper.
    pub fn raw(&mut self, line: &str) -> io::Result<()> {
        if self.csv {
            return Ok(());
        }
        writeln!(self.out, "{line}")
    }

    /// Counts a check; `passed = false` counts a violation.
    pub fn check(&mut self, passed: bool) {
        self.checks += 1;
        if !passed {
            self.violations += 1;
        }
    }

    /// Adds checks counted elsewhere.
    pub fn tally(&mut self, checks: u64, violations: u64) {
        self.checks += checks;
        self.violations += violations;
    }

    /// Adds a field to the summary.
    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.extra.push((key.into(), value.into()));
    }

    pub fn exit_code(&self) -> i32 {
        if self.violations > 0 {
            EXIT_VIOLATION
        } else {
            EXIT_PASS
        }
    }

    /// Writes the summary and returns the exit code.
    pub fn finish(mut self) -> io::Result<i32> {
        let code = self.exit_code();
        let status = if code == EXIT_PASS { "pass" } else { "violation" };
        let summary = self.summary(status, code);
        self.write_summary(summary)?;
        Ok(code)
    }

    /// Summary for a run aborted by bad input.
    pub fn fail(mut self, message: &str) -> io::Result<i32> {
        let mut summary = self.summary("input_error", EXIT_INPUT);
        summary.push(("error".into(), message.into()));
        self.write_summary(summary)?;
        Ok(EXIT_INPUT)
    }

    /// Summary fields in output order.
    fn summary(&mut self, status: &str, code: i32) -> Vec<(String, Value)> {
        let mut summary: Vec<(String, Value)> = vec![
            ("kind".into(), "summary".into()),
            ("command".into(), self.command.into()),
            ("status".into(), status.into()),
            ("exit_code".into(), code.into()),
            ("checks".into(), self.checks.into()),
            ("violations".into(), self.violations.into()),
        ];
        summary.append(&mut self.extra);
        summary
    }

    fn write_summary(&mut self, summary: Vec<(String, Value)>) -> io::Result<()> {
        if self.csv {
            let mut writer = csv::Writer::from_writer(&mut self.out);
            writer.write_record(summary.iter().map(|(k, _)| k))?;
            writer.write_record(summary.iter().map(|(_, v)| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            }))?;
            writer.flush()?;
            Ok(())
        } else {
            let map: Map<String, Value> = summary.into_iter().collect();
            writeln!(self.out, "{}", Value::Object(map))?;
            self.out.flush()
        }
    }
}
