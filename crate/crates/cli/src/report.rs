use std::io::Write;
use std::time::Duration;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::commands::Source;

/// An error that stops a command before it produces a result.
#[derive(Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
}

impl From<spatial_alex::Error> for Failure {
    fn from(e: spatial_alex::Error) -> Self {
        let debug = format!("{e:?}");
        let kind = debug.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        Failure {
            kind,
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            kind: kind.to_string(),
            message: message.into(),
        }
    }
}

struct Check {
    name: String,
    ok: bool,
    detail: String,
}

/// Everything a command prints. Keys are emitted in sorted order, so equal
/// inputs and flags give byte-identical output.
pub struct Report {
    command: String,
    input: Option<Value>,
    result: Map<String, Value>,
    text: Vec<String>,
    checks: Vec<Check>,
    error: Option<Value>,
    elapsed: Option<Duration>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            input: None,
            result: Map::new(),
            text: Vec::new(),
            checks: Vec::new(),
            error: None,
            elapsed: None,
        }
    }

    pub fn set_input(&mut self, src: &Source) {
        let digest = Sha256::digest(&src.bytes);
        self.input = Some(json!({
            "source": src.name,
            "sha256": format!("{digest:x}"),
        }));
    }

    /// A result field together with its one-line text rendering.
    pub fn field(&mut self, key: &str, value: Value, text: impl Into<String>) {
        self.result.insert(key.to_string(), value);
        self.text.push(format!("{key}: {}", text.into()));
    }

    /// A result field shown only in JSON.
    pub fn data(&mut self, key: &str, value: Value) {
        self.result.insert(key.to_string(), value);
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.text.push(text.into());
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            ok,
            detail: detail.into(),
        });
    }

    pub fn set_error(&mut self, f: &Failure) {
        self.error = Some(json!({"kind": f.kind, "message": f.message}));
    }

    pub fn set_elapsed(&mut self, d: Duration) {
        self.elapsed = Some(d);
    }

    pub fn ok(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.ok)
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        out.insert("schema".into(), json!(1));
        out.insert("command".into(), json!(self.command));
        if let Some(i) = &self.input {
            out.insert("input".into(), i.clone());
        }
        out.insert("result".into(), Value::Object(self.result.clone()));
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "ok": c.ok, "detail": c.detail}))
            .collect();
        out.insert("checks".into(), Value::Array(checks));
        out.insert("ok".into(), json!(self.ok()));
        if let Some(e) = &self.error {
            out.insert("error".into(), e.clone());
        }
        if let Some(d) = self.elapsed {
            out.insert("elapsed_ms".into(), json!(d.as_secs_f64() * 1e3));
        }
        Value::Object(out)
    }

    pub fn print(&self, as_json: bool) {
        // a closed pipe downstream is not an error worth a panic
        let _ = self.write(as_json);
    }

    fn write(&self, as_json: bool) -> std::io::Result<()> {
        let mut out = std::io::stdout().lock();
        if as_json {
            let text = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
            return writeln!(out, "{text}");
        }
        if let Some(e) = &self.error {
            eprintln!(
                "error ({}): {}",
                e["kind"].as_str().unwrap_or(""),
                e["message"].as_str().unwrap_or("")
            );
            return Ok(());
        }
        for l in &self.text {
            writeln!(out, "{l}")?;
        }
        for c in &self.checks {
            let mark = if c.ok { "pass" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(out, "check {}: {mark}", c.name)?;
            } else {
                writeln!(out, "check {}: {mark} ({})", c.name, c.detail)?;
            }
        }
        if let Some(d) = self.elapsed {
            writeln!(out, "elapsed: {:.3} ms", d.as_secs_f64() * 1e3)?;
        }
        Ok(())
    }
}
