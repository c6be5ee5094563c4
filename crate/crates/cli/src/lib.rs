//! JSON front end for `parbundle-core`: one request in, one response out.
//!
//! A request is `{"command": ..., "payload": {...}}`. The response is
//! `{"ok", "result", "diagnostics", "error"}` serialized as canonical JSON
//! (sorted keys, shortest float representation). See `docs/cli.md`.

pub mod codec;
pub mod commands;

use serde::Serialize;
use serde_json::Value;

pub use commands::COMMANDS;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error(transparent)]
    Domain(#[from] parbundle_core::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::UnknownCommand(_) => "UnknownCommand",
            CliError::Schema(_) => "SchemaViolation",
            CliError::Domain(e) => e.code(),
        }
    }

    /// Process exit code: 2 for domain errors, 3 for malformed requests.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Response {
    pub ok: bool,
    pub result: Value,
    pub diagnostics: Vec<String>,
    pub error: Option<ErrorInfo>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl Response {
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("response serializes")
    }

    /// Canonical serialization.
    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }
}

/// Settings shared by every request of one invocation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Settings {
    /// Overrides the per-module default tolerances.
    pub tol: Option<f64>,
}

fn parse_request(req: &Value) -> Result<(&str, Value), CliError> {
    let o = codec::object(req, "request")?;
    if let Some(k) = o.keys().find(|k| *k != "command" && *k != "payload") {
        return Err(CliError::Schema(format!("unexpected request field `{k}`")));
    }
    let cmd = codec::field(o, "command")?
        .as_str()
        .ok_or_else(|| CliError::Schema("command: expected a string".into()))?;
    let payload = o.get("payload").cloned().unwrap_or_else(|| Value::Object(Default::default()));
    Ok((cmd, payload))
}

/// Runs a single request.
pub fn run(req: &Value, settings: Settings) -> Response {
    let mut ctx = commands::Ctx { tol: settings.tol, diagnostics: Vec::new() };
    let out = parse_request(req).and_then(|(cmd, payload)| commands::dispatch(cmd, &payload, &mut ctx));
    let mut diagnostics = ctx.diagnostics;
    diagnostics.sort();
    diagnostics.dedup();
    match out {
        Ok(result) => Response { ok: true, result, diagnostics, error: None, exit_code: 0 },
        Err(e) => Response {
            ok: false,
            result: Value::Null,
            diagnostics,
            error: Some(ErrorInfo { code: e.code().to_string(), message: e.to_string() }),
            exit_code: e.exit_code(),
        },
    }
}

/// Runs the text of one request, or of a batch when `batch` is set.
/// Returns the canonical output and the process exit code.
pub fn run_text(text: &str, batch: bool, settings: Settings) -> (String, i32) {
    let parsed: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            let err = CliError::Schema(format!("invalid JSON: {e}"));
            let r = Response {
                ok: false,
                result: Value::Null,
                diagnostics: Vec::new(),
                error: Some(ErrorInfo { code: err.code().into(), message: err.to_string() }),
                exit_code: err.exit_code(),
            };
            return (r.to_json(), r.exit_code);
        }
    };
    if !batch {
        let r = run(&parsed, settings);
        return (r.to_json(), r.exit_code);
    }
    let reqs = match parsed.as_array() {
        Some(a) => a,
        None => {
            let r = run(&Value::Null, settings);
            let r = Response {
                error: Some(ErrorInfo {
                    code: "SchemaViolation".into(),
                    message: "schema violation: a batch file must hold an array of requests".into(),
                }),
                ..r
            };
            return (r.to_json(), 3);
        }
    };
    let responses: Vec<Response> = reqs.iter().map(|q| run(q, settings)).collect();
    let code = responses.iter().map(|r| r.exit_code).max().unwrap_or(0);
    let arr = Value::Array(responses.iter().map(Response::to_value).collect());
    (arr.to_string(), code)
}
