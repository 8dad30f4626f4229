//! Report envelope, input digests and the exit-code map.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use qcompat::io::{self, FormatError, LoadError};
use qcompat::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const EXIT_OK: u8 = 0;
pub const EXIT_SELFTEST: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_INFEASIBLE: u8 = 4;
pub const EXIT_NOT_SYMMETRY: u8 = 5;

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
}

/// Everything that can stop a command before it produces a result.
#[derive(Debug)]
pub enum Failure {
    Format(FormatError),
    Core(Error),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Format(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Format(f) => Failure::Format(f),
            LoadError::Invalid(e) => Failure::Core(e),
        }
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Format(_) => EXIT_IO,
            Failure::Core(Error::Infeasible { .. }) => EXIT_INFEASIBLE,
            Failure::Core(Error::NotASymmetry { .. }) => EXIT_NOT_SYMMETRY,
            Failure::Core(_) => EXIT_VALIDATION,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let message = match self {
            Failure::Format(e) => e.to_string(),
            Failure::Core(e) => e.to_string(),
        };
        let (kind, probe, deviation) = match self {
            Failure::Format(FormatError::Read { .. }) => ("io", None, None),
            Failure::Format(FormatError::Parse { .. }) => ("parse", None, None),
            Failure::Core(Error::Infeasible { best_residual }) => ("infeasible", None, Some(*best_residual)),
            Failure::Core(Error::NotASymmetry { probe, deviation }) => {
                ("not_a_symmetry", Some(probe.clone()), Some(*deviation))
            }
            Failure::Core(Error::IncompleteMap { probe }) => ("incomplete_map", Some(probe.clone()), None),
            Failure::Core(_) => ("validation", None, None),
        };
        ErrorReport { kind, message, probe, deviation }
    }
}

/// What a command hands back on success. `error` is set when the command ran
/// to completion but its verdict is negative.
pub struct Outcome {
    pub result: Value,
    pub exit: u8,
    pub error: Option<ErrorReport>,
    pub timings: Option<Value>,
}

impl Outcome {
    pub fn ok(result: impl Serialize) -> Self {
        Outcome { result: to_value(result), exit: EXIT_OK, error: None, timings: None }
    }
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Accumulates the input digests and effective configuration of a command,
/// so both can be echoed even when the command fails half way.
#[derive(Default)]
pub struct Context {
    inputs: BTreeMap<String, InputDigest>,
    config: Map<String, Value>,
}

impl Context {
    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.config.insert(key.to_string(), to_value(value));
    }

    /// Reads, digests and parses one input file.
    pub fn load<T: DeserializeOwned>(&mut self, role: &str, path: &Path, what: &'static str) -> Result<T, FormatError> {
        let bytes = fs::read(path).map_err(|source| FormatError::Read { path: path.to_path_buf(), source })?;
        self.inputs.insert(
            role.to_string(),
            InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len() },
        );
        let text = String::from_utf8(bytes).map_err(|_| FormatError::Parse { what, message: "not valid UTF-8".into() })?;
        io::parse(what, &text)
    }
}

#[derive(Serialize)]
pub struct Report {
    pub command: &'static str,
    pub inputs: BTreeMap<String, InputDigest>,
    pub config: Map<String, Value>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Value>,
    pub elapsed_ms: f64,
}

impl Report {
    pub fn new(command: &'static str, ctx: Context, outcome: Result<Outcome, Failure>, elapsed_ms: f64) -> (Report, u8) {
        let (result, error, timings, exit) = match outcome {
            Ok(o) => (o.result, o.error, o.timings, o.exit),
            Err(f) => (Value::Null, Some(f.report()), None, f.exit_code()),
        };
        let report =
            Report { command, inputs: ctx.inputs, config: ctx.config, result, error, timings, elapsed_ms };
        (report, exit)
    }
}
