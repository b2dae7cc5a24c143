use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

pub const REPORT_VERSION: &str = concat!("groth-report/1 groth-cli/", env!("CARGO_PKG_VERSION"));

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    PsdFailure,
    NotConverged,
    VerificationFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::PsdFailure => 2,
            Status::NotConverged => 3,
            Status::VerificationFailed => 4,
        }
    }

    pub fn gate(passed: bool) -> Self {
        if passed {
            Status::Ok
        } else {
            Status::VerificationFailed
        }
    }

    /// Keeps the first non-`Ok` status.
    pub fn and(self, other: Status) -> Self {
        if self == Status::Ok {
            other
        } else {
            self
        }
    }
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s.code())
    }
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub command: String,
    pub version: &'static str,
    pub inputs: Value,
    pub config: Value,
    pub results: Value,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
}

impl AnalysisReport {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            command: command.to_string(),
            version: REPORT_VERSION,
            inputs: json!({}),
            config,
            results: json!({}),
            timings: BTreeMap::new(),
        }
    }

    /// Runs `f`, recording its duration under `phase`.
    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.insert(phase.to_string(), start.elapsed().as_secs_f64());
        out
    }

    pub fn emit(&self) -> anyhow::Result<()> {
        println!("{}", serde_json::to_string_pretty(self)?);
        Ok(())
    }
}
