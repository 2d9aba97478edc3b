use std::fmt;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// Versioned wrapper around every JSON emission.
#[derive(Debug, Serialize)]
pub struct Envelope<R: Serialize> {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub inputs: Value,
    pub results: R,
}

impl<R: Serialize> Envelope<R> {
    pub fn new(command: &'static str, inputs: Value, results: R) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            inputs,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize to JSON")
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(ancred::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        use ancred::Error as E;
        let code = match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Core(E::Domain(_) | E::InvalidArgument(_)) => 3,
            CliError::Core(E::NotSignificant { .. }) => 4,
            CliError::Core(E::DegenerateTable(_)) => 5,
            CliError::Core(E::NoSolution(_)) => 6,
            CliError::Core(E::Bracket { .. } | E::Convergence { .. }) => 7,
        };
        ExitCode::from(code)
    }

    pub fn kind(&self) -> &'static str {
        use ancred::Error as E;
        match self {
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
            CliError::Core(E::Domain(_) | E::InvalidArgument(_)) => "domain",
            CliError::Core(E::NotSignificant { .. }) => "not-significant",
            CliError::Core(E::DegenerateTable(_)) => "degenerate-table",
            CliError::Core(E::NoSolution(_)) => "no-solution",
            CliError::Core(E::Bracket { .. } | E::Convergence { .. }) => "numerical",
        }
    }

    pub fn to_json(&self, command: &str) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "error": { "kind": self.kind(), "message": self.to_string() },
        }))
        .expect("error serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ancred::Error> for CliError {
    fn from(e: ancred::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Four significant digits for human-readable output.
pub fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..=6).contains(&magnitude) {
        return format!("{x:.3e}");
    }
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn opt4(x: Option<f64>) -> String {
    x.map(sig4).unwrap_or_else(|| "n/a".into())
}

/// Comma-separated table with a header row; numbers use the shortest
/// representation that round-trips.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|x| num(*x)).collect());
    }

    pub fn render(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            writer.write_record(row).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "columns": self.header,
            "rows": self.rows.iter().map(|row| {
                row.iter().map(|cell| match cell.parse::<f64>() {
                    Ok(x) => serde_json::json!(x),
                    Err(_) => serde_json::json!(cell),
                }).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}
