//! Self-describing run reports in JSON and CSV.
//!
//! JSON reports follow `schema/report.schema.json`. CSV reports start with
//! `# `-prefixed comment lines carrying the same metadata, then one header
//! row with the fixed columns of the command.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const TOOL: &str = "sqrtwalk";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON report schema, as shipped in `schema/report.schema.json`.
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Fully resolved parameters, defaults included.
    pub config: Value,
    pub seed: Option<u64>,
    /// Only present when timing was requested, since it breaks byte-identity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub result: Value,
}

/// A fixed-column table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra comment lines, e.g. a fit summary.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            ..Default::default()
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

/// CSV cell text for a number: shortest round-trip form, with an exponent
/// for very small or large magnitudes.
pub trait CsvNum {
    fn cell(&self) -> String;
}

impl CsvNum for f64 {
    fn cell(&self) -> String {
        if self.is_finite() {
            serde_json::to_string(self).unwrap_or_else(|_| self.to_string())
        } else {
            self.to_string()
        }
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl CsvNum for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
int_cell!(i32, u32, u64, usize, i64);

pub fn num<T: CsvNum>(x: T) -> String {
    x.cell()
}

pub fn to_json(env: &Envelope) -> Result<String> {
    let mut s = serde_json::to_string_pretty(env)?;
    s.push('\n');
    Ok(s)
}

pub fn to_csv(env: &Envelope, table: &Table) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# {} {}\n", env.tool, env.version));
    out.push_str(&format!("# command: {}\n", env.command));
    match env.seed {
        Some(s) => out.push_str(&format!("# seed: {s}\n")),
        None => out.push_str("# seed: none\n"),
    }
    out.push_str(&format!("# config: {}\n", serde_json::to_string(&env.config)?));
    if let Some(t) = env.wall_time_s {
        out.push_str(&format!("# wall_time_s: {t}\n"));
    }
    for n in &table.notes {
        out.push_str(&format!("# {n}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).map_err(|e| Error::Io(e.to_string()))?;
    for r in &table.rows {
        if r.len() != table.header.len() {
            return Err(Error::Invalid(format!("row has {} fields, header {}", r.len(), table.header.len())));
        }
        w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?);
    Ok(out)
}

/// Structured error report written to stderr on failure.
pub fn error_json(command: &str, e: &Error) -> String {
    let v = serde_json::json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "error": { "kind": e.kind(), "message": e.to_string() },
    });
    format!("{}\n", serde_json::to_string_pretty(&v).unwrap_or_default())
}
