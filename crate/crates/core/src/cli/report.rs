use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

use super::document::{GridSpec, ProblemDocument};

/// Compact JSON with every float written to 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).expect("reports serialize");
    String::from_utf8(out).expect("JSON is UTF-8")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub tol: f64,
    pub grid: GridSpec,
    pub t_schedule: Vec<f64>,
    pub relaxation: f64,
    pub max_iter: usize,
    pub soliton_max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub problem: ProblemDocument,
    pub ingestion: Vec<String>,
    pub tolerances: Tolerances,
    pub result: Value,
    pub diagnostics: Value,
    /// The only field that varies between identical runs.
    pub wall_time_ms: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        to_json(self)
    }
}
