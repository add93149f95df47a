//! Flat records and their CSV / JSON serialization.
//!
//! Every record kind has a fixed column list. Numbers are written with nine
//! significant digits; missing values are an empty CSV cell or JSON `null`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde_json::{Map, Number, Value as Json};

use crate::baseline::BaselinePoint;
use crate::error::{ModelError, Result};
use crate::pareto::{FrontierPoint, Niche};
use crate::sim::{CompareRow, PassengerRecord, SimResult};
use crate::steady::{OperatingPoint, PerformanceCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ModelError::Config(format!("unknown output format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Curve,
    Frontier,
    Niche,
    Sim,
    Compare,
    Shift,
    Series,
    Trace,
}

impl RecordKind {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            RecordKind::Curve => &["policy", "pi", "k", "c", "n", "m", "f_t", "branch"],
            RecordKind::Frontier => &["m", "f", "mode"],
            RecordKind::Niche => &["mode", "m_lo", "m_hi", "width"],
            RecordKind::Sim => &["policy", "c", "m", "pi", "seed", "f_t_sim", "f_t_analytic", "feasible"],
            RecordKind::Compare => &[
                "policy", "c", "m", "pi", "f_t_sim", "std_error", "f_t_analytic", "feasible", "little_ok",
            ],
            RecordKind::Shift => &["policy", "c", "pi", "shift"],
            RecordKind::Series => &["figure", "series", "m", "f"],
            RecordKind::Trace => &[
                "id", "call", "origin_x", "origin_y", "dest_x", "dest_y", "assigned", "picked_up", "delivered",
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Num(f64),
    Int(i64),
    Bool(bool),
    Missing,
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

/// Rounds to nine significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(s) => f.write_str(s),
            Value::Num(x) => write!(f, "{}", round_sig(*x)),
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Missing => Ok(()),
        }
    }
}

impl Value {
    fn to_json(&self) -> Json {
        match self {
            Value::Text(s) => Json::String(s.clone()),
            Value::Num(x) => Number::from_f64(round_sig(*x)).map_or(Json::Null, Json::Number),
            Value::Int(i) => Json::Number((*i).into()),
            Value::Bool(b) => Json::Bool(*b),
            Value::Missing => Json::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub kind: RecordKind,
    pub values: Vec<Value>,
}

impl Record {
    /// Panics if `values` does not match the kind's column count.
    pub fn new(kind: RecordKind, values: Vec<Value>) -> Self {
        assert_eq!(values.len(), kind.columns().len(), "wrong column count for {kind:?}");
        Self { kind, values }
    }

    pub fn curve(curve: &PerformanceCurve, p: &OperatingPoint) -> Self {
        Self::new(
            RecordKind::Curve,
            vec![
                curve.policy.name().into(),
                curve.pi.into(),
                curve.k.into(),
                curve.c.into(),
                p.n.into(),
                p.m.into(),
                p.f_t.into(),
                p.branch.name().into(),
            ],
        )
    }

    pub fn frontier(p: &FrontierPoint) -> Self {
        Self::new(RecordKind::Frontier, vec![p.m.into(), p.f.into(), p.mode.as_str().into()])
    }

    pub fn niche(n: &Niche) -> Self {
        Self::new(
            RecordKind::Niche,
            vec![n.mode.as_str().into(), n.m_lo.into(), n.m_hi.into(), n.width().into()],
        )
    }

    pub fn sim(r: &SimResult, pi: f64, f_analytic: Option<f64>) -> Self {
        Self::new(
            RecordKind::Sim,
            vec![
                r.policy.name().into(),
                r.c.into(),
                r.m.into(),
                pi.into(),
                r.seed.into(),
                r.f_t.into(),
                f_analytic.into(),
                r.feasible.into(),
            ],
        )
    }

    pub fn compare(row: &CompareRow, policy: &str, c: usize, pi: f64) -> Self {
        Self::new(
            RecordKind::Compare,
            vec![
                policy.into(),
                c.into(),
                row.m.into(),
                pi.into(),
                row.f_sim.into(),
                row.std_error.into(),
                row.f_analytic.into(),
                row.feasible.into(),
                row.little_ok.into(),
            ],
        )
    }

    pub fn shift(policy: &str, c: usize, pi: f64, shift: Option<f64>) -> Self {
        Self::new(RecordKind::Shift, vec![policy.into(), c.into(), pi.into(), shift.into()])
    }

    pub fn series(figure: &str, series: &str, m: f64, f: f64) -> Self {
        Self::new(RecordKind::Series, vec![figure.into(), series.into(), m.into(), f.into()])
    }

    pub fn baseline(figure: &str, p: &BaselinePoint) -> Self {
        Self::series(figure, p.mode.name(), p.m, p.f)
    }

    pub fn trace(p: &PassengerRecord) -> Self {
        Self::new(
            RecordKind::Trace,
            vec![
                p.id.into(),
                p.call.into(),
                p.origin.x.into(),
                p.origin.y.into(),
                p.destination.x.into(),
                p.destination.y.into(),
                p.assigned.into(),
                p.picked_up.into(),
                p.delivered.into(),
            ],
        )
    }
}

/// Writes `records`, all of kind `kind`, as CSV with a header row or as a
/// JSON array of objects.
pub fn emit(kind: RecordKind, records: &[Record], format: Format, out: &mut dyn Write) -> Result<()> {
    if let Some(bad) = records.iter().find(|r| r.kind != kind) {
        return Err(ModelError::Output(format!("cannot mix {:?} records into a {kind:?} table", bad.kind)));
    }
    let io = |e: std::io::Error| ModelError::Output(e.to_string());
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
            let csv_err = |e: csv::Error| ModelError::Output(e.to_string());
            w.write_record(kind.columns()).map_err(csv_err)?;
            for r in records {
                w.write_record(r.values.iter().map(ToString::to_string)).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
        Format::Json => {
            let rows: Vec<Json> = records
                .iter()
                .map(|r| {
                    let obj: Map<String, Json> =
                        kind.columns().iter().zip(&r.values).map(|(k, v)| (k.to_string(), v.to_json())).collect();
                    Json::Object(obj)
                })
                .collect();
            serde_json::to_writer(&mut *out, &Json::Array(rows)).map_err(|e| ModelError::Output(e.to_string()))?;
            out.write_all(b"\n").map_err(io)?;
        }
    }
    Ok(())
}

/// [`emit`] into a string.
pub fn emit_string(kind: RecordKind, records: &[Record], format: Format) -> Result<String> {
    let mut buf = Vec::new();
    emit(kind, records, format, &mut buf)?;
    String::from_utf8(buf).map_err(|e| ModelError::Output(e.to_string()))
}
