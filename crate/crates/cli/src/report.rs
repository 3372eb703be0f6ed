//! Report records and their JSON, text and CSV renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
        }
    }
}

/// What `value` is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Le(#[serde(with = "real")] f64),
    Ge(#[serde(with = "real")] f64),
    Within(#[serde(with = "real_pair")] [f64; 2]),
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::Le(b) => v <= b,
            Bound::Ge(b) => v >= b,
            Bound::Within([lo, hi]) => lo <= v && v <= hi,
        }
    }

    fn relation(&self) -> &'static str {
        match self {
            Bound::Le(_) => "le",
            Bound::Ge(_) => "ge",
            Bound::Within(_) => "within",
        }
    }

    fn limits(&self) -> (f64, Option<f64>) {
        match *self {
            Bound::Le(b) | Bound::Ge(b) => (b, None),
            Bound::Within([lo, hi]) => (lo, Some(hi)),
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Le(b) => write!(f, "<= {}", short(*b)),
            Bound::Ge(b) => write!(f, ">= {}", short(*b)),
            Bound::Within([lo, hi]) => write!(f, "in [{}, {}]", short(*lo), short(*hi)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    #[serde(with = "real")]
    pub value: f64,
    pub bound: Bound,
    #[serde(default, with = "real_opt", skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl CheckRecord {
    /// A pass/fail record; non-finite values fail.
    pub fn assess(name: impl Into<String>, value: f64, bound: Bound, stderr: Option<f64>) -> CheckRecord {
        let status = if value.is_finite() && bound.holds(value) {
            Status::Pass
        } else {
            Status::Fail
        };
        CheckRecord {
            name: name.into(),
            status,
            value,
            bound,
            stderr,
        }
    }

    /// A record shown against a reference bound without deciding the exit code.
    pub fn info(name: impl Into<String>, value: f64, bound: Bound, stderr: Option<f64>) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            status: Status::Info,
            value,
            bound,
            stderr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueRecord {
    pub name: String,
    #[serde(with = "real")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(with = "real_rows")]
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config_hash: String,
    pub engine_version: String,
    #[serde(default)]
    pub values: Vec<ValueRecord>,
    #[serde(default)]
    pub checks: Vec<CheckRecord>,
    #[serde(default)]
    pub tables: Vec<Table>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(with = "real")]
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(command: impl Into<String>, config_hash: impl Into<String>) -> Report {
        Report {
            command: command.into(),
            config_hash: config_hash.into(),
            engine_version: ENGINE_VERSION.into(),
            values: Vec::new(),
            checks: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn value(&mut self, name: impl Into<String>, value: f64) {
        self.values.push(ValueRecord {
            name: name.into(),
            value,
        });
    }

    pub fn check(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command         {}", self.command);
        let _ = writeln!(out, "config hash     {}", self.config_hash);
        let _ = writeln!(out, "engine version  {}", self.engine_version);
        let _ = writeln!(out, "wall time       {:.3} s", self.wall_time_s);
        if !self.values.is_empty() {
            out.push('\n');
            let w = self.values.iter().map(|v| v.name.len()).max().unwrap_or(0);
            for v in &self.values {
                let _ = writeln!(out, "{:<w$}  {:>24}", v.name, num(v.value));
            }
        }
        if !self.checks.is_empty() {
            out.push('\n');
            let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
            let _ = writeln!(out, "{:<w$}  {:<6}  {:>24}  {:<34}  {:>12}", "check", "status", "value", "bound", "stderr");
            for c in &self.checks {
                let se = c.stderr.map(num).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "{:<w$}  {:<6}  {:>24}  {:<34}  {:>12}",
                    c.name,
                    c.status.label(),
                    num(c.value),
                    c.bound.to_string(),
                    se
                );
            }
        }
        for t in &self.tables {
            let _ = writeln!(out, "\n{}", t.name);
            let cols: Vec<String> = t.columns.iter().map(|c| format!("{c:>24}")).collect();
            let _ = writeln!(out, "{}", cols.join(""));
            for r in &t.rows {
                let cells: Vec<String> = r.iter().map(|v| format!("{:>24}", num(*v))).collect();
                let _ = writeln!(out, "{}", cells.join(""));
            }
        }
        if !self.notes.is_empty() {
            out.push('\n');
            for n in &self.notes {
                let _ = writeln!(out, "{n}");
            }
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "\n{verdict}");
        out
    }

    /// Tables when there are any (the slope tables), otherwise the check records.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut blocks = Vec::new();
        if self.tables.is_empty() {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "status", "value", "relation", "bound", "bound_upper", "stderr"])
                .map_err(csv_err)?;
            for c in &self.checks {
                let (lo, hi) = c.bound.limits();
                w.write_record([
                    c.name.clone(),
                    c.status.label().into(),
                    num(c.value),
                    c.bound.relation().into(),
                    num(lo),
                    hi.map(num).unwrap_or_default(),
                    c.stderr.map(num).unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
            for v in &self.values {
                w.write_record([v.name.clone(), "value".into(), num(v.value), String::new(), String::new(), String::new(), String::new()])
                    .map_err(csv_err)?;
            }
            blocks.push(finish(w)?);
        }
        for t in &self.tables {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&t.columns).map_err(csv_err)?;
            for r in &t.rows {
                w.write_record(r.iter().map(|v| num(*v))).map_err(csv_err)?;
            }
            blocks.push(finish(w)?);
        }
        Ok(blocks.join("\n"))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Shortest round-trip decimal form.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn short(v: f64) -> String {
    format!("{v:.3e}")
}

/// `f64` fields that may be non-finite: finite values as numbers, the rest as strings.
mod real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Text(String),
    }

    pub(super) fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else {
            Repr::Text(v.to_string())
        }
    }

    pub(super) fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(s) => s.parse().map_err(|_| E::custom(format!("not a number: {s}"))),
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }
}

mod real_opt {
    use super::real::{from_repr, to_repr, Repr};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(to_repr).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
    }
}

mod real_pair {
    use super::real::{from_repr, to_repr, Repr};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64; 2], s: S) -> Result<S::Ok, S::Error> {
        [to_repr(v[0]), to_repr(v[1])].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 2], D::Error> {
        let [a, b] = <[Repr; 2]>::deserialize(d)?;
        Ok([from_repr(a)?, from_repr(b)?])
    }
}

mod real_rows {
    use super::real::{from_repr, to_repr, Repr};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Repr>> = v.iter().map(|r| r.iter().map(|x| to_repr(*x)).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Vec::<Vec<Repr>>::deserialize(d)?
            .into_iter()
            .map(|r| r.into_iter().map(from_repr).collect())
            .collect()
    }
}
