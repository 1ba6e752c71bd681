//! Output documents: CSV with `#`-prefixed header comments, or a JSON
//! mirror of the same schema.
//!
//! Every document records the tool version, the fully resolved
//! configuration and the master seed, so a run can be reproduced from its
//! own header. Floats are serialized with 17 significant digits, enough to
//! round-trip `f64` exactly.

use serde_json::{json, Map, Value};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub const TOOL: &str = "equipart";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17-significant-digit float formatting (round-trip exact).
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_float(v),
        None => "nan".to_string(),
    }
}

/// JSON value for a float; NaN and infinities map to null.
pub fn json_float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn json_opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_float)
}

/// One line of a tabular document.
pub enum Row {
    Data(Vec<String>),
    /// Rendered as a `# warning: ...` comment in CSV.
    Warning(String),
}

/// A tabular result with its reproducibility header.
pub struct TableDoc {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    /// JSON mirror of the data rows, one object per data row.
    pub json_rows: Vec<Value>,
    /// Trailing comment lines (summaries).
    pub trailers: Vec<String>,
}

impl TableDoc {
    pub fn new(command: &str, config: Value, seed: u64, columns: Vec<&'static str>) -> Self {
        TableDoc {
            command: command.to_string(),
            config,
            seed,
            columns,
            rows: Vec::new(),
            json_rows: Vec::new(),
            trailers: Vec::new(),
        }
    }

    /// Add a data row given as `(csv cells, json object)`.
    pub fn push_data(&mut self, cells: Vec<String>, object: Value) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(Row::Data(cells));
        self.json_rows.push(object);
    }

    pub fn push_warning(&mut self, message: impl Into<String>) {
        self.rows.push(Row::Warning(message.into()));
    }

    pub fn warnings(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter_map(|r| match r {
                Row::Warning(w) => Some(w.as_str()),
                Row::Data(_) => None,
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write_header_comments(w, &self.command, &self.config, self.seed)?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            match row {
                Row::Data(cells) => writeln!(w, "{}", cells.join(","))?,
                Row::Warning(msg) => writeln!(w, "# warning: {msg}")?,
            }
        }
        for t in &self.trailers {
            writeln!(w, "# {t}")?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let mut root = Map::new();
        root.insert("tool".into(), json!(TOOL));
        root.insert("version".into(), json!(VERSION));
        root.insert("command".into(), json!(self.command));
        root.insert("config".into(), self.config.clone());
        root.insert("seed".into(), json!(self.seed));
        root.insert(
            "columns".into(),
            Value::Array(self.columns.iter().map(|c| json!(c)).collect()),
        );
        root.insert("rows".into(), Value::Array(self.json_rows.clone()));
        root.insert(
            "warnings".into(),
            Value::Array(self.warnings().iter().map(|m| json!(m)).collect()),
        );
        if !self.trailers.is_empty() {
            root.insert(
                "trailers".into(),
                Value::Array(self.trailers.iter().map(|t| json!(t)).collect()),
            );
        }
        writeln!(w, "{}", serde_json::to_string_pretty(&Value::Object(root))?)
    }
}

/// A single JSON object result (correction check, counterexample table).
pub struct ObjectDoc {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub body: Value,
}

impl ObjectDoc {
    pub fn write_json<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let mut root = Map::new();
        root.insert("tool".into(), json!(TOOL));
        root.insert("version".into(), json!(VERSION));
        root.insert("command".into(), json!(self.command));
        root.insert("config".into(), self.config.clone());
        root.insert("seed".into(), json!(self.seed));
        root.insert("result".into(), self.body.clone());
        writeln!(w, "{}", serde_json::to_string_pretty(&Value::Object(root))?)
    }
}

fn write_header_comments<W: Write>(
    w: &mut W,
    command: &str,
    config: &Value,
    seed: u64,
) -> io::Result<()> {
    writeln!(w, "# {TOOL} {VERSION}")?;
    writeln!(w, "# command: {command}")?;
    writeln!(w, "# config: {}", serde_json::to_string(config)?)?;
    writeln!(w, "# seed: {seed}")
}

/// Open the output sink; `-` streams to standard output.
pub fn open_sink(out: &str) -> io::Result<Box<dyn Write>> {
    if out == "-" {
        Ok(Box::new(BufWriter::new(io::stdout())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(Path::new(out))?)))
    }
}
