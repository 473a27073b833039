use std::fs;
use std::io;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{ExperimentConfig, Format};

/// One cell of a samples table.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => number(*v),
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// JSON number, or a string for values JSON cannot hold.
pub fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

/// What a subcommand produced.
pub struct Outcome {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub statistics: Map<String, Value>,
    /// Lines echoed to standard output.
    pub lines: Vec<String>,
    pub passed: bool,
}

impl Outcome {
    pub fn new(columns: &[&str]) -> Self {
        Outcome {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            statistics: Map::new(),
            lines: Vec::new(),
            passed: true,
        }
    }

    pub fn stat(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        let v = match v {
            Value::Null => Value::String("nan".into()),
            other => other,
        };
        self.statistics.insert(key.to_string(), v);
    }

    pub fn float(&mut self, key: &str, value: f64) {
        self.statistics.insert(key.to_string(), number(value));
    }
}

pub fn version() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// Writes `<name>.samples.{csv,json}` and `<name>.summary.json` into the output directory.
pub fn write(
    name: &str,
    config: &ExperimentConfig,
    outcome: &Outcome,
    wall_seconds: f64,
) -> io::Result<()> {
    fs::create_dir_all(&config.output)?;
    let samples_path: PathBuf = match config.format {
        Format::Csv => config.output.join(format!("{name}.samples.csv")),
        Format::Json => config.output.join(format!("{name}.samples.json")),
    };
    match config.format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_path(&samples_path)?;
            w.write_record(&outcome.columns)?;
            for row in &outcome.rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<Value> = outcome
                .rows
                .iter()
                .map(|row| {
                    Value::Object(
                        outcome
                            .columns
                            .iter()
                            .cloned()
                            .zip(row.iter().map(Cell::json))
                            .collect(),
                    )
                })
                .collect();
            fs::write(&samples_path, serde_json::to_string_pretty(&rows)? + "\n")?;
        }
    }
    let summary = json!({
        "command": name,
        "version": version(),
        "seed": config.seed,
        "n": config.n,
        "replicates": config.replicates,
        "wall_seconds": wall_seconds,
        "passed": outcome.passed,
        "config": config,
        "statistics": outcome.statistics,
    });
    fs::write(
        config.output.join(format!("{name}.summary.json")),
        serde_json::to_string_pretty(&summary)? + "\n",
    )
}
