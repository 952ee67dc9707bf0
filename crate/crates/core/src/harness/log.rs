//! Per-tick trajectory log with a fixed CSV rendering: numbers always carry
//! six decimals so reruns diff cleanly.

use std::io::Write;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v as i64)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

fn format_num(v: f64) -> String {
    // avoid "-0.000000" for tiny negatives
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Num(v) => format_num(*v),
            Value::Int(v) => v.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

/// One row per tick; the first column is always `time` and must strictly
/// increase.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    columns: Vec<String>,
    rows: Vec<(f64, Vec<Value>)>,
}

impl TrajectoryLog {
    /// `columns` excludes the leading `time` column.
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> impl Iterator<Item = &str> {
        std::iter::once("time").chain(self.columns.iter().map(String::as_str))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends a record. Panics when time does not increase or the row width
    /// is wrong; both are programming errors in a scenario runner.
    pub fn push(&mut self, time: f64, values: Vec<Value>) {
        assert_eq!(values.len(), self.columns.len(), "log row width");
        if let Some((last, _)) = self.rows.last() {
            assert!(time > *last, "log time must increase: {time} after {last}");
        }
        self.rows.push((time, values));
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|(t, _)| *t)
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if name == "time" {
            return Some(self.times().collect());
        }
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|(_, v)| match &v[idx] {
                    Value::Num(x) => *x,
                    Value::Int(i) => *i as f64,
                    Value::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }

    /// Text column by name.
    pub fn text_column(&self, name: &str) -> Option<Vec<String>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|(_, v)| v[idx].render()).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns())?;
        for (t, values) in &self.rows {
            let mut record = Vec::with_capacity(values.len() + 1);
            record.push(format_num(*t));
            record.extend(values.iter().map(Value::render));
            w.write_record(&record)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
