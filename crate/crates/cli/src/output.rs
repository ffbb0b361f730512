use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use kemeny_core::display::format_f64;
use kemeny_core::Extended;
use serde_json::{Map, Value};

/// Buffered stdout or file.
pub enum Sink {
    Stdout(BufWriter<io::Stdout>),
    File(BufWriter<File>),
}

impl Sink {
    pub fn open(path: Option<&Path>) -> io::Result<Self> {
        Ok(match path {
            Some(p) => {
                Sink::File(BufWriter::new(File::create(p).map_err(|e| {
                    io::Error::new(e.kind(), format!("{}: {e}", p.display()))
                })?))
            }
            None => Sink::Stdout(BufWriter::new(io::stdout())),
        })
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.flush()
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Sink::Stdout(w) => w.write(buf),
            Sink::File(w) => w.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Stdout(w) => w.flush(),
            Sink::File(w) => w.flush(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Float(f64),
    Bool(bool),
    Text(&'static str),
    Null,
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

pub fn extended(x: Extended) -> Cell {
    match x {
        Extended::Finite(v) => Cell::Float(v),
        Extended::Infinite => Cell::Text("inf"),
    }
}

/// JSON number, or null when not finite.
pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(x) => x.to_string(),
            Cell::Float(x) => format_f64(*x),
            Cell::Bool(x) => x.to_string(),
            Cell::Text(s) => (*s).to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(x) => Value::from(*x),
            Cell::Float(x) => number(*x),
            Cell::Bool(x) => Value::from(*x),
            Cell::Text(s) => Value::from(*s),
            Cell::Null => Value::Null,
        }
    }
}

/// Column-oriented table written as CSV or as a JSON array of row objects.
#[derive(Debug, Default)]
pub struct Table {
    headers: Vec<String>,
    columns: Vec<Vec<Cell>>,
}

impl Table {
    pub fn push_column(&mut self, name: &str, cells: impl IntoIterator<Item = Cell>) {
        let cells: Vec<Cell> = cells.into_iter().collect();
        debug_assert!(self.columns.first().is_none_or(|c| c.len() == cells.len()));
        self.headers.push(name.to_string());
        self.columns.push(cells);
    }

    fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn to_json(&self) -> Value {
        let rows = (0..self.rows())
            .map(|r| {
                let mut obj = Map::new();
                for (h, col) in self.headers.iter().zip(&self.columns) {
                    obj.insert(h.clone(), col[r].json());
                }
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    pub fn write<W: Write>(&self, out: &mut W, json: bool) -> io::Result<()> {
        if json {
            return write_json(out, &self.to_json());
        }
        writeln!(out, "{}", self.headers.join(","))?;
        for r in 0..self.rows() {
            let line: Vec<String> = self.columns.iter().map(|c| c[r].csv()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub fn write_json<W: Write>(out: &mut W, value: &Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json() {
        let mut t = Table::default();
        t.push_column("p", [Cell::from(1usize), Cell::from(2usize)]);
        t.push_column("c", [Cell::from(0.5), extended(Extended::Infinite)]);
        let mut buf = Vec::new();
        t.write(&mut buf, false).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p,c\n1,0.5\n2,inf\n");
        let v = t.to_json();
        assert_eq!(v[1]["c"], Value::from("inf"));
        assert_eq!(number(f64::NAN), Value::Null);
    }
}
