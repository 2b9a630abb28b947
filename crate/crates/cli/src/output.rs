//! CSV emission and exit-code bookkeeping.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use ggr_core::numfmt::sci;
use ggr_core::GgrError;

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_GUARD: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<GgrError> for CliError {
    fn from(e: GgrError) -> Self {
        let code = match e {
            GgrError::SizeGuard(_) => EXIT_GUARD,
            GgrError::Domain(_) | GgrError::Precondition(_) | GgrError::Refinement { .. } | GgrError::Regime(_) => EXIT_INPUT,
            _ => EXIT_VERIFY,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(format!("i/o: {e}"))
    }
}

/// One table cell.
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => sci(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Text document: metadata lines first, then body lines.
pub struct Document {
    lines: Vec<String>,
}

impl Document {
    pub fn new(seed: u64, hash: &str, command: &str) -> Self {
        Self { lines: vec![header_line(seed, hash), format!("# command={command}")] }
    }

    pub fn meta(&mut self, text: impl Into<String>) {
        self.lines.push(format!("# {}", text.into()));
    }

    pub fn columns(&mut self, names: &[&str]) {
        self.lines.push(names.join(","));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        self.lines.push(cells.iter().map(Cell::render).collect::<Vec<_>>().join(","));
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn render(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }

    pub fn write(&self, out: &Option<PathBuf>) -> Result<(), CliError> {
        match out {
            Some(path) => std::fs::write(path, self.render())?,
            None => std::io::stdout().lock().write_all(self.render().as_bytes())?,
        }
        Ok(())
    }
}

pub fn header_line(seed: u64, hash: &str) -> String {
    format!("# ggr-lab {} seed={seed} config-hash={hash}", env!("CARGO_PKG_VERSION"))
}
