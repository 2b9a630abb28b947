//! The five subcommands. Each returns the rendered document plus any
//! verification failures; `main` writes the document first and then maps
//! failures to the exit code.

use std::path::PathBuf;

use crate::config::Config;
use crate::output::Document;

pub mod bound;
pub mod diagrams;
pub mod oracle;
pub mod scatter;
pub mod thermo;

pub struct RunContext {
    pub config: Config,
    pub seed: u64,
    pub verify: bool,
    pub selftest: bool,
    pub out: Option<PathBuf>,
}

impl RunContext {
    pub fn document(&self, command: &str) -> Document {
        Document::new(self.seed, &self.config.hash, command)
    }
}

pub struct Outcome {
    pub doc: Document,
    /// Companion files (path, contents), written after the main document.
    pub extra: Vec<(PathBuf, String)>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn new(doc: Document) -> Self {
        Self { doc, extra: Vec::new(), failures: Vec::new() }
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}
