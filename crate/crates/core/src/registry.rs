//! Named constants for the existence-only bounds.
//!
//! Every constant defaults to 1.0 and can be overridden or fitted.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstantRegistry {
    values: BTreeMap<String, f64>,
}

impl ConstantRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Values fitted by `oracle::calibrate` on seeds 1000..1030 (coupling
    /// below 0.1), with a safety factor of two over the largest observed
    /// ratio. The bounds constants keep their default 1.0.
    pub fn fitted() -> Self {
        Self::new()
            .with("tail.C", 1.0)
            .with("tail.prefactor.0", 1.0)
            .with("tail.prefactor.1", 3.0)
            .with("tail.prefactor.2", 3.0)
            .with("tail.prefactor.3", 3.0)
            .with("density.C1", 20.0)
            .with("density.C2", 20.0)
    }

    pub fn get(&self, name: &str) -> f64 {
        self.values.get(name).copied().unwrap_or(1.0)
    }

    /// The value only if it was set explicitly.
    pub fn explicit(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    /// Explicitly set entries, in name order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}
