use alloc::string::String;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::Result;

/// Retained draws of one scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub name: String,
    draws: Vec<f64>,
}

impl Trace {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            draws: Vec::new(),
        }
    }

    pub fn with_capacity(name: impl Into<String>, capacity: usize) -> Self {
        Self {
            name: name.into(),
            draws: Vec::with_capacity(capacity),
        }
    }

    pub fn from_draws(name: impl Into<String>, draws: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if let Some(bad) = draws.iter().position(|v| !v.is_finite()) {
            return Err(invalid!("trace {name}: draw {bad} is not finite"));
        }
        Ok(Self { name, draws })
    }

    /// Samplers only push finite values; non-finite draws are a bug upstream.
    pub fn push(&mut self, value: f64) {
        debug_assert!(value.is_finite(), "non-finite draw pushed to {}", self.name);
        self.draws.push(value);
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.draws.iter().sum::<f64>() / self.draws.len() as f64
    }

    /// Concatenate draws from several chains of the same parameter.
    pub fn pooled<'a>(traces: impl IntoIterator<Item = &'a Trace>) -> Option<Trace> {
        let mut iter = traces.into_iter();
        let first = iter.next()?;
        let mut out = first.clone();
        for t in iter {
            out.draws.extend_from_slice(&t.draws);
        }
        Some(out)
    }
}
