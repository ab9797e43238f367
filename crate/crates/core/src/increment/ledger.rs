use serde::{Deserialize, Serialize};

/// One numeric claim made during a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Ordered hypothesis ledger. Values are kept finite so reports round-trip
/// through JSON.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ledger {
    entries: Vec<LedgerEntry>,
}

fn finite(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

impl Ledger {
    pub fn entry(&mut self, name: impl Into<String>, lhs: f64, rhs: f64, holds: bool) -> bool {
        let holds = holds && !lhs.is_nan() && !rhs.is_nan();
        self.entries.push(LedgerEntry {
            name: name.into(),
            lhs: finite(lhs),
            rhs: finite(rhs),
            holds,
        });
        holds
    }

    /// Records `lhs >= rhs`.
    pub fn at_least(&mut self, name: impl Into<String>, lhs: f64, rhs: f64) -> bool {
        self.entry(name, lhs, rhs, lhs >= rhs)
    }

    /// Records `lhs <= rhs`.
    pub fn at_most(&mut self, name: impl Into<String>, lhs: f64, rhs: f64) -> bool {
        self.entry(name, lhs, rhs, lhs <= rhs)
    }

    /// A measured quantity with no claim attached.
    pub fn record(&mut self, name: impl Into<String>, value: f64) {
        self.entry(name, value, value, true);
    }

    /// A yes/no event, stored as `lhs = 1` when it happened.
    pub fn flag(&mut self, name: impl Into<String>, holds: bool) {
        self.entry(name, f64::from(u8::from(holds)), 1.0, holds);
    }

    pub fn append(&mut self, mut other: Ledger) {
        self.entries.append(&mut other.entries);
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<LedgerEntry> {
        self.entries
    }
}
