//! Structured records of bound checks.

use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    /// Every checked inequality holds and its inputs were computed exactly.
    Verified,
    /// Every checked inequality holds but some input is statistical evidence.
    Consistent,
    Violated,
    /// The statement has nothing to check on this instance.
    Vacuous,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
            Verdict::Vacuous => "vacuous",
        }
    }

    /// Combines the verdicts of two parts of one audit.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (Consistent, _) | (_, Consistent) => Consistent,
            (Verified, _) | (_, Verified) => Verified,
            (Vacuous, Vacuous) => Vacuous,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Exact(Rational),
    Integer(BigInt),
    Float { value: f64, tolerance: f64 },
    Text(String),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub name: String,
    /// The checked statement as a plain formula.
    pub statement: String,
    pub verdict: Verdict,
    pub quantities: Vec<(String, Quantity)>,
    /// Minimal reproducing data for violations, or the extremal case otherwise.
    pub witnesses: Vec<String>,
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn new(name: impl Into<String>, statement: impl Into<String>) -> Self {
        AuditReport {
            name: name.into(),
            statement: statement.into(),
            verdict: Verdict::Vacuous,
            quantities: Vec::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn quantity(&mut self, name: impl Into<String>, q: Quantity) -> &mut Self {
        self.quantities.push((name.into(), q));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|(n, _)| n == name).map(|(_, q)| q)
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    pub fn witness(&mut self, witness: impl Into<String>) -> &mut Self {
        self.witnesses.push(witness.into());
        self
    }

    /// Folds one checked instance into the verdict.
    pub fn record(&mut self, verdict: Verdict) {
        self.verdict = self.verdict.and(verdict);
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}
