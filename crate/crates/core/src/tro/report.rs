//! Per-axiom verification reports.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub pass: bool,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

/// Ordered axiom checks; the report passes when every entry does.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub entries: Vec<AxiomCheck>,
}

impl VerificationReport {
    pub fn new() -> Self {
        VerificationReport { pass: true, entries: Vec::new() }
    }

    pub fn flag(&mut self, axiom: &str, pass: bool, residual: f64, witness: Option<serde_json::Value>) {
        self.pass &= pass;
        let witness = if pass { None } else { witness };
        self.entries.push(AxiomCheck { axiom: axiom.to_string(), pass, residual, witness });
    }

    /// Passes when `residual ≤ bound`.
    pub fn check(&mut self, axiom: &str, residual: f64, bound: f64) {
        self.flag(axiom, residual <= bound, residual, None);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.pass &= other.pass;
        self.entries.extend(other.entries);
    }

    pub fn passed(&self) -> bool {
        self.pass
    }

    pub fn entry(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.entries.iter().find(|e| e.axiom == axiom)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.entries.iter().filter(|e| !e.pass).map(|e| e.axiom.as_str()).collect()
    }

    pub fn worst_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).filter(|r| r.is_finite()).fold(0.0, f64::max)
    }
}
