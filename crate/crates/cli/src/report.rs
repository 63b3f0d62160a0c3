use serde::Serialize;

use crate::checks::CheckRecord;

/// Outcome of a verification run. Serialization is deterministic: checks
/// keep their emission order and no clock value is recorded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub version: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(seed: u64, checks: Vec<CheckRecord>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            checks,
            pass,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(pass: bool) -> CheckRecord {
        CheckRecord {
            id: "m:c".into(),
            paper_ref: "a = b".into(),
            samples: 1,
            max_residual: 0.0,
            tolerance: 1.0,
            pass,
            error: None,
        }
    }

    #[test]
    fn verdict_is_the_conjunction() {
        assert!(VerificationReport::new(42, vec![check(true), check(true)]).pass);
        assert!(!VerificationReport::new(42, vec![check(true), check(false)]).pass);
        assert!(!VerificationReport::new(42, vec![]).pass);
    }

    #[test]
    fn schema_field_names() {
        let v: serde_json::Value =
            serde_json::from_str(&VerificationReport::new(7, vec![check(true)]).to_json()).unwrap();
        for k in ["version", "seed", "checks", "pass"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        for k in [
            "id",
            "paper_ref",
            "samples",
            "max_residual",
            "tolerance",
            "pass",
        ] {
            assert!(v["checks"][0].get(k).is_some(), "{k}");
        }
    }
}
