//! Machine-readable suite report.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::tensor::RelationVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub statistics: String,
    pub max_rel_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckResult {
    /// Passes when `residual <= tol`.
    pub fn upper(name: impl Into<String>, statistics: &str, residual: f64, tol: f64) -> CheckResult {
        CheckResult {
            name: name.into(),
            statistics: statistics.to_string(),
            max_rel_residual: residual,
            tol,
            pass: residual <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationResult {
    pub family: String,
    pub statistics: String,
    pub nullspace_dim: usize,
    pub basis: Vec<RelationVector>,
}

/// A computed quantity that is reported but not asserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub name: String,
    pub statistics: String,
    pub value: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conventions {
    pub epsilon_sign: String,
    pub metric_signature: String,
    pub conjugation: String,
    pub resolved_signs: BTreeMap<String, String>,
}

impl Default for Conventions {
    fn default() -> Self {
        let mut signs = BTreeMap::new();
        signs.insert("S1 -+ S3 - S4".into(), "bosonic: S1 - S3 - S4 = 0; fermionic: S1 + S3 - S4 = 0".into());
        signs.insert(
            "g g eps eps M M = -+ S4".into(),
            "bosonic: F = -S4; fermionic: F = +S4".into(),
        );
        signs.insert(
            "M exchange".into(),
            "M_{lma}^b M_{nrb}^a = +M_{lr} M_{nm} bosonic, -M_{lr} M_{nm} fermionic".into(),
        );
        signs.insert("yukawa".into(), "-(<psiLbar phi psiR> + <psiRbar phibar psiL>)".into());
        Conventions {
            epsilon_sign: "eps_{01} = phase (undotted, isospin), eps^{01} = conj(phase); dotted forms conjugate; phase = 1".into(),
            metric_signature: "(+,-,-,-)".into(),
            conjugation: "conj reverses Grassmann products; Omegabar_{a A A'} = conj(Omega^a_{A' A}); Phibar = conj(Phi)".into(),
            resolved_signs: signs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub version: String,
    pub conventions: Conventions,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckResult>,
    pub relations: Vec<RelationResult>,
    pub observations: Vec<Observation>,
    /// Wall-clock seconds per stage; not covered by the determinism contract.
    pub timings: BTreeMap<String, f64>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn without_timings(&self) -> IdentityReport {
        IdentityReport {
            timings: BTreeMap::new(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values serialize")
    }
}
