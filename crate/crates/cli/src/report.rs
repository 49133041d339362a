use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use fracdecomp::rational::to_fraction_string;
use fracdecomp::VerificationReport;

pub const SCHEMA: &str = "fracdecomp.run-report/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Infeasible,
    Error,
}

impl Verdict {
    pub fn exit_code(self, usage: bool) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail | Verdict::Infeasible => 1,
            Verdict::Error if usage => 2,
            Verdict::Error => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    pub message: String,
}

impl Residual {
    pub fn message(msg: impl Into<String>) -> Self {
        Residual {
            edge: None,
            expected: None,
            actual: None,
            residual: None,
            message: msg.into(),
        }
    }
}

/// Residual lines for a failed verification, capped at `limit` edges.
pub fn residuals_of(v: &VerificationReport, limit: usize) -> Vec<Residual> {
    let mut out: Vec<Residual> = v
        .violations
        .iter()
        .take(limit)
        .map(|x| Residual {
            edge: Some(x.edge.endpoints()),
            expected: Some(to_fraction_string(&x.expected)),
            actual: Some(to_fraction_string(&x.actual)),
            residual: Some(to_fraction_string(&x.residual)),
            message: format!("edge {} sums to {} instead of {}", x.edge, x.actual, x.expected),
        })
        .collect();
    if v.violations.len() > limit {
        out.push(Residual::message(format!("{} further edge violations", v.violations.len() - limit)));
    }
    for k in v.negative.iter().take(limit) {
        out.push(Residual::message(format!("clique {k} has negative weight")));
    }
    for k in v.invalid_cliques.iter().take(limit) {
        out.push(Residual::message(format!("{k} is not a clique of the graph")));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub inputs_digest: String,
    pub verdict: Verdict,
    pub residuals: Vec<Residual>,
    pub timing_ms: f64,
    pub seed: Option<u64>,
    pub details: Value,
}

impl RunReport {
    pub fn new(subcommand: &str, digest: &InputDigest, verdict: Verdict, mut residuals: Vec<Residual>, elapsed: Duration, seed: Option<u64>, details: Value) -> Self {
        if verdict == Verdict::Pass {
            residuals.clear();
        } else if residuals.is_empty() {
            residuals.push(Residual::message(format!("verdict {verdict:?}")));
        }
        RunReport {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            inputs_digest: digest.hex(),
            verdict,
            residuals,
            timing_ms: elapsed.as_secs_f64() * 1e3,
            seed,
            details: if details.is_null() { json!({}) } else { details },
        }
    }
}

/// SHA-256 over the parameters and every input file, each length-prefixed.
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new() -> Self {
        InputDigest(Sha256::new())
    }

    pub fn add(&mut self, label: &str, bytes: &[u8]) {
        for part in [label.as_bytes(), bytes] {
            self.0.update((part.len() as u64).to_le_bytes());
            self.0.update(part);
        }
    }

    pub fn hex(&self) -> String {
        format!("sha256:{}", hex::encode(self.0.clone().finalize()))
    }
}
