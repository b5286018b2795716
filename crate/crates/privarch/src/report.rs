//! Check reports shared by the CLI and the service.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use privarch_core::checker::{Assessment, Defect, Outcome, Status, Verdict};

use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub architecture: String,
    pub status: String,
    pub outcome: Outcome,
    pub provisional: bool,
    pub defects: Vec<Defect>,
    pub verdicts: Vec<Verdict>,
}

/// 0 when complete, 2 when contradictory, 3 when underspecified.
pub fn exit_code(outcome: &Outcome) -> u8 {
    match outcome {
        Outcome::Complete => 0,
        Outcome::Contradictory { .. } => 2,
        Outcome::Underspecified { .. } => 3,
    }
}

fn indent(text: &str, by: usize) -> String {
    text.lines().map(|l| format!("{:by$}{l}\n", "")).collect()
}

impl CheckReport {
    pub fn new(name: &str, a: &Assessment) -> Self {
        CheckReport {
            schema_version: SCHEMA_VERSION,
            architecture: name.to_string(),
            status: a.outcome.label().to_string(),
            outcome: a.outcome.clone(),
            provisional: a.provisional,
            defects: a.defects.clone(),
            verdicts: a.verdicts.clone(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        exit_code(&self.outcome)
    }

    /// Human-readable report. Witnesses of violations are always shown;
    /// traces of satisfied requirements only with `traces`.
    pub fn to_text(&self, traces: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "architecture {}", self.architecture);
        if self.defects.is_empty() {
            out.push_str("defects: none\n");
        } else {
            out.push_str("defects:\n");
            for d in &self.defects {
                let _ = writeln!(out, "  {d}");
            }
        }
        if self.provisional {
            out.push_str("verdicts (provisional):\n");
        } else {
            out.push_str("verdicts:\n");
        }
        for v in &self.verdicts {
            let _ = writeln!(out, "  {:<16} {:<12} {}", v.id.to_string(), v.status.label(), v.goal);
            match &v.status {
                Status::Violated { witness } => out.push_str(&indent(&witness.render(), 4)),
                Status::Unmet { missing } => {
                    let _ = writeln!(out, "    missing: {missing}");
                }
                Status::Satisfied { trace: Some(t) } if traces => out.push_str(&indent(&t.render(), 4)),
                Status::Satisfied { .. } => {}
            }
        }
        let _ = writeln!(out, "status: {}", self.status);
        out
    }
}
