//! Well-formedness defects and requirement verdicts.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{close_all, Closure, Config, DerivationTree, EngineError};
use crate::model::{AgentId, Architecture, Fact, Goal, Knowledge, RequirementId, RequirementSet, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    /// A computation whose agent cannot obtain every input.
    MissingAccess,
    /// A check whose agent cannot obtain every variable it mentions.
    UncheckableCheck,
    /// A reference to an undeclared agent, symbol or variable.
    UndeclaredRef,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Defect {
    pub kind: DefectKind,
    pub fact: Fact,
    pub explanation: String,
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.fact, self.explanation)
    }
}

/// A goal nobody has reached yet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Unmet {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent: Option<AgentId>,
    pub goal: Knowledge,
}

impl fmt::Display for Unmet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.agent {
            Some(a) => write!(f, "{a} cannot derive {}", self.goal),
            None => write!(f, "no agent derives {}", self.goal),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Satisfied {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trace: Option<DerivationTree>,
    },
    Violated { witness: DerivationTree },
    Unmet { missing: Unmet },
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Satisfied { .. } => "satisfied",
            Status::Violated { .. } => "violated",
            Status::Unmet { .. } => "unmet",
        }
    }

    pub fn is_satisfied(&self) -> bool {
        matches!(self, Status::Satisfied { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: RequirementId,
    pub goal: Goal,
    #[serde(flatten)]
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Contradictory { violated: Vec<RequirementId>, defects: Vec<Defect> },
    Underspecified { unmet: Vec<Unmet> },
    Complete,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Contradictory { .. } => "contradictory",
            Outcome::Underspecified { .. } => "underspecified",
            Outcome::Complete => "complete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assessment {
    pub defects: Vec<Defect>,
    pub verdicts: Vec<Verdict>,
    /// Verdicts were computed on an architecture with defects.
    pub provisional: bool,
    pub outcome: Outcome,
}

impl Assessment {
    pub fn unmet(&self) -> BTreeSet<&Unmet> {
        self.verdicts
            .iter()
            .filter_map(|v| match &v.status {
                Status::Unmet { missing } => Some(missing),
                _ => None,
            })
            .collect()
    }

    pub fn violated(&self) -> Vec<RequirementId> {
        self.verdicts.iter().filter(|v| matches!(v.status, Status::Violated { .. })).map(|v| v.id).collect()
    }
}

/// Closures of every agent, over a universe that includes the requirement terms.
pub fn closures(arch: &Architecture, reqs: &RequirementSet, config: &Config) -> Result<Vec<Closure>, EngineError> {
    close_all(arch, &reqs.terms(), config)
}

fn closure_of<'a>(closures: &'a [Closure], agent: &AgentId) -> Option<&'a Closure> {
    closures.iter().find(|c| c.agent() == agent)
}

pub fn well_formed(arch: &Architecture) -> Result<Vec<Defect>, EngineError> {
    let closures = close_all(arch, &[], &Config::default())?;
    Ok(defects(arch, &closures))
}

/// Defects of `arch` given the closures of its agents.
pub fn defects(arch: &Architecture, closures: &[Closure]) -> Vec<Defect> {
    let mut out = Vec::new();
    let assumed = arch.assumptions.iter().flat_map(|m| m.body.iter());
    for fact in arch.facts.iter().chain(assumed) {
        let mut errs = Vec::new();
        arch.validate_fact(fact, &mut errs);
        for e in errs {
            out.push(Defect { kind: DefectKind::UndeclaredRef, fact: fact.clone(), explanation: e.to_string() });
        }
    }
    for fact in &arch.facts {
        let (agent, vars, kind) = match fact {
            Fact::Compute { agent, body, .. } => (agent, body.free_vars(), DefectKind::MissingAccess),
            Fact::Check { agent, eq } => (agent, eq.free_vars(), DefectKind::UncheckableCheck),
            _ => continue,
        };
        let Some(closure) = closure_of(closures, agent) else { continue };
        let missing: Vec<&Var> = vars.iter().filter(|v| !closure.has(v)).collect();
        if !missing.is_empty() {
            let names: Vec<String> = missing.iter().map(|v| v.to_string()).collect();
            let what = if kind == DefectKind::MissingAccess { "cannot obtain" } else { "cannot check without" };
            out.push(Defect {
                kind,
                fact: fact.clone(),
                explanation: format!("{agent} {what} {}", names.join(", ")),
            });
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn evaluate(arch: &Architecture, reqs: &RequirementSet) -> Result<Vec<Verdict>, EngineError> {
    let closures = closures(arch, reqs, &Config::default())?;
    Ok(verdicts(reqs, &closures))
}

/// One verdict per requirement, in requirement order.
pub fn verdicts(reqs: &RequirementSet, closures: &[Closure]) -> Vec<Verdict> {
    let knows = |agent: &AgentId, k: &Knowledge| closure_of(closures, agent).and_then(|c| c.explain(k));
    let mut out = Vec::with_capacity(reqs.len());
    for r in reqs.iter() {
        let status = match &r.goal {
            Goal::Privacy { agent, var } => {
                let has = Knowledge::Fact(Fact::Has { agent: agent.clone(), var: var.clone() });
                match knows(agent, &has) {
                    Some(witness) => Status::Violated { witness },
                    None => Status::Satisfied { trace: None },
                }
            }
            Goal::Knowledge { agent, var } => {
                let has = Knowledge::Fact(Fact::Has { agent: agent.clone(), var: var.clone() });
                match knows(agent, &has) {
                    Some(trace) => Status::Satisfied { trace: Some(trace) },
                    None => Status::Unmet { missing: Unmet { agent: Some(agent.clone()), goal: has } },
                }
            }
            Goal::Correctness { agent, eq } => {
                let x = Knowledge::x(agent.clone(), Fact::Eq(eq.clone()));
                match knows(agent, &x) {
                    Some(trace) => Status::Satisfied { trace: Some(trace) },
                    None => Status::Unmet { missing: Unmet { agent: Some(agent.clone()), goal: x } },
                }
            }
            Goal::Functional(eq) => {
                let derived = closures.iter().find_map(|c| {
                    c.explain(&Knowledge::x(c.agent().clone(), Fact::Eq(eq.clone())))
                });
                let lhs = eq.lhs.as_var();
                let undelivered = reqs.iter().find_map(|q| match &q.goal {
                    Goal::Knowledge { agent, var } if Some(var) == lhs => {
                        let has = Knowledge::Fact(Fact::Has { agent: agent.clone(), var: var.clone() });
                        knows(agent, &has).is_none().then(|| Unmet { agent: Some(agent.clone()), goal: has })
                    }
                    _ => None,
                });
                match (derived, undelivered) {
                    (None, _) => Status::Unmet { missing: Unmet { agent: None, goal: Knowledge::Fact(Fact::Eq(eq.clone())) } },
                    (Some(_), Some(missing)) => Status::Unmet { missing },
                    (Some(trace), None) => Status::Satisfied { trace: Some(trace) },
                }
            }
        };
        out.push(Verdict { id: r.id, goal: r.goal.clone(), status });
    }
    out
}

pub fn outcome(defects: &[Defect], verdicts: &[Verdict]) -> Outcome {
    let violated: Vec<RequirementId> =
        verdicts.iter().filter(|v| matches!(v.status, Status::Violated { .. })).map(|v| v.id).collect();
    if !violated.is_empty() || !defects.is_empty() {
        return Outcome::Contradictory { violated, defects: defects.to_vec() };
    }
    let unmet: Vec<Unmet> = verdicts
        .iter()
        .filter_map(|v| match &v.status {
            Status::Unmet { missing } => Some(missing.clone()),
            _ => None,
        })
        .collect();
    if unmet.is_empty() {
        Outcome::Complete
    } else {
        Outcome::Underspecified { unmet }
    }
}

/// Defects, verdicts and the resulting outcome in one pass.
pub fn assess(arch: &Architecture, reqs: &RequirementSet, config: &Config) -> Result<Assessment, EngineError> {
    let closures = closures(arch, reqs, config)?;
    Ok(assess_with(arch, reqs, &closures))
}

pub fn assess_with(arch: &Architecture, reqs: &RequirementSet, closures: &[Closure]) -> Assessment {
    let defects = defects(arch, closures);
    let verdicts = verdicts(reqs, closures);
    let outcome = outcome(&defects, &verdicts);
    Assessment { provisional: !defects.is_empty(), defects, verdicts, outcome }
}
