//! Per-agent deductive closure with derivation trees.
//!
//! Closures are computed in rounds: every rule instance whose premises are
//! known at the start of a round fires, so the round in which an item first
//! appears is its minimal derivation depth.

mod congruence;
mod saturate;
mod tree;
mod universe;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AgentId, Architecture, Equation, Fact, Knowledge, Term, Var};

pub use tree::DerivationTree;
pub use universe::Universe;

/// Default cap on the number of items in one closure.
pub const DEFAULT_CAP: usize = 100_000;

/// Deduction rules and leaf labels. Variants are in name order so that the
/// derived `Ord` breaks ties alphabetically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Rule {
    Assumption,
    AttestTrust,
    Axiom,
    Check,
    ComputeEq,
    ComputeHas,
    Cong,
    Declared,
    DepHas,
    Given,
    HashInj,
    HhashHom,
    Kc,
    ProofVerify,
    RecvHas,
    RecvPrim,
    T,
    Xc,
    Xd,
    Xt,
}

impl Rule {
    pub const ALL: [Rule; 20] = [
        Rule::Assumption,
        Rule::AttestTrust,
        Rule::Axiom,
        Rule::Check,
        Rule::ComputeEq,
        Rule::ComputeHas,
        Rule::Cong,
        Rule::Declared,
        Rule::DepHas,
        Rule::Given,
        Rule::HashInj,
        Rule::HhashHom,
        Rule::Kc,
        Rule::ProofVerify,
        Rule::RecvHas,
        Rule::RecvPrim,
        Rule::T,
        Rule::Xc,
        Rule::Xd,
        Rule::Xt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Assumption => "ASSUMPTION",
            Rule::AttestTrust => "ATTEST-TRUST",
            Rule::Axiom => "AXIOM",
            Rule::Check => "CHECK",
            Rule::ComputeEq => "COMPUTE-EQ",
            Rule::ComputeHas => "COMPUTE-HAS",
            Rule::Cong => "CONG",
            Rule::Declared => "DECLARED",
            Rule::DepHas => "DEP-HAS",
            Rule::Given => "GIVEN",
            Rule::HashInj => "HASH-INJ",
            Rule::HhashHom => "HHASH-HOM",
            Rule::Kc => "KC",
            Rule::ProofVerify => "PROOF-VERIFY",
            Rule::RecvHas => "RECV-HAS",
            Rule::RecvPrim => "RECV-PRIM",
            Rule::T => "T",
            Rule::Xc => "XC",
            Rule::Xd => "XD",
            Rule::Xt => "XT",
        }
    }

    /// Leaves label items taken from the input rather than derived.
    pub fn is_leaf(self) -> bool {
        matches!(self, Rule::Assumption | Rule::Axiom | Rule::Declared | Rule::Given)
    }

    /// Rules of the agent's own deductive system; their conclusions feed XD.
    pub fn is_deductive(self) -> bool {
        matches!(
            self,
            Rule::AttestTrust
                | Rule::Check
                | Rule::ComputeEq
                | Rule::ComputeHas
                | Rule::Cong
                | Rule::DepHas
                | Rule::HashInj
                | Rule::HhashHom
                | Rule::ProofVerify
                | Rule::RecvHas
                | Rule::RecvPrim
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Reference to a premise inside a closure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Premise {
    /// The item, justified by its stored derivation.
    Item(Knowledge),
    /// The fact, justified by its stored deductive-rule derivation.
    Deduced(Fact),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Derivation {
    pub rule: Rule,
    pub premises: Vec<Premise>,
    pub depth: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub rounds: u32,
    /// Rule instances evaluated, including those concluding known items.
    pub applications: u64,
}

/// Everything an agent can derive, with one minimal-depth derivation per item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    agent: AgentId,
    items: BTreeMap<Knowledge, Derivation>,
    deduced: BTreeMap<Fact, Derivation>,
    universe: Universe,
    pub stats: Stats,
}

impl Closure {
    pub fn agent(&self) -> &AgentId {
        &self.agent
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, k: &Knowledge) -> bool {
        self.items.contains_key(k)
    }

    pub fn contains_fact(&self, f: &Fact) -> bool {
        self.items.contains_key(&Knowledge::Fact(f.clone()))
    }

    /// All items in canonical order.
    pub fn items(&self) -> impl Iterator<Item = &Knowledge> {
        self.items.keys()
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.items.keys().filter_map(Knowledge::as_fact)
    }

    /// Items produced by a rule rather than taken from the input.
    pub fn derived(&self) -> impl Iterator<Item = &Knowledge> {
        self.items.iter().filter(|(_, d)| !d.rule.is_leaf()).map(|(k, _)| k)
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Depth of the stored derivation; leaves have depth 0.
    pub fn depth(&self, k: &Knowledge) -> Option<u32> {
        self.items.get(k).map(|d| d.depth)
    }

    pub fn has(&self, var: &Var) -> bool {
        self.contains_fact(&Fact::Has { agent: self.agent.clone(), var: var.clone() })
    }

    /// `X_agent(eq)` for the closure's own agent.
    pub fn x_knows(&self, eq: &Equation) -> bool {
        self.contains(&Knowledge::x(self.agent.clone(), Fact::Eq(eq.clone())))
    }

    pub fn explain(&self, k: &Knowledge) -> Option<DerivationTree> {
        let d = self.items.get(k)?;
        Some(self.expand(k.clone(), d))
    }

    fn expand(&self, conclusion: Knowledge, d: &Derivation) -> DerivationTree {
        let premises = d
            .premises
            .iter()
            .map(|p| match p {
                Premise::Item(k) => self.expand(k.clone(), &self.items[k]),
                Premise::Deduced(f) => self.expand(Knowledge::Fact(f.clone()), &self.deduced[f]),
            })
            .collect();
        DerivationTree { conclusion, rule: d.rule, premises }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("closure of `{}` exceeded {cap} items", partial.agent)]
    ResourceLimit { cap: usize, partial: Box<Closure> },
    #[error("term `{0}` is outside the term universe")]
    Scope(Term),
    #[error("`{0}` is not an equality")]
    NotEquational(Equation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { cap: DEFAULT_CAP }
    }
}

pub fn close(arch: &Architecture, agent: &AgentId) -> Result<Closure, EngineError> {
    close_with(arch, agent, &[], &Config::default())
}

/// Closure over a universe extended with `extra` terms, typically those of
/// the requirements under evaluation.
pub fn close_with(arch: &Architecture, agent: &AgentId, extra: &[Term], config: &Config) -> Result<Closure, EngineError> {
    if !arch.has_agent(agent) {
        return Err(EngineError::UnknownAgent(agent.to_string()));
    }
    let mut leaves: Vec<(Knowledge, Rule)> = arch
        .facts
        .iter()
        .map(|f| (Knowledge::Fact(f.clone()), if matches!(f, Fact::Eq(_)) { Rule::Axiom } else { Rule::Declared }))
        .collect();
    leaves.extend(arch.assumptions.iter().map(|m| (Knowledge::Modal(m.clone()), Rule::Assumption)));
    let universe = Universe::of_architecture(arch, extra);
    saturate::run(agent.clone(), leaves, universe, saturate::RuleSet::Full, config.cap)
}

/// Closures of every agent, in declaration order.
pub fn close_all(arch: &Architecture, extra: &[Term], config: &Config) -> Result<Vec<Closure>, EngineError> {
    crate::par::map(&arch.agents, |a| close_with(arch, a, extra, config)).into_iter().collect()
}

pub fn close_all_sequential(arch: &Architecture, extra: &[Term], config: &Config) -> Result<Vec<Closure>, EngineError> {
    arch.agents.iter().map(|a| close_with(arch, a, extra, config)).collect()
}

/// Decides `eqs ⊢ goal` by congruence closure plus the hash rewrites and
/// returns a derivation when entailed.
///
/// The universe is extended with the terms of `eqs` and with the sums the
/// homomorphic-hash rewrite produces; `goal` must lie within the result.
pub fn congruence_entails(
    universe: &Universe,
    eqs: &[Equation],
    goal: &Equation,
) -> Result<Option<DerivationTree>, EngineError> {
    for eq in eqs.iter().chain([goal]) {
        if !eq.is_equality() {
            return Err(EngineError::NotEquational(eq.clone()));
        }
    }
    let mut u = universe.clone();
    for eq in eqs {
        u.insert(&eq.lhs);
        u.insert(&eq.rhs);
    }
    let leaves = eqs.iter().map(|e| (Knowledge::Fact(Fact::Eq(e.clone())), Rule::Given)).collect();
    let agent = AgentId::new("_").expect("valid identifier");
    let closure = saturate::run(agent, leaves, u, saturate::RuleSet::Equational, usize::MAX)?;
    for side in [&goal.lhs, &goal.rhs] {
        if !closure.universe.contains(side) {
            return Err(EngineError::Scope(side.clone()));
        }
    }
    let target = Knowledge::Fact(Fact::Eq(goal.clone()));
    if goal.lhs == goal.rhs {
        return Ok(Some(
            closure.explain(&target).unwrap_or(DerivationTree { conclusion: target, rule: Rule::Cong, premises: vec![] }),
        ));
    }
    Ok(closure.explain(&target))
}

#[cfg(test)]
mod tests;
