//! Atomic architecture properties, primitives and modal atoms.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::term::{Equation, Term, Var};
use super::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Result<Self, ModelError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(AgentId(name))
        } else {
            Err(ModelError::InvalidAgent(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `[a-zA-Z_][a-zA-Z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `attest_i(eq)`: a bare declaration by `attester` that `body` holds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Attestation {
    pub attester: AgentId,
    pub body: Equation,
}

/// Atom of a provable property.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropAtom {
    Att(Attestation),
    Eq(Equation),
}

impl PropAtom {
    pub fn into_fact(self) -> Fact {
        match self {
            PropAtom::Att(a) => Fact::Att(a),
            PropAtom::Eq(e) => Fact::Eq(e),
        }
    }
}

/// Flattened conjunction of attestations and equations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PropP(pub BTreeSet<PropAtom>);

/// `proof_{i,j}(p)`: `prover` can prove `body` to `verifier`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProofObj {
    pub prover: AgentId,
    pub verifier: AgentId,
    pub body: PropP,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimAtom {
    Proof(ProofObj),
    Att(Attestation),
}

impl PrimAtom {
    pub fn into_fact(self) -> Fact {
        match self {
            PrimAtom::Proof(p) => Fact::Proof(p),
            PrimAtom::Att(a) => Fact::Att(a),
        }
    }
}

/// Flattened conjunction of proofs and attestations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prim(pub BTreeSet<PrimAtom>);

/// Atomic architecture property.
///
/// The variant order fixes the canonical order of fact sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fact {
    /// `sender` can send variable `var` to `receiver`.
    ReceiveVar { receiver: AgentId, sender: AgentId, var: Var },
    /// `sender` can send the primitive `payload` to `receiver`.
    ReceivePrim { receiver: AgentId, sender: AgentId, payload: Prim },
    /// `truster` accepts attestations made by `trustee`.
    Trust { truster: AgentId, trustee: AgentId },
    Compute { agent: AgentId, defined: Var, body: Term },
    Check { agent: AgentId, eq: Equation },
    Has { agent: AgentId, var: Var },
    Att(Attestation),
    Proof(ProofObj),
    Eq(Equation),
    /// `target` can be derived by `agent` from `sources`.
    Dep { agent: AgentId, target: Var, sources: BTreeSet<Term> },
}

impl Fact {
    /// Short kind name used in diagnostics and views.
    pub fn kind(&self) -> &'static str {
        match self {
            Fact::ReceiveVar { .. } | Fact::ReceivePrim { .. } => "receive",
            Fact::Trust { .. } => "trust",
            Fact::Compute { .. } => "compute",
            Fact::Check { .. } => "check",
            Fact::Has { .. } => "has",
            Fact::Att(_) => "attest",
            Fact::Proof(_) => "proof",
            Fact::Eq(_) => "axiom",
            Fact::Dep { .. } => "dep",
        }
    }

    /// Agents referenced anywhere in the fact, including inside primitives.
    pub fn agents(&self) -> BTreeSet<&AgentId> {
        let mut out = BTreeSet::new();
        match self {
            Fact::ReceiveVar { receiver, sender, .. } => {
                out.insert(receiver);
                out.insert(sender);
            }
            Fact::ReceivePrim { receiver, sender, payload } => {
                out.insert(receiver);
                out.insert(sender);
                for atom in &payload.0 {
                    prim_agents(atom, &mut out);
                }
            }
            Fact::Trust { truster, trustee } => {
                out.insert(truster);
                out.insert(trustee);
            }
            Fact::Compute { agent, .. }
            | Fact::Check { agent, .. }
            | Fact::Has { agent, .. }
            | Fact::Dep { agent, .. } => {
                out.insert(agent);
            }
            Fact::Att(a) => {
                out.insert(&a.attester);
            }
            Fact::Proof(p) => prim_agents_proof(p, &mut out),
            Fact::Eq(_) => {}
        }
        out
    }

    /// Every term occurring in the fact (variables appear as `Term::Var`).
    pub fn terms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        self.visit_terms(&mut |t| out.push(t.clone()));
        out
    }

    pub fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        fn eq_terms(eq: &Equation, f: &mut impl FnMut(&Term)) {
            f(&eq.lhs);
            f(&eq.rhs);
        }
        fn prop_terms(p: &PropP, f: &mut impl FnMut(&Term)) {
            for atom in &p.0 {
                match atom {
                    PropAtom::Att(a) => eq_terms(&a.body, f),
                    PropAtom::Eq(e) => eq_terms(e, f),
                }
            }
        }
        match self {
            Fact::ReceiveVar { var, .. } | Fact::Has { var, .. } => f(&Term::Var(var.clone())),
            Fact::ReceivePrim { payload, .. } => {
                for atom in &payload.0 {
                    match atom {
                        PrimAtom::Proof(p) => prop_terms(&p.body, f),
                        PrimAtom::Att(a) => eq_terms(&a.body, f),
                    }
                }
            }
            Fact::Trust { .. } => {}
            Fact::Compute { defined, body, .. } => {
                f(&Term::Var(defined.clone()));
                f(body);
            }
            Fact::Check { eq, .. } | Fact::Eq(eq) => eq_terms(eq, f),
            Fact::Att(a) => eq_terms(&a.body, f),
            Fact::Proof(p) => prop_terms(&p.body, f),
            Fact::Dep { target, sources, .. } => {
                f(&Term::Var(target.clone()));
                sources.iter().for_each(f);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_vars(&mut out));
        out
    }

    pub fn is_ground(&self) -> bool {
        let mut ground = true;
        self.visit_terms(&mut |t| ground &= t.is_ground());
        ground
    }

    /// Source variables of a dependency, ignoring unexpanded families.
    pub fn dep_sources(&self) -> Vec<&Var> {
        match self {
            Fact::Dep { sources, .. } => sources.iter().filter_map(Term::as_var).collect(),
            _ => Vec::new(),
        }
    }
}

fn prim_agents<'a>(atom: &'a PrimAtom, out: &mut BTreeSet<&'a AgentId>) {
    match atom {
        PrimAtom::Proof(p) => prim_agents_proof(p, out),
        PrimAtom::Att(a) => {
            out.insert(&a.attester);
        }
    }
}

fn prim_agents_proof<'a>(p: &'a ProofObj, out: &mut BTreeSet<&'a AgentId>) {
    out.insert(&p.prover);
    out.insert(&p.verifier);
    for atom in &p.body.0 {
        if let PropAtom::Att(a) = atom {
            out.insert(&a.attester);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModalOp {
    /// Knowledge `K_i`.
    K,
    /// Algorithmic knowledge `X_i`.
    X,
}

/// `K_i(φ0)` or `X_i(φ0)` over a flattened conjunction of facts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Modal {
    pub op: ModalOp,
    pub agent: AgentId,
    pub body: BTreeSet<Fact>,
}

impl Modal {
    pub fn single(op: ModalOp, agent: AgentId, fact: Fact) -> Self {
        Modal { op, agent, body: BTreeSet::from([fact]) }
    }
}

/// An element of an agent's closure: a fact, or a modal atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knowledge {
    Fact(Fact),
    Modal(Modal),
}

impl Knowledge {
    pub fn x(agent: AgentId, fact: Fact) -> Self {
        Knowledge::Modal(Modal::single(ModalOp::X, agent, fact))
    }

    pub fn as_fact(&self) -> Option<&Fact> {
        match self {
            Knowledge::Fact(f) => Some(f),
            Knowledge::Modal(_) => None,
        }
    }

    pub fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Knowledge::Fact(fact) => fact.visit_terms(f),
            Knowledge::Modal(m) => m.body.iter().for_each(|fact| fact.visit_terms(f)),
        }
    }
}

impl From<Fact> for Knowledge {
    fn from(f: Fact) -> Self {
        Knowledge::Fact(f)
    }
}

/// Full formula syntax. Only `Atom`/`And` trees are architecture properties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Atom(Fact),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Modal(Modal),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }
}
