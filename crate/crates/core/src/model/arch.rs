use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::fact::{AgentId, Fact, Modal, PrimAtom};
use super::term::{Constant, Equation, Index, Term, Var, HASH, HHASH, OTIMES, SUM};
use super::ModelError;

/// Index bound used when neither the file nor the caller fixes one.
pub const DEFAULT_INDEX_BOUND: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arity {
    Fixed(usize),
    Variadic,
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Fixed(k) => k == n,
            Arity::Variadic => n >= 1,
        }
    }
}

/// Function symbols every architecture may use without declaring them.
pub fn builtin_arity(fun: &str) -> Option<Arity> {
    match fun {
        SUM | OTIMES => Some(Arity::Variadic),
        HASH | HHASH => Some(Arity::Fixed(1)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarShape {
    Scalar,
    /// Family indexed by `1..=size`.
    Family(u32),
}

/// A set of ground facts together with the symbol declarations they use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub name: String,
    /// Declaration order; also the layout order of location views.
    pub agents: Vec<AgentId>,
    pub index_bound: u32,
    /// Named constants, with a value when one was given.
    pub constants: BTreeMap<String, Option<i64>>,
    /// User-declared function symbols (built-ins are implicit).
    pub functions: BTreeMap<String, Arity>,
    pub variables: BTreeMap<String, VarShape>,
    pub facts: BTreeSet<Fact>,
    /// Declared `K`/`X` assumptions.
    pub assumptions: BTreeSet<Modal>,
}

impl Architecture {
    pub fn new(name: impl Into<String>) -> Self {
        Architecture {
            name: name.into(),
            agents: Vec::new(),
            index_bound: DEFAULT_INDEX_BOUND,
            constants: BTreeMap::new(),
            functions: BTreeMap::new(),
            variables: BTreeMap::new(),
            facts: BTreeSet::new(),
            assumptions: BTreeSet::new(),
        }
    }

    pub fn agent(&self, name: &str) -> Option<&AgentId> {
        self.agents.iter().find(|a| a.as_str() == name)
    }

    pub fn has_agent(&self, agent: &AgentId) -> bool {
        self.agents.contains(agent)
    }

    pub fn arity(&self, fun: &str) -> Option<Arity> {
        self.functions.get(fun).copied().or_else(|| builtin_arity(fun))
    }

    /// Adds an agent if absent.
    pub fn add_agent(&mut self, agent: AgentId) {
        if !self.has_agent(&agent) {
            self.agents.push(agent);
        }
    }

    /// A name not yet used by any agent, variable, function or constant.
    pub fn fresh_name(&self, stem: &str) -> String {
        let taken = |n: &str| {
            self.agent(n).is_some()
                || self.variables.contains_key(n)
                || self.functions.contains_key(n)
                || self.constants.contains_key(n)
                || builtin_arity(n).is_some()
        };
        if !taken(stem) {
            return stem.to_string();
        }
        (2..).map(|k| format!("{stem}{k}")).find(|n| !taken(n)).expect("unbounded")
    }

    /// Every ground term occurring in facts and assumptions.
    pub fn terms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        for fact in self.facts.iter().chain(self.assumptions.iter().flat_map(|m| m.body.iter())) {
            fact.visit_terms(&mut |t| out.push(t.clone()));
        }
        out
    }

    /// Checks declarations and fact well-formedness. Returns every violation.
    pub fn validate(&self) -> Vec<ModelError> {
        let mut errors = Vec::new();
        let mut seen = BTreeSet::new();
        for a in &self.agents {
            if !seen.insert(a) {
                errors.push(ModelError::DuplicateAgent(a.to_string()));
            }
        }
        if self.index_bound < 1 {
            errors.push(ModelError::Bound(self.index_bound as i64));
        }
        for fact in &self.facts {
            self.validate_fact(fact, &mut errors);
        }
        for m in &self.assumptions {
            if !self.has_agent(&m.agent) {
                errors.push(ModelError::UndeclaredAgent(m.agent.to_string()));
            }
            if m.body.is_empty() {
                errors.push(ModelError::EmptyConjunction);
            }
            for fact in &m.body {
                self.validate_fact(fact, &mut errors);
            }
        }
        errors
    }

    pub fn validate_fact(&self, fact: &Fact, errors: &mut Vec<ModelError>) {
        for agent in fact.agents() {
            if !self.has_agent(agent) {
                errors.push(ModelError::UndeclaredAgent(agent.to_string()));
            }
        }
        fact.visit_terms(&mut |t| self.validate_term(t, errors));
        match fact {
            Fact::Dep { sources, .. } if sources.is_empty() => errors.push(ModelError::EmptyDependency),
            Fact::ReceivePrim { payload, .. } if payload.0.is_empty() => {
                errors.push(ModelError::EmptyConjunction)
            }
            Fact::Dep { sources, .. } => {
                for s in sources {
                    if s.as_var().is_none() {
                        errors.push(ModelError::Structural(format!(
                            "dependency source `{s}` is not a variable"
                        )));
                    }
                }
            }
            _ => {}
        }
        let mut proofs = Vec::new();
        match fact {
            Fact::Proof(p) => proofs.push(p),
            Fact::ReceivePrim { payload, .. } => proofs.extend(payload.0.iter().filter_map(|a| match a {
                PrimAtom::Proof(p) => Some(p),
                PrimAtom::Att(_) => None,
            })),
            _ => {}
        }
        for p in proofs {
            if p.prover == p.verifier {
                errors.push(ModelError::SelfProof(p.prover.to_string()));
            }
            if p.body.0.is_empty() {
                errors.push(ModelError::EmptyConjunction);
            }
        }
    }

    fn validate_term(&self, term: &Term, errors: &mut Vec<ModelError>) {
        match term {
            Term::Const(Constant::Int(_)) => {}
            Term::Const(Constant::Named(c)) => {
                if !self.constants.contains_key(c) {
                    errors.push(ModelError::UndeclaredConstant(c.clone()));
                }
            }
            Term::Var(v) => self.validate_var(v, errors),
            Term::Apply { fun, args } => {
                match self.arity(fun) {
                    None => errors.push(ModelError::UndeclaredFunction(fun.clone())),
                    Some(arity) if !arity.accepts(args.len()) => errors.push(ModelError::ArityMismatch {
                        fun: fun.clone(),
                        expected: arity,
                        found: args.len(),
                    }),
                    Some(_) => {}
                }
                args.iter().for_each(|a| self.validate_term(a, errors));
            }
            Term::Family { .. } => errors.push(ModelError::NotGround(term.to_string())),
        }
    }

    fn validate_var(&self, v: &Var, errors: &mut Vec<ModelError>) {
        match (self.variables.get(&v.base), &v.index) {
            (None, _) => errors.push(ModelError::UndeclaredVariable(v.base.clone())),
            (Some(VarShape::Scalar), None) => {}
            (Some(VarShape::Scalar), Some(_)) => {
                errors.push(ModelError::Structural(format!("variable `{}` is not a family", v.base)))
            }
            (Some(VarShape::Family(_)), None) => {
                errors.push(ModelError::Structural(format!("family `{}` needs an index", v.base)))
            }
            (Some(VarShape::Family(size)), Some(Index::Lit(i))) => {
                if *i < 1 || i > size {
                    errors.push(ModelError::IndexOutOfRange { var: v.base.clone(), index: *i, size: *size })
                }
            }
            (Some(VarShape::Family(_)), Some(Index::Param(p))) => {
                errors.push(ModelError::UnboundIndex(p.clone()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequirementKind {
    Functional,
    Privacy,
    Knowledge,
    Correctness,
}

impl RequirementKind {
    pub fn label(self) -> &'static str {
        match self {
            RequirementKind::Functional => "functional",
            RequirementKind::Privacy => "privacy",
            RequirementKind::Knowledge => "knowledge",
            RequirementKind::Correctness => "correctness",
        }
    }
}

/// Stable requirement identifier: category plus 1-based ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RequirementId {
    pub kind: RequirementKind,
    pub ordinal: u32,
}

impl std::fmt::Display for RequirementId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}#{}", self.kind.label(), self.ordinal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    /// The system computes `x = t`.
    Functional(Equation),
    /// `not has_i(x)`.
    Privacy { agent: AgentId, var: Var },
    /// `has_i(x)`.
    Knowledge { agent: AgentId, var: Var },
    /// `X_i(eq)`.
    Correctness { agent: AgentId, eq: Equation },
}

impl Goal {
    pub fn kind(&self) -> RequirementKind {
        match self {
            Goal::Functional(_) => RequirementKind::Functional,
            Goal::Privacy { .. } => RequirementKind::Privacy,
            Goal::Knowledge { .. } => RequirementKind::Knowledge,
            Goal::Correctness { .. } => RequirementKind::Correctness,
        }
    }

    pub fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Goal::Functional(eq) | Goal::Correctness { eq, .. } => {
                f(&eq.lhs);
                f(&eq.rhs);
            }
            Goal::Privacy { var, .. } | Goal::Knowledge { var, .. } => f(&Term::Var(var.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: RequirementId,
    pub goal: Goal,
}

/// Requirements sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementSet {
    pub requirements: Vec<Requirement>,
}

impl RequirementSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a goal and returns its freshly assigned id.
    pub fn push(&mut self, goal: Goal) -> RequirementId {
        let kind = goal.kind();
        let ordinal = self.requirements.iter().filter(|r| r.id.kind == kind).count() as u32 + 1;
        let id = RequirementId { kind, ordinal };
        self.requirements.push(Requirement { id, goal });
        self.requirements.sort_by_key(|r| r.id);
        id
    }

    pub fn len(&self) -> usize {
        self.requirements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Requirement> {
        self.requirements.iter()
    }

    pub fn terms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        for r in &self.requirements {
            r.goal.visit_terms(&mut |t| out.push(t.clone()));
        }
        out
    }

    pub fn validate(&self, arch: &Architecture) -> Vec<ModelError> {
        let mut errors = Vec::new();
        for r in &self.requirements {
            match &r.goal {
                Goal::Functional(eq) => {
                    arch.validate_fact(&Fact::Eq(eq.clone()), &mut errors);
                    if !eq.is_equality() || eq.lhs.as_var().is_none() {
                        errors.push(ModelError::Structural(format!(
                            "functional requirement `{eq}` must have the form x = t"
                        )));
                    }
                }
                Goal::Privacy { agent, var } | Goal::Knowledge { agent, var } => arch.validate_fact(
                    &Fact::Has { agent: agent.clone(), var: var.clone() },
                    &mut errors,
                ),
                Goal::Correctness { agent, eq } => arch.validate_fact(
                    &Fact::Check { agent: agent.clone(), eq: eq.clone() },
                    &mut errors,
                ),
            }
        }
        errors
    }
}
