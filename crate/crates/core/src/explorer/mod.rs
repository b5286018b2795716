//! Design exploration sessions: classify an architecture against its
//! requirements, suggest PET applications from a catalog, apply or undo them.

mod catalog;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adsl::{parse_term, Lowerer, ParseErrors, RoleValue};
use crate::checker::{self, assess, Assessment, Defect, Outcome, Unmet};
use crate::engine::{Closure, Config, EngineError};
use crate::model::{
    AgentId, Architecture, Fact, Goal, Knowledge, ModalOp, RequirementId, RequirementSet, Term, Var, VarShape, SUM,
};

use catalog::{Assume, Fresh, GoalPat, PetBody, Require};

const BUILTIN: &str = include_str!("../../catalog/pets.pvd");

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("unknown PET `{0}`")]
    UnknownPattern(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid substitution: {0}")]
    Substitution(String),
    #[error("PET `{pattern}` does not instantiate: {message}")]
    Instantiation { pattern: String, message: String },
    #[error("nothing to undo")]
    EmptyHistory,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A catalog entry.
#[derive(Debug, Clone)]
pub struct Pet {
    pub name: String,
    pub description: String,
    /// Abstracts a technology the deduction rules do not model.
    pub experimental: bool,
    body: PetBody,
}

impl Pet {
    /// Roles a substitution must bind; fresh symbols are chosen on instantiation.
    pub fn roles(&self) -> Vec<String> {
        let goal = self.body.goal.roles().into_iter().map(|(n, _)| n.node.clone());
        goal.chain(self.body.roles.iter().map(|n| n.node.clone())).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Library {
    pets: Vec<Pet>,
}

impl Library {
    /// The shipped catalog.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN, Some("pets.pvd")).expect("shipped catalog parses")
    }

    pub fn parse(text: &str, file: Option<&str>) -> Result<Self, ParseErrors> {
        let pets = catalog::parse(text, file)?
            .into_iter()
            .map(|p| Pet { name: p.name.node, description: p.description, experimental: p.experimental, body: p.body })
            .collect();
        Ok(Library { pets })
    }

    pub fn pets(&self) -> &[Pet] {
        &self.pets
    }

    pub fn get(&self, name: &str) -> Option<&Pet> {
        self.pets.iter().find(|p| p.name == name)
    }
}

/// A pattern instantiated against a specific architecture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetApplication {
    pub pattern: String,
    /// Every role, fresh ones included, rendered in the architecture syntax.
    pub substitution: BTreeMap<String, String>,
    #[serde(default)]
    pub added_facts: Vec<Fact>,
    /// Trust facts and modal atoms the designer has to accept.
    #[serde(default)]
    pub induced: Vec<Knowledge>,
    #[serde(default)]
    pub fresh_agents: Vec<AgentId>,
    #[serde(default)]
    pub fresh_variables: BTreeMap<String, VarShape>,
}

impl PetApplication {
    pub fn apply_to(&self, arch: &Architecture) -> Architecture {
        let mut out = arch.clone();
        for a in &self.fresh_agents {
            out.add_agent(a.clone());
        }
        for (name, shape) in &self.fresh_variables {
            out.variables.insert(name.clone(), *shape);
        }
        out.facts.extend(self.added_facts.iter().cloned());
        for k in &self.induced {
            match k {
                Knowledge::Fact(f) => {
                    out.facts.insert(f.clone());
                }
                Knowledge::Modal(m) => {
                    out.assumptions.insert(m.clone());
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub application: PetApplication,
    pub experimental: bool,
    /// Set when the application induces assumptions, violates a privacy
    /// requirement, introduces a defect, or comes from an experimental pattern.
    pub requires_acceptance: bool,
    pub resolves: Vec<Unmet>,
    pub new_violations: Vec<RequirementId>,
    pub new_defects: Vec<Defect>,
}

/// One entry of a session history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Step {
    Pet(PetApplication),
    Facts { facts: Vec<Fact> },
}

impl Step {
    pub fn apply_to(&self, arch: &Architecture) -> Architecture {
        match self {
            Step::Pet(app) => app.apply_to(arch),
            Step::Facts { facts } => {
                let mut out = arch.clone();
                out.facts.extend(facts.iter().cloned());
                out
            }
        }
    }
}

pub fn replay(initial: &Architecture, history: &[Step]) -> Architecture {
    history.iter().fold(initial.clone(), |arch, step| step.apply_to(&arch))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    initial: Architecture,
    requirements: RequirementSet,
    history: Vec<Step>,
    architecture: Architecture,
    assessment: Assessment,
}

impl Session {
    pub fn new(arch: Architecture, requirements: RequirementSet) -> Result<Self, ExploreError> {
        let assessment = assess(&arch, &requirements, &Config::default())?;
        Ok(Session { initial: arch.clone(), requirements, history: Vec::new(), architecture: arch, assessment })
    }

    pub fn initial(&self) -> &Architecture {
        &self.initial
    }

    pub fn architecture(&self) -> &Architecture {
        &self.architecture
    }

    pub fn requirements(&self) -> &RequirementSet {
        &self.requirements
    }

    pub fn history(&self) -> &[Step] {
        &self.history
    }

    pub fn assessment(&self) -> &Assessment {
        &self.assessment
    }

    pub fn status(&self) -> &Outcome {
        &self.assessment.outcome
    }

    fn closures(&self) -> Result<Vec<Closure>, EngineError> {
        checker::closures(&self.architecture, &self.requirements, &Config::default())
    }

    fn with_history(&self, history: Vec<Step>) -> Result<Self, ExploreError> {
        let architecture = replay(&self.initial, &history);
        let assessment = assess(&architecture, &self.requirements, &Config::default())?;
        Ok(Session {
            initial: self.initial.clone(),
            requirements: self.requirements.clone(),
            history,
            architecture,
            assessment,
        })
    }

    fn push(&self, step: Step) -> Result<Self, ExploreError> {
        let mut history = self.history.clone();
        history.push(step);
        self.with_history(history)
    }

    /// Applications of `library` that bring the session closer to
    /// completion, in library order and then by substitution.
    pub fn suggest(&self, library: &Library) -> Result<Vec<Suggestion>, ExploreError> {
        if self.assessment.outcome == Outcome::Complete {
            return Ok(Vec::new());
        }
        let closures = self.closures()?;
        let unmet: Vec<Unmet> = self.assessment.unmet().into_iter().cloned().collect();
        let mut seen = BTreeSet::new();
        let mut candidates: Vec<(bool, PetApplication)> = Vec::new();
        for pet in &library.pets {
            let mut apps = Vec::new();
            for u in &unmet {
                let Some(bound) = bind_goal(&pet.body.goal, u) else { continue };
                for choice in agent_choices(&pet.body.roles, &self.architecture.agents) {
                    let mut given = bound.clone();
                    given.extend(choice);
                    let Ok(app) = instantiate(pet, &self.architecture, &closures, &given) else { continue };
                    if seen.insert((app.pattern.clone(), app.substitution.clone())) {
                        apps.push(app);
                    }
                }
            }
            apps.sort_by(|a, b| a.substitution.cmp(&b.substitution));
            candidates.extend(apps.into_iter().map(|a| (pet.experimental, a)));
        }
        let judged = crate::par::map(&candidates, |(experimental, app)| self.judge(*experimental, app));
        judged.into_iter().filter_map(Result::transpose).collect()
    }

    fn judge(&self, experimental: bool, app: &PetApplication) -> Result<Option<Suggestion>, ExploreError> {
        let arch = app.apply_to(&self.architecture);
        let after = match assess(&arch, &self.requirements, &Config::default()) {
            Ok(a) => a,
            Err(EngineError::ResourceLimit { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let before = &self.assessment;
        let (old, new) = (before.unmet(), after.unmet());
        if !(new.is_subset(&old) && new.len() < old.len()) {
            return Ok(None);
        }
        let regresses = before.verdicts.iter().zip(&after.verdicts).any(|(b, a)| {
            matches!(b.goal, Goal::Knowledge { .. } | Goal::Correctness { .. })
                && b.status.is_satisfied()
                && !a.status.is_satisfied()
        });
        if regresses {
            return Ok(None);
        }
        let was_violated = before.violated();
        let new_violations: Vec<RequirementId> =
            after.violated().into_iter().filter(|id| !was_violated.contains(id)).collect();
        let new_defects: Vec<Defect> = after.defects.iter().filter(|d| !before.defects.contains(d)).cloned().collect();
        let requires_acceptance =
            experimental || !app.induced.is_empty() || !new_violations.is_empty() || !new_defects.is_empty();
        Ok(Some(Suggestion {
            application: app.clone(),
            experimental,
            requires_acceptance,
            resolves: old.difference(&new).map(|u| (*u).clone()).collect(),
            new_violations,
            new_defects,
        }))
    }

    /// Applies `app`, re-instantiated from its pattern and substitution
    /// against the current architecture.
    pub fn apply(&self, library: &Library, app: &PetApplication) -> Result<Self, ExploreError> {
        let pet = library.get(&app.pattern).ok_or_else(|| ExploreError::UnknownPattern(app.pattern.clone()))?;
        let given = parse_substitution(pet, &self.architecture, &app.substitution)?;
        let closures = self.closures()?;
        let inst = instantiate(pet, &self.architecture, &closures, &given)?;
        self.push(Step::Pet(inst))
    }

    pub fn add_facts(&self, facts: Vec<Fact>) -> Result<Self, ExploreError> {
        self.push(Step::Facts { facts })
    }

    /// Drops the last step and replays the rest from the initial architecture.
    pub fn undo(&self) -> Result<Self, ExploreError> {
        let Some((_, rest)) = self.history.split_last() else { return Err(ExploreError::EmptyHistory) };
        self.with_history(rest.to_vec())
    }
}

fn bind_goal(goal: &GoalPat, u: &Unmet) -> Option<BTreeMap<String, RoleValue>> {
    let mut out = BTreeMap::new();
    match (goal, &u.goal) {
        (GoalPat::Correctness { agent, x, t }, Knowledge::Modal(m)) if m.op == ModalOp::X && m.body.len() == 1 => {
            let Some(Fact::Eq(eq)) = m.body.first() else { return None };
            if !eq.is_equality() {
                return None;
            }
            out.insert(agent.node.clone(), RoleValue::Agent(m.agent.clone()));
            out.insert(x.node.clone(), RoleValue::Term(eq.lhs.clone()));
            out.insert(t.node.clone(), RoleValue::Term(eq.rhs.clone()));
        }
        (GoalPat::Knowledge { agent, x }, Knowledge::Fact(Fact::Has { agent: a, var })) => {
            out.insert(agent.node.clone(), RoleValue::Agent(a.clone()));
            out.insert(x.node.clone(), RoleValue::Term(Term::Var(var.clone())));
        }
        (GoalPat::Functional { x, t }, Knowledge::Fact(Fact::Eq(eq))) if u.agent.is_none() && eq.is_equality() => {
            out.insert(x.node.clone(), RoleValue::Term(eq.lhs.clone()));
            out.insert(t.node.clone(), RoleValue::Term(eq.rhs.clone()));
        }
        _ => return None,
    }
    Some(out)
}

/// Every assignment of declared agents to the agent roles, in declaration order.
fn agent_choices(roles: &[crate::adsl::ast::Name], agents: &[AgentId]) -> Vec<Vec<(String, RoleValue)>> {
    let mut out = vec![Vec::new()];
    for role in roles {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                agents.iter().map(move |a| {
                    let mut next = prefix.clone();
                    next.push((role.node.clone(), RoleValue::Agent(a.clone())));
                    next
                })
            })
            .collect();
    }
    out
}

fn parse_substitution(
    pet: &Pet,
    arch: &Architecture,
    subst: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, RoleValue>, ExploreError> {
    let goal = pet.body.goal.roles().into_iter();
    let roles = goal.chain(pet.body.roles.iter().map(|n| (n, true)));
    let mut out = BTreeMap::new();
    for (name, is_agent) in roles {
        let text = subst
            .get(&name.node)
            .ok_or_else(|| ExploreError::Substitution(format!("role `{}` is unbound", name.node)))?;
        let value = if is_agent {
            let a = arch
                .agent(text.trim())
                .ok_or_else(|| ExploreError::Substitution(format!("role `{}`: unknown agent `{text}`", name.node)))?;
            RoleValue::Agent(a.clone())
        } else {
            let t = parse_term(text, arch)
                .map_err(|e| ExploreError::Substitution(format!("role `{}`: {e}", name.node)))?;
            RoleValue::Term(t)
        };
        out.insert(name.node.clone(), value);
    }
    Ok(out)
}

fn render(v: &RoleValue) -> String {
    match v {
        RoleValue::Agent(a) => a.to_string(),
        RoleValue::Term(t) => t.to_string(),
        RoleValue::Family(name) => name.clone(),
    }
}

fn instantiate(
    pet: &Pet,
    arch: &Architecture,
    closures: &[Closure],
    given: &BTreeMap<String, RoleValue>,
) -> Result<PetApplication, ExploreError> {
    let body = &pet.body;
    let broken = |message: String| ExploreError::Instantiation { pattern: pet.name.clone(), message };
    let mut roles = given.clone();
    let mut scratch = arch.clone();
    let mut fresh_agents = Vec::new();
    let mut fresh_variables = BTreeMap::new();
    for f in &body.fresh {
        match f {
            Fresh::Agent(n) => {
                let id = AgentId::new(scratch.fresh_name(&n.node)).map_err(|e| broken(e.to_string()))?;
                scratch.add_agent(id.clone());
                fresh_agents.push(id.clone());
                roles.insert(n.node.clone(), RoleValue::Agent(id));
            }
            Fresh::Var(n) => {
                let name = scratch.fresh_name(&n.node);
                scratch.variables.insert(name.clone(), VarShape::Scalar);
                fresh_variables.insert(name.clone(), VarShape::Scalar);
                roles.insert(n.node.clone(), RoleValue::Term(Term::Var(Var::scalar(name))));
            }
            Fresh::Family { name, over } => {
                let size = match roles.get(&over.node) {
                    Some(RoleValue::Term(t)) => match t.as_apply() {
                        Some((SUM, args)) => args.len() as u32,
                        _ => return Err(ExploreError::Precondition(format!("sum({t})"))),
                    },
                    _ => return Err(broken(format!("`{}` is not a term role", over.node))),
                };
                let actual = scratch.fresh_name(&name.node);
                scratch.variables.insert(actual.clone(), VarShape::Family(size));
                fresh_variables.insert(actual.clone(), VarShape::Family(size));
                roles.insert(name.node.clone(), RoleValue::Family(actual));
            }
        }
    }

    let agent = |n: &crate::adsl::ast::Name| match roles.get(&n.node) {
        Some(RoleValue::Agent(a)) => Ok(a.clone()),
        _ => Err(broken(format!("`{}` is not an agent role", n.node))),
    };
    let term = |n: &crate::adsl::ast::Name| match roles.get(&n.node) {
        Some(RoleValue::Term(t)) => Ok(t.clone()),
        _ => Err(broken(format!("`{}` is not a term role", n.node))),
    };
    for r in &body.requires {
        let (ok, shown) = match &r.node {
            Require::Distinct(a, b) => {
                let (a, b) = (agent(a)?, agent(b)?);
                (a != b, format!("distinct({a}, {b})"))
            }
            Require::Access { agent: a, term: t, negated } => {
                let (a, t) = (agent(a)?, term(t)?);
                let closure = closures.iter().find(|c| c.agent() == &a);
                let access = closure.is_some_and(|c| t.free_vars().iter().all(|v| c.has(v)));
                let not = if *negated { "not " } else { "" };
                (access != *negated, format!("{not}access({a}, {t})"))
            }
            Require::Sum(t) => {
                let t = term(t)?;
                (matches!(t.as_apply(), Some((SUM, _))), format!("sum({t})"))
            }
        };
        if !ok {
            return Err(ExploreError::Precondition(shown));
        }
    }

    let mut errors = Vec::new();
    let mut lw = Lowerer::with_roles(&scratch, roles.clone(), &mut errors);
    let mut added_facts: Vec<Fact> = Vec::new();
    let mut induced: Vec<Knowledge> = Vec::new();
    for (f, each) in &body.adds {
        if let Ok(fs) = lw.looped(each, &mut Vec::new(), |lw, env| lw.fact(f, env)) {
            added_facts.extend(fs);
        }
    }
    for a in &body.assumes {
        let ks = match a {
            Assume::Trust(f, each) => {
                lw.looped(each, &mut Vec::new(), |lw, env| lw.fact(f, env).map(Knowledge::Fact))
            }
            Assume::Modal(m, each) => {
                lw.looped(each, &mut Vec::new(), |lw, env| lw.modal(m, env).map(Knowledge::Modal))
            }
        };
        if let Ok(ks) = ks {
            induced.extend(ks);
        }
    }
    if !errors.is_empty() {
        let message = errors.iter().map(|e| e.message.clone()).collect::<Vec<_>>().join("; ");
        return Err(broken(message));
    }
    let mut seen = BTreeSet::new();
    added_facts.retain(|f| !arch.facts.contains(f) && seen.insert(Knowledge::Fact(f.clone())));
    induced.retain(|k| {
        let present = match k {
            Knowledge::Fact(f) => arch.facts.contains(f),
            Knowledge::Modal(m) => arch.assumptions.contains(m),
        };
        !present && seen.insert(k.clone())
    });

    Ok(PetApplication {
        pattern: pet.name.clone(),
        substitution: roles.iter().map(|(k, v)| (k.clone(), render(v))).collect(),
        added_facts,
        induced,
        fresh_agents,
        fresh_variables,
    })
}
