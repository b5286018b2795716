//! Name resolution and comprehension expansion from syntax trees to ground
//! model values.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{
    builtin_arity, AgentId, Architecture, Arity, Attestation, Equation, Fact, Goal, Modal, ModelError, Prim,
    PrimAtom, ProofObj, PropAtom, PropP, RequirementKind, RequirementSet, Term, Var, VarShape, SUM,
};

use super::ast::*;
use super::{ParseError, ParseOptions, Span};

type LResult<T> = Result<T, ()>;

/// Words with a fixed meaning in some position of the language.
pub(crate) const RESERVED: &[&str] = &[
    "agents", "arch", "assume", "attest", "axiom", "check", "compute", "const", "dep", "fact", "for", "fun", "has",
    "in", "not", "prim", "proof", "receive", "summands", "trust", "var", "vars", "K", "X",
];

/// What a PET role name stands for while a catalog entry is lowered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum RoleValue {
    Agent(AgentId),
    Term(Term),
    /// A variable family, by its declared name.
    Family(String),
}

#[derive(Debug, Clone)]
pub(crate) enum Binding {
    Index(u32),
    Term(Term),
}

pub(crate) type Env = Vec<(String, Binding)>;

pub(crate) struct Lowerer<'a> {
    arch: &'a Architecture,
    roles: BTreeMap<String, RoleValue>,
    pub errors: &'a mut Vec<ParseError>,
}

impl<'a> Lowerer<'a> {
    pub fn new(arch: &'a Architecture, errors: &'a mut Vec<ParseError>) -> Self {
        Lowerer { arch, roles: BTreeMap::new(), errors }
    }

    pub fn with_roles(
        arch: &'a Architecture,
        roles: BTreeMap<String, RoleValue>,
        errors: &'a mut Vec<ParseError>,
    ) -> Self {
        Lowerer { arch, roles, errors }
    }

    fn fail<T>(&mut self, span: Span, msg: impl Into<String>) -> LResult<T> {
        self.errors.push(ParseError::at(span, msg));
        Err(())
    }

    pub fn agent(&mut self, name: &Name) -> LResult<AgentId> {
        if let Some(RoleValue::Agent(a)) = self.roles.get(&name.node) {
            return Ok(a.clone());
        }
        match self.arch.agent(&name.node) {
            Some(a) => Ok(a.clone()),
            None => self.fail(name.span, format!("undeclared agent `{}`", name.node)),
        }
    }

    fn lookup(env: &Env, name: &str) -> Option<Binding> {
        env.iter().rev().find(|(n, _)| n == name).map(|(_, b)| b.clone())
    }

    fn named_int(&mut self, name: &str, span: Span, env: &Env) -> LResult<u32> {
        match Self::lookup(env, name) {
            Some(Binding::Index(k)) => return Ok(k),
            Some(Binding::Term(_)) => return self.fail(span, format!("`{name}` is bound to a term, not an index")),
            None => {}
        }
        match self.arch.constants.get(name) {
            Some(Some(v)) if *v >= 0 => Ok(*v as u32),
            Some(Some(v)) => self.fail(span, format!("constant `{name}` = {v} cannot be used as an index")),
            Some(None) => self.fail(span, format!("constant `{name}` has no value")),
            None => self.fail(span, format!("unbound index `{name}`")),
        }
    }

    fn bound(&mut self, b: &S<BoundAst>, env: &Env) -> LResult<u32> {
        match &b.node {
            BoundAst::Int(k) => Ok(*k),
            BoundAst::Name(n) => self.named_int(n, b.span, env),
        }
    }

    fn role_term(&mut self, name: &Name, env: &Env) -> LResult<Term> {
        if let Some(Binding::Term(t)) = Self::lookup(env, &name.node) {
            return Ok(t);
        }
        match self.roles.get(&name.node) {
            Some(RoleValue::Term(t)) => Ok(t.clone()),
            _ => self.fail(name.span, format!("`{}` is not a term role", name.node)),
        }
    }

    /// Every binding produced by an `x in source` clause.
    pub fn each(&mut self, each: &Each, env: &Env) -> LResult<Vec<Env>> {
        let values: Vec<(u32, Option<Term>)> = match &each.source.node {
            SourceAst::Range(lo, hi) => {
                let (lo, hi) = (self.bound(lo, env)?, self.bound(hi, env)?);
                if lo < 1 || hi < lo {
                    return self.fail(each.source.span, format!("empty or invalid range {lo}..{hi}"));
                }
                (lo..=hi).map(|k| (k, None)).collect()
            }
            SourceAst::Summands(role) => {
                let t = self.role_term(role, env)?;
                match t {
                    Term::Apply { fun, args } if fun == SUM => {
                        args.into_iter().enumerate().map(|(k, a)| (k as u32 + 1, Some(a))).collect()
                    }
                    other => return self.fail(role.span, format!("`{other}` is not a sum")),
                }
            }
            SourceAst::Vars(role) => {
                let t = self.role_term(role, env)?;
                t.free_vars().into_iter().enumerate().map(|(k, v)| (k as u32 + 1, Some(Term::Var(v)))).collect()
            }
        };
        let mut out = Vec::with_capacity(values.len());
        for (k, term) in values {
            let binds = match (&each.binder, term) {
                (Binder::One(x), None) => vec![(x.node.clone(), Binding::Index(k))],
                (Binder::One(x), Some(t)) => vec![(x.node.clone(), Binding::Term(t))],
                (Binder::Pair(i, x), Some(t)) => {
                    vec![(i.node.clone(), Binding::Index(k)), (x.node.clone(), Binding::Term(t))]
                }
                (Binder::Pair(i, _), None) => {
                    return self.fail(i.span, "a pair binder needs `summands(...)` or `vars(...)`");
                }
            };
            out.push(binds);
        }
        Ok(out)
    }

    fn with_each<T>(
        &mut self,
        each: &Each,
        env: &mut Env,
        mut f: impl FnMut(&mut Self, &mut Env) -> LResult<T>,
    ) -> LResult<Vec<T>> {
        let mut out = Vec::new();
        for binds in self.each(each, env)? {
            let depth = env.len();
            env.extend(binds);
            let r = f(self, env);
            env.truncate(depth);
            out.push(r?);
        }
        Ok(out)
    }

    pub fn term(&mut self, t: &S<TermAst>, env: &mut Env) -> LResult<Term> {
        match &t.node {
            TermAst::Int(v) => Ok(Term::int(*v)),
            TermAst::Name { name, index: None } => self.plain_name(name, t.span, env),
            TermAst::Name { name, index: Some(ix) } => {
                let name = match self.roles.get(name) {
                    Some(RoleValue::Family(actual)) => actual.clone(),
                    _ => name.clone(),
                };
                let name = &name;
                let size = match self.arch.variables.get(name) {
                    Some(VarShape::Family(size)) => *size,
                    Some(VarShape::Scalar) => return self.fail(t.span, format!("variable `{name}` is not a family")),
                    None => return self.fail(t.span, format!("undeclared variable family `{name}`")),
                };
                let k = match &ix.node {
                    IndexAst::Int(k) => *k,
                    IndexAst::Name(p) => self.named_int(p, ix.span, env)?,
                };
                if k < 1 || k > size {
                    return self.fail(ix.span, format!("index {k} of `{name}` outside 1..{size}"));
                }
                Ok(Term::Var(Var::indexed(name.clone(), k)))
            }
            TermAst::Call { fun, args } => {
                let arity = self.arch.arity(&fun.node);
                let args = self.args(args, env)?;
                match arity {
                    None => self.fail(fun.span, format!("undeclared function `{}`", fun.node)),
                    Some(a) if !a.accepts(args.len()) => {
                        let want = match a {
                            Arity::Fixed(k) => format!("{k}"),
                            Arity::Variadic => "at least 1".into(),
                        };
                        self.fail(
                            t.span,
                            format!("function `{}` expects {want} argument(s), found {}", fun.node, args.len()),
                        )
                    }
                    Some(_) => Ok(Term::apply(fun.node.clone(), args)),
                }
            }
        }
    }

    fn plain_name(&mut self, name: &str, span: Span, env: &Env) -> LResult<Term> {
        match Self::lookup(env, name) {
            Some(Binding::Index(k)) => return Ok(Term::int(k as i64)),
            Some(Binding::Term(t)) => return Ok(t),
            None => {}
        }
        match self.roles.get(name) {
            Some(RoleValue::Term(t)) => return Ok(t.clone()),
            Some(RoleValue::Agent(_)) => return self.fail(span, format!("agent role `{name}` used as a term")),
            Some(RoleValue::Family(_)) => return self.fail(span, format!("family `{name}` needs an index")),
            None => {}
        }
        if let Some(shape) = self.arch.variables.get(name) {
            return match shape {
                VarShape::Scalar => Ok(Term::Var(Var::scalar(name))),
                VarShape::Family(_) => self.fail(span, format!("family `{name}` needs an index")),
            };
        }
        if self.arch.constants.contains_key(name) {
            return Ok(Term::Const(crate::model::Constant::Named(name.to_string())));
        }
        if self.arch.agent(name).is_some() {
            return self.fail(span, format!("agent `{name}` used as a term"));
        }
        self.fail(span, format!("undeclared name `{name}`"))
    }

    pub fn args(&mut self, args: &[ArgAst], env: &mut Env) -> LResult<Vec<Term>> {
        let mut out = Vec::with_capacity(args.len());
        let mut ok = true;
        for a in args {
            let r = match &a.each {
                None => self.term(&a.term, env).map(|t| vec![t]),
                Some(each) => self.with_each(each, env, |lw, env| lw.term(&a.term, env)),
            };
            match r {
                Ok(ts) => out.extend(ts),
                Err(()) => ok = false,
            }
        }
        if ok {
            Ok(out)
        } else {
            Err(())
        }
    }

    fn var(&mut self, t: &S<TermAst>, env: &mut Env) -> LResult<Var> {
        match self.term(t, env)? {
            Term::Var(v) => Ok(v),
            other => self.fail(t.span, format!("expected a variable, found `{other}`")),
        }
    }

    pub fn equation(&mut self, e: &S<EqAst>, env: &mut Env) -> LResult<Equation> {
        let lhs = self.term(&e.node.lhs, env);
        let rhs = self.term(&e.node.rhs, env);
        Ok(Equation::new(lhs?, e.node.rel, rhs?))
    }

    fn attestation(&mut self, attester: &Name, eq: &S<EqAst>, env: &mut Env) -> LResult<Attestation> {
        let attester = self.agent(attester);
        let body = self.equation(eq, env);
        Ok(Attestation { attester: attester?, body: body? })
    }

    fn props(&mut self, body: &[PropAtomAst], env: &mut Env) -> LResult<PropP> {
        let mut out = BTreeSet::new();
        for atom in body {
            out.insert(match atom {
                PropAtomAst::Attest { attester, eq } => PropAtom::Att(self.attestation(attester, eq, env)?),
                PropAtomAst::Eq(eq) => PropAtom::Eq(self.equation(eq, env)?),
            });
        }
        Ok(PropP(out))
    }

    fn proof(&mut self, prover: &Name, verifier: &Name, body: &[PropAtomAst], env: &mut Env) -> LResult<ProofObj> {
        let prover = self.agent(prover);
        let verifier = self.agent(verifier);
        let body = self.props(body, env);
        Ok(ProofObj { prover: prover?, verifier: verifier?, body: body? })
    }

    pub fn fact(&mut self, f: &S<FactAst>, env: &mut Env) -> LResult<Fact> {
        let fact = match &f.node {
            FactAst::Receive { receiver, sender, payload } => {
                let receiver = self.agent(receiver);
                let sender = self.agent(sender);
                match payload {
                    PayloadAst::Var(t) => {
                        let var = self.var(t, env)?;
                        Fact::ReceiveVar { receiver: receiver?, sender: sender?, var }
                    }
                    PayloadAst::Prim(atoms) => {
                        let mut out = BTreeSet::new();
                        for atom in atoms {
                            out.insert(match atom {
                                PrimAtomAst::Attest { attester, eq } => {
                                    PrimAtom::Att(self.attestation(attester, eq, env)?)
                                }
                                PrimAtomAst::Proof { prover, verifier, body } => {
                                    PrimAtom::Proof(self.proof(prover, verifier, body, env)?)
                                }
                            });
                        }
                        Fact::ReceivePrim { receiver: receiver?, sender: sender?, payload: Prim(out) }
                    }
                }
            }
            FactAst::Trust { truster, trustee } => {
                let truster = self.agent(truster);
                let trustee = self.agent(trustee);
                Fact::Trust { truster: truster?, trustee: trustee? }
            }
            FactAst::Compute { agent, defined, body } => {
                let agent = self.agent(agent);
                let defined = self.var(defined, env);
                let body = self.term(body, env);
                Fact::Compute { agent: agent?, defined: defined?, body: body? }
            }
            FactAst::Check { agent, eq } => {
                let agent = self.agent(agent);
                let eq = self.equation(eq, env);
                Fact::Check { agent: agent?, eq: eq? }
            }
            FactAst::Has { agent, var } => {
                let agent = self.agent(agent);
                let var = self.var(var, env);
                Fact::Has { agent: agent?, var: var? }
            }
            FactAst::Attest { attester, eq } => Fact::Att(self.attestation(attester, eq, env)?),
            FactAst::Proof { prover, verifier, body } => Fact::Proof(self.proof(prover, verifier, body, env)?),
            FactAst::Dep { agent, target, sources } => {
                let agent = self.agent(agent);
                let target = self.var(target, env);
                let sources = self.args(sources, env);
                Fact::Dep { agent: agent?, target: target?, sources: sources?.into_iter().collect() }
            }
            FactAst::Eq(eq) => Fact::Eq(self.equation(eq, env)?),
        };
        self.structural(&fact, f.span)?;
        Ok(fact)
    }

    /// Reports the well-formedness problems name resolution cannot see.
    fn structural(&mut self, fact: &Fact, span: Span) -> LResult<()> {
        let mut errs = Vec::new();
        self.arch.validate_fact(fact, &mut errs);
        let mut failed = false;
        for e in errs {
            if matches!(
                e,
                ModelError::SelfProof(_)
                    | ModelError::EmptyDependency
                    | ModelError::EmptyConjunction
                    | ModelError::Structural(_)
            ) {
                failed = true;
                self.errors.push(ParseError::at(span, e.to_string()));
            }
        }
        if failed {
            Err(())
        } else {
            Ok(())
        }
    }

    pub fn modal(&mut self, m: &S<ModalAst>, env: &mut Env) -> LResult<Modal> {
        let agent = self.agent(&m.node.agent);
        let mut body = BTreeSet::new();
        let mut ok = true;
        for f in &m.node.body {
            match self.fact(f, env) {
                Ok(f) => {
                    body.insert(f);
                }
                Err(()) => ok = false,
            }
        }
        if !ok {
            return Err(());
        }
        Ok(Modal { op: m.node.op, agent: agent?, body })
    }

    /// Runs `f` once per binding of the statement-level loop, or once.
    pub fn looped<T>(
        &mut self,
        each: &Loop,
        env: &mut Env,
        f: impl FnMut(&mut Self, &mut Env) -> LResult<T>,
    ) -> LResult<Vec<T>> {
        let mut f = f;
        match each {
            None => Ok(vec![f(self, env)?]),
            Some(each) => self.with_each(each, env, f),
        }
    }
}

fn declare(
    seen: &mut BTreeMap<String, Span>,
    name: &Name,
    what: &str,
    errors: &mut Vec<ParseError>,
) -> bool {
    if RESERVED.contains(&name.node.as_str()) || builtin_arity(&name.node).is_some() {
        errors.push(ParseError::at(name.span, format!("`{}` is reserved and cannot name a {what}", name.node)));
        return false;
    }
    if let Some(prev) = seen.get(&name.node) {
        errors.push(ParseError::at(
            name.span,
            format!("`{}` already declared at {}:{}", name.node, prev.line, prev.column),
        ));
        return false;
    }
    seen.insert(name.node.clone(), name.span);
    true
}

pub(crate) fn lower_architecture(ast: &ArchAst, opts: &ParseOptions, errors: &mut Vec<ParseError>) -> Architecture {
    let mut arch = Architecture::new(ast.name.clone());
    let mut seen = BTreeMap::new();
    let mut n_span = None;

    for item in &ast.items {
        match &item.node {
            ArchItem::Agents(names) => {
                for name in names {
                    if declare(&mut seen, name, "agent", errors) {
                        match AgentId::new(name.node.clone()) {
                            Ok(a) => arch.agents.push(a),
                            Err(e) => errors.push(ParseError::at(name.span, e.to_string())),
                        }
                    }
                }
            }
            ArchItem::Const { name, value } => {
                if declare(&mut seen, name, "constant", errors) {
                    if name.node == "n" {
                        n_span = Some(name.span);
                    }
                    arch.constants.insert(name.node.clone(), *value);
                }
            }
            ArchItem::Fun(funs) => {
                for (name, arity) in funs {
                    if declare(&mut seen, name, "function", errors) {
                        arch.functions.insert(name.node.clone(), arity.map_or(Arity::Variadic, Arity::Fixed));
                    }
                }
            }
            _ => {}
        }
    }

    let bound = match (opts.index_bound_override, arch.constants.get("n").copied().flatten()) {
        (Some(k), _) => k as i64,
        (None, Some(v)) => v,
        (None, None) => opts.default_index_bound as i64,
    };
    if bound < 1 || bound > u32::MAX as i64 {
        errors.push(ParseError::at(n_span.unwrap_or_default(), format!("index bound must be at least 1, got {bound}")));
    } else {
        arch.index_bound = bound as u32;
    }
    arch.constants.insert("n".into(), Some(arch.index_bound as i64));
    seen.entry("n".into()).or_insert_with(Span::default);

    for item in &ast.items {
        if let ArchItem::Var(vars) = &item.node {
            for (name, size) in vars {
                if !declare(&mut seen, name, "variable", errors) {
                    continue;
                }
                let shape = match size {
                    None => VarShape::Scalar,
                    Some(s) => {
                        let k = match &s.node {
                            VarSize::Int(k) => Some(*k as i64),
                            VarSize::Name(c) => match arch.constants.get(c) {
                                Some(Some(v)) => Some(*v),
                                Some(None) => {
                                    errors.push(ParseError::at(s.span, format!("constant `{c}` has no value")));
                                    None
                                }
                                None => {
                                    errors.push(ParseError::at(s.span, format!("undeclared constant `{c}`")));
                                    None
                                }
                            },
                        };
                        match k {
                            Some(k) if k >= 1 && k <= u32::MAX as i64 => VarShape::Family(k as u32),
                            Some(k) => {
                                errors.push(ParseError::at(s.span, format!("family size must be positive, got {k}")));
                                continue;
                            }
                            None => continue,
                        }
                    }
                };
                arch.variables.insert(name.node.clone(), shape);
            }
        }
    }

    let mut facts = Vec::new();
    let mut assumptions = Vec::new();
    {
        let mut lw = Lowerer::new(&arch, errors);
        let mut env = Env::new();
        for item in &ast.items {
            match &item.node {
                ArchItem::Fact(f, each) => {
                    if let Ok(fs) = lw.looped(each, &mut env, |lw, env| lw.fact(f, env)) {
                        facts.extend(fs);
                    }
                }
                ArchItem::Axiom(eq, each) => {
                    if let Ok(es) = lw.looped(each, &mut env, |lw, env| lw.equation(eq, env)) {
                        facts.extend(es.into_iter().map(Fact::Eq));
                    }
                }
                ArchItem::Assume(m, each) => {
                    if let Ok(ms) = lw.looped(each, &mut env, |lw, env| lw.modal(m, env)) {
                        assumptions.extend(ms);
                    }
                }
                _ => {}
            }
        }
    }
    arch.facts.extend(facts);
    arch.assumptions.extend(assumptions);
    arch
}

pub(crate) fn lower_requirements(
    items: &[ReqItemAst],
    arch: &Architecture,
    errors: &mut Vec<ParseError>,
) -> RequirementSet {
    let mut reqs = RequirementSet::new();
    let mut lw = Lowerer::new(arch, errors);
    let mut env = Env::new();
    for item in items {
        let goals = lw.looped(&item.each, &mut env, |lw, env| goal(lw, item, env));
        if let Ok(goals) = goals {
            for g in goals {
                reqs.push(g);
            }
        }
    }
    reqs
}

fn goal(lw: &mut Lowerer<'_>, item: &ReqItemAst, env: &mut Env) -> LResult<Goal> {
    let span = item.expr.span;
    match (&item.section, &item.expr.node) {
        (RequirementKind::Privacy, ReqExprAst::NotHas { agent, var }) => {
            let agent = lw.agent(agent);
            let var = lw.var(var, env);
            Ok(Goal::Privacy { agent: agent?, var: var? })
        }
        (RequirementKind::Knowledge, ReqExprAst::Has { agent, var }) => {
            let agent = lw.agent(agent);
            let var = lw.var(var, env);
            Ok(Goal::Knowledge { agent: agent?, var: var? })
        }
        (RequirementKind::Correctness, ReqExprAst::X { agent, eq }) => {
            let agent = lw.agent(agent);
            let eq = lw.equation(eq, env);
            Ok(Goal::Correctness { agent: agent?, eq: eq? })
        }
        (RequirementKind::Functional, ReqExprAst::Eq(eq)) => {
            let e = lw.equation(eq, env)?;
            if !e.is_equality() || e.lhs.as_var().is_none() {
                return lw.fail(span, format!("functional requirement `{e}` must have the form x = t"));
            }
            Ok(Goal::Functional(e))
        }
        (kind, _) => {
            let form = match kind {
                RequirementKind::Privacy => "`not has(agent, var)`",
                RequirementKind::Knowledge => "`has(agent, var)`",
                RequirementKind::Correctness => "`X(agent, equation)`",
                RequirementKind::Functional => "`x = t`",
            };
            lw.fail(span, format!("{} requirements take the form {form}", kind.label()))
        }
    }
}
