//! Structural utilities: conjunction normalization, index instantiation and
//! variable analysis.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::fact::{Fact, Formula, Modal, Prim, PrimAtom, PropAtom, PropP, ProofObj};
use super::term::{Equation, Index, Term, Var};
use super::ModelError;

/// Flattens a conjunction of atomic facts into its canonical set.
///
/// Negations and modal atoms are not architecture properties and are
/// rejected.
pub fn normalize(phi0: &Formula) -> Result<BTreeSet<Fact>, ModelError> {
    let mut out = BTreeSet::new();
    flatten(phi0, &mut out)?;
    Ok(out)
}

fn flatten(phi: &Formula, out: &mut BTreeSet<Fact>) -> Result<(), ModelError> {
    match phi {
        Formula::Atom(f) => {
            out.insert(f.clone());
            Ok(())
        }
        Formula::And(a, b) => {
            flatten(a, out)?;
            flatten(b, out)
        }
        Formula::Not(_) => Err(ModelError::Structural("negation inside an architecture property".into())),
        Formula::Modal(m) => Err(ModelError::Structural(format!(
            "modal atom {:?}_{} inside an architecture property",
            m.op, m.agent
        ))),
    }
}

/// Anything whose variables can be listed.
pub trait FreeVars {
    fn free_vars(&self) -> BTreeSet<Var>;
}

impl FreeVars for Term {
    fn free_vars(&self) -> BTreeSet<Var> {
        Term::free_vars(self)
    }
}

impl FreeVars for Equation {
    fn free_vars(&self) -> BTreeSet<Var> {
        Equation::free_vars(self)
    }
}

impl FreeVars for Fact {
    fn free_vars(&self) -> BTreeSet<Var> {
        Fact::free_vars(self)
    }
}

pub fn free_vars<T: FreeVars + ?Sized>(item: &T) -> BTreeSet<Var> {
    item.free_vars()
}

/// A fact with an optional index parameter ranging over `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub fact: Fact,
    pub param: Option<String>,
}

impl Template {
    pub fn ground(fact: Fact) -> Self {
        Template { fact, param: None }
    }

    pub fn indexed(fact: Fact, param: impl Into<String>) -> Self {
        Template { fact, param: Some(param.into()) }
    }
}

/// Expands a template for every index in `1..=n`.
pub fn instantiate(template: &Template, n: u32) -> Result<BTreeSet<Fact>, ModelError> {
    if n < 1 {
        return Err(ModelError::Bound(n as i64));
    }
    instantiate_range(template, 1, n)
}

/// Expands a template for every index in `lo..=hi`.
pub fn instantiate_range(template: &Template, lo: u32, hi: u32) -> Result<BTreeSet<Fact>, ModelError> {
    if lo < 1 || hi < lo {
        return Err(ModelError::Bound(hi as i64));
    }
    let mut free = BTreeSet::new();
    template.fact.visit_terms(&mut |t| free_params(t, &mut Vec::new(), &mut free));
    if let Some(p) = free.iter().find(|p| Some(*p) != template.param.as_ref()) {
        return Err(ModelError::UnboundIndex(p.clone()));
    }
    match &template.param {
        None => Ok(BTreeSet::from([expand_fact(&template.fact, &[])?])),
        Some(p) => (lo..=hi).map(|k| expand_fact(&template.fact, &[(p.clone(), k)])).collect(),
    }
}

fn free_params(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(Var { index: Some(Index::Param(p)), .. }) if !bound.contains(p) => {
            out.insert(p.clone());
        }
        Term::Apply { args, .. } => args.iter().for_each(|a| free_params(a, bound, out)),
        Term::Family { param, body, .. } => {
            bound.push(param.clone());
            free_params(body, bound, out);
            bound.pop();
        }
        _ => {}
    }
}

type Env = [(String, u32)];

fn lookup(env: &Env, p: &str) -> Option<u32> {
    env.iter().rev().find(|(name, _)| name == p).map(|(_, v)| *v)
}

/// Substitutes bound indices and splices families. A family yields one term
/// per index; every other term yields exactly one.
fn expand_term(t: &Term, env: &Env) -> Result<Vec<Term>, ModelError> {
    Ok(match t {
        Term::Const(_) => vec![t.clone()],
        Term::Var(v) => vec![Term::Var(expand_var(v, env)?)],
        Term::Apply { fun, args } => {
            let mut out = Vec::with_capacity(args.len());
            for a in args {
                out.extend(expand_term(a, env)?);
            }
            vec![Term::Apply { fun: fun.clone(), args: out }]
        }
        Term::Family { param, lo, hi, body } => {
            let mut out = Vec::new();
            let mut inner = env.to_vec();
            inner.push((param.clone(), 0));
            for k in *lo..=*hi {
                inner.last_mut().expect("pushed").1 = k;
                out.extend(expand_term(body, &inner)?);
            }
            out
        }
    })
}

fn expand_single(t: &Term, env: &Env) -> Result<Term, ModelError> {
    if let Term::Family { .. } = t {
        return Err(ModelError::Structural(format!("indexed family `{t}` outside an argument list")));
    }
    Ok(expand_term(t, env)?.pop().expect("non-family terms expand to one term"))
}

fn expand_var(v: &Var, env: &Env) -> Result<Var, ModelError> {
    match &v.index {
        Some(Index::Param(p)) => match lookup(env, p) {
            Some(k) => Ok(Var::indexed(v.base.clone(), k)),
            None => Err(ModelError::UnboundIndex(p.clone())),
        },
        _ => Ok(v.clone()),
    }
}

fn expand_eq(eq: &Equation, env: &Env) -> Result<Equation, ModelError> {
    Ok(Equation::new(expand_single(&eq.lhs, env)?, eq.rel, expand_single(&eq.rhs, env)?))
}

fn expand_prop(p: &PropP, env: &Env) -> Result<PropP, ModelError> {
    p.0.iter()
        .map(|a| match a {
            PropAtom::Att(att) => {
                Ok(PropAtom::Att(super::Attestation { attester: att.attester.clone(), body: expand_eq(&att.body, env)? }))
            }
            PropAtom::Eq(e) => Ok(PropAtom::Eq(expand_eq(e, env)?)),
        })
        .collect::<Result<_, _>>()
        .map(PropP)
}

fn expand_proof(p: &ProofObj, env: &Env) -> Result<ProofObj, ModelError> {
    Ok(ProofObj { prover: p.prover.clone(), verifier: p.verifier.clone(), body: expand_prop(&p.body, env)? })
}

fn expand_fact(fact: &Fact, env: &Env) -> Result<Fact, ModelError> {
    use super::Attestation;
    Ok(match fact {
        Fact::ReceiveVar { receiver, sender, var } => Fact::ReceiveVar {
            receiver: receiver.clone(),
            sender: sender.clone(),
            var: expand_var(var, env)?,
        },
        Fact::ReceivePrim { receiver, sender, payload } => Fact::ReceivePrim {
            receiver: receiver.clone(),
            sender: sender.clone(),
            payload: Prim(
                payload
                    .0
                    .iter()
                    .map(|a| match a {
                        PrimAtom::Proof(p) => Ok(PrimAtom::Proof(expand_proof(p, env)?)),
                        PrimAtom::Att(att) => Ok(PrimAtom::Att(Attestation {
                            attester: att.attester.clone(),
                            body: expand_eq(&att.body, env)?,
                        })),
                    })
                    .collect::<Result<_, ModelError>>()?,
            ),
        },
        Fact::Trust { .. } => fact.clone(),
        Fact::Compute { agent, defined, body } => Fact::Compute {
            agent: agent.clone(),
            defined: expand_var(defined, env)?,
            body: expand_single(body, env)?,
        },
        Fact::Check { agent, eq } => Fact::Check { agent: agent.clone(), eq: expand_eq(eq, env)? },
        Fact::Has { agent, var } => Fact::Has { agent: agent.clone(), var: expand_var(var, env)? },
        Fact::Att(att) => Fact::Att(Attestation { attester: att.attester.clone(), body: expand_eq(&att.body, env)? }),
        Fact::Proof(p) => Fact::Proof(expand_proof(p, env)?),
        Fact::Eq(e) => Fact::Eq(expand_eq(e, env)?),
        Fact::Dep { agent, target, sources } => {
            let mut out = BTreeSet::new();
            for s in sources {
                out.extend(expand_term(s, env)?);
            }
            Fact::Dep { agent: agent.clone(), target: expand_var(target, env)?, sources: out }
        }
    })
}

/// Expands the families inside a modal assumption body.
pub fn instantiate_modal(m: &Modal) -> Result<Modal, ModelError> {
    Ok(Modal {
        op: m.op,
        agent: m.agent.clone(),
        body: m.body.iter().map(|f| expand_fact(f, &[])).collect::<Result<_, _>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentId, Attestation};

    fn a(s: &str) -> AgentId {
        AgentId::new(s).unwrap()
    }

    fn has(agent: &str, v: Var) -> Fact {
        Fact::Has { agent: a(agent), var: v }
    }

    #[test]
    fn flattens_nested_conjunction() {
        let (x, y, z) = (has("o", Var::scalar("x")), has("o", Var::scalar("y")), has("o", Var::scalar("z")));
        let phi = Formula::and(
            Formula::Atom(x.clone()),
            Formula::and(Formula::Atom(y.clone()), Formula::Atom(z.clone())),
        );
        assert_eq!(normalize(&phi).unwrap(), BTreeSet::from([x, y, z]));
    }

    #[test]
    fn normalize_rejects_modal_and_negation() {
        let m = Formula::Modal(Modal::single(super::super::ModalOp::K, a("o"), has("o", Var::scalar("x"))));
        assert!(matches!(normalize(&m), Err(ModelError::Structural(_))));
        let n = Formula::Not(Box::new(Formula::Atom(has("o", Var::scalar("x")))));
        assert!(normalize(&Formula::and(Formula::Atom(has("o", Var::scalar("y"))), n)).is_err());
    }

    #[test]
    fn receive_keeps_payload_conjunction_in_one_fact() {
        let eq1 = Equation::eq(Term::var("x"), Term::int(1));
        let eq2 = Equation::eq(Term::var("y"), Term::int(2));
        let payload = Prim(BTreeSet::from([
            PrimAtom::Att(Attestation { attester: a("m"), body: eq1 }),
            PrimAtom::Att(Attestation { attester: a("m"), body: eq2 }),
        ]));
        let f = Fact::ReceivePrim { receiver: a("o"), sender: a("m"), payload };
        let out = normalize(&Formula::Atom(f.clone())).unwrap();
        assert_eq!(out.len(), 1);
        match out.iter().next().unwrap() {
            Fact::ReceivePrim { payload, .. } => assert_eq!(payload.0.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn instantiate_indexed_receive() {
        let t = Template::indexed(
            Fact::ReceiveVar { receiver: a("u"), sender: a("m"), var: Var::param("C", "i") },
            "i",
        );
        let out = instantiate(&t, 3).unwrap();
        let expected: BTreeSet<_> = (1..=3)
            .map(|k| Fact::ReceiveVar { receiver: a("u"), sender: a("m"), var: Var::indexed("C", k) })
            .collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn instantiate_without_index_is_singleton() {
        let f = Fact::Trust { truster: a("o"), trustee: a("m") };
        assert_eq!(instantiate(&Template::ground(f.clone()), 3).unwrap(), BTreeSet::from([f]));
    }

    #[test]
    fn instantiate_expands_dependency_comprehension() {
        let family = Term::Family {
            param: "i".into(),
            lo: 1,
            hi: 2,
            body: Box::new(Term::Var(Var::param("C", "i"))),
        };
        let t = Template::ground(Fact::Dep { agent: a("o"), target: Var::scalar("Fee"), sources: BTreeSet::from([family]) });
        let out = instantiate(&t, 3).unwrap();
        let expected = Fact::Dep {
            agent: a("o"),
            target: Var::scalar("Fee"),
            sources: BTreeSet::from([Term::indexed("C", 1), Term::indexed("C", 2)]),
        };
        assert_eq!(out, BTreeSet::from([expected]));
    }

    #[test]
    fn instantiate_errors() {
        let f = Fact::Has { agent: a("o"), var: Var::param("C", "i") };
        assert!(matches!(instantiate(&Template::indexed(f.clone(), "i"), 0), Err(ModelError::Bound(_))));
        assert!(matches!(instantiate(&Template::indexed(f.clone(), "j"), 2), Err(ModelError::UnboundIndex(p)) if p == "i"));
        assert!(matches!(instantiate(&Template::ground(f), 2), Err(ModelError::UnboundIndex(_))));
    }

    #[test]
    fn free_vars_examples() {
        let p = Term::apply("P", vec![Term::indexed("C", 1)]);
        assert_eq!(free_vars(&p), BTreeSet::from([Var::indexed("C", 1)]));
        let fee = Equation::eq(
            Term::var("Fee"),
            Term::apply("sum", vec![p.clone(), Term::apply("P", vec![Term::indexed("C", 2)])]),
        );
        assert_eq!(
            free_vars(&fee),
            BTreeSet::from([Var::scalar("Fee"), Var::indexed("C", 1), Var::indexed("C", 2)])
        );
        assert!(free_vars(&Term::int(42)).is_empty());
    }
}
