//! Seeded random architectures, requirements and equation sets.
//!
//! Generated architectures use at most four agents, twelve facts, two
//! declared function symbols and a variable family of size at most three.
//! Pools are small on purpose so that equalities and flows interact.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use privarch_core::model::{
    AgentId, Architecture, Arity, Attestation, Equation, Fact, Goal, Modal, ModalOp, Prim, PrimAtom, ProofObj,
    PropAtom, PropP, RequirementSet, Term, Var, VarShape,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const AGENTS: [&str; 4] = ["a", "b", "c", "d"];
const SCALARS: [&str; 3] = ["x", "y", "z"];

/// Symbol pool for one generated architecture.
#[derive(Debug, Clone)]
pub struct Signature {
    pub agents: Vec<AgentId>,
    pub vars: Vec<Var>,
    /// Declared functions with their arities.
    pub funs: Vec<(String, usize)>,
}

impl Signature {
    pub fn random(rng: &mut impl Rng) -> Self {
        let agents = AGENTS[..rng.gen_range(2..=4)].iter().map(|a| AgentId::new(*a).unwrap()).collect();
        let size = rng.gen_range(1..=3);
        let mut vars: Vec<Var> = SCALARS.iter().map(|v| Var::scalar(*v)).collect();
        vars.extend((1..=size).map(|i| Var::indexed("C", i)));
        let funs = [("f", 1), ("g", 2)][..rng.gen_range(0..=2)].iter().map(|(f, k)| (f.to_string(), *k)).collect();
        Signature { agents, vars, funs }
    }

    fn family_size(&self) -> u32 {
        self.vars.iter().filter(|v| v.index.is_some()).count() as u32
    }

    pub fn declare(&self, name: &str) -> Architecture {
        let mut arch = Architecture::new(name);
        arch.agents = self.agents.clone();
        arch.constants.insert("n".into(), Some(arch.index_bound.into()));
        for v in SCALARS {
            arch.variables.insert(v.to_string(), VarShape::Scalar);
        }
        arch.variables.insert("C".into(), VarShape::Family(self.family_size()));
        for (f, k) in &self.funs {
            arch.functions.insert(f.clone(), Arity::Fixed(*k));
        }
        arch
    }

    pub fn agent(&self, rng: &mut impl Rng) -> AgentId {
        self.agents.choose(rng).unwrap().clone()
    }

    fn two_agents(&self, rng: &mut impl Rng) -> (AgentId, AgentId) {
        let mut pick = self.agents.clone();
        pick.shuffle(rng);
        (pick[0].clone(), pick[1].clone())
    }

    pub fn var(&self, rng: &mut impl Rng) -> Var {
        self.vars.choose(rng).unwrap().clone()
    }

    pub fn term(&self, rng: &mut impl Rng, depth: u32) -> Term {
        if depth == 0 || rng.gen_bool(0.45) {
            return if rng.gen_bool(0.9) { Term::Var(self.var(rng)) } else { Term::int(rng.gen_range(0..3)) };
        }
        let choice = rng.gen_range(0..6);
        let mut sub = || self.term(rng, depth - 1);
        match choice {
            0 | 1 if !self.funs.is_empty() => {
                let (f, k) = self.funs[choice % self.funs.len()].clone();
                Term::apply(f, (0..k).map(|_| sub()).collect())
            }
            2 => Term::apply("hash", vec![sub()]),
            3 => Term::apply("hhash", vec![sub()]),
            4 => Term::apply("sum", vec![sub(), sub()]),
            _ => Term::apply("otimes", vec![sub(), sub()]),
        }
    }

    pub fn equation(&self, rng: &mut impl Rng) -> Equation {
        match rng.gen_range(0..8) {
            0 => {
                let (p, q) = (self.var(rng), self.var(rng));
                Equation::eq(Term::apply("hash", vec![Term::Var(p)]), Term::apply("hash", vec![Term::Var(q)]))
            }
            1 => {
                let x = Term::Var(self.var(rng));
                let parts: Vec<Term> = (0..rng.gen_range(1..=2))
                    .map(|_| Term::apply("hhash", vec![Term::Var(self.var(rng))]))
                    .collect();
                Equation::eq(Term::apply("hhash", vec![x]), Term::apply("otimes", parts))
            }
            _ => Equation::eq(self.term(rng, 2), self.term(rng, 2)),
        }
    }

    fn attestation(&self, rng: &mut impl Rng) -> Attestation {
        Attestation { attester: self.agent(rng), body: self.equation(rng) }
    }

    fn proof(&self, rng: &mut impl Rng) -> ProofObj {
        let (prover, verifier) = self.two_agents(rng);
        let mut body = BTreeSet::from([PropAtom::Eq(self.equation(rng))]);
        if rng.gen_bool(0.3) {
            body.insert(PropAtom::Att(self.attestation(rng)));
        }
        ProofObj { prover, verifier, body: PropP(body) }
    }

    pub fn fact(&self, rng: &mut impl Rng) -> Fact {
        match rng.gen_range(0..11) {
            0 => Fact::Has { agent: self.agent(rng), var: self.var(rng) },
            1 => {
                let (receiver, sender) = self.two_agents(rng);
                Fact::ReceiveVar { receiver, sender, var: self.var(rng) }
            }
            2 => {
                let (receiver, sender) = self.two_agents(rng);
                let atom =
                    if rng.gen_bool(0.5) { PrimAtom::Att(self.attestation(rng)) } else { PrimAtom::Proof(self.proof(rng)) };
                Fact::ReceivePrim { receiver, sender, payload: Prim(BTreeSet::from([atom])) }
            }
            3 => {
                let (truster, trustee) = self.two_agents(rng);
                Fact::Trust { truster, trustee }
            }
            4 | 5 => Fact::Compute { agent: self.agent(rng), defined: self.var(rng), body: self.term(rng, 2) },
            6 => Fact::Check { agent: self.agent(rng), eq: self.equation(rng) },
            7 => Fact::Att(self.attestation(rng)),
            8 => Fact::Proof(self.proof(rng)),
            9 => {
                let sources = (0..rng.gen_range(1..=2)).map(|_| Term::Var(self.var(rng))).collect();
                Fact::Dep { agent: self.agent(rng), target: self.var(rng), sources }
            }
            _ => Fact::Eq(self.equation(rng)),
        }
    }

    fn modal(&self, rng: &mut impl Rng) -> Modal {
        let op = if rng.gen_bool(0.5) { ModalOp::K } else { ModalOp::X };
        let mut body = BTreeSet::new();
        for _ in 0..rng.gen_range(1..=2) {
            body.insert(if rng.gen_bool(0.7) { Fact::Eq(self.equation(rng)) } else { self.fact(rng) });
        }
        Modal { op, agent: self.agent(rng), body }
    }
}

pub fn architecture(rng: &mut impl Rng, name: &str) -> Architecture {
    let sig = Signature::random(rng);
    architecture_over(rng, &sig, name)
}

pub fn architecture_over(rng: &mut impl Rng, sig: &Signature, name: &str) -> Architecture {
    let mut arch = sig.declare(name);
    for _ in 0..rng.gen_range(1..=12) {
        arch.facts.insert(sig.fact(rng));
    }
    for _ in 0..rng.gen_range(0..=2) {
        arch.assumptions.insert(sig.modal(rng));
    }
    arch
}

/// An architecture and the same architecture with one more fact.
pub fn extended_pair(rng: &mut impl Rng, name: &str) -> (Architecture, Architecture) {
    let sig = Signature::random(rng);
    let small = architecture_over(rng, &sig, name);
    let mut big = small.clone();
    while big.facts.len() == small.facts.len() {
        big.facts.insert(sig.fact(rng));
    }
    (small, big)
}

/// Requirements over the agents and variables of `arch`.
pub fn requirements(rng: &mut impl Rng, arch: &Architecture) -> RequirementSet {
    let mut vars: Vec<Var> = SCALARS.iter().map(|v| Var::scalar(*v)).collect();
    if let Some(VarShape::Family(k)) = arch.variables.get("C") {
        vars.extend((1..=*k).map(|i| Var::indexed("C", i)));
    }
    let sig = Signature {
        agents: arch.agents.clone(),
        vars,
        funs: arch
            .functions
            .iter()
            .filter_map(|(f, a)| match a {
                Arity::Fixed(k) => Some((f.clone(), *k)),
                Arity::Variadic => None,
            })
            .collect(),
    };
    let mut reqs = RequirementSet::new();
    for _ in 0..rng.gen_range(1..=5) {
        let goal = match rng.gen_range(0..4) {
            0 => Goal::Functional(Equation::eq(Term::Var(sig.var(rng)), sig.term(rng, 2))),
            1 => Goal::Privacy { agent: sig.agent(rng), var: sig.var(rng) },
            2 => Goal::Knowledge { agent: sig.agent(rng), var: sig.var(rng) },
            _ => Goal::Correctness { agent: sig.agent(rng), eq: sig.equation(rng) },
        };
        reqs.push(goal);
    }
    reqs
}

/// A congruence problem: premises and a goal over a shared term pool.
pub fn congruence_instance(rng: &mut impl Rng) -> (Vec<Equation>, Equation) {
    let sig = Signature {
        agents: vec![AgentId::new("a").unwrap()],
        vars: ["p", "q", "r", "s"].iter().map(|v| Var::scalar(*v)).collect(),
        funs: vec![("f".into(), 1), ("g".into(), 2)],
    };
    let eqs: Vec<Equation> = (0..rng.gen_range(1..=6)).map(|_| sig.equation(rng)).collect();
    let mut pool = BTreeSet::new();
    for e in &eqs {
        for side in [&e.lhs, &e.rhs] {
            let mut stack = vec![side.clone()];
            while let Some(t) = stack.pop() {
                if let Term::Apply { args, .. } = &t {
                    stack.extend(args.iter().cloned());
                }
                pool.insert(t);
            }
        }
    }
    let pool: Vec<Term> = pool.into_iter().collect();
    let goal = Equation::eq(pool.choose(rng).unwrap().clone(), pool.choose(rng).unwrap().clone());
    (eqs, goal)
}

fn v(name: &str) -> Term {
    Term::var(name)
}

fn app(fun: &str, args: Vec<Term>) -> Term {
    Term::apply(fun, args)
}

/// Hand-written hash cases: premises, goal and whether the goal follows.
pub fn directed_hash_cases() -> Vec<(Vec<Equation>, Equation, bool)> {
    let hash = |t: Term| app("hash", vec![t]);
    let hh = |t: Term| app("hhash", vec![t]);
    let eq = Equation::eq;
    vec![
        (vec![eq(hash(v("p")), hash(v("q")))], eq(v("p"), v("q")), true),
        (vec![eq(hash(v("p")), v("r")), eq(v("r"), hash(v("q")))], eq(v("q"), v("p")), true),
        (vec![eq(hash(v("p")), v("q"))], eq(v("p"), v("q")), false),
        (vec![eq(app("f", vec![v("p")]), app("f", vec![v("q")]))], eq(v("p"), v("q")), false),
        (
            vec![eq(hh(v("x")), app("otimes", vec![hh(v("a")), hh(v("b"))]))],
            eq(v("x"), app("sum", vec![v("a"), v("b")])),
            true,
        ),
        (
            vec![
                eq(hh(v("x")), app("otimes", vec![v("h1"), v("h2")])),
                eq(v("h1"), hh(v("a"))),
                eq(hh(v("b")), v("h2")),
            ],
            eq(v("x"), app("sum", vec![v("a"), v("b")])),
            true,
        ),
        (
            vec![eq(hh(v("x")), app("otimes", vec![v("h1"), v("h2")])), eq(v("h1"), hh(v("a")))],
            eq(v("x"), app("sum", vec![v("a"), v("b")])),
            false,
        ),
        (
            vec![eq(hh(v("x")), app("otimes", vec![hh(v("a")), hh(v("b"))]))],
            eq(v("x"), app("sum", vec![v("b"), v("a")])),
            false,
        ),
        (
            vec![
                eq(app("otimes", vec![hh(v("a")), hh(v("b"))]), hh(v("x"))),
                eq(v("x"), v("y")),
                eq(app("sum", vec![v("a"), v("b")]), v("z")),
            ],
            eq(v("y"), v("z")),
            true,
        ),
    ]
}
