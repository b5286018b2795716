//! Naive reference implementations of closure and congruence.
//!
//! Everything here is written for clarity over speed and shares no code
//! with the engine beyond the data model.

use std::collections::{BTreeMap, BTreeSet};

use privarch_core::model::{AgentId, Architecture, Equation, Fact, Knowledge, Modal, ModalOp, PrimAtom, Term};

fn subterms(t: &Term, out: &mut BTreeSet<Term>) {
    if out.insert(t.clone()) {
        if let Term::Apply { args, .. } = t {
            for a in args {
                subterms(a, out);
            }
        }
    }
}

fn apply1<'a>(t: &'a Term, name: &str) -> Option<&'a Term> {
    match t {
        Term::Apply { fun, args } if fun == name && args.len() == 1 => Some(&args[0]),
        _ => None,
    }
}

/// Congruence classes by repeated relabelling over a fixed term set.
pub struct NaiveCongruence {
    terms: Vec<Term>,
    class: Vec<usize>,
}

impl NaiveCongruence {
    pub fn new(universe: &BTreeSet<Term>, eqs: &[Equation]) -> Self {
        let mut all = universe.clone();
        for e in eqs {
            subterms(&e.lhs, &mut all);
            subterms(&e.rhs, &mut all);
        }
        let terms: Vec<Term> = all.into_iter().collect();
        let mut cc = NaiveCongruence { class: (0..terms.len()).collect(), terms };
        for e in eqs {
            let (a, b) = (cc.index(&e.lhs).unwrap(), cc.index(&e.rhs).unwrap());
            cc.merge(a, b);
        }
        loop {
            let mut merged = false;
            for i in 0..cc.terms.len() {
                for j in i + 1..cc.terms.len() {
                    if cc.class[i] != cc.class[j] && cc.congruent(i, j) {
                        cc.merge(i, j);
                        merged = true;
                    }
                }
            }
            if !merged {
                return cc;
            }
        }
    }

    fn index(&self, t: &Term) -> Option<usize> {
        self.terms.binary_search(t).ok()
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (from, to) = (self.class[a], self.class[b]);
        for c in &mut self.class {
            if *c == from {
                *c = to;
            }
        }
    }

    fn congruent(&self, i: usize, j: usize) -> bool {
        match (&self.terms[i], &self.terms[j]) {
            (Term::Apply { fun: f, args: a }, Term::Apply { fun: g, args: b }) => {
                f == g
                    && a.len() == b.len()
                    && a.iter().zip(b).all(|(x, y)| self.class[self.index(x).unwrap()] == self.class[self.index(y).unwrap()])
            }
            _ => false,
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn same(&self, s: &Term, t: &Term) -> bool {
        match (self.index(s), self.index(t)) {
            (Some(a), Some(b)) => self.class[a] == self.class[b],
            _ => s == t,
        }
    }
}

/// Items of a closure with the first round in which each appears.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleClosure {
    pub items: BTreeMap<Knowledge, u32>,
    /// Facts some deductive rule concludes.
    pub deduced: BTreeSet<Fact>,
}

struct Conclusion {
    item: Knowledge,
    deductive: bool,
    /// Whether an equality conclusion joins the congruence premises.
    base: bool,
}

struct State<'a> {
    me: &'a AgentId,
    full: bool,
    items: BTreeMap<Knowledge, u32>,
    deduced: BTreeSet<Fact>,
    base: BTreeSet<Equation>,
    universe: BTreeSet<Term>,
    assumptions: BTreeSet<Modal>,
}

fn fact(f: Fact) -> Knowledge {
    Knowledge::Fact(f)
}

impl State<'_> {
    fn holds(&self, f: Fact) -> bool {
        self.items.contains_key(&fact(f))
    }

    fn has(&self, t: &Term) -> bool {
        match t {
            Term::Var(v) => self.holds(Fact::Has { agent: self.me.clone(), var: v.clone() }),
            _ => false,
        }
    }

    fn equalities(&self) -> Vec<&Equation> {
        self.items
            .keys()
            .filter_map(|k| match k {
                Knowledge::Fact(Fact::Eq(e)) if e.is_equality() => Some(e),
                _ => None,
            })
            .collect()
    }

    fn step(&self) -> Vec<Conclusion> {
        let me = self.me;
        let mut out = Vec::new();
        let mut push = |item: Knowledge, deductive: bool, base: bool| out.push(Conclusion { item, deductive, base });

        for e in self.equalities() {
            if let (Some(a), Some(b)) = (apply1(&e.lhs, "hash"), apply1(&e.rhs, "hash")) {
                push(fact(Fact::Eq(Equation::eq(a.clone(), b.clone()))), true, true);
            }
            for (h, prod) in [(&e.lhs, &e.rhs), (&e.rhs, &e.lhs)] {
                let (Some(t), Term::Apply { fun, args: us }) = (apply1(h, "hhash"), prod) else { continue };
                if fun != "otimes" {
                    continue;
                }
                let choices: Vec<Vec<Term>> = us.iter().map(|u| self.preimages(u)).collect();
                for summands in product(&choices) {
                    push(fact(Fact::Eq(Equation::eq(t.clone(), Term::apply("sum", summands)))), true, true);
                }
            }
        }

        if self.full {
            for k in self.items.keys() {
                match k {
                    Knowledge::Fact(f) => match f {
                        Fact::ReceivePrim { receiver, payload, .. } if receiver == me => {
                            for atom in &payload.0 {
                                let f = match atom {
                                    PrimAtom::Att(a) => Fact::Att(a.clone()),
                                    PrimAtom::Proof(p) => Fact::Proof(p.clone()),
                                };
                                push(fact(f), true, true);
                            }
                        }
                        Fact::Att(a) => {
                            if self.holds(Fact::Trust { truster: me.clone(), trustee: a.attester.clone() }) {
                                push(fact(Fact::Eq(a.body.clone())), true, true);
                            }
                        }
                        Fact::Proof(p) if &p.verifier == me => {
                            for atom in &p.body.0 {
                                push(fact(atom.clone().into_fact()), true, true);
                            }
                        }
                        Fact::Check { agent, eq } if agent == me => push(fact(Fact::Eq(eq.clone())), true, true),
                        Fact::Compute { agent, defined, body } if agent == me => {
                            push(fact(Fact::Eq(Equation::eq(Term::Var(defined.clone()), body.clone()))), true, true);
                            if body.free_vars().iter().all(|v| self.has(&Term::Var(v.clone()))) {
                                push(fact(Fact::Has { agent: me.clone(), var: defined.clone() }), true, true);
                            }
                        }
                        Fact::ReceiveVar { receiver, var, .. } if receiver == me => {
                            push(fact(Fact::Has { agent: me.clone(), var: var.clone() }), true, true);
                        }
                        Fact::Dep { agent, target, sources } if agent == me && sources.iter().all(|s| self.has(s)) => {
                            push(fact(Fact::Has { agent: me.clone(), var: target.clone() }), true, true);
                        }
                        _ => {}
                    },
                    Knowledge::Modal(m) if &m.agent == me => {
                        let assumed = self.assumptions.contains(m);
                        for f in &m.body {
                            push(fact(f.clone()), false, assumed);
                            if m.body.len() > 1 {
                                push(Knowledge::Modal(Modal::single(m.op, me.clone(), f.clone())), false, false);
                            }
                        }
                    }
                    Knowledge::Modal(_) => {}
                }
            }
            for f in &self.deduced {
                push(Knowledge::Modal(Modal::single(ModalOp::X, me.clone(), f.clone())), false, false);
            }
        }

        let base: Vec<Equation> = self.base.iter().cloned().collect();
        let cc = NaiveCongruence::new(&self.universe, &base);
        for s in cc.terms() {
            for t in cc.terms() {
                if s == t || !cc.same(s, t) {
                    continue;
                }
                let e = Equation::eq(s.clone(), t.clone());
                let entailed = if self.base.contains(&e) {
                    let others: Vec<Equation> = base.iter().filter(|b| **b != e).cloned().collect();
                    NaiveCongruence::new(&self.universe, &others).same(s, t)
                } else {
                    true
                };
                if entailed {
                    out.push(Conclusion { item: fact(Fact::Eq(e)), deductive: true, base: false });
                }
            }
        }
        out
    }

    /// Terms `x` with `u` literally `hhash(x)` or known equal to it.
    fn preimages(&self, u: &Term) -> Vec<Term> {
        let mut out = BTreeSet::new();
        if let Some(x) = apply1(u, "hhash") {
            out.insert(x.clone());
        }
        for e in self.equalities() {
            if &e.lhs == u {
                out.extend(apply1(&e.rhs, "hhash").cloned());
            }
            if &e.rhs == u {
                out.extend(apply1(&e.lhs, "hhash").cloned());
            }
        }
        out.into_iter().collect()
    }
}

fn product(choices: &[Vec<Term>]) -> Vec<Vec<Term>> {
    let mut acc = vec![Vec::new()];
    for c in choices {
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    acc
}

fn saturate(mut st: State<'_>) -> OracleClosure {
    let mut round = 0;
    loop {
        round += 1;
        let mut changed = false;
        for c in st.step() {
            if let Knowledge::Fact(Fact::Eq(e)) = &c.item {
                if c.base && e.is_equality() {
                    changed |= st.base.insert(e.clone());
                }
                subterms(&e.lhs, &mut st.universe);
                subterms(&e.rhs, &mut st.universe);
            }
            if c.deductive {
                if let Knowledge::Fact(f) = &c.item {
                    changed |= st.deduced.insert(f.clone());
                }
            }
            if let std::collections::btree_map::Entry::Vacant(slot) = st.items.entry(c.item) {
                slot.insert(round);
                changed = true;
            }
        }
        if !changed {
            return OracleClosure { items: st.items, deduced: st.deduced };
        }
    }
}

/// Closure of `me` over the architecture, with `extra` terms in the universe.
pub fn closure(arch: &Architecture, me: &AgentId, extra: &[Term]) -> OracleClosure {
    let mut items = BTreeMap::new();
    let mut universe = BTreeSet::new();
    for f in &arch.facts {
        items.insert(fact(f.clone()), 0);
    }
    for m in &arch.assumptions {
        items.insert(Knowledge::Modal(m.clone()), 0);
    }
    for t in arch.terms().iter().chain(extra) {
        subterms(t, &mut universe);
    }
    let base = arch.facts.iter().filter_map(|f| match f {
        Fact::Eq(e) if e.is_equality() => Some(e.clone()),
        _ => None,
    });
    let assumptions = arch.assumptions.clone();
    saturate(State { me, full: true, base: base.collect(), items, deduced: BTreeSet::new(), universe, assumptions })
}

/// Whether `eqs` entail `goal` under congruence with the hash rewrites.
pub fn entails(eqs: &[Equation], goal: &Equation) -> bool {
    if goal.lhs == goal.rhs {
        return true;
    }
    let me = AgentId::new("_").unwrap();
    let mut universe = BTreeSet::new();
    for e in eqs.iter().chain([goal]) {
        subterms(&e.lhs, &mut universe);
        subterms(&e.rhs, &mut universe);
    }
    let items = eqs.iter().map(|e| (fact(Fact::Eq(e.clone())), 0)).collect();
    let st = State { me: &me, full: false, items, deduced: BTreeSet::new(), base: eqs.iter().cloned().collect(), universe, assumptions: BTreeSet::new() };
    saturate(st).items.contains_key(&fact(Fact::Eq(goal.clone())))
}
