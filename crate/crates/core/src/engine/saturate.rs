use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::congruence::Congruence;
use super::{Closure, Derivation, EngineError, Premise, Rule, Stats, Universe};
use crate::model::{AgentId, Equation, Fact, Knowledge, Modal, ModalOp, Term, Var, HASH, HHASH, OTIMES, SUM};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RuleSet {
    Full,
    /// CONG, HASH-INJ and HHASH-HOM only.
    Equational,
}

type Candidate = (Rule, Vec<Premise>);

fn offer<K: Ord>(map: &mut BTreeMap<K, Candidate>, key: K, cand: Candidate) {
    match map.get(&key) {
        Some(best) if *best <= cand => {}
        _ => {
            map.insert(key, cand);
        }
    }
}

struct Round<'a> {
    agent: &'a AgentId,
    items: &'a BTreeMap<Knowledge, Derivation>,
    deduced: &'a BTreeMap<Fact, Derivation>,
    /// Equalities given, assumed, or concluded by a deductive rule other
    /// than CONG.
    base: &'a BTreeSet<Knowledge>,
    new_items: BTreeMap<Knowledge, Candidate>,
    new_deduced: BTreeMap<Fact, Candidate>,
    new_base: BTreeSet<Knowledge>,
    applications: u64,
}

fn is_equality(k: &Knowledge) -> bool {
    matches!(k, Knowledge::Fact(Fact::Eq(e)) if e.is_equality())
}

fn congruence(universe: &Universe, inputs: &[&Knowledge], skip: Option<usize>) -> Congruence {
    let mut cc = Congruence::new(universe.iter());
    for (label, k) in inputs.iter().enumerate() {
        if Some(label) == skip {
            continue;
        }
        if let Knowledge::Fact(Fact::Eq(e)) = k {
            cc.assert_eq(&e.lhs, &e.rhs, label);
        }
    }
    cc.close();
    cc
}

impl Round<'_> {
    fn emit(&mut self, k: Knowledge, rule: Rule, premises: Vec<Premise>) {
        self.applications += 1;
        if rule.is_deductive() && rule != Rule::Cong {
            self.add_to_base(&k);
        }
        if rule.is_deductive() {
            if let Knowledge::Fact(f) = &k {
                if !self.deduced.contains_key(f) {
                    offer(&mut self.new_deduced, f.clone(), (rule, premises.clone()));
                }
            }
        }
        if !self.items.contains_key(&k) {
            offer(&mut self.new_items, k, (rule, premises));
        }
    }

    fn add_to_base(&mut self, k: &Knowledge) {
        if is_equality(k) && !self.base.contains(k) {
            self.new_base.insert(k.clone());
        }
    }

    fn known(&self, f: Fact) -> Option<Premise> {
        let k = Knowledge::Fact(f);
        self.items.contains_key(&k).then_some(Premise::Item(k))
    }

    fn has(&self, var: &Var) -> Option<Premise> {
        self.known(Fact::Has { agent: self.agent.clone(), var: var.clone() })
    }

    fn fact_rules(&mut self, k: &Knowledge, f: &Fact) {
        let me = self.agent;
        let prem = || vec![Premise::Item(k.clone())];
        match f {
            Fact::ReceivePrim { receiver, payload, .. } if receiver == me => {
                for atom in &payload.0 {
                    self.emit(Knowledge::Fact(atom.clone().into_fact()), Rule::RecvPrim, prem());
                }
            }
            Fact::Att(att) => {
                if let Some(trust) = self.known(Fact::Trust { truster: me.clone(), trustee: att.attester.clone() }) {
                    self.emit(
                        Knowledge::Fact(Fact::Eq(att.body.clone())),
                        Rule::AttestTrust,
                        vec![Premise::Item(k.clone()), trust],
                    );
                }
            }
            Fact::Proof(p) if &p.verifier == me => {
                for atom in &p.body.0 {
                    self.emit(Knowledge::Fact(atom.clone().into_fact()), Rule::ProofVerify, prem());
                }
            }
            Fact::Check { agent, eq } if agent == me => {
                self.emit(Knowledge::Fact(Fact::Eq(eq.clone())), Rule::Check, prem());
            }
            Fact::Compute { agent, defined, body } if agent == me => {
                let eq = Equation::eq(Term::Var(defined.clone()), body.clone());
                self.emit(Knowledge::Fact(Fact::Eq(eq)), Rule::ComputeEq, prem());
                let access: Option<Vec<Premise>> = body.free_vars().iter().map(|y| self.has(y)).collect();
                if let Some(access) = access {
                    let mut premises = prem();
                    premises.extend(access);
                    self.emit(Knowledge::Fact(Fact::Has { agent: me.clone(), var: defined.clone() }), Rule::ComputeHas, premises);
                }
            }
            Fact::ReceiveVar { receiver, var, .. } if receiver == me => {
                self.emit(Knowledge::Fact(Fact::Has { agent: me.clone(), var: var.clone() }), Rule::RecvHas, prem());
            }
            Fact::Dep { agent, target, sources } if agent == me => {
                let access: Option<Vec<Premise>> =
                    sources.iter().map(|s| s.as_var().and_then(|v| self.has(v))).collect();
                if let Some(access) = access {
                    let mut premises = prem();
                    premises.extend(access);
                    self.emit(Knowledge::Fact(Fact::Has { agent: me.clone(), var: target.clone() }), Rule::DepHas, premises);
                }
            }
            _ => {}
        }
    }

    fn hash_inj(&mut self, k: &Knowledge, eq: &Equation) {
        if let (Some((HASH, [a])), Some((HASH, [b]))) = (eq.lhs.as_apply(), eq.rhs.as_apply()) {
            self.emit(
                Knowledge::Fact(Fact::Eq(Equation::eq(a.clone(), b.clone()))),
                Rule::HashInj,
                vec![Premise::Item(k.clone())],
            );
        }
    }

    /// `hhash(t) = u1 ⊗ … ⊗ uk` where each `ul` is `hhash(tl)` or known equal
    /// to it yields `t = t1 + … + tk`.
    fn hhash_hom(&mut self, k: &Knowledge, eq: &Equation, hashes: &HashMap<Term, Vec<(Term, Knowledge)>>) {
        let (t, us) = match (eq.lhs.as_apply(), eq.rhs.as_apply()) {
            (Some((HHASH, [t])), Some((OTIMES, us))) | (Some((OTIMES, us)), Some((HHASH, [t]))) => (t, us),
            _ => return,
        };
        let mut options: Vec<Vec<(Term, Option<Knowledge>)>> = Vec::with_capacity(us.len());
        for u in us {
            let mut opts = Vec::new();
            if let Some((HHASH, [x])) = u.as_apply() {
                opts.push((x.clone(), None));
            }
            for (x, via) in hashes.get(u).into_iter().flatten() {
                opts.push((x.clone(), Some(via.clone())));
            }
            if opts.is_empty() {
                return;
            }
            options.push(opts);
        }
        let mut pick = vec![0usize; options.len()];
        loop {
            let summands: Vec<Term> = pick.iter().zip(&options).map(|(&j, o)| o[j].0.clone()).collect();
            let mut premises = vec![Premise::Item(k.clone())];
            let mut side: Vec<Premise> =
                pick.iter().zip(&options).filter_map(|(&j, o)| o[j].1.clone().map(Premise::Item)).collect();
            side.sort();
            side.dedup();
            premises.extend(side);
            let concl = Equation::eq(t.clone(), Term::apply(SUM, summands));
            self.emit(Knowledge::Fact(Fact::Eq(concl)), Rule::HhashHom, premises);

            let mut pos = 0;
            loop {
                if pos == pick.len() {
                    return;
                }
                pick[pos] += 1;
                if pick[pos] < options[pos].len() {
                    break;
                }
                pick[pos] = 0;
                pos += 1;
            }
        }
    }

    fn modal_rules(&mut self, k: &Knowledge, m: &Modal) {
        if &m.agent != self.agent {
            return;
        }
        let (unwrap, split) = match m.op {
            ModalOp::K => (Rule::T, Rule::Kc),
            ModalOp::X => (Rule::Xt, Rule::Xc),
        };
        let assumed = self.items[k].rule == Rule::Assumption;
        for f in &m.body {
            let fact = Knowledge::Fact(f.clone());
            if assumed {
                self.add_to_base(&fact);
            }
            self.emit(fact, unwrap, vec![Premise::Item(k.clone())]);
            if m.body.len() > 1 {
                self.emit(
                    Knowledge::Modal(Modal::single(m.op, m.agent.clone(), f.clone())),
                    split,
                    vec![Premise::Item(k.clone())],
                );
            }
        }
    }

    /// Concludes every equation between distinct universe terms that the
    /// base equalities other than itself entail.
    fn cong(&mut self, universe: &Universe) {
        let inputs: Vec<&Knowledge> = self.base.iter().collect();
        let cc = congruence(universe, &inputs, None);
        for class in cc.classes() {
            for &s in &class {
                for &t in &class {
                    if s == t {
                        continue;
                    }
                    let (ls, lt) = (cc.term(s), cc.term(t));
                    let eq = Fact::Eq(Equation::eq(ls.clone(), lt.clone()));
                    let concl = Knowledge::Fact(eq.clone());
                    let labels = if !self.items.contains_key(&concl) {
                        cc.explain(s, t)
                    } else if self.deduced.contains_key(&eq) {
                        continue;
                    } else {
                        match inputs.iter().position(|k| **k == concl) {
                            None => cc.explain(s, t),
                            Some(own) => {
                                let without = congruence(universe, &inputs, Some(own));
                                let (Some(s2), Some(t2)) = (without.id(ls), without.id(lt)) else { continue };
                                if !without.same(s2, t2) {
                                    continue;
                                }
                                without.explain(s2, t2)
                            }
                        }
                    };
                    let premises = labels.into_iter().map(|l| Premise::Item(inputs[l].clone())).collect();
                    self.emit(concl, Rule::Cong, premises);
                }
            }
        }
    }
}

fn hash_index(items: &BTreeMap<Knowledge, Derivation>) -> HashMap<Term, Vec<(Term, Knowledge)>> {
    let mut idx: HashMap<Term, Vec<(Term, Knowledge)>> = HashMap::new();
    for k in items.keys() {
        let Knowledge::Fact(Fact::Eq(e)) = k else { continue };
        if !e.is_equality() {
            continue;
        }
        for (a, b) in [(&e.lhs, &e.rhs), (&e.rhs, &e.lhs)] {
            if let Some((HHASH, [x])) = b.as_apply() {
                idx.entry(a.clone()).or_default().push((x.clone(), k.clone()));
            }
        }
    }
    for v in idx.values_mut() {
        v.sort();
        v.dedup();
    }
    idx
}

pub(crate) fn run(
    agent: AgentId,
    leaves: Vec<(Knowledge, Rule)>,
    mut universe: Universe,
    rules: RuleSet,
    cap: usize,
) -> Result<Closure, EngineError> {
    let mut items: BTreeMap<Knowledge, Derivation> = BTreeMap::new();
    for (k, rule) in leaves {
        items.entry(k).or_insert(Derivation { rule, premises: Vec::new(), depth: 0 });
    }
    let mut deduced: BTreeMap<Fact, Derivation> = BTreeMap::new();
    let mut base: BTreeSet<Knowledge> = items.keys().filter(|k| is_equality(k)).cloned().collect();
    let mut stats = Stats::default();

    loop {
        stats.rounds += 1;
        let depth = stats.rounds;
        let mut round = Round {
            agent: &agent,
            items: &items,
            deduced: &deduced,
            base: &base,
            new_items: BTreeMap::new(),
            new_deduced: BTreeMap::new(),
            new_base: BTreeSet::new(),
            applications: 0,
        };
        let hashes = hash_index(&items);
        for k in items.keys() {
            match k {
                Knowledge::Fact(Fact::Eq(eq)) if eq.is_equality() => {
                    round.hash_inj(k, eq);
                    round.hhash_hom(k, eq, &hashes);
                }
                Knowledge::Fact(f) if rules == RuleSet::Full => round.fact_rules(k, f),
                Knowledge::Modal(m) if rules == RuleSet::Full => round.modal_rules(k, m),
                _ => {}
            }
        }
        round.cong(&universe);
        if rules == RuleSet::Full {
            for f in deduced.keys() {
                round.emit(Knowledge::x(agent.clone(), f.clone()), Rule::Xd, vec![Premise::Deduced(f.clone())]);
            }
        }

        let Round { new_items, new_deduced, new_base, applications, .. } = round;
        stats.applications += applications;
        if new_items.is_empty() && new_deduced.is_empty() && new_base.is_empty() {
            break;
        }
        base.extend(new_base);
        for (f, (rule, premises)) in new_deduced {
            deduced.insert(f, Derivation { rule, premises, depth });
        }
        for (k, (rule, premises)) in new_items {
            if rule == Rule::HhashHom {
                if let Knowledge::Fact(Fact::Eq(e)) = &k {
                    universe.insert(&e.rhs);
                    universe.insert(&e.lhs);
                }
            }
            items.insert(k, Derivation { rule, premises, depth });
        }
        if items.len() > cap {
            let partial = Closure { agent, items, deduced, universe, stats };
            return Err(EngineError::ResourceLimit { cap, partial: Box::new(partial) });
        }
    }
    Ok(Closure { agent, items, deduced, universe, stats })
}
