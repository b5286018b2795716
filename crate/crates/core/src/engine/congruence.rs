//! Ground congruence closure with a proof forest for explanations.

use std::collections::{BTreeSet, HashMap};

use crate::model::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reason {
    /// The input equation with this label.
    Input(usize),
    /// Two applications whose arguments are pairwise congruent.
    Cong(usize, usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Congruence {
    terms: Vec<Term>,
    ids: HashMap<Term, usize>,
    apps: Vec<Option<(String, Vec<usize>)>>,
    uf: Vec<usize>,
    size: Vec<usize>,
    proof: Vec<Option<(usize, Reason)>>,
}

impl Congruence {
    pub fn new<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Self {
        let mut cc = Congruence {
            terms: Vec::new(),
            ids: HashMap::new(),
            apps: Vec::new(),
            uf: Vec::new(),
            size: Vec::new(),
            proof: Vec::new(),
        };
        for t in terms {
            cc.intern(t);
        }
        cc
    }

    pub fn intern(&mut self, t: &Term) -> usize {
        if let Some(&id) = self.ids.get(t) {
            return id;
        }
        let app = match t {
            Term::Apply { fun, args } => Some((fun.clone(), args.iter().map(|a| self.intern(a)).collect())),
            _ => None,
        };
        let id = self.terms.len();
        self.terms.push(t.clone());
        self.ids.insert(t.clone(), id);
        self.apps.push(app);
        self.uf.push(id);
        self.size.push(1);
        self.proof.push(None);
        id
    }

    pub fn id(&self, t: &Term) -> Option<usize> {
        self.ids.get(t).copied()
    }

    pub fn term(&self, id: usize) -> &Term {
        &self.terms[id]
    }

    pub fn find(&self, mut x: usize) -> usize {
        while self.uf[x] != x {
            x = self.uf[x];
        }
        x
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Records `a = b`, justified by input `label`. Call [`Self::close`]
    /// afterwards to propagate congruences.
    pub fn assert_eq(&mut self, a: &Term, b: &Term, label: usize) {
        let (a, b) = (self.intern(a), self.intern(b));
        self.merge(a, b, Reason::Input(label));
    }

    fn merge(&mut self, a: usize, b: usize, reason: Reason) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        self.reroot(a);
        self.proof[a] = Some((b, reason));
        let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.uf[small] = big;
        self.size[big] += self.size[small];
    }

    /// Reverses proof edges so that `x` becomes the root of its proof tree.
    fn reroot(&mut self, x: usize) {
        let mut prev: Option<(usize, Reason)> = None;
        let mut cur = x;
        loop {
            let next = self.proof[cur].take();
            self.proof[cur] = prev;
            match next {
                Some((parent, reason)) => {
                    prev = Some((cur, reason));
                    cur = parent;
                }
                None => break,
            }
        }
    }

    /// Merges congruent applications until nothing changes.
    pub fn close(&mut self) {
        loop {
            let mut changed = false;
            let mut sigs: HashMap<(String, Vec<usize>), usize> = HashMap::new();
            for n in 0..self.terms.len() {
                let Some((fun, kids)) = &self.apps[n] else { continue };
                let sig = (fun.clone(), kids.iter().map(|&k| self.find(k)).collect::<Vec<_>>());
                match sigs.get(&sig) {
                    Some(&m) if !self.same(m, n) => {
                        self.merge(n, m, Reason::Cong(n, m));
                        changed = true;
                    }
                    Some(_) => {}
                    None => {
                        sigs.insert(sig, n);
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    /// Members of every class with at least two elements.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
        for x in 0..self.terms.len() {
            by_root.entry(self.find(x)).or_default().push(x);
        }
        let mut out: Vec<Vec<usize>> = by_root.into_values().filter(|c| c.len() > 1).collect();
        out.sort();
        out
    }

    fn ancestors(&self, mut x: usize) -> Vec<usize> {
        let mut out = vec![x];
        while let Some((p, _)) = self.proof[x] {
            out.push(p);
            x = p;
        }
        out
    }

    /// Labels of the input equations that justify `a = b`.
    pub fn explain(&self, a: usize, b: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        self.explain_into(a, b, &mut out, &mut seen);
        out
    }

    fn explain_into(&self, a: usize, b: usize, out: &mut BTreeSet<usize>, seen: &mut BTreeSet<(usize, usize)>) {
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            return;
        }
        debug_assert!(self.same(a, b));
        let up_a = self.ancestors(a);
        let up_b = self.ancestors(b);
        let lca = *up_a.iter().find(|x| up_b.contains(x)).expect("same proof tree");
        for start in [a, b] {
            let mut x = start;
            while x != lca {
                let (p, reason) = self.proof[x].expect("below lca");
                match reason {
                    Reason::Input(l) => {
                        out.insert(l);
                    }
                    Reason::Cong(n, m) => {
                        let (kn, km) = (&self.apps[n].as_ref().unwrap().1, &self.apps[m].as_ref().unwrap().1);
                        for (&u, &v) in kn.iter().zip(km) {
                            self.explain_into(u, v, out, seen);
                        }
                    }
                }
                x = p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    fn p(t: Term) -> Term {
        Term::apply("P", vec![t])
    }

    #[test]
    fn transitivity_with_explanation() {
        let mut cc = Congruence::new(&[v("x"), v("y"), v("z"), v("w")]);
        cc.assert_eq(&v("x"), &v("y"), 0);
        cc.assert_eq(&v("y"), &v("z"), 1);
        cc.assert_eq(&v("w"), &v("w"), 2);
        cc.close();
        let (x, z) = (cc.id(&v("x")).unwrap(), cc.id(&v("z")).unwrap());
        assert!(cc.same(x, z));
        assert_eq!(cc.explain(x, z), BTreeSet::from([0, 1]));
    }

    #[test]
    fn congruence_explains_through_arguments() {
        let terms = [p(v("a")), p(v("c")), v("b")];
        let mut cc = Congruence::new(&terms);
        cc.assert_eq(&v("a"), &v("b"), 7);
        cc.assert_eq(&v("c"), &v("b"), 8);
        cc.close();
        let (pa, pc) = (cc.id(&p(v("a"))).unwrap(), cc.id(&p(v("c"))).unwrap());
        assert!(cc.same(pa, pc));
        assert_eq!(cc.explain(pa, pc), BTreeSet::from([7, 8]));
    }

    #[test]
    fn nested_congruence() {
        let f = |t: Term| Term::apply("f", vec![t]);
        let terms = [f(f(f(v("a")))), f(v("a"))];
        let mut cc = Congruence::new(&terms);
        cc.assert_eq(&f(f(f(v("a")))), &v("a"), 0);
        cc.assert_eq(&f(f(f(f(f(v("a")))))), &v("a"), 1);
        cc.close();
        let (fa, a) = (cc.id(&f(v("a"))).unwrap(), cc.id(&v("a")).unwrap());
        assert!(cc.same(fa, a));
        assert_eq!(cc.explain(fa, a), BTreeSet::from([0, 1]));
    }
}
