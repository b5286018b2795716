use super::*;
use crate::adsl::{parse_architecture, parse_knowledge, ParseOptions};
use crate::model::{Modal, ModalOp};

fn arch(body: &str) -> Architecture {
    let text = format!("arch \"t\" {{ agents o, u, m; fun P/1, F/2; var a, b, c, x, y, z, Fee, p1, p2, C[3]; {body} }}");
    parse_architecture(&text, &ParseOptions::default()).unwrap_or_else(|e| panic!("{e}"))
}

fn k(arch: &Architecture, text: &str) -> Knowledge {
    parse_knowledge(text, arch).unwrap_or_else(|e| panic!("{e}"))
}

fn closure(arch: &Architecture, agent: &str) -> Closure {
    close(arch, arch.agent(agent).unwrap()).unwrap()
}

#[test]
fn receive_gives_access() {
    let a = arch("fact receive(o, u, var Fee);");
    let c = closure(&a, "o");
    assert!(c.contains(&k(&a, "has(o, Fee)")));
    let tree = c.explain(&k(&a, "has(o, Fee)")).unwrap();
    assert_eq!(tree.rule, Rule::RecvHas);
    assert_eq!(tree.premises[0].rule, Rule::Declared);
    assert!(!closure(&a, "u").contains(&k(&a, "has(u, Fee)")));
}

#[test]
fn attestation_needs_trust() {
    let without = arch("fact receive(o, m, prim attest(m, x = P(a)));");
    let c = closure(&without, "o");
    assert!(c.contains(&k(&without, "attest(m, x = P(a))")));
    assert!(!c.contains(&k(&without, "x = P(a)")));

    let with = arch("fact receive(o, m, prim attest(m, x = P(a))); fact trust(o, m);");
    let c = closure(&with, "o");
    assert!(c.contains(&k(&with, "x = P(a)")));
    assert!(c.contains(&k(&with, "X(o, x = P(a))")));
    let tree = c.explain(&k(&with, "X(o, x = P(a))")).unwrap();
    assert_eq!(tree.rule, Rule::Xd);
    assert_eq!(tree.premises[0].rule, Rule::AttestTrust);
    assert_eq!(tree.depth(), 3);
}

#[test]
fn dependency_gives_access() {
    let a = arch("fact has(o, C[1]); fact has(o, C[2]); fact dep(o, Fee, {C[1], C[2]});");
    let c = closure(&a, "o");
    assert_eq!(c.explain(&k(&a, "has(o, Fee)")).unwrap().rule, Rule::DepHas);
    let partial = arch("fact has(o, C[1]); fact dep(o, Fee, {C[1], C[2]});");
    assert!(!closure(&partial, "o").contains(&k(&partial, "has(o, Fee)")));
}

#[test]
fn compute_requires_access_to_inputs() {
    let a = arch("fact compute(o, x = F(a, b)); fact has(o, a);");
    let c = closure(&a, "o");
    assert!(c.contains(&k(&a, "x = F(a, b)")));
    assert!(!c.contains(&k(&a, "has(o, x)")));
    let b = arch("fact compute(o, x = F(a, b)); fact has(o, a); fact receive(o, u, var b);");
    let c = closure(&b, "o");
    let tree = c.explain(&k(&b, "has(o, x)")).unwrap();
    assert_eq!(tree.rule, Rule::ComputeHas);
    assert_eq!(tree.depth(), 2);
}

#[test]
fn empty_architecture_has_empty_closure() {
    let a = arch("");
    assert!(closure(&a, "o").is_empty());
}

#[test]
fn proof_and_check() {
    let a = arch("fact receive(o, u, prim proof(u, o, x = P(a) & attest(m, y = b))); fact check(o, z = c); fact trust(o, m);");
    let c = closure(&a, "o");
    assert_eq!(c.explain(&k(&a, "x = P(a)")).unwrap().rule, Rule::ProofVerify);
    assert_eq!(c.explain(&k(&a, "y = b")).unwrap().rule, Rule::AttestTrust);
    assert_eq!(c.explain(&k(&a, "z = c")).unwrap().rule, Rule::Check);
    let cu = closure(&a, "u");
    assert!(!cu.contains(&k(&a, "x = P(a)")));
}

#[test]
fn congruence_inside_closure() {
    let a = arch("fact compute(o, x = y); fact compute(o, y = z); fact check(o, P(x) = c); axiom P(z) = P(z);");
    let c = closure(&a, "o");
    let tree = c.explain(&k(&a, "x = z")).unwrap();
    assert_eq!(tree.rule, Rule::Cong);
    assert_eq!(tree.premises.len(), 2);
    assert!(c.contains(&k(&a, "P(z) = c")));
    assert!(c.contains(&k(&a, "X(o, P(z) = c)")));
    assert!(c.contains(&k(&a, "z = x")));
}

#[test]
fn modal_assumptions() {
    let a = arch("assume K(o, has(o, a) & trust(o, m)); assume X(o, x = y & has(o, b)); assume K(u, has(u, c));");
    let c = closure(&a, "o");
    assert_eq!(c.explain(&k(&a, "has(o, a)")).unwrap().rule, Rule::T);
    assert_eq!(c.explain(&k(&a, "K(o, trust(o, m))")).unwrap().rule, Rule::Kc);
    assert_eq!(c.explain(&k(&a, "x = y")).unwrap().rule, Rule::Xt);
    assert_eq!(c.explain(&k(&a, "X(o, has(o, b))")).unwrap().rule, Rule::Xc);
    assert!(!c.contains(&k(&a, "has(u, c)")));
    // Facts only unwrapped from K/X are not re-wrapped by XD.
    assert!(!c.contains(&k(&a, "X(o, has(o, a))")));
}

#[test]
fn x_items_reflect_and_split() {
    let a = arch(
        "fact receive(o, u, prim attest(u, x = a) & proof(u, o, y = b)); fact trust(o, u); assume X(o, z = c & has(o, a));",
    );
    let c = closure(&a, "o");
    for item in c.items() {
        if let Knowledge::Modal(Modal { op: ModalOp::X, agent, body }) = item {
            if agent.as_str() != "o" {
                continue;
            }
            for f in body {
                assert!(c.contains_fact(f), "XT violated for {f}");
                assert!(c.contains(&Knowledge::x(agent.clone(), f.clone())), "XC violated for {f}");
            }
        }
    }
}

#[test]
fn leaves_are_declared() {
    let a = arch("fact receive(o, u, prim attest(u, x = P(a))); fact trust(o, u); fact compute(o, y = P(x)); fact has(o, a);");
    let c = closure(&a, "o");
    for item in c.items() {
        let tree = c.explain(item).unwrap();
        for leaf in tree.leaves() {
            assert!(leaf.rule.is_leaf(), "{}", tree);
            match &leaf.conclusion {
                Knowledge::Fact(f) => assert!(a.facts.contains(f)),
                Knowledge::Modal(m) => assert!(a.assumptions.contains(m)),
            }
        }
    }
}

#[test]
fn deterministic() {
    let a = arch("fact compute(o, x = y); fact compute(o, y = z); fact check(o, x = z); fact receive(o, u, var y);");
    let (c1, c2) = (closure(&a, "o"), closure(&a, "o"));
    assert_eq!(c1, c2);
    for item in c1.items() {
        assert_eq!(c1.explain(item), c2.explain(item));
    }
}

#[test]
fn resource_cap() {
    let a = arch("fact compute(o, x = y); fact compute(o, y = z); fact receive(o, u, var y);");
    let err = close_with(&a, a.agent("o").unwrap(), &[], &Config { cap: 3 }).unwrap_err();
    match err {
        EngineError::ResourceLimit { cap, partial } => {
            assert_eq!(cap, 3);
            assert!(partial.len() > 3);
        }
        other => panic!("{other}"),
    }
}

#[test]
fn unknown_agent() {
    let a = arch("");
    assert!(matches!(close(&a, &AgentId::new("q").unwrap()), Err(EngineError::UnknownAgent(_))));
}

#[test]
fn close_all_matches_sequential() {
    let a = arch("fact receive(o, u, var x); fact receive(u, m, var y); fact compute(m, z = P(y)); fact has(m, y);");
    assert_eq!(close_all(&a, &[], &Config::default()).unwrap(), close_all_sequential(&a, &[], &Config::default()).unwrap());
}

mod entailment {
    use super::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    fn ap(f: &str, args: Vec<Term>) -> Term {
        Term::apply(f, args)
    }

    fn entails(eqs: &[Equation], goal: &Equation) -> Option<DerivationTree> {
        let u = Universe::from_terms([&goal.lhs, &goal.rhs]);
        congruence_entails(&u, eqs, goal).unwrap()
    }

    #[test]
    fn transitivity() {
        let eqs = [Equation::eq(v("x"), v("y")), Equation::eq(v("y"), v("z"))];
        let tree = entails(&eqs, &Equation::eq(v("x"), v("z"))).unwrap();
        assert_eq!(tree.rule, Rule::Cong);
        assert!(tree.premises.iter().all(|p| p.rule == Rule::Given));
    }

    #[test]
    fn congruence() {
        let eqs = [Equation::eq(v("x"), v("y"))];
        assert!(entails(&eqs, &Equation::eq(ap("P", vec![v("x")]), ap("P", vec![v("y")]))).is_some());
        assert!(entails(&eqs, &Equation::eq(ap("P", vec![v("x")]), v("y"))).is_none());
    }

    #[test]
    fn homomorphic_hash() {
        let h = |t: Term| ap(HHASH_FN, vec![t]);
        let eqs = [Equation::eq(h(v("Fee")), ap("otimes", vec![h(v("p1")), h(v("p2"))]))];
        let goal = Equation::eq(v("Fee"), ap("sum", vec![v("p1"), v("p2")]));
        let u = Universe::new();
        let tree = congruence_entails(&u, &eqs, &goal).unwrap().unwrap();
        assert_eq!(tree.rule, Rule::HhashHom);
    }

    const HHASH_FN: &str = crate::model::HHASH;

    #[test]
    fn hash_injectivity() {
        let h = |t: Term| ap("hash", vec![t]);
        let eqs = [Equation::eq(h(v("a")), h(v("b")))];
        let tree = entails(&eqs, &Equation::eq(v("a"), v("b"))).unwrap();
        assert_eq!(tree.rule, Rule::HashInj);
        let flipped = entails(&eqs, &Equation::eq(v("b"), v("a"))).unwrap();
        assert_eq!(flipped.rule, Rule::Cong);
    }

    #[test]
    fn hash_through_congruence() {
        let h = |t: Term| ap("hash", vec![t]);
        let eqs = [Equation::eq(h(v("a")), v("c")), Equation::eq(v("c"), h(v("b")))];
        let tree = entails(&eqs, &Equation::eq(v("a"), v("b"))).unwrap();
        assert_eq!(tree.rule, Rule::HashInj);
        assert_eq!(tree.premises[0].rule, Rule::Cong);
    }

    #[test]
    fn scope_and_relation_errors() {
        let eqs = [Equation::eq(v("x"), v("y"))];
        let u = Universe::new();
        let out = congruence_entails(&u, &eqs, &Equation::eq(v("x"), v("q")));
        assert!(matches!(out, Err(EngineError::Scope(t)) if t == v("q")));
        let lt = Equation::new(v("x"), crate::model::Relation::Lt, v("y"));
        assert!(matches!(congruence_entails(&u, &eqs, &lt), Err(EngineError::NotEquational(_))));
        assert!(congruence_entails(&u, &eqs, &Equation::eq(v("x"), v("x"))).unwrap().is_some());
    }
}
