use privarch_core::adsl::{parse_architecture, parse_requirements, ParseOptions};
use privarch_core::checker::{assess, well_formed, DefectKind, Outcome, Status};
use privarch_core::engine::{Config, Rule};
use privarch_core::model::{Architecture, Fact, Goal, RequirementSet};

fn load(name: &str) -> (Architecture, RequirementSet) {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/");
    let text = std::fs::read_to_string(format!("{dir}{name}")).unwrap();
    let arch = parse_architecture(&text, &ParseOptions::file(name)).unwrap();
    let reqs = std::fs::read_to_string(format!("{dir}metering.req")).unwrap();
    let reqs = parse_requirements(&reqs, &arch, &ParseOptions::default()).unwrap();
    (arch, reqs)
}

#[test]
fn scenario_one_violates_privacy() {
    let (arch, reqs) = load("scenario1.pvd");
    let a = assess(&arch, &reqs, &Config::default()).unwrap();
    let violated: Vec<_> = a.verdicts.iter().filter(|v| matches!(v.status, Status::Violated { .. })).collect();
    assert_eq!(violated.len(), 3);
    for v in violated {
        assert!(matches!(v.goal, Goal::Privacy { .. }));
        let Status::Violated { witness } = &v.status else { unreachable!() };
        assert_eq!(witness.rule, Rule::RecvHas);
        assert_eq!(witness.premises.len(), 1);
        assert_eq!(witness.premises[0].rule, Rule::Declared);
    }
    assert!(matches!(a.outcome, Outcome::Contradictory { .. }));
}

#[test]
fn option_two_is_complete() {
    let (arch, reqs) = load("option2.pvd");
    let a = assess(&arch, &reqs, &Config::default()).unwrap();
    assert!(a.defects.is_empty(), "{:?}", a.defects);
    assert_eq!(a.outcome, Outcome::Complete, "{:#?}", a.verdicts);
    let corr = a.verdicts.iter().find(|v| matches!(v.goal, Goal::Correctness { .. })).unwrap();
    let Status::Satisfied { trace: Some(t) } = &corr.status else { panic!() };
    assert!(t.uses(Rule::AttestTrust));
    assert!(well_formed(&arch).unwrap().is_empty());

    let mut untrusting = arch.clone();
    untrusting.facts.retain(|f| !matches!(f, Fact::Trust { .. }));
    let a = assess(&untrusting, &reqs, &Config::default()).unwrap();
    assert!(matches!(a.outcome, Outcome::Underspecified { .. }), "{:?}", a.outcome);
}

#[test]
fn option_three_is_complete_without_leaking() {
    let (arch, reqs) = load("option3.pvd");
    let a = assess(&arch, &reqs, &Config::default()).unwrap();
    assert_eq!(a.outcome, Outcome::Complete, "{:#?}", a.verdicts);
    let corr = a.verdicts.iter().find(|v| matches!(v.goal, Goal::Correctness { .. })).unwrap();
    let Status::Satisfied { trace: Some(t) } = &corr.status else { panic!() };
    assert!(t.uses(Rule::ProofVerify));
    assert_eq!(t.rule, Rule::Xd);
}

#[test]
fn links_only_is_underspecified() {
    let (arch, reqs) = load("links-only.pvd");
    let a = assess(&arch, &reqs, &Config::default()).unwrap();
    let Outcome::Underspecified { unmet } = &a.outcome else { panic!("{:?}", a.outcome) };
    assert_eq!(unmet.len(), 2);
}

#[test]
fn missing_access_and_uncheckable_check() {
    let text = r#"arch "d" { agents o, m; fun P/1; var C[1], Fee, k;
        fact has(m, C[1]);
        fact compute(o, Fee = P(C[1]));
        fact check(o, k = P(C[1]));
        fact receive(o, m, var k); }"#;
    let arch = parse_architecture(text, &ParseOptions::default()).unwrap();
    let defects = well_formed(&arch).unwrap();
    let kinds: Vec<_> = defects.iter().map(|d| d.kind).collect();
    assert_eq!(kinds, vec![DefectKind::MissingAccess, DefectKind::UncheckableCheck]);
    assert!(defects[0].explanation.contains("C[1]"));
}

#[test]
fn empty_requirements() {
    let (arch, _) = load("option2.pvd");
    let a = assess(&arch, &RequirementSet::new(), &Config::default()).unwrap();
    assert!(a.verdicts.is_empty());
    assert_eq!(a.outcome, Outcome::Complete);
}
