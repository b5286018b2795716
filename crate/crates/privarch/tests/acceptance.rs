//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use privarch_core::adsl::{parse_architecture, parse_requirements, print_architecture, ParseOptions};
use privarch_core::checker::{assess, Outcome, Status, Verdict};
use privarch_core::engine::{close, close_with, congruence_entails, Config, Rule, Universe};
use privarch_core::explorer::{Library, Session};
use privarch_core::model::{Architecture, Equation, Fact, Goal, Knowledge, RequirementKind, RequirementSet};
use privarch_testkit::{fixture, fixture_dir, gen, oracle, FIXTURES};

const FIXTURE_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_LIMIT: Duration = Duration::from_secs(30);

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn load(name: &str) -> (Architecture, RequirementSet) {
    let arch = parse_architecture(&fixture(name), &ParseOptions::file(name)).unwrap();
    let reqs = parse_requirements(&fixture("metering.req"), &arch, &ParseOptions::default()).unwrap();
    (arch, reqs)
}

/// Runs `privarch check` on a fixture; returns the exit code, JSON report and wall time.
fn cli_check(name: &str) -> (i32, serde_json::Value, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_privarch"))
        .args(["check", name, "metering.req", "--format", "json"])
        .current_dir(fixture_dir())
        .env_remove("PRIVARCH_N")
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    (out.status.code().unwrap_or(-1), serde_json::from_slice(&out.stdout).unwrap_or_default(), elapsed)
}

fn verdicts(doc: &serde_json::Value) -> Vec<Verdict> {
    serde_json::from_value(doc["verdicts"].clone()).unwrap_or_default()
}

fn correctness(vs: &[Verdict]) -> Option<&Verdict> {
    vs.iter().find(|v| v.id.kind == RequirementKind::Correctness)
}

fn trace_uses(v: &Verdict, rule: Rule) -> bool {
    matches!(&v.status, Status::Satisfied { trace: Some(t) } if t.uses(rule))
}

fn scenario_one() -> Check {
    let (code, doc, elapsed) = cli_check("scenario1.pvd");
    ensure(code == 2, || format!("exit {code}"))?;
    let vs = verdicts(&doc);
    let violated: Vec<&Verdict> = vs.iter().filter(|v| matches!(v.status, Status::Violated { .. })).collect();
    ensure(violated.len() == 3, || format!("{} violated", violated.len()))?;
    for v in &violated {
        let (Goal::Privacy { agent, var }, Status::Violated { witness }) = (&v.goal, &v.status) else {
            return Err(format!("{} is not a privacy violation", v.id));
        };
        ensure(agent.as_str() == "o" && var.base == "C", || format!("{} is about {agent}/{var}", v.id))?;
        let [leaf] = witness.premises.as_slice() else { return Err(format!("{}: witness shape", v.id)) };
        let declared_receive = matches!(&leaf.conclusion, Knowledge::Fact(Fact::ReceiveVar { receiver, var: w, .. })
            if receiver == agent && w == var)
            && leaf.rule == Rule::Declared;
        ensure(witness.rule == Rule::RecvHas && declared_receive, || format!("{}: witness\n{}", v.id, witness.render()))?;
    }
    ensure(elapsed < FIXTURE_LIMIT, || format!("took {elapsed:?}"))
}

fn option_two() -> Check {
    let (code, doc, elapsed) = cli_check("option2.pvd");
    ensure(code == 0, || format!("exit {code}"))?;
    let vs = verdicts(&doc);
    let c = correctness(&vs).ok_or("no correctness verdict")?;
    ensure(trace_uses(c, Rule::AttestTrust), || "correctness trace lacks ATTEST-TRUST".into())?;
    ensure(elapsed < FIXTURE_LIMIT, || format!("took {elapsed:?}"))?;
    let (mut arch, reqs) = load("option2.pvd");
    let before = arch.facts.len();
    arch.facts.retain(|f| !matches!(f, Fact::Trust { .. }));
    ensure(arch.facts.len() + 1 == before, || "expected exactly one trust fact".into())?;
    let outcome = assess(&arch, &reqs, &Config::default()).map_err(|e| e.to_string())?.outcome;
    ensure(matches!(outcome, Outcome::Underspecified { .. }), || format!("without trust: {}", outcome.label()))
}

fn option_three() -> Check {
    let (code, doc, elapsed) = cli_check("option3.pvd");
    ensure(code == 0, || format!("exit {code}"))?;
    let vs = verdicts(&doc);
    let c = correctness(&vs).ok_or("no correctness verdict")?;
    ensure(trace_uses(c, Rule::ProofVerify), || "correctness trace lacks PROOF-VERIFY".into())?;
    ensure(elapsed < FIXTURE_LIMIT, || format!("took {elapsed:?}"))?;
    let (arch, reqs) = load("option3.pvd");
    let o = arch.agent("o").unwrap().clone();
    let closure = close_with(&arch, &o, &reqs.terms(), &Config::default()).map_err(|e| e.to_string())?;
    let leaked: Vec<String> = closure
        .facts()
        .filter(|f| matches!(f, Fact::Has { agent, var } if agent == &o && var.base == "C"))
        .map(|f| f.to_string())
        .collect();
    ensure(leaked.is_empty(), || format!("derivable: {leaked:?}"))
}

fn exploration() -> Check {
    let (arch, reqs) = load("links-only.pvd");
    let session = Session::new(arch, reqs).map_err(|e| e.to_string())?;
    let lib = Library::builtin();
    let suggestions = session.suggest(&lib).map_err(|e| e.to_string())?;
    for pattern in ["AttestedComputation", "ZkProof"] {
        let s = suggestions.iter().find(|s| s.application.pattern == pattern).ok_or(format!("no {pattern}"))?;
        let next = session.apply(&lib, &s.application).map_err(|e| e.to_string())?;
        ensure(next.status() == &Outcome::Complete, || format!("{pattern} gives {}", next.status().label()))?;
    }
    Ok(())
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = gen::rng(0xacce_0001);
    for i in 0..100 {
        let arch = gen::architecture(&mut rng, &format!("r{i}"));
        let ok = arch.agents.len() <= 4 && arch.facts.len() <= 12 && arch.functions.len() <= 2;
        ensure(ok, || format!("arch {i} outside the generator bounds"))?;
        for agent in &arch.agents {
            let c = close(&arch, agent).map_err(|e| e.to_string())?;
            let got: Vec<&Knowledge> = c.items().collect();
            let want = oracle::closure(&arch, agent, &[]);
            let want: Vec<&Knowledge> = want.items.keys().collect();
            ensure(got == want, || format!("arch {i}, agent {agent}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_LIMIT, || format!("took {elapsed:?}"))
}

fn congruence() -> Check {
    let mut rng = gen::rng(0xacce_0002);
    let decide = |eqs: &[Equation], goal: &Equation| -> Result<bool, String> {
        let mut terms = vec![goal.lhs.clone(), goal.rhs.clone()];
        terms.extend(eqs.iter().flat_map(|e| [e.lhs.clone(), e.rhs.clone()]));
        Ok(congruence_entails(&Universe::from_terms(&terms), eqs, goal).map_err(|e| e.to_string())?.is_some())
    };
    for i in 0..200 {
        let (eqs, goal) = gen::congruence_instance(&mut rng);
        let got = decide(&eqs, &goal)?;
        ensure(got == oracle::entails(&eqs, &goal), || format!("random instance {i}"))?;
    }
    for (i, (eqs, goal, expected)) in gen::directed_hash_cases().into_iter().enumerate() {
        let got = decide(&eqs, &goal)?;
        ensure(got == expected && oracle::entails(&eqs, &goal) == expected, || format!("directed case {i}"))?;
    }
    Ok(())
}

fn round_trip() -> Check {
    let opts = ParseOptions::default();
    for name in FIXTURES {
        let arch = parse_architecture(&fixture(name), &opts).map_err(|e| e.to_string())?;
        let back = parse_architecture(&print_architecture(&arch), &opts).map_err(|e| e.to_string())?;
        ensure(back == arch, || name.to_string())?;
    }
    let mut rng = gen::rng(0xacce_0003);
    for i in 0..100 {
        let arch = gen::architecture(&mut rng, &format!("g{i}"));
        let back = parse_architecture(&print_architecture(&arch), &opts).map_err(|e| format!("g{i}: {e}"))?;
        ensure(back == arch, || format!("generated {i}"))?;
    }
    Ok(())
}

fn monotonicity() -> Check {
    let mut rng = gen::rng(0xacce_0004);
    let config = Config::default();
    for i in 0..50 {
        let (small, big) = gen::extended_pair(&mut rng, &format!("m{i}"));
        let reqs = gen::requirements(&mut rng, &small);
        for agent in &small.agents {
            let (a, b) = (close(&small, agent).map_err(|e| e.to_string())?, close(&big, agent).map_err(|e| e.to_string())?);
            ensure(a.items().all(|k| b.contains(k)), || format!("pair {i}, agent {agent}"))?;
        }
        let before = assess(&small, &reqs, &config).map_err(|e| e.to_string())?;
        let after = assess(&big, &reqs, &config).map_err(|e| e.to_string())?;
        for (x, y) in before.verdicts.iter().zip(&after.verdicts) {
            let guarded = matches!(x.goal, Goal::Knowledge { .. } | Goal::Correctness { .. });
            ensure(!guarded || !x.status.is_satisfied() || y.status.is_satisfied(), || format!("pair {i}: {}", x.id))?;
        }
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("scenario 1 is contradictory on the three privacy requirements", scenario_one),
        ("option 2 is complete via ATTEST-TRUST and needs the trust fact", option_two),
        ("option 3 is complete via PROOF-VERIFY without leaking C", option_three),
        ("exploration from links-only reaches both complete options", exploration),
        ("closure equals the brute-force oracle on 100 random architectures", oracle_equivalence),
        ("congruence agrees with the naive oracle and directed hash cases", congruence),
        ("printing and parsing round-trips fixtures and 100 generated architectures", round_trip),
        ("closures and satisfied verdicts are monotone over 50 extensions", monotonicity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match result {
            Ok(()) => println!("PASS  {name} ({ms} ms)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({ms} ms): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
