use privarch_core::adsl::{parse_architecture, parse_requirements, print_architecture, print_requirements, ParseOptions};
use privarch_core::checker::assess;
use privarch_core::engine::{close, close_all, close_all_sequential, Config};
use privarch_core::model::{Goal, Knowledge, ModalOp};
use privarch_testkit::{fixture, gen, FIXTURES};
use proptest::prelude::*;

#[test]
fn closure_is_monotone_in_the_architecture() {
    let mut rng = gen::rng(0x5eed_0003);
    for i in 0..50 {
        let (small, big) = gen::extended_pair(&mut rng, &format!("pair{i}"));
        let reqs = gen::requirements(&mut rng, &small);
        let (before, after) =
            (assess(&small, &reqs, &Config::default()).unwrap(), assess(&big, &reqs, &Config::default()).unwrap());
        for (b, a) in before.verdicts.iter().zip(&after.verdicts) {
            if matches!(b.goal, Goal::Knowledge { .. } | Goal::Correctness { .. }) && b.status.is_satisfied() {
                assert!(a.status.is_satisfied(), "pair {i}: {} regressed", b.id);
            }
        }
        for agent in &small.agents {
            let (a, b) = (close(&small, agent).unwrap(), close(&big, agent).unwrap());
            let lost: Vec<String> = a.items().filter(|k| !b.contains(k)).map(|k| k.to_string()).collect();
            assert!(lost.is_empty(), "pair {i}, agent {agent}: {lost:?} lost after adding facts");
        }
    }
}

#[test]
fn fixtures_print_and_parse_back() {
    for name in FIXTURES {
        let arch = parse_architecture(&fixture(name), &ParseOptions::file(name)).unwrap();
        let printed = print_architecture(&arch);
        assert_eq!(parse_architecture(&printed, &ParseOptions::default()).unwrap(), arch, "{name}");
        let reqs = parse_requirements(&fixture("metering.req"), &arch, &ParseOptions::default()).unwrap();
        let back = parse_requirements(&print_requirements(&reqs), &arch, &ParseOptions::default()).unwrap();
        assert_eq!(back, reqs, "{name}");
    }
}

#[test]
fn generated_architectures_print_and_parse_back() {
    let mut rng = gen::rng(0x5eed_0004);
    for i in 0..100 {
        let arch = gen::architecture(&mut rng, &format!("g{i}"));
        let printed = print_architecture(&arch);
        let back = parse_architecture(&printed, &ParseOptions::default()).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(back, arch, "{printed}");
        let reqs = gen::requirements(&mut rng, &arch);
        let text = print_requirements(&reqs);
        let back = parse_requirements(&text, &arch, &ParseOptions::default()).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(back, reqs, "{text}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parallel_and_sequential_closures_agree(seed in any::<u64>()) {
        let arch = gen::architecture(&mut gen::rng(seed), "p");
        let par = close_all(&arch, &[], &Config::default()).unwrap();
        let seq = close_all_sequential(&arch, &[], &Config::default()).unwrap();
        prop_assert_eq!(par, seq);
    }

    #[test]
    fn x_knowledge_is_sound_for_the_own_agent(seed in any::<u64>()) {
        let arch = gen::architecture(&mut gen::rng(seed), "p");
        for agent in &arch.agents {
            let c = close(&arch, agent).unwrap();
            for k in c.items() {
                if let Knowledge::Modal(m) = k {
                    if m.op == ModalOp::X && &m.agent == agent {
                        for f in &m.body {
                            prop_assert!(c.contains_fact(f), "{} without {}", k, f);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn checking_is_deterministic(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let arch = gen::architecture(&mut rng, "p");
        let reqs = gen::requirements(&mut rng, &arch);
        prop_assert_eq!(assess(&arch, &reqs, &Config::default()).unwrap(), assess(&arch, &reqs, &Config::default()).unwrap());
    }
}
