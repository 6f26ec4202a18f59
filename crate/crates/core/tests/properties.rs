mod common;

use std::rc::Rc;

use proptest::prelude::*;

use decent::eval::Renamer;
use decent::ni::{eval_setup, gen_diff_case, gen_program, random_permutation, Equiv};
use decent::repl::Session;
use decent::syntax::{desugar, parse_str, pretty_print};
use decent::{Config, Interpreter};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wrap_preserves_identity(seed in any::<u64>()) {
        common::identity_trial(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn rollback_matches_reverse_replay(seed in any::<u64>()) {
        common::rollback_trial(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn stats_count_distinct_fields(seed in any::<u64>()) {
        common::stats_trial(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn conflicts_are_symmetric(seed in any::<u64>()) {
        common::conflict_trial(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn pretty_printing_round_trips(seed in any::<u64>(), size in 1usize..40) {
        let src = gen_program(seed, size);
        let e = parse_str(&src).unwrap();
        let printed = pretty_print(&e);
        prop_assert_eq!(parse_str(&printed).unwrap(), e, "{}", printed);
    }

    #[test]
    fn desugaring_is_idempotent(seed in any::<u64>(), size in 1usize..40) {
        let e = parse_str(&gen_program(seed, size)).unwrap();
        let once = desugar(&e, None).unwrap();
        prop_assert_eq!(desugar(&once, None).unwrap(), once);
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>(), size in 1usize..30) {
        let src = gen_program(seed, size);
        let render = |src: &str| {
            let mut it = Interpreter::new();
            it.eval_source(src).map(|v| decent::render::render(it.store(), &v, 3)).map_err(|e| e.to_string())
        };
        prop_assert_eq!(render(&src), render(&src));
    }

    #[test]
    fn equivalence_is_reflexive_symmetric_and_transitive(seed in any::<u64>()) {
        let (setup, _) = gen_diff_case(seed, 20);
        let mut it = Interpreter::new();
        let env = eval_setup(&mut it, &setup).unwrap();
        let n = it.store().len();
        let p1 = random_permutation(seed, n);
        let p2 = random_permutation(seed.wrapping_add(1), n);
        let r1 = it.renamed(&p1);
        let e1 = Renamer::new(&p1).env(&env);
        let r2 = r1.renamed(&p2);
        let e2 = Renamer::new(&p2).env(&e1);

        prop_assert!(Equiv::new(it.store(), it.store()).environments(&env, &env).is_ok());
        prop_assert!(Equiv::new(it.store(), r1.store()).environments(&env, &e1).is_ok());
        prop_assert!(Equiv::new(r1.store(), it.store()).environments(&e1, &env).is_ok());
        prop_assert!(Equiv::new(r1.store(), r2.store()).environments(&e1, &e2).is_ok());
        prop_assert!(Equiv::new(it.store(), r2.store()).environments(&env, &e2).is_ok());
    }

    #[test]
    fn equivalence_verdicts_agree_in_both_directions(seed in any::<u64>()) {
        let (setup, program) = gen_diff_case(seed, 20);
        let mut it = Interpreter::new();
        let env = eval_setup(&mut it, &setup).unwrap();
        let before = it.clone();
        let names = env.names();
        let e = decent::syntax::desugar_in_scope(&parse_str(&program).unwrap(), None, &names).unwrap();
        let _ = it.eval(&env, &Rc::new(e));
        let forward = Equiv::new(before.store(), it.store()).environments(&env, &env).is_ok();
        let backward = Equiv::new(it.store(), before.store()).environments(&env, &env).is_ok();
        prop_assert_eq!(forward, backward);
    }
}

#[test]
fn transcripts_replay_byte_identically() {
    let text = include_str!("../scripts/primer.djs");
    let mut a = Session::new(Config::default());
    let mut b = Session::new(Config::default());
    assert_eq!(a.run_transcript(text).output, b.run_transcript(text).output);
}
