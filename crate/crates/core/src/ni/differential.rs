use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eval::{Config, EvalError, Interpreter, Renamer};
use crate::heap::{Env, Value};
use crate::syntax::{self, desugar_in_scope, Expr, Name, SyntaxError};

use super::check::{eval_setup, HarnessError};
use super::equiv::{format_path, Equiv};
use super::gen::gen_diff_case;

/// Result of running one program on a store and on a renamed copy of it.
#[derive(Debug, Clone)]
pub struct DiffOutcome {
    pub equivalent: bool,
    /// Why the runs disagree; empty when they agree.
    pub detail: String,
}

impl DiffOutcome {
    fn agree() -> Self {
        DiffOutcome {
            equivalent: true,
            detail: String::new(),
        }
    }

    fn disagree(detail: String) -> Self {
        DiffOutcome {
            equivalent: false,
            detail,
        }
    }
}

/// Evaluates `e` under `env` in `it` and, separately, under the images of
/// both through the location permutation `perm`, then compares the final
/// stores on the environment and the two results.
pub fn differential_check(
    it: &Interpreter,
    env: &Env,
    e: &Rc<Expr>,
    perm: &[usize],
    budget: u64,
) -> DiffOutcome {
    let mut left = it.clone();
    let mut right = it.renamed(perm);
    let right_env = Renamer::new(perm).env(env);
    let lr = left.eval_with_budget(env, e, budget);
    let rr = right.eval_with_budget(&right_env, e, budget);
    let (lv, rv) = match (lr, rr) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(a), Err(b)) if same_failure(&a, &b) => (Value::UNDEFINED, Value::UNDEFINED),
        (Err(a), Err(b)) => return DiffOutcome::disagree(format!("different errors: {a} / {b}")),
        (Err(a), Ok(_)) => {
            return DiffOutcome::disagree(format!("only the original run failed: {a}"))
        }
        (Ok(_), Err(b)) => {
            return DiffOutcome::disagree(format!("only the renamed run failed: {b}"))
        }
    };
    let mut eq = Equiv::new(left.store(), right.store());
    if let Err(w) = eq.environments(env, &right_env) {
        return DiffOutcome::disagree(format!("stores differ at {w}"));
    }
    if let Err(w) = eq.values(&lv, &rv) {
        return DiffOutcome::disagree(format!(
            "results differ at <result>{}: {}",
            format_path(&w.path),
            w.reason
        ));
    }
    DiffOutcome::agree()
}

fn same_failure(a: &EvalError, b: &EvalError) -> bool {
    a.kind == b.kind
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation(seed: u64, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    perm
}

/// Generates a setup and a program from `seed`, evaluates the setup, and
/// checks the program against a randomly renamed copy of the result.
pub fn differential_trial(
    seed: u64,
    size: usize,
    budget: u64,
) -> Result<DiffOutcome, HarnessError> {
    let (setup, program) = gen_diff_case(seed, size);
    let mut it = Interpreter::with_config(Config {
        step_budget: budget,
        ..Config::default()
    });
    let env = eval_setup(&mut it, &setup)?;
    let names: Vec<Name> = env.names();
    let e =
        desugar_in_scope(&syntax::parse_str(&program)?, None, &names).map_err(SyntaxError::from)?;
    let perm = random_permutation(seed ^ 0x9e37_79b9_7f4a_7c15, it.store().len());
    Ok(differential_check(&it, &env, &Rc::new(e), &perm, budget))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_renaming() {
        let mut it = Interpreter::new();
        let env = eval_setup(&mut it, "let o = new null; let _ = o.v = 1;").unwrap();
        let e = Rc::new(syntax::parse_program("1 + 2").unwrap());
        let perm: Vec<usize> = (0..it.store().len()).collect();
        assert!(differential_check(&it, &env, &e, &perm, 1000).equivalent);
    }

    #[test]
    fn swapped_locations() {
        let mut it = Interpreter::new();
        let env = eval_setup(&mut it, "let a = new null; let b = new a; let _ = b.x = a;").unwrap();
        let names = env.names();
        let e = desugar_in_scope(
            &syntax::parse_str("let _ = a.y = b; b.x === a").unwrap(),
            None,
            &names,
        )
        .unwrap();
        let outcome = differential_check(&it, &env, &Rc::new(e), &[1, 0], 1000);
        assert!(outcome.equivalent, "{}", outcome.detail);
    }

    #[test]
    fn generated_trials() {
        for seed in 0..50 {
            let o = differential_trial(seed, 30, 100_000).unwrap();
            assert!(o.equivalent, "seed {seed}: {}", o.detail);
        }
    }
}
