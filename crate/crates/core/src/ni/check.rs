use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::eval::{Config, EvalError, Interpreter};
use crate::heap::Env;
use crate::render::render;
use crate::syntax::{self, desugar_in_scope, Expr, Name, SyntaxError};

use super::equiv::{replay, shallow_eq, Equiv, Witness};

/// Binder of the sandbox body in a noninterference case.
pub const BODY_BINDER: &str = "g";
/// Name the argument is bound to alongside the setup bindings.
pub const ARG_NAME: &str = "%arg";

/// One noninterference case: `setup` is a chain of `let x = e;` bindings,
/// `body` runs as `fresh (sbx g => body)` applied to the value of `arg`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiCase {
    pub setup: String,
    pub body: String,
    pub arg: String,
}

impl NiCase {
    pub fn new(setup: &str, body: &str, arg: &str) -> Self {
        NiCase {
            setup: setup.into(),
            body: body.into(),
            arg: arg.into(),
        }
    }

    /// The whole case as one program.
    pub fn program(&self) -> String {
        format!(
            "{} (fresh (sbx {BODY_BINDER} => {}))({})",
            self.setup.trim_end(),
            self.body,
            self.arg
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone)]
pub struct NIReport {
    pub verdict: Verdict,
    /// Present exactly when the verdict is `Fail`.
    pub witness: Option<Witness>,
    pub seed: Option<u64>,
    pub program: String,
    /// Error raised by the sandbox body, if any. Such runs still pass when
    /// the partial store is equivalent.
    pub body_error: Option<EvalError>,
}

impl NIReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

impl fmt::Display for NIReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.verdict, &self.witness) {
            (Verdict::Fail, Some(w)) => write!(f, "FAIL {w}")?,
            _ => f.write_str("pass")?,
        }
        if let Some(seed) = self.seed {
            write!(f, " [seed {seed}]")?;
        }
        Ok(())
    }
}

/// Failures of the case itself rather than of the property.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("case does not parse: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("setup must be a chain of let bindings")]
    SetupShape,
    #[error("setup failed: {0}")]
    Setup(EvalError),
    #[error("argument failed: {0}")]
    Arg(EvalError),
}

/// Evaluates a `let x = e; ...` chain binding by binding. The text must
/// end after the last `;`.
pub fn eval_setup(it: &mut Interpreter, setup: &str) -> Result<Env, HarnessError> {
    let parsed = syntax::parse_str(&format!("{setup} undefined"))?;
    let mut env = Env::empty();
    let mut cur = &parsed;
    let mut names: Vec<Name> = Vec::new();
    loop {
        match cur {
            Expr::Let { name, value, body } => {
                let core = desugar_in_scope(value, None, &names).map_err(SyntaxError::from)?;
                let v = it.eval(&env, &Rc::new(core)).map_err(HarnessError::Setup)?;
                env = env.bind(name.clone(), v);
                if !names.contains(name) {
                    names.push(name.clone());
                }
                cur = body;
            }
            Expr::Const(_) => return Ok(env),
            _ => return Err(HarnessError::SetupShape),
        }
    }
}

struct Prepared {
    it: Interpreter,
    setup_env: Env,
    arg_env: Env,
    /// Setup bindings plus the argument.
    env: Env,
    program: Rc<Expr>,
}

fn prepare(case: &NiCase, budget: u64, membranes: bool) -> Result<Prepared, HarnessError> {
    let config = Config {
        step_budget: budget,
        membranes,
        ..Config::default()
    };
    let mut it = Interpreter::with_config(config);
    let env = eval_setup(&mut it, &case.setup)?;
    let names = env.names();

    let arg = syntax::parse_str(&case.arg)?;
    let arg = desugar_in_scope(&arg, None, &names).map_err(SyntaxError::from)?;
    let arg_value = it.eval(&env, &Rc::new(arg)).map_err(HarnessError::Arg)?;
    let arg_env = Env::empty().bind(Name::from(ARG_NAME), arg_value.clone());
    let setup_env = env.clone();
    let env = env.bind(Name::from(ARG_NAME), arg_value);

    let body = syntax::parse_str(&case.body)?;
    let sandbox = Expr::fresh(Expr::SbxAbs {
        param: BODY_BINDER.into(),
        body: Rc::new(body),
    });
    let sandbox = desugar_in_scope(&sandbox, None, &names).map_err(SyntaxError::from)?;
    let program = Rc::new(Expr::App(
        Rc::new(sandbox),
        Rc::new(Expr::Var(ARG_NAME.into())),
    ));
    Ok(Prepared {
        it,
        setup_env,
        arg_env,
        env,
        program,
    })
}

/// Runs one case and compares the outside-reachable store before and after
/// the sandbox application.
pub fn check_noninterference(
    case: &NiCase,
    budget: u64,
    membranes: bool,
) -> Result<NIReport, HarnessError> {
    let Prepared {
        mut it,
        setup_env,
        arg_env,
        env,
        program,
    } = prepare(case, budget, membranes)?;
    let before = it.store().clone();
    let body_error = it.eval(&env, &program).err();
    let mut eq = Equiv::new(&before, it.store());
    let named = named_bindings(&setup_env);
    let witness = eq
        .environments(&named, &named)
        .and_then(|_| eq.environments(&setup_env, &setup_env))
        .and_then(|_| eq.environments(&arg_env, &arg_env))
        .err();
    Ok(NIReport {
        verdict: if witness.is_some() {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
        witness,
        seed: None,
        program: case.program(),
        body_error,
    })
}

/// The setup bindings other than `_`, so witnesses start at a name the
/// case author chose when one reaches the difference.
fn named_bindings(env: &Env) -> Env {
    env.bindings()
        .into_iter()
        .filter(|(n, _)| &**n != "_")
        .fold(Env::empty(), |acc, (n, v)| acc.bind(n, v))
}

/// Re-runs a failed case and follows its witness path in the stores before
/// and after. Returns the two values it reaches when they differ at the
/// top level, `None` when the path does not replay to a mismatch.
pub fn replay_witness(
    case: &NiCase,
    budget: u64,
    membranes: bool,
    w: &Witness,
) -> Option<(String, String)> {
    let Prepared {
        mut it,
        env,
        program,
        ..
    } = prepare(case, budget, membranes).ok()?;
    let before = it.store().clone();
    let _ = it.eval(&env, &program);
    let lv = replay(&before, &env, &w.path)?;
    let rv = replay(it.store(), &env, &w.path)?;
    if shallow_eq(&before, &lv, it.store(), &rv) {
        return None;
    }
    Some((render(&before, &lv, 1), render(it.store(), &rv, 1)))
}
