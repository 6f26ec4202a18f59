//! The evaluator: an explicit-stack machine for the core calculus and its
//! sandbox extension.

mod machine;
mod membrane;
mod primop;
mod rules;

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::heap::{
    Closure, Env, Location, PlainObject, SandboxClosure, SandboxId, Store, StoredObject, Value,
};
use crate::syntax::{Constant, Expr, Position, SyntaxError};
use crate::tx::SandboxState;

pub use primop::{apply_binary, apply_unary, truthy};
pub use rules::InferenceRule;

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    TypeError,
    UnboundVariable,
    StepBudgetExceeded {
        budget: u64,
    },
    /// A bare sandbox abstraction evaluated outside of any sandbox.
    NativeBarrier,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorKind::TypeError => f.write_str("TypeError"),
            ErrorKind::UnboundVariable => f.write_str("UnboundVariable"),
            ErrorKind::StepBudgetExceeded { budget } => write!(f, "StepBudgetExceeded({budget})"),
            ErrorKind::NativeBarrier => f.write_str("NativeBarrier"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct EvalError {
    pub kind: ErrorKind,
    pub message: String,
    pub position: Option<Position>,
}

impl EvalError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        EvalError {
            kind,
            message: message.into(),
            position: None,
        }
    }

    pub(crate) fn type_error(message: impl Into<String>) -> Self {
        EvalError::new(ErrorKind::TypeError, message)
    }
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some(p) => write!(f, "{} at {}: {}", self.kind, p, self.message),
            None => write!(f, "{}: {}", self.kind, self.message),
        }
    }
}

/// Syntax or evaluation failure from the source-level entry points.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone)]
pub struct Config {
    pub step_budget: u64,
    /// Off turns wrapping into the identity: the negative control for the
    /// noninterference checker.
    pub membranes: bool,
    pub log_effects: bool,
    pub trace: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            step_budget: DEFAULT_STEP_BUDGET,
            membranes: true,
            log_effects: true,
            trace: false,
        }
    }
}

/// One interpreter instance: a store, the sandboxes created so far and the
/// logical clock shared by their effect logs.
#[derive(Debug, Clone)]
pub struct Interpreter {
    pub(crate) store: Store,
    pub(crate) sandboxes: Vec<SandboxState>,
    pub(crate) clock: u64,
    pub(crate) config: Config,
    /// Sandbox whose code is running; `None` for outside code.
    pub(crate) context: Option<SandboxId>,
    remaining: u64,
    budget: u64,
    trace: Vec<InferenceRule>,
}

impl Default for Interpreter {
    fn default() -> Self {
        Interpreter::new()
    }
}

impl Interpreter {
    pub fn new() -> Self {
        Interpreter::with_config(Config::default())
    }

    pub fn with_config(config: Config) -> Self {
        Interpreter {
            store: Store::new(),
            sandboxes: Vec::new(),
            clock: 1,
            config,
            context: None,
            remaining: u64::MAX,
            budget: u64::MAX,
            trace: Vec::new(),
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn config_mut(&mut self) -> &mut Config {
        &mut self.config
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut Store {
        &mut self.store
    }

    pub fn trace(&self) -> &[InferenceRule] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<InferenceRule> {
        std::mem::take(&mut self.trace)
    }

    /// Evaluates a core expression with the configured step budget.
    pub fn eval(&mut self, env: &Env, e: &Rc<Expr>) -> Result<Value, EvalError> {
        self.eval_with_budget(env, e, self.config.step_budget)
    }

    pub fn eval_with_budget(
        &mut self,
        env: &Env,
        e: &Rc<Expr>,
        budget: u64,
    ) -> Result<Value, EvalError> {
        self.with_budget(budget, |it| it.run(e.clone(), env.clone()))
    }

    /// Parses, desugars and evaluates a closed top-level program.
    pub fn eval_source(&mut self, src: &str) -> Result<Value, RunError> {
        let e = Rc::new(crate::syntax::parse_program(src)?);
        Ok(self.eval(&Env::empty(), &e)?)
    }

    pub(crate) fn with_budget<T>(&mut self, budget: u64, f: impl FnOnce(&mut Self) -> T) -> T {
        let saved = (self.remaining, self.budget);
        self.remaining = budget;
        self.budget = budget;
        let out = f(self);
        (self.remaining, self.budget) = saved;
        out
    }

    pub(crate) fn tick(&mut self, rule: InferenceRule) -> Result<(), EvalError> {
        if self.remaining == 0 {
            return Err(EvalError::new(
                ErrorKind::StepBudgetExceeded {
                    budget: self.budget,
                },
                format!("step budget of {} rule applications exhausted", self.budget),
            ));
        }
        self.remaining -= 1;
        if self.config.trace {
            self.trace.push(rule);
        }
        Ok(())
    }

    /// Rule applications consumed by the current evaluation so far.
    pub fn steps_used(&self) -> u64 {
        self.budget - self.remaining
    }

    pub fn alloc_plain(&mut self, object: PlainObject) -> Location {
        self.store.alloc(StoredObject::Plain(object), self.context)
    }

    /// Allocates `{}` with the given prototype, as outside code.
    pub fn new_object(&mut self, proto: Value) -> Location {
        self.store
            .alloc(StoredObject::Plain(PlainObject::empty(proto)), None)
    }

    /// Property read through the full dispatch (prototype chain, proxies).
    pub fn get(&mut self, l: Location, key: &Constant) -> Result<Value, EvalError> {
        self.with_budget(u64::MAX, |it| it.get_property(l, key))
    }

    /// Property write through the full dispatch.
    pub fn put(&mut self, l: Location, key: &Constant, v: Value) -> Result<Value, EvalError> {
        self.with_budget(u64::MAX, |it| it.put_property(l, key, v))
    }

    /// Applies a function value to an argument as outside code.
    pub fn call(&mut self, f: &Value, arg: Value) -> Result<Value, EvalError> {
        let budget = self.config.step_budget;
        self.with_budget(budget, |it| it.run_apply(f.clone(), arg))
    }

    pub fn sandbox_ids(&self) -> impl Iterator<Item = SandboxId> + '_ {
        self.sandboxes.iter().map(|s| s.id)
    }

    pub fn sandbox(&self, id: SandboxId) -> &SandboxState {
        &self.sandboxes[id.0 as usize - 1]
    }

    pub(crate) fn sandbox_mut(&mut self, id: SandboxId) -> &mut SandboxState {
        &mut self.sandboxes[id.0 as usize - 1]
    }

    pub(crate) fn new_sandbox(&mut self, env: Env) -> SandboxId {
        let id = SandboxId(self.sandboxes.len() as u32 + 1);
        self.sandboxes.push(SandboxState::new(id, env));
        id
    }

    /// Whether applying `v` would run a closure.
    pub fn is_callable(&self, v: &Value) -> bool {
        match v {
            Value::Const(_) => false,
            Value::Sandbox(_) => true,
            Value::Loc(l) => match self.store.get(*l) {
                StoredObject::Plain(p) => p.closure.is_some(),
                StoredObject::SandboxProxy { shadow, .. } => self.is_callable(&Value::Loc(*shadow)),
                StoredObject::OutwardProxy { inner, .. } => self.is_callable(&Value::Loc(*inner)),
            },
        }
    }

    /// Renames every location with `perm` (a bijection on store indices),
    /// including sandbox tables. The result is an isomorphic interpreter.
    pub fn renamed(&self, perm: &[usize]) -> Interpreter {
        let mut r = Renamer::new(perm);
        let mut out = self.clone();
        let mut slots: Vec<Option<crate::heap::Slot>> = vec![None; self.store.len()];
        for (i, slot) in self.store.slots().iter().enumerate() {
            let mut slot = slot.clone();
            slot.object = r.object(&slot.object);
            slots[perm[i]] = Some(slot);
        }
        *out.store.slots_mut() = slots
            .into_iter()
            .map(|s| s.expect("renaming is a bijection"))
            .collect();
        for sb in &mut out.sandboxes {
            sb.rename(&mut r);
        }
        out
    }
}

/// Applies a location permutation to values. Shared sandbox closures stay
/// shared, so identity comparisons survive renaming.
pub struct Renamer<'a> {
    perm: &'a [usize],
    memo: HashMap<*const SandboxClosure, Rc<SandboxClosure>>,
}

impl<'a> Renamer<'a> {
    pub fn new(perm: &'a [usize]) -> Self {
        Renamer {
            perm,
            memo: HashMap::new(),
        }
    }

    pub fn loc(&self, l: Location) -> Location {
        Location(self.perm[l.0])
    }

    pub fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Const(_) => v.clone(),
            Value::Loc(l) => Value::Loc(self.loc(*l)),
            Value::Sandbox(sc) => {
                let key = Rc::as_ptr(sc);
                if let Some(done) = self.memo.get(&key) {
                    return Value::Sandbox(done.clone());
                }
                let renamed = Rc::new(SandboxClosure {
                    env: self.env(&sc.env),
                    param: sc.param.clone(),
                    body: sc.body.clone(),
                    sandbox: sc.sandbox,
                });
                self.memo.insert(key, renamed.clone());
                Value::Sandbox(renamed)
            }
        }
    }

    pub fn env(&mut self, env: &Env) -> Env {
        env.map_values(&mut |v| self.value(v))
    }

    pub fn object(&mut self, o: &StoredObject) -> StoredObject {
        match o {
            StoredObject::Plain(p) => StoredObject::Plain(PlainObject {
                dict: p
                    .dict
                    .iter()
                    .map(|(k, v)| (k.clone(), self.value(v)))
                    .collect(),
                closure: p.closure.as_ref().map(|c| Closure {
                    env: self.env(&c.env),
                    self_name: c.self_name.clone(),
                    param: c.param.clone(),
                    body: c.body.clone(),
                }),
                proto: self.value(&p.proto),
            }),
            StoredObject::SandboxProxy {
                target,
                shadow,
                env,
                sandbox,
            } => StoredObject::SandboxProxy {
                target: self.loc(*target),
                shadow: self.loc(*shadow),
                env: self.env(env),
                sandbox: *sandbox,
            },
            StoredObject::OutwardProxy {
                inner,
                env,
                sandbox,
            } => StoredObject::OutwardProxy {
                inner: self.loc(*inner),
                env: self.env(env),
                sandbox: *sandbox,
            },
        }
    }
}
