use std::rc::Rc;

use crate::heap::{
    Closure, Env, Location, PlainObject, SandboxClosure, SandboxId, StoredObject, Value,
};
use crate::syntax::{BinOp, Constant, Expr, UnOp, GLOBAL_BINDER};

use super::primop::{apply_binary, apply_unary};
use super::{ErrorKind, EvalError, InferenceRule as R, Interpreter};

/// What the machine does next: evaluate a term or return a value to the
/// innermost pending frame.
pub(super) enum Mode {
    Eval(Rc<Expr>, Env),
    Return(Value),
}

/// Pending intermediate terms. Each frame holds what is left of a rule once
/// the subterm it is waiting for has produced a value.
pub(super) enum Frame {
    OpRight {
        op: BinOp,
        right: Rc<Expr>,
        env: Env,
    },
    OpDone {
        op: BinOp,
        left: Value,
    },
    UnaryDone(UnOp),
    AppArg {
        arg: Rc<Expr>,
        env: Env,
    },
    AppDone {
        callee: Value,
    },
    NewDone,
    GetKey {
        key: Rc<Expr>,
        env: Env,
    },
    GetDone {
        obj: Location,
    },
    PutKey {
        key: Rc<Expr>,
        value: Rc<Expr>,
        env: Env,
    },
    PutValue {
        obj: Location,
        value: Rc<Expr>,
        env: Env,
    },
    PutDone {
        obj: Location,
        key: Constant,
    },
    Restore(Option<SandboxId>),
    WrapOut(SandboxId),
}

type Step = Result<Mode, EvalError>;

impl Interpreter {
    pub(crate) fn run(&mut self, e: Rc<Expr>, env: Env) -> Result<Value, EvalError> {
        let saved = self.context;
        self.drive(Mode::Eval(e, env), Vec::new(), saved)
    }

    pub(crate) fn run_apply(&mut self, f: Value, arg: Value) -> Result<Value, EvalError> {
        let saved = self.context;
        let mut stack = Vec::new();
        match self.apply(f, arg, &mut stack) {
            Ok(mode) => self.drive(mode, stack, saved),
            Err(e) => {
                self.context = saved;
                Err(e)
            }
        }
    }

    fn drive(
        &mut self,
        mut mode: Mode,
        mut stack: Vec<Frame>,
        saved: Option<SandboxId>,
    ) -> Result<Value, EvalError> {
        let result = loop {
            let step = match mode {
                Mode::Eval(e, env) => self.eval_term(e, env, &mut stack),
                Mode::Return(v) => match stack.pop() {
                    None => break Ok(v),
                    Some(frame) => self.resume(frame, v, &mut stack),
                },
            };
            match step {
                Ok(next) => mode = next,
                Err(e) => break Err(e),
            }
        };
        if result.is_err() {
            self.context = saved;
        }
        result
    }

    fn eval_term(&mut self, e: Rc<Expr>, env: Env, stack: &mut Vec<Frame>) -> Step {
        match &*e {
            Expr::Const(c) => {
                self.tick(R::Const)?;
                Ok(Mode::Return(Value::Const(c.clone())))
            }
            Expr::Var(x) => {
                self.tick(R::Var)?;
                self.lookup(&env, x).map(Mode::Return)
            }
            Expr::Binary(op, a, b) => {
                self.tick(R::OpE)?;
                stack.push(Frame::OpRight {
                    op: *op,
                    right: b.clone(),
                    env: env.clone(),
                });
                Ok(Mode::Eval(a.clone(), env))
            }
            Expr::Unary(op, a) => {
                self.tick(R::OpE)?;
                stack.push(Frame::UnaryDone(*op));
                Ok(Mode::Eval(a.clone(), env))
            }
            Expr::Abs {
                self_name,
                param,
                body,
            } => {
                self.tick(R::Abs)?;
                let closure = Closure {
                    env,
                    self_name: self_name.clone(),
                    param: param.clone(),
                    body: body.clone(),
                };
                let l = self.alloc_plain(PlainObject {
                    closure: Some(closure),
                    ..PlainObject::empty(Value::NULL)
                });
                Ok(Mode::Return(Value::Loc(l)))
            }
            Expr::App(f, a) => {
                self.tick(R::AppE)?;
                stack.push(Frame::AppArg {
                    arg: a.clone(),
                    env: env.clone(),
                });
                Ok(Mode::Eval(f.clone(), env))
            }
            Expr::New(p) => {
                self.tick(R::NewE)?;
                stack.push(Frame::NewDone);
                Ok(Mode::Eval(p.clone(), env))
            }
            Expr::Get(o, k) => {
                self.tick(R::GetE)?;
                stack.push(Frame::GetKey {
                    key: k.clone(),
                    env: env.clone(),
                });
                Ok(Mode::Eval(o.clone(), env))
            }
            Expr::Put(o, k, v) => {
                self.tick(R::PutE)?;
                stack.push(Frame::PutKey {
                    key: k.clone(),
                    value: v.clone(),
                    env: env.clone(),
                });
                Ok(Mode::Eval(o.clone(), env))
            }
            Expr::SbxAbs { param, body } => {
                let Some(sandbox) = self.context else {
                    return Err(EvalError::new(
                        ErrorKind::NativeBarrier,
                        "a sandbox abstraction outside any sandbox needs `fresh`",
                    ));
                };
                self.tick(R::SandboxAbstraction)?;
                let sc = SandboxClosure {
                    env,
                    param: param.clone(),
                    body: body.clone(),
                    sandbox,
                };
                Ok(Mode::Return(Value::Sandbox(Rc::new(sc))))
            }
            Expr::Fresh(inner) => {
                let Expr::SbxAbs { param, body } = &**inner else {
                    return Err(EvalError::type_error("fresh expects a sandbox abstraction"));
                };
                self.tick(R::SandboxFreshE)?;
                self.tick(R::SandboxFresh)?;
                let sandbox = self.new_sandbox(Env::empty());
                let sc = SandboxClosure {
                    env: Env::empty(),
                    param: param.clone(),
                    body: body.clone(),
                    sandbox,
                };
                Ok(Mode::Return(Value::Sandbox(Rc::new(sc))))
            }
            Expr::Let { .. } | Expr::Member(..) | Expr::MemberPut(..) | Expr::Assign(..) => {
                Err(EvalError::type_error(format!(
                    "surface form `{e}` must be desugared before evaluation"
                )))
            }
        }
    }

    fn lookup(&self, env: &Env, x: &str) -> Result<Value, EvalError> {
        if let Some(v) = env.lookup(x) {
            return Ok(v.clone());
        }
        if x == GLOBAL_BINDER {
            if let Some(g) = self.context.and_then(|s| self.sandbox(s).global.clone()) {
                return Ok(g);
            }
            return Err(EvalError::new(
                ErrorKind::UnboundVariable,
                "free variable with no sandbox global to resolve it",
            ));
        }
        Err(EvalError::new(
            ErrorKind::UnboundVariable,
            format!("unbound variable '{x}'"),
        ))
    }

    fn resume(&mut self, frame: Frame, v: Value, stack: &mut Vec<Frame>) -> Step {
        match frame {
            Frame::OpRight { op, right, env } => {
                self.tick(R::OpF)?;
                stack.push(Frame::OpDone { op, left: v });
                Ok(Mode::Eval(right, env))
            }
            Frame::OpDone { op, left } => {
                self.tick(R::Op)?;
                apply_binary(op, &left, &v).map(Mode::Return)
            }
            Frame::UnaryDone(op) => {
                self.tick(R::Op)?;
                let callable = self.is_callable(&v);
                apply_unary(op, &v, callable).map(Mode::Return)
            }
            Frame::AppArg { arg, env } => {
                if matches!(v, Value::Const(_)) {
                    return Err(EvalError::type_error(format!(
                        "{} is not a function",
                        describe(&v)
                    )));
                }
                self.tick(R::AppF)?;
                stack.push(Frame::AppDone { callee: v });
                Ok(Mode::Eval(arg, env))
            }
            Frame::AppDone { callee } => self.apply(callee, v, stack),
            Frame::NewDone => {
                self.tick(R::New)?;
                Ok(Mode::Return(Value::Loc(
                    self.alloc_plain(PlainObject::empty(v)),
                )))
            }
            Frame::GetKey { key, env } => {
                let obj = self.expect_object(&v, "read a property of")?;
                self.tick(R::GetF)?;
                stack.push(Frame::GetDone { obj });
                Ok(Mode::Eval(key, env))
            }
            Frame::GetDone { obj } => {
                let key = expect_key(v)?;
                self.get_property(obj, &key).map(Mode::Return)
            }
            Frame::PutKey { key, value, env } => {
                let obj = self.expect_object(&v, "write a property of")?;
                self.tick(R::PutF)?;
                stack.push(Frame::PutValue {
                    obj,
                    value,
                    env: env.clone(),
                });
                Ok(Mode::Eval(key, env))
            }
            Frame::PutValue { obj, value, env } => {
                let key = expect_key(v)?;
                self.tick(R::PutG)?;
                stack.push(Frame::PutDone { obj, key });
                Ok(Mode::Eval(value, env))
            }
            Frame::PutDone { obj, key } => self.put_property(obj, &key, v).map(Mode::Return),
            Frame::Restore(context) => {
                self.context = context;
                Ok(Mode::Return(v))
            }
            Frame::WrapOut(sandbox) => self.wrap_outward(sandbox, v).map(Mode::Return),
        }
    }

    fn expect_object(&self, v: &Value, what: &str) -> Result<Location, EvalError> {
        v.as_loc()
            .ok_or_else(|| EvalError::type_error(format!("cannot {what} {}", describe(v))))
    }

    fn enter(&mut self, context: Option<SandboxId>, stack: &mut Vec<Frame>) {
        if context != self.context {
            stack.push(Frame::Restore(self.context));
            self.context = context;
        }
    }

    pub(super) fn apply(&mut self, callee: Value, arg: Value, stack: &mut Vec<Frame>) -> Step {
        match callee {
            Value::Const(_) => Err(EvalError::type_error(format!(
                "{} is not a function",
                describe(&callee)
            ))),
            Value::Sandbox(sc) => {
                self.tick(R::SandboxApplication)?;
                let sandbox = sc.sandbox;
                let v = self.wrap(sandbox, &sc.env, arg)?;
                if self.sandbox(sandbox).global.is_none() {
                    self.sandbox_mut(sandbox).global = Some(v.clone());
                }
                let env = sc.env.bind(sc.param.clone(), v);
                self.enter(Some(sandbox), stack);
                Ok(Mode::Eval(sc.body.clone(), env))
            }
            Value::Loc(l) => match self.store.get(l) {
                StoredObject::Plain(p) => {
                    let Some(c) = p.closure.clone() else {
                        return Err(EvalError::type_error("object is not a function"));
                    };
                    self.tick(R::App)?;
                    let mut env = c.env;
                    if let Some(f) = c.self_name {
                        env = env.bind(f, Value::Loc(l));
                    }
                    env = env.bind(c.param, arg);
                    self.enter(self.store.owner(l), stack);
                    Ok(Mode::Eval(c.body, env))
                }
                StoredObject::SandboxProxy {
                    target,
                    shadow,
                    env,
                    sandbox,
                } => {
                    let (target, shadow, env, sandbox) = (*target, *shadow, env.clone(), *sandbox);
                    if !self.is_callable(&Value::Loc(shadow)) {
                        return Err(EvalError::type_error("wrapped object is not a function"));
                    }
                    self.tick(R::AppSandbox)?;
                    self.log_call(sandbox, target);
                    let v = self.wrap(sandbox, &env, arg)?;
                    self.apply(Value::Loc(shadow), v, stack)
                }
                StoredObject::OutwardProxy {
                    inner,
                    env,
                    sandbox,
                } => {
                    let (inner, env, sandbox) = (*inner, env.clone(), *sandbox);
                    if !self.is_callable(&Value::Loc(inner)) {
                        return Err(EvalError::type_error("committed object is not a function"));
                    }
                    self.tick(R::OutwardApp)?;
                    let v = self.wrap(sandbox, &env, arg)?;
                    stack.push(Frame::WrapOut(sandbox));
                    self.apply(Value::Loc(inner), v, stack)
                }
            },
        }
    }

    /// Full property read: own dictionary, then the prototype chain, with
    /// proxies dispatched to the membrane rules.
    pub(crate) fn get_property(&mut self, l: Location, key: &Constant) -> Result<Value, EvalError> {
        let k = key.to_key();
        let mut cur = l;
        loop {
            match self.store.get(cur) {
                StoredObject::Plain(p) => {
                    if let Some(v) = p.dict.get(&k) {
                        let v = v.clone();
                        self.tick(R::Get)?;
                        return Ok(v);
                    }
                    match p.proto {
                        Value::Loc(next) => {
                            self.tick(R::GetProto)?;
                            cur = next;
                        }
                        _ => {
                            self.tick(R::GetUndef)?;
                            return Ok(Value::UNDEFINED);
                        }
                    }
                }
                StoredObject::SandboxProxy { .. } => return self.proxy_get(cur, key),
                StoredObject::OutwardProxy { .. } => return self.outward_get(cur, key),
            }
        }
    }

    pub(crate) fn put_property(
        &mut self,
        l: Location,
        key: &Constant,
        v: Value,
    ) -> Result<Value, EvalError> {
        match self.store.get(l) {
            StoredObject::Plain(_) => {
                self.tick(R::Put)?;
                let k = key.to_key();
                if let Some(p) = self.store.plain_mut(l) {
                    p.dict.insert(k, v.clone());
                }
                Ok(v)
            }
            StoredObject::SandboxProxy { .. } => self.proxy_put(l, key, v),
            StoredObject::OutwardProxy { .. } => self.outward_put(l, key, v),
        }
    }
}

fn expect_key(v: Value) -> Result<Constant, EvalError> {
    match v {
        Value::Const(c) => Ok(c),
        other => Err(EvalError::type_error(format!(
            "{} cannot be used as a property key",
            describe(&other)
        ))),
    }
}

pub(super) fn describe(v: &Value) -> String {
    match v {
        Value::Const(Constant::Str(s)) => crate::syntax::escape(s),
        Value::Const(c) => c.to_string(),
        Value::Loc(l) => format!("object {l}"),
        Value::Sandbox(sc) => format!("sandbox closure of {}", sc.sandbox),
    }
}
