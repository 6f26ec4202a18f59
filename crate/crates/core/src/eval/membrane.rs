use std::rc::Rc;

use crate::heap::{Closure, Env, Location, PlainObject, SandboxId, StoredObject, Value};
use crate::syntax::{Constant, Expr, Name, GLOBAL_BINDER};
use crate::tx::EffectData;

use super::{EvalError, InferenceRule as R, Interpreter};

impl Interpreter {
    /// Moves a value into sandbox `s`. Constants and sandbox closures pass
    /// through; every outside object gets exactly one proxy per sandbox.
    pub fn wrap(&mut self, s: SandboxId, env: &Env, v: Value) -> Result<Value, EvalError> {
        if !self.config.membranes {
            return Ok(v);
        }
        let l = match v {
            Value::Const(_) => {
                self.tick(R::WrapConst)?;
                return Ok(v);
            }
            Value::Sandbox(_) => {
                self.tick(R::WrapSandbox)?;
                return Ok(v);
            }
            Value::Loc(l) => l,
        };
        match self.store.get(l) {
            StoredObject::SandboxProxy { sandbox, .. } if *sandbox == s => {
                self.tick(R::WrapProxyObject)?;
                return Ok(v);
            }
            StoredObject::OutwardProxy { inner, sandbox, .. } if *sandbox == s => {
                let inner = *inner;
                self.tick(R::WrapUnwrapOutward)?;
                return Ok(Value::Loc(inner));
            }
            _ if self.store.owner(l) == Some(s) => {
                self.tick(R::WrapInternal)?;
                return Ok(v);
            }
            _ => {}
        }
        if let Some(&p) = self.sandbox(s).proxies.get(&l) {
            self.tick(R::WrapExisting)?;
            return Ok(Value::Loc(p));
        }
        self.tick(R::WrapNonProxyObject)?;
        let shadow = self.recompile(s, env, l)?;
        let proxy = self.store.alloc(
            StoredObject::SandboxProxy {
                target: l,
                shadow,
                env: env.clone(),
                sandbox: s,
            },
            Some(s),
        );
        self.sandbox_mut(s).proxies.insert(l, proxy);
        Ok(Value::Loc(proxy))
    }

    /// Builds the shadow for `l` in sandbox `s`: an empty object, or for a
    /// function a copy of its code closed over `env` instead of its own
    /// environment. Free names of the code then resolve through the
    /// sandbox global.
    pub fn recompile(
        &mut self,
        s: SandboxId,
        env: &Env,
        l: Location,
    ) -> Result<Location, EvalError> {
        match self.store.get(l) {
            StoredObject::Plain(PlainObject { closure: None, .. }) => {
                self.tick(R::RecompileNonFunctionObject)?;
                Ok(self.store.alloc(
                    StoredObject::Plain(PlainObject::empty(Value::NULL)),
                    Some(s),
                ))
            }
            StoredObject::Plain(PlainObject {
                closure: Some(c), ..
            }) => {
                if let Some(&shadow) = self.sandbox(s).recompiled.get(&l) {
                    self.tick(R::RecompileExisting)?;
                    return Ok(shadow);
                }
                let c = c.clone();
                self.tick(R::RecompileFunctionObject)?;
                let mut bound = vec![c.param.clone()];
                let body = erase_free(&c.body, &mut bound, env);
                let closure = Closure {
                    env: env.clone(),
                    self_name: None,
                    param: c.param,
                    body,
                };
                let shadow = self.store.alloc(
                    StoredObject::Plain(PlainObject {
                        closure: Some(closure),
                        ..PlainObject::empty(Value::NULL)
                    }),
                    Some(s),
                );
                self.sandbox_mut(s).recompiled.insert(l, shadow);
                Ok(shadow)
            }
            StoredObject::SandboxProxy {
                target,
                shadow,
                sandbox,
                ..
            } => {
                let (target, shadow, same) = (*target, *shadow, *sandbox == s);
                self.tick(R::RecompileProxyObject)?;
                if same {
                    Ok(shadow)
                } else {
                    self.recompile(s, env, target)
                }
            }
            StoredObject::OutwardProxy { inner, .. } => {
                let inner = *inner;
                self.tick(R::RecompileProxyObject)?;
                self.recompile(s, env, inner)
            }
        }
    }

    pub(crate) fn proxy_get(&mut self, p: Location, key: &Constant) -> Result<Value, EvalError> {
        let StoredObject::SandboxProxy {
            target,
            shadow,
            env,
            sandbox,
        } = self.store.get(p).clone()
        else {
            unreachable!("proxy_get on a non-proxy")
        };
        let k = key.to_key();
        if let Some(v) = self
            .store
            .plain(shadow)
            .and_then(|o| o.dict.get(&k))
            .cloned()
        {
            self.tick(R::GetShadow)?;
            self.tick(R::Get)?;
            return Ok(v);
        }
        self.tick(R::GetSandbox)?;
        let is_global = matches!(self.sandbox(sandbox).global, Some(Value::Loc(g)) if g == p);
        if is_global {
            self.log_effect(sandbox, target, Some(k.clone()), EffectData::Has);
        }
        let raw = self.get_property(target, key)?;
        self.log_effect(
            sandbox,
            target,
            Some(k),
            EffectData::Get {
                observed: raw.clone(),
            },
        );
        self.wrap(sandbox, &env, raw)
    }

    pub(crate) fn proxy_put(
        &mut self,
        p: Location,
        key: &Constant,
        v: Value,
    ) -> Result<Value, EvalError> {
        let StoredObject::SandboxProxy {
            target,
            shadow,
            env,
            sandbox,
        } = self.store.get(p).clone()
        else {
            unreachable!("proxy_put on a non-proxy")
        };
        self.tick(R::PutSandbox)?;
        let k = key.to_key();
        let old = match self
            .store
            .plain(shadow)
            .and_then(|o| o.dict.get(&k))
            .cloned()
        {
            Some(v) => Some(v),
            None => match self.peek(target, &k)? {
                Some(raw) => Some(self.wrap(sandbox, &env, raw)?),
                None => None,
            },
        };
        self.tick(R::Put)?;
        if let Some(o) = self.store.plain_mut(shadow) {
            o.dict.insert(k.clone(), v.clone());
        }
        self.log_effect(
            sandbox,
            target,
            Some(k),
            EffectData::Set {
                old,
                new: v.clone(),
            },
        );
        Ok(v)
    }

    pub(crate) fn outward_get(&mut self, p: Location, key: &Constant) -> Result<Value, EvalError> {
        let StoredObject::OutwardProxy { inner, sandbox, .. } = *self.store.get(p) else {
            unreachable!("outward_get on a non-proxy")
        };
        self.tick(R::OutwardGet)?;
        let v = self.get_property(inner, key)?;
        self.wrap_outward(sandbox, v)
    }

    pub(crate) fn outward_put(
        &mut self,
        p: Location,
        key: &Constant,
        v: Value,
    ) -> Result<Value, EvalError> {
        let StoredObject::OutwardProxy {
            inner,
            env,
            sandbox,
        } = self.store.get(p).clone()
        else {
            unreachable!("outward_put on a non-proxy")
        };
        self.tick(R::OutwardPut)?;
        let inside = self.wrap(sandbox, &env, v.clone())?;
        self.put_property(inner, key, inside)?;
        Ok(v)
    }

    /// Moves a sandbox value out of sandbox `s`: its proxies unwrap to their
    /// targets and objects it made get an outward proxy.
    pub fn wrap_outward(&mut self, s: SandboxId, v: Value) -> Result<Value, EvalError> {
        if !self.config.membranes {
            return Ok(v);
        }
        self.tick(R::WrapOutward)?;
        let Value::Loc(l) = v else { return Ok(v) };
        match self.store.get(l) {
            StoredObject::SandboxProxy {
                target, sandbox, ..
            } if *sandbox == s => return Ok(Value::Loc(*target)),
            StoredObject::OutwardProxy { .. } => return Ok(v),
            _ if self.store.owner(l) != Some(s) => return Ok(v),
            _ => {}
        }
        if let Some(&p) = self.sandbox(s).outward.get(&l) {
            return Ok(Value::Loc(p));
        }
        let env = self.sandbox(s).env.clone();
        let p = self.store.alloc(
            StoredObject::OutwardProxy {
                inner: l,
                env,
                sandbox: s,
            },
            None,
        );
        self.sandbox_mut(s).outward.insert(l, p);
        Ok(Value::Loc(p))
    }

    /// Visible value of `k` on `l` without logging; `None` when no object
    /// on the chain has the key.
    pub(crate) fn peek(&mut self, l: Location, k: &Name) -> Result<Option<Value>, EvalError> {
        let mut cur = l;
        loop {
            match self.store.get(cur).clone() {
                StoredObject::Plain(p) => {
                    if let Some(v) = p.dict.get(k) {
                        return Ok(Some(v.clone()));
                    }
                    match p.proto {
                        Value::Loc(next) => cur = next,
                        _ => return Ok(None),
                    }
                }
                StoredObject::SandboxProxy {
                    target,
                    shadow,
                    env,
                    sandbox,
                } => {
                    if let Some(v) = self.store.plain(shadow).and_then(|o| o.dict.get(k)) {
                        return Ok(Some(v.clone()));
                    }
                    return match self.peek(target, k)? {
                        Some(raw) => Ok(Some(self.wrap(sandbox, &env, raw)?)),
                        None => Ok(None),
                    };
                }
                StoredObject::OutwardProxy { inner, sandbox, .. } => {
                    return match self.peek(inner, k)? {
                        Some(v) => Ok(Some(self.wrap_outward(sandbox, v)?)),
                        None => Ok(None),
                    };
                }
            }
        }
    }

    pub(crate) fn log_call(&mut self, s: SandboxId, target: Location) {
        self.log_effect(s, target, None, EffectData::Call);
    }

    pub(crate) fn log_effect(
        &mut self,
        s: SandboxId,
        target: Location,
        prop: Option<Name>,
        data: EffectData,
    ) {
        if !self.config.log_effects {
            return;
        }
        let seq = self.clock;
        self.clock += 1;
        self.sandbox_mut(s).log.push(crate::tx::EffectRecord {
            seq,
            sandbox: s,
            target,
            prop,
            data,
        });
    }
}

/// Rewrites free identifiers of a function body (those neither bound inside
/// it nor present in `keep`) into reads of the sandbox global.
fn erase_free(e: &Rc<Expr>, bound: &mut Vec<Name>, keep: &Env) -> Rc<Expr> {
    let go = |c: &Rc<Expr>, bound: &mut Vec<Name>| erase_free(c, bound, keep);
    Rc::new(match &**e {
        Expr::Var(x) if &**x == GLOBAL_BINDER || bound.contains(x) || keep.lookup(x).is_some() => {
            return e.clone()
        }
        Expr::Var(x) => Expr::Get(
            Rc::new(Expr::Var(Rc::from(GLOBAL_BINDER))),
            Rc::new(Expr::Const(Constant::Str(x.clone()))),
        ),
        Expr::Const(_) => return e.clone(),
        Expr::Binary(op, a, b) => Expr::Binary(*op, go(a, bound), go(b, bound)),
        Expr::Unary(op, a) => Expr::Unary(*op, go(a, bound)),
        Expr::Abs {
            self_name,
            param,
            body,
        } => {
            let mark = bound.len();
            bound.extend(self_name.iter().cloned());
            bound.push(param.clone());
            let body = go(body, bound);
            bound.truncate(mark);
            Expr::Abs {
                self_name: self_name.clone(),
                param: param.clone(),
                body,
            }
        }
        Expr::SbxAbs { param, body } => {
            bound.push(param.clone());
            let body = go(body, bound);
            bound.pop();
            Expr::SbxAbs {
                param: param.clone(),
                body,
            }
        }
        Expr::App(f, a) => Expr::App(go(f, bound), go(a, bound)),
        Expr::New(p) => Expr::New(go(p, bound)),
        Expr::Fresh(p) => Expr::Fresh(go(p, bound)),
        Expr::Get(o, k) => Expr::Get(go(o, bound), go(k, bound)),
        Expr::Put(o, k, v) => Expr::Put(go(o, bound), go(k, bound), go(v, bound)),
        // Closures only ever hold desugared bodies.
        Expr::Let { .. } | Expr::Member(..) | Expr::MemberPut(..) | Expr::Assign(..) => {
            return e.clone()
        }
    })
}
