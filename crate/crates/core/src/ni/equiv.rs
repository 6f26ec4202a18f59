//! Observational equivalence of two stores, read coinductively: a pair of
//! locations is assumed equivalent while its constituents are compared, so
//! cyclic heaps terminate.

use std::collections::HashSet;
use std::fmt;
use std::rc::Rc;

use crate::heap::{Closure, Env, Location, SandboxClosure, Store, StoredObject, Value};
use crate::render::render;
use crate::syntax::Name;

/// One step from a value to a constituent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathStep {
    /// A binding of the root environment.
    Var(Name),
    Prop(Name),
    Proto,
    /// A binding of a function's or sandbox closure's environment.
    Env(Name),
    Target,
    Shadow,
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathStep::Var(x) => write!(f, "{x}"),
            PathStep::Prop(p) => write!(f, ".{p}"),
            PathStep::Proto => f.write_str(".<proto>"),
            PathStep::Env(x) => write!(f, ".<env {x}>"),
            PathStep::Target => f.write_str(".<target>"),
            PathStep::Shadow => f.write_str(".<shadow>"),
        }
    }
}

pub fn format_path(path: &[PathStep]) -> String {
    path.iter().map(|s| s.to_string()).collect()
}

/// Where two stores first disagree, with short renderings of both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub path: Vec<PathStep>,
    pub reason: String,
    pub left: String,
    pub right: String,
}

impl Witness {
    /// The root variable the path starts from, when it starts at one.
    pub fn root(&self) -> Option<&Name> {
        match self.path.first() {
            Some(PathStep::Var(x)) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} vs {})",
            format_path(&self.path),
            self.reason,
            self.left,
            self.right
        )
    }
}

/// Bisimulation state for one query over a pair of stores.
pub struct Equiv<'a> {
    left: &'a Store,
    right: &'a Store,
    assumed: HashSet<(Location, Location)>,
}

type Outcome = Result<(), Witness>;

impl<'a> Equiv<'a> {
    pub fn new(left: &'a Store, right: &'a Store) -> Self {
        Equiv {
            left,
            right,
            assumed: HashSet::new(),
        }
    }

    fn fail(&self, reason: &str, v: Option<&Value>, w: Option<&Value>) -> Witness {
        let show =
            |s: &Store, x: Option<&Value>| x.map_or_else(|| "-".to_string(), |x| render(s, x, 1));
        Witness {
            path: Vec::new(),
            reason: reason.to_string(),
            left: show(self.left, v),
            right: show(self.right, w),
        }
    }

    pub fn values(&mut self, v: &Value, w: &Value) -> Outcome {
        match (v, w) {
            (Value::Const(a), Value::Const(b)) if a == b => Ok(()),
            (Value::Loc(l), Value::Loc(m)) => self.locations(*l, *m),
            (Value::Sandbox(a), Value::Sandbox(b)) => self.sandbox_closures(a, b),
            _ => Err(self.fail("values differ", Some(v), Some(w))),
        }
    }

    fn sandbox_closures(&mut self, a: &Rc<SandboxClosure>, b: &Rc<SandboxClosure>) -> Outcome {
        if a.param != b.param || a.body != b.body {
            let (v, w) = (Value::Sandbox(a.clone()), Value::Sandbox(b.clone()));
            return Err(self.fail("sandbox abstractions differ", Some(&v), Some(&w)));
        }
        self.closure_envs(&a.env, &b.env)
    }

    pub fn locations(&mut self, l: Location, m: Location) -> Outcome {
        if !self.assumed.insert((l, m)) {
            return Ok(());
        }
        let (vl, vm) = (Value::Loc(l), Value::Loc(m));
        match (self.left.get(l), self.right.get(m)) {
            (StoredObject::Plain(a), StoredObject::Plain(b)) => {
                if a.dict.len() != b.dict.len() || a.dict.keys().any(|k| !b.dict.contains_key(k)) {
                    return Err(self.fail("property sets differ", Some(&vl), Some(&vm)));
                }
                match (&a.closure, &b.closure) {
                    (None, None) => {}
                    (Some(c), Some(d)) => self.closures(c, d, &vl, &vm)?,
                    _ => {
                        return Err(self.fail("only one side is a function", Some(&vl), Some(&vm)))
                    }
                }
                for (k, x) in &a.dict {
                    self.values(x, &b.dict[k])
                        .map_err(|w| prefix(PathStep::Prop(k.clone()), w))?;
                }
                self.values(&a.proto, &b.proto)
                    .map_err(|w| prefix(PathStep::Proto, w))
            }
            (
                StoredObject::SandboxProxy {
                    target: t1,
                    shadow: s1,
                    env: e1,
                    sandbox: x1,
                },
                StoredObject::SandboxProxy {
                    target: t2,
                    shadow: s2,
                    env: e2,
                    sandbox: x2,
                },
            ) => {
                if x1 != x2 {
                    return Err(self.fail("proxies of different sandboxes", Some(&vl), Some(&vm)));
                }
                self.locations(*t1, *t2)
                    .map_err(|w| prefix(PathStep::Target, w))?;
                self.locations(*s1, *s2)
                    .map_err(|w| prefix(PathStep::Shadow, w))?;
                self.closure_envs(e1, e2)
            }
            (
                StoredObject::OutwardProxy {
                    inner: i1,
                    env: e1,
                    sandbox: x1,
                },
                StoredObject::OutwardProxy {
                    inner: i2,
                    env: e2,
                    sandbox: x2,
                },
            ) => {
                if x1 != x2 {
                    return Err(self.fail("proxies of different sandboxes", Some(&vl), Some(&vm)));
                }
                self.locations(*i1, *i2)
                    .map_err(|w| prefix(PathStep::Target, w))?;
                self.closure_envs(e1, e2)
            }
            _ => Err(self.fail("object kinds differ", Some(&vl), Some(&vm))),
        }
    }

    fn closures(&mut self, c: &Closure, d: &Closure, vl: &Value, vm: &Value) -> Outcome {
        if c.self_name != d.self_name || c.param != d.param || c.body != d.body {
            return Err(self.fail("function code differs", Some(vl), Some(vm)));
        }
        self.closure_envs(&c.env, &d.env)
    }

    fn closure_envs(&mut self, a: &Env, b: &Env) -> Outcome {
        self.envs(a, b, PathStep::Env)
    }

    fn envs(&mut self, a: &Env, b: &Env, step: fn(Name) -> PathStep) -> Outcome {
        let (ba, bb) = (a.bindings(), b.bindings());
        if ba.len() != bb.len() || ba.iter().zip(&bb).any(|(x, y)| x.0 != y.0) {
            let names = |bs: &[(Name, Value)]| {
                bs.iter()
                    .map(|(n, _)| n.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            return Err(Witness {
                path: Vec::new(),
                reason: "environment names differ".into(),
                left: format!("{{{}}}", names(&ba)),
                right: format!("{{{}}}", names(&bb)),
            });
        }
        for ((n, x), (_, y)) in ba.iter().zip(&bb) {
            self.values(x, y).map_err(|w| prefix(step(n.clone()), w))?;
        }
        Ok(())
    }

    /// Equivalence on every binding of two environments.
    pub fn environments(&mut self, a: &Env, b: &Env) -> Outcome {
        self.envs(a, b, PathStep::Var)
    }
}

fn prefix(step: PathStep, mut w: Witness) -> Witness {
    w.path.insert(0, step);
    w
}

/// Whether `v` in `left` and `w` in `right` are observationally equivalent.
pub fn eq_value(left: &Store, v: &Value, right: &Store, w: &Value) -> bool {
    Equiv::new(left, right).values(v, w).is_ok()
}

/// Equivalence of two stores on all values of an environment pair (the
/// same environment twice when both stores share location names).
pub fn eq_env(left: &Store, left_env: &Env, right: &Store, right_env: &Env) -> Result<(), Witness> {
    Equiv::new(left, right).environments(left_env, right_env)
}

/// Follows `path` from `env` in `store`. `None` when a step does not apply.
pub fn replay(store: &Store, env: &Env, path: &[PathStep]) -> Option<Value> {
    let mut steps = path.iter();
    let mut cur = match steps.next()? {
        PathStep::Var(x) => env.lookup(x)?.clone(),
        _ => return None,
    };
    for step in steps {
        cur = match (step, &cur) {
            (PathStep::Env(x), Value::Sandbox(sc)) => sc.env.lookup(x)?.clone(),
            (_, Value::Loc(l)) => match (step, store.get(*l)) {
                (PathStep::Prop(p), StoredObject::Plain(o)) => o.dict.get(p)?.clone(),
                (PathStep::Proto, StoredObject::Plain(o)) => o.proto.clone(),
                (PathStep::Env(x), StoredObject::Plain(o)) => {
                    o.closure.as_ref()?.env.lookup(x)?.clone()
                }
                (
                    PathStep::Env(x),
                    StoredObject::SandboxProxy { env, .. } | StoredObject::OutwardProxy { env, .. },
                ) => env.lookup(x)?.clone(),
                (PathStep::Target, StoredObject::SandboxProxy { target, .. }) => {
                    Value::Loc(*target)
                }
                (PathStep::Target, StoredObject::OutwardProxy { inner, .. }) => Value::Loc(*inner),
                (PathStep::Shadow, StoredObject::SandboxProxy { shadow, .. }) => {
                    Value::Loc(*shadow)
                }
                _ => return None,
            },
            _ => return None,
        };
    }
    Some(cur)
}

/// One-level comparison: constants, object kinds, property names, code and
/// environment names. A witness path always leads to a pair that fails it.
pub fn shallow_eq(left: &Store, v: &Value, right: &Store, w: &Value) -> bool {
    let env_names = |e: &Env| e.names();
    match (v, w) {
        (Value::Const(a), Value::Const(b)) => a == b,
        (Value::Sandbox(a), Value::Sandbox(b)) => {
            a.param == b.param && a.body == b.body && env_names(&a.env) == env_names(&b.env)
        }
        (Value::Loc(l), Value::Loc(m)) => match (left.get(*l), right.get(*m)) {
            (StoredObject::Plain(a), StoredObject::Plain(b)) => {
                let keys = |o: &crate::heap::PlainObject| {
                    let mut k: Vec<Name> = o.dict.keys().cloned().collect();
                    k.sort();
                    k
                };
                let code = match (&a.closure, &b.closure) {
                    (None, None) => true,
                    (Some(c), Some(d)) => {
                        c.self_name == d.self_name
                            && c.param == d.param
                            && c.body == d.body
                            && env_names(&c.env) == env_names(&d.env)
                    }
                    _ => false,
                };
                keys(a) == keys(b) && code
            }
            (
                StoredObject::SandboxProxy {
                    env: e1,
                    sandbox: x1,
                    ..
                },
                StoredObject::SandboxProxy {
                    env: e2,
                    sandbox: x2,
                    ..
                },
            )
            | (
                StoredObject::OutwardProxy {
                    env: e1,
                    sandbox: x1,
                    ..
                },
                StoredObject::OutwardProxy {
                    env: e2,
                    sandbox: x2,
                    ..
                },
            ) => x1 == x2 && env_names(e1) == env_names(e2),
            _ => false,
        },
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Interpreter;

    fn setup(src: &str) -> (Interpreter, Value) {
        let mut it = Interpreter::new();
        let v = it.eval_source(src).unwrap();
        (it, v)
    }

    #[test]
    fn constants() {
        let s = Store::new();
        assert!(eq_value(&s, &Value::num(5.0), &s, &Value::num(5.0)));
        assert!(!eq_value(&s, &Value::num(5.0), &s, &Value::num(6.0)));
    }

    #[test]
    fn self_cycles_terminate() {
        let (a, va) = setup("let o = new null; let _ = o.me = o; o");
        let (b, vb) = setup("let x = 1; let o = new null; let _ = o.me = o; o");
        assert!(eq_value(a.store(), &va, b.store(), &vb));
    }

    #[test]
    fn extra_key_is_a_difference() {
        let (a, va) = setup("let o = new null; let _ = o.x = 1; o");
        let (b, vb) = setup("let o = new null; let _ = o.x = 1; let _ = o.y = 2; o");
        let env_a = Env::empty().bind("o".into(), va);
        let env_b = Env::empty().bind("o".into(), vb.clone());
        let w = eq_env(a.store(), &env_a, b.store(), &env_b).unwrap_err();
        assert_eq!(format_path(&w.path), "o");
        let lv = replay(a.store(), &env_a, &w.path).unwrap();
        assert!(!shallow_eq(a.store(), &lv, b.store(), &vb));
    }

    #[test]
    fn nested_witness_path() {
        let (a, va) = setup("let o = new null; let _ = o.c = new null; let _ = o.c.v = 0; o");
        let (b, vb) = setup("let o = new null; let _ = o.c = new null; let _ = o.c.v = 1; o");
        let (ea, eb) = (
            Env::empty().bind("o".into(), va),
            Env::empty().bind("o".into(), vb),
        );
        let w = eq_env(a.store(), &ea, b.store(), &eb).unwrap_err();
        assert_eq!(format_path(&w.path), "o.c.v");
        assert_eq!((w.left.as_str(), w.right.as_str()), ("0", "1"));
        assert_eq!(w.root().map(|r| &**r), Some("o"));
    }
}
