//! Values, environments and the object store.

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use indexmap::IndexMap;

use crate::syntax::{Constant, Expr, Name};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location(pub usize);

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

/// Identity of one sandbox (one membrane). Rendered `SBX001` and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SandboxId(pub u32);

impl fmt::Display for SandboxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SBX{:03}", self.0)
    }
}

/// A sandbox abstraction closed over a secure environment.
#[derive(Debug)]
pub struct SandboxClosure {
    pub env: Env,
    pub param: Name,
    pub body: Rc<Expr>,
    pub sandbox: SandboxId,
}

#[derive(Debug, Clone)]
pub enum Value {
    Const(Constant),
    Loc(Location),
    Sandbox(Rc<SandboxClosure>),
}

impl Value {
    pub const UNDEFINED: Value = Value::Const(Constant::Undefined);
    pub const NULL: Value = Value::Const(Constant::Null);

    pub fn num(n: f64) -> Value {
        Value::Const(Constant::Number(n))
    }

    pub fn str(s: &str) -> Value {
        Value::Const(Constant::str(s))
    }

    pub fn as_loc(&self) -> Option<Location> {
        match self {
            Value::Loc(l) => Some(*l),
            _ => None,
        }
    }

    pub fn as_const(&self) -> Option<&Constant> {
        match self {
            Value::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Identity comparison: constants by `===`, locations by index,
    /// sandbox closures by allocation.
    pub fn same(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Const(a), Value::Const(b)) => a.strict_eq(b),
            (Value::Loc(a), Value::Loc(b)) => a == b,
            (Value::Sandbox(a), Value::Sandbox(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl From<Location> for Value {
    fn from(l: Location) -> Self {
        Value::Loc(l)
    }
}

impl From<Constant> for Value {
    fn from(c: Constant) -> Self {
        Value::Const(c)
    }
}

struct EnvNode {
    name: Name,
    value: Value,
    next: Env,
}

/// Persistent environment: extending shares the tail.
#[derive(Clone, Default)]
pub struct Env(Option<Rc<EnvNode>>);

impl Env {
    pub fn empty() -> Env {
        Env(None)
    }

    pub fn bind(&self, name: Name, value: Value) -> Env {
        Env(Some(Rc::new(EnvNode {
            name,
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        let mut cur = self.0.as_deref();
        while let Some(node) = cur {
            if &*node.name == name {
                return Some(&node.value);
            }
            cur = node.next.0.as_deref();
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    /// Effective bindings, innermost first wins, sorted by name.
    pub fn bindings(&self) -> Vec<(Name, Value)> {
        let mut seen: IndexMap<Name, Value> = IndexMap::new();
        let mut cur = self.0.as_deref();
        while let Some(node) = cur {
            seen.entry(node.name.clone())
                .or_insert_with(|| node.value.clone());
            cur = node.next.0.as_deref();
        }
        let mut out: Vec<_> = seen.into_iter().collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn names(&self) -> Vec<Name> {
        self.bindings().into_iter().map(|(n, _)| n).collect()
    }

    /// Rebuilds the environment with every value passed through `f`.
    pub fn map_values(&self, f: &mut impl FnMut(&Value) -> Value) -> Env {
        let mut nodes = Vec::new();
        let mut cur = self.0.as_deref();
        while let Some(node) = cur {
            nodes.push((node.name.clone(), f(&node.value)));
            cur = node.next.0.as_deref();
        }
        nodes
            .into_iter()
            .rev()
            .fold(Env::empty(), |env, (n, v)| env.bind(n, v))
    }

    /// All values in the chain, shadowed ones included.
    pub fn values(&self) -> impl Iterator<Item = &Value> {
        let mut cur = self.0.as_deref();
        std::iter::from_fn(move || {
            let node = cur?;
            cur = node.next.0.as_deref();
            Some(&node.value)
        })
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.bindings()).finish()
    }
}

/// Property map with insertion order.
pub type Dictionary = IndexMap<Name, Value>;

#[derive(Debug, Clone)]
pub struct Closure {
    pub env: Env,
    pub self_name: Option<Name>,
    pub param: Name,
    pub body: Rc<Expr>,
}

#[derive(Debug, Clone)]
pub struct PlainObject {
    pub dict: Dictionary,
    pub closure: Option<Closure>,
    pub proto: Value,
}

impl PlainObject {
    pub fn empty(proto: Value) -> Self {
        PlainObject {
            dict: Dictionary::new(),
            closure: None,
            proto,
        }
    }
}

#[derive(Debug, Clone)]
pub enum StoredObject {
    Plain(PlainObject),
    /// Inward membrane: reads prefer `shadow`, writes land there.
    SandboxProxy {
        target: Location,
        shadow: Location,
        env: Env,
        sandbox: SandboxId,
    },
    /// Outward membrane around a sandbox-made object that escaped by commit.
    OutwardProxy {
        inner: Location,
        env: Env,
        sandbox: SandboxId,
    },
}

impl StoredObject {
    pub fn as_plain(&self) -> Option<&PlainObject> {
        match self {
            StoredObject::Plain(p) => Some(p),
            _ => None,
        }
    }

    /// Every value directly referenced by this object.
    pub fn children(&self) -> Vec<Value> {
        let mut out = Vec::new();
        match self {
            StoredObject::Plain(p) => {
                out.extend(p.dict.values().cloned());
                out.push(p.proto.clone());
                if let Some(c) = &p.closure {
                    out.extend(c.env.values().cloned());
                }
            }
            StoredObject::SandboxProxy {
                target,
                shadow,
                env,
                ..
            } => {
                out.push(Value::Loc(*target));
                out.push(Value::Loc(*shadow));
                out.extend(env.values().cloned());
            }
            StoredObject::OutwardProxy { inner, env, .. } => {
                out.push(Value::Loc(*inner));
                out.extend(env.values().cloned());
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Slot {
    pub object: StoredObject,
    /// Sandbox whose code allocated this object; `None` for outside code.
    pub owner: Option<SandboxId>,
}

/// Append-only heap. Locations are never reused.
#[derive(Debug, Clone, Default)]
pub struct Store {
    slots: Vec<Slot>,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn alloc(&mut self, object: StoredObject, owner: Option<SandboxId>) -> Location {
        self.slots.push(Slot { object, owner });
        Location(self.slots.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, l: Location) -> &StoredObject {
        &self.slots[l.0].object
    }

    pub fn get_mut(&mut self, l: Location) -> &mut StoredObject {
        &mut self.slots[l.0].object
    }

    pub fn try_get(&self, l: Location) -> Option<&StoredObject> {
        self.slots.get(l.0).map(|s| &s.object)
    }

    pub fn plain(&self, l: Location) -> Option<&PlainObject> {
        self.get(l).as_plain()
    }

    pub fn plain_mut(&mut self, l: Location) -> Option<&mut PlainObject> {
        match self.get_mut(l) {
            StoredObject::Plain(p) => Some(p),
            _ => None,
        }
    }

    pub fn owner(&self, l: Location) -> Option<SandboxId> {
        self.slots[l.0].owner
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub(crate) fn slots_mut(&mut self) -> &mut Vec<Slot> {
        &mut self.slots
    }

    /// Least set of locations reachable from `roots` through dictionaries,
    /// prototypes, closure environments, proxies and sandbox closures.
    pub fn reachable_from<'a>(
        &self,
        roots: impl IntoIterator<Item = &'a Value>,
    ) -> BTreeSet<Location> {
        let mut seen = BTreeSet::new();
        let mut pending: Vec<Value> = roots.into_iter().cloned().collect();
        while let Some(v) = pending.pop() {
            match v {
                Value::Const(_) => {}
                Value::Sandbox(sc) => pending.extend(sc.env.values().cloned()),
                Value::Loc(l) => {
                    if seen.insert(l) {
                        pending.extend(self.get(l).children());
                    }
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj() -> StoredObject {
        StoredObject::Plain(PlainObject::empty(Value::NULL))
    }

    #[test]
    fn allocation_is_monotone() {
        let mut s = Store::new();
        let a = s.alloc(obj(), None);
        let b = s.alloc(obj(), None);
        assert_eq!(a, Location(0));
        assert_ne!(a, b);
        for _ in 2..1000 {
            s.alloc(obj(), None);
        }
        assert_eq!(s.alloc(obj(), None), Location(1000));
    }

    #[test]
    fn reachability() {
        let mut s = Store::new();
        assert!(s.reachable_from(&[Value::num(1.0)]).is_empty());
        let l0 = s.alloc(obj(), None);
        let l1 = s.alloc(obj(), None);
        let _unreached = s.alloc(obj(), None);
        s.plain_mut(l0)
            .unwrap()
            .dict
            .insert(Rc::from("x"), Value::Loc(l1));
        assert_eq!(
            s.reachable_from(&[Value::Loc(l0)]),
            BTreeSet::from([l0, l1])
        );
        s.plain_mut(l1).unwrap().proto = Value::Loc(l0);
        assert_eq!(
            s.reachable_from(&[Value::Loc(l1)]),
            BTreeSet::from([l0, l1])
        );
    }

    #[test]
    fn env_shadowing() {
        let env = Env::empty()
            .bind(Rc::from("x"), Value::num(1.0))
            .bind(Rc::from("x"), Value::num(2.0));
        assert!(env.lookup("x").unwrap().same(&Value::num(2.0)));
        assert_eq!(env.bindings().len(), 1);
        assert!(env.lookup("y").is_none());
    }
}
