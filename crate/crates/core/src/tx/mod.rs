//! Sandbox handles and their transactional operations: effect logs,
//! commit, rollback, revert, change and conflict analysis, policy rules.

mod analysis;
mod ops;
mod policy;

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::eval::{EvalError, Renamer};
use crate::heap::{Env, Location, SandboxId, Value};
use crate::syntax::{Name, SyntaxError};

pub use analysis::{Change, Conflict, ConflictKind, Difference, StatsSnapshot};
pub use policy::{Rule, RuleKind};

/// A sandbox as seen from the API. Handles are plain ids into the
/// interpreter that created them.
pub type SandboxHandle = SandboxId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EffectKind {
    Has,
    Get,
    Set,
    Call,
}

impl EffectKind {
    pub fn name(self) -> &'static str {
        match self {
            EffectKind::Has => "has",
            EffectKind::Get => "get",
            EffectKind::Set => "set",
            EffectKind::Call => "call",
        }
    }

    pub fn is_read(self) -> bool {
        matches!(self, EffectKind::Has | EffectKind::Get)
    }
}

#[derive(Debug, Clone)]
pub enum EffectData {
    Has,
    /// `observed` is the raw target value, before wrapping.
    Get {
        observed: Value,
    },
    /// `old` is the value visible inside the sandbox before the write, or
    /// `None` when no object on the chain had the property.
    Set {
        old: Option<Value>,
        new: Value,
    },
    Call,
}

#[derive(Debug, Clone)]
pub struct EffectRecord {
    pub seq: u64,
    pub sandbox: SandboxId,
    pub target: Location,
    pub prop: Option<Name>,
    pub data: EffectData,
}

impl EffectRecord {
    pub fn kind(&self) -> EffectKind {
        match self.data {
            EffectData::Has => EffectKind::Has,
            EffectData::Get { .. } => EffectKind::Get,
            EffectData::Set { .. } => EffectKind::Set,
            EffectData::Call => EffectKind::Call,
        }
    }

    pub fn same_field(&self, other: &EffectRecord) -> bool {
        self.prop.is_some() && self.target == other.target && self.prop == other.prop
    }
}

/// `(<seq>) <kind> [name=<prop>]`, optionally tagged `@SBX001`.
pub fn format_effect(e: &EffectRecord, with_sandbox_tag: bool) -> String {
    let prop = e.prop.as_deref().unwrap_or("-");
    let mut out = format!("({}) {} [name={}]", e.seq, e.kind().name(), prop);
    if with_sandbox_tag {
        out.push('@');
        out.push_str(&e.sandbox.to_string());
    }
    out
}

impl fmt::Display for EffectRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_effect(self, false))
    }
}

/// Per-sandbox bookkeeping.
#[derive(Debug, Clone)]
pub struct SandboxState {
    pub id: SandboxId,
    pub env: Env,
    /// The wrapped value bound as this sandbox's global, once known.
    pub global: Option<Value>,
    pub log: Vec<EffectRecord>,
    pub rules: Vec<Rule>,
    /// Outside target to its unique proxy in this sandbox.
    pub proxies: IndexMap<Location, Location>,
    /// Sandbox-made object to its unique outward proxy.
    pub outward: IndexMap<Location, Location>,
    /// Function object to its recompiled shadow.
    pub recompiled: HashMap<Location, Location>,
    pub concluded: bool,
}

impl SandboxState {
    pub(crate) fn new(id: SandboxId, env: Env) -> Self {
        SandboxState {
            id,
            env,
            global: None,
            log: Vec::new(),
            rules: Vec::new(),
            proxies: IndexMap::new(),
            outward: IndexMap::new(),
            recompiled: HashMap::new(),
            concluded: false,
        }
    }

    pub fn proxy_of(&self, target: Location) -> Option<Location> {
        self.proxies.get(&target).copied()
    }

    pub(crate) fn rename(&mut self, r: &mut Renamer<'_>) {
        self.env = r.env(&self.env);
        self.global = self.global.as_ref().map(|g| r.value(g));
        for rec in &mut self.log {
            rec.target = r.loc(rec.target);
            rec.data = match &rec.data {
                EffectData::Get { observed } => EffectData::Get {
                    observed: r.value(observed),
                },
                EffectData::Set { old, new } => EffectData::Set {
                    old: old.as_ref().map(|v| r.value(v)),
                    new: r.value(new),
                },
                other => other.clone(),
            };
        }
        for rule in &mut self.rules {
            rule.target = r.loc(rule.target);
            rule.predicate = rule.predicate.as_ref().map(|p| r.value(p));
        }
        self.proxies = self
            .proxies
            .iter()
            .map(|(k, v)| (r.loc(*k), r.loc(*v)))
            .collect();
        self.outward = self
            .outward
            .iter()
            .map(|(k, v)| (r.loc(*k), r.loc(*v)))
            .collect();
        self.recompiled = self
            .recompiled
            .iter()
            .map(|(k, v)| (r.loc(*k), r.loc(*v)))
            .collect();
    }
}

/// Which set effects a commit or rollback covers.
#[derive(Debug, Clone)]
pub enum Selection {
    All,
    /// One record by sequence number. With `strict`, committing a record
    /// that a later write to the same field superseded is an error.
    Effect {
        seq: u64,
        strict: bool,
    },
    /// The latest write to one field.
    Field {
        target: Location,
        prop: Name,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TxError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("effect ({seq}) is not the latest write to its property")]
    StaleEffect { seq: u64 },
    #[error("no effect ({seq}) in this sandbox")]
    UnknownEffect { seq: u64 },
    #[error("effect ({seq}) is not a property write")]
    NotAWrite { seq: u64 },
    #[error("value is not wrapped by {sandbox}")]
    NotWrapped { sandbox: SandboxId },
    #[error("{sandbox} has not completed a call or load")]
    NotConcluded { sandbox: SandboxId },
    #[error("rule predicate must be a function")]
    BadPredicate,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::rc::Rc;

    #[test]
    fn effect_format() {
        let rec = EffectRecord {
            seq: 12,
            sandbox: SandboxId(1),
            target: Location(0),
            prop: Some(Rc::from("heightOf")),
            data: EffectData::Get {
                observed: Value::UNDEFINED,
            },
        };
        assert_eq!(format_effect(&rec, false), "(12) get [name=heightOf]");
        assert_eq!(format_effect(&rec, true), "(12) get [name=heightOf]@SBX001");
        let call = EffectRecord {
            prop: None,
            data: EffectData::Call,
            ..rec
        };
        assert_eq!(format_effect(&call, false), "(12) call [name=-]");
    }
}
