use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;

use crate::eval::Interpreter;
use crate::heap::{Location, SandboxId, StoredObject, Value};
use crate::syntax::{Constant, Name};

use super::{format_effect, EffectData, EffectKind, EffectRecord, TxError};

/// A shadow property whose value differs from the outside.
#[derive(Debug, Clone)]
pub struct Change {
    pub target: Location,
    pub prop: Name,
    pub shadow_value: Value,
    pub outside_value: Value,
}

/// An outside property that moved since the sandbox read it.
#[derive(Debug, Clone)]
pub struct Difference {
    pub target: Location,
    pub prop: Name,
    pub observed: Value,
    pub current: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConflictKind {
    ReadAfterWrite,
    WriteAfterWrite,
}

impl ConflictKind {
    pub fn abbrev(self) -> &'static str {
        match self {
            ConflictKind::ReadAfterWrite => "RAW",
            ConflictKind::WriteAfterWrite => "WAW",
        }
    }
}

/// `mine` comes from the first handle of the query, `theirs` from the second.
#[derive(Debug, Clone)]
pub struct Conflict {
    pub kind: ConflictKind,
    pub mine: EffectRecord,
    pub theirs: EffectRecord,
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Conflict: {} - {}",
            format_effect(&self.mine, true),
            format_effect(&self.theirs, true)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StatsSnapshot {
    pub objects_wrapped: usize,
    pub effects_total: usize,
    pub distinct_reads: usize,
    pub distinct_writes: usize,
    pub distinct_calls: usize,
}

fn same_outside(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Const(Constant::Number(x)), Value::Const(Constant::Number(y))) => {
            x == y || (x.is_nan() && y.is_nan())
        }
        _ => a.same(b),
    }
}

impl Interpreter {
    pub fn effects_of(&self, h: SandboxId, target: &Value) -> Vec<EffectRecord> {
        let Some(l) = self.outside_target(h, target) else {
            return Vec::new();
        };
        self.sandbox(h)
            .log
            .iter()
            .filter(|r| r.target == l)
            .cloned()
            .collect()
    }

    pub fn read_effects_of(&self, h: SandboxId, target: &Value) -> Vec<EffectRecord> {
        self.effects_of(h, target)
            .into_iter()
            .filter(|r| r.kind().is_read())
            .collect()
    }

    pub fn write_effects_of(&self, h: SandboxId, target: &Value) -> Vec<EffectRecord> {
        self.effects_of(h, target)
            .into_iter()
            .filter(|r| r.kind() == EffectKind::Set)
            .collect()
    }

    /// Whether a sandbox-side value stands for the outside value `outside`.
    fn inside_matches(&self, h: SandboxId, inside: &Value, outside: &Value) -> bool {
        if same_outside(inside, outside) {
            return true;
        }
        let (Value::Loc(i), Value::Loc(o)) = (inside, outside) else {
            return false;
        };
        match self.store.get(*i) {
            StoredObject::SandboxProxy {
                target, sandbox, ..
            } if *sandbox == h => target == o,
            _ => self.sandbox(h).outward.get(i) == Some(o),
        }
    }

    /// Raw value of `prop` on an outside object, without logging.
    fn outside_value(&mut self, target: Location, prop: &Name) -> Value {
        self.with_budget(u64::MAX, |it| it.peek(target, prop))
            .ok()
            .flatten()
            .unwrap_or(Value::UNDEFINED)
    }

    pub fn changes_of(&mut self, h: SandboxId, target: Option<&Value>) -> Vec<Change> {
        let only = target.and_then(|t| self.outside_target(h, t));
        let proxies: Vec<(Location, Location)> = self
            .sandbox(h)
            .proxies
            .iter()
            .map(|(t, p)| (*t, *p))
            .collect();
        let mut out = Vec::new();
        for (t, p) in proxies {
            if only.is_some_and(|o| o != t) {
                continue;
            }
            let StoredObject::SandboxProxy { shadow, .. } = *self.store.get(p) else {
                continue;
            };
            let entries: Vec<(Name, Value)> = self
                .store
                .plain(shadow)
                .map(|o| o.dict.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
                .unwrap_or_default();
            for (prop, shadow_value) in entries {
                let outside_value = self.outside_value(t, &prop);
                if !self.inside_matches(h, &shadow_value, &outside_value) {
                    out.push(Change {
                        target: t,
                        prop,
                        shadow_value,
                        outside_value,
                    });
                }
            }
        }
        out
    }

    pub fn differences_of(
        &mut self,
        h: SandboxId,
        target: Option<&Value>,
    ) -> Result<Vec<Difference>, TxError> {
        if !self.sandbox(h).concluded {
            return Err(TxError::NotConcluded { sandbox: h });
        }
        let only = target.and_then(|t| self.outside_target(h, t));
        let mut latest: IndexMap<(Location, Name), Value> = IndexMap::new();
        for r in &self.sandbox(h).log {
            if let (EffectData::Get { observed }, Some(prop)) = (&r.data, &r.prop) {
                if only.is_none_or(|o| o == r.target) {
                    latest.insert((r.target, prop.clone()), observed.clone());
                }
            }
        }
        let mut out = Vec::new();
        for ((t, prop), observed) in latest {
            let current = self.outside_value(t, &prop);
            if !same_outside(&observed, &current) {
                out.push(Difference {
                    target: t,
                    prop,
                    observed,
                    current,
                });
            }
        }
        Ok(out)
    }

    /// Read-after-write and write-after-write pairs between two sandboxes,
    /// ordered by the later access.
    pub fn conflicts_with(&self, a: SandboxId, b: SandboxId) -> Vec<Conflict> {
        if a == b {
            return Vec::new();
        }
        let (la, lb) = (&self.sandbox(a).log, &self.sandbox(b).log);
        let mut out = Vec::new();
        let mut scan =
            |writes: &[EffectRecord], accesses: &[EffectRecord], writer_is_mine: bool| {
                for w in writes.iter().filter(|r| r.kind() == EffectKind::Set) {
                    for x in accesses.iter().filter(|x| x.seq > w.seq && x.same_field(w)) {
                        let kind = match x.kind() {
                            EffectKind::Set => ConflictKind::WriteAfterWrite,
                            EffectKind::Has | EffectKind::Get => ConflictKind::ReadAfterWrite,
                            EffectKind::Call => continue,
                        };
                        let (mine, theirs) = if writer_is_mine {
                            (w.clone(), x.clone())
                        } else {
                            (x.clone(), w.clone())
                        };
                        out.push((x.seq, w.seq, Conflict { kind, mine, theirs }));
                    }
                }
            };
        scan(la, lb, true);
        scan(lb, la, false);
        out.sort_by_key(|(access, write, _)| (*access, *write));
        out.into_iter().map(|(_, _, c)| c).collect()
    }

    pub fn in_conflict_with(&self, a: SandboxId, b: SandboxId) -> bool {
        !self.conflicts_with(a, b).is_empty()
    }

    pub fn stats(&self, h: SandboxId) -> StatsSnapshot {
        let sb = self.sandbox(h);
        let mut reads = HashSet::new();
        let mut writes = HashSet::new();
        let mut calls = HashSet::new();
        for r in &sb.log {
            match r.kind() {
                EffectKind::Has | EffectKind::Get => {
                    reads.insert((r.target, r.prop.clone()));
                }
                EffectKind::Set => {
                    writes.insert((r.target, r.prop.clone()));
                }
                EffectKind::Call => {
                    calls.insert(r.target);
                }
            }
        }
        StatsSnapshot {
            objects_wrapped: sb.proxies.len(),
            effects_total: sb.log.len(),
            distinct_reads: reads.len(),
            distinct_writes: writes.len(),
            distinct_calls: calls.len(),
        }
    }
}
