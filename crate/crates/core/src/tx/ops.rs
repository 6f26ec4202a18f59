use std::rc::Rc;

use indexmap::IndexSet;

use crate::eval::{EvalError, Interpreter};
use crate::heap::{Env, Location, SandboxId, StoredObject, Value};
use crate::syntax::{self, Constant, Name, GLOBAL_BINDER};

use super::{EffectData, EffectRecord, Selection, TxError};

impl Interpreter {
    /// Creates a sandbox whose global is `global`, wrapped.
    pub fn sandbox_new(&mut self, global: Value) -> SandboxId {
        let id = self.new_sandbox(Env::empty());
        let wrapped = self
            .with_budget(u64::MAX, |it| it.wrap(id, &Env::empty(), global))
            .expect("wrapping without a budget cannot fail");
        self.sandbox_mut(id).global = Some(wrapped);
        id
    }

    /// Calls `f` on `arg` inside sandbox `h`. Both are wrapped first; the
    /// result is the sandbox-side value.
    pub fn sandbox_call(&mut self, h: SandboxId, f: &Value, arg: Value) -> Result<Value, TxError> {
        let budget = self.config.step_budget;
        self.sandbox_call_with_budget(h, f, arg, budget)
    }

    pub fn sandbox_call_with_budget(
        &mut self,
        h: SandboxId,
        f: &Value,
        arg: Value,
        budget: u64,
    ) -> Result<Value, TxError> {
        if !self.is_callable(f) {
            return Err(EvalError::type_error("sandbox call target is not a function").into());
        }
        let env = self.sandbox(h).env.clone();
        let out = self.with_budget(budget, |it| {
            let wf = it.wrap(h, &env, f.clone())?;
            let wa = it.wrap(h, &env, arg)?;
            it.run_apply(wf, wa)
        })?;
        self.conclude(h)?;
        Ok(out)
    }

    /// Runs script text inside sandbox `h`. Free names resolve through the
    /// sandbox global; every load gets its own scope.
    pub fn sandbox_load(&mut self, h: SandboxId, source: &str) -> Result<Value, TxError> {
        let e = syntax::desugar(&syntax::parse_str(source)?, Some(GLOBAL_BINDER))
            .map_err(syntax::SyntaxError::from)?;
        let env = self.sandbox(h).env.clone();
        let budget = self.config.step_budget;
        let saved = self.context;
        self.context = Some(h);
        let out = self.with_budget(budget, |it| it.run(Rc::new(e), env));
        self.context = saved;
        let out = out?;
        self.conclude(h)?;
        Ok(out)
    }

    fn conclude(&mut self, h: SandboxId) -> Result<(), TxError> {
        self.sandbox_mut(h).concluded = true;
        self.run_rules(h)
    }

    fn record(&self, h: SandboxId, seq: u64) -> Result<&EffectRecord, TxError> {
        self.sandbox(h)
            .log
            .iter()
            .find(|r| r.seq == seq)
            .ok_or(TxError::UnknownEffect { seq })
    }

    fn latest_set(&self, h: SandboxId, target: Location, prop: &str) -> Option<&EffectRecord> {
        self.sandbox(h).log.iter().rev().find(|r| {
            matches!(r.data, EffectData::Set { .. })
                && r.target == target
                && r.prop.as_deref() == Some(prop)
        })
    }

    /// Writes the final shadow value of each selected field to its target.
    /// Proxies unwrap to their targets and sandbox-made objects leave
    /// behind an outward proxy.
    pub fn commit(&mut self, h: SandboxId, selection: Selection) -> Result<(), TxError> {
        let fields: Vec<(Location, Name)> = match selection {
            Selection::All => {
                let mut fields = IndexSet::new();
                for r in &self.sandbox(h).log {
                    if let (EffectData::Set { .. }, Some(p)) = (&r.data, &r.prop) {
                        fields.insert((r.target, p.clone()));
                    }
                }
                fields.into_iter().collect()
            }
            Selection::Effect { seq, strict } => {
                let r = self.record(h, seq)?;
                let (EffectData::Set { .. }, Some(prop)) = (&r.data, r.prop.clone()) else {
                    return Err(TxError::NotAWrite { seq });
                };
                let target = r.target;
                if strict && self.latest_set(h, target, &prop).map(|l| l.seq) != Some(seq) {
                    return Err(TxError::StaleEffect { seq });
                }
                vec![(target, prop)]
            }
            Selection::Field { target, prop } => {
                if self.latest_set(h, target, &prop).is_none() {
                    return Ok(());
                }
                vec![(target, prop)]
            }
        };
        self.with_budget(u64::MAX, |it| {
            for (target, prop) in fields {
                let Some(shadow) = it.shadow_of(h, target) else {
                    continue;
                };
                let Some(v) = it
                    .store
                    .plain(shadow)
                    .and_then(|o| o.dict.get(&prop))
                    .cloned()
                else {
                    continue;
                };
                let out = it.wrap_outward(h, v)?;
                it.put_property(target, &Constant::Str(prop), out)?;
            }
            Ok(())
        })
    }

    /// Restores shadow properties to the values they had before the
    /// selected writes. Targets are never touched.
    pub fn rollback(&mut self, h: SandboxId, selection: Selection) -> Result<(), TxError> {
        let records: Vec<EffectRecord> = match selection {
            Selection::All => self
                .sandbox(h)
                .log
                .iter()
                .rev()
                .filter(|r| matches!(r.data, EffectData::Set { .. }))
                .cloned()
                .collect(),
            Selection::Effect { seq, .. } => {
                let r = self.record(h, seq)?;
                if !matches!(r.data, EffectData::Set { .. }) {
                    return Err(TxError::NotAWrite { seq });
                }
                vec![r.clone()]
            }
            Selection::Field { target, prop } => self
                .sandbox(h)
                .log
                .iter()
                .rev()
                .filter(|r| {
                    matches!(r.data, EffectData::Set { .. })
                        && r.target == target
                        && r.prop.as_deref() == Some(&*prop)
                })
                .cloned()
                .collect(),
        };
        for r in records {
            let (EffectData::Set { old, .. }, Some(prop)) = (r.data, r.prop) else {
                continue;
            };
            let Some(shadow) = self.shadow_of(h, r.target) else {
                continue;
            };
            let Some(dict) = self.store.plain_mut(shadow).map(|o| &mut o.dict) else {
                continue;
            };
            match old {
                Some(v) => {
                    dict.insert(prop, v);
                }
                None => {
                    dict.shift_remove(&prop);
                }
            }
        }
        Ok(())
    }

    /// Empties the shadow of `target`'s proxy so sandbox reads see the
    /// outside state again.
    pub fn revert_of(&mut self, h: SandboxId, target: &Value) -> Result<(), TxError> {
        let target = self
            .outside_target(h, target)
            .ok_or(TxError::NotWrapped { sandbox: h })?;
        let shadow = self
            .shadow_of(h, target)
            .ok_or(TxError::NotWrapped { sandbox: h })?;
        if let Some(o) = self.store.plain_mut(shadow) {
            o.dict.clear();
        }
        Ok(())
    }

    /// Maps a value naming an outside object (or this sandbox's proxy of
    /// it) to the outside location.
    pub fn outside_target(&self, h: SandboxId, v: &Value) -> Option<Location> {
        let l = v.as_loc()?;
        match self.store.get(l) {
            StoredObject::SandboxProxy {
                target, sandbox, ..
            } if *sandbox == h => Some(*target),
            _ => Some(l),
        }
    }

    pub fn proxy_of(&self, h: SandboxId, target: Location) -> Option<Location> {
        self.sandbox(h).proxy_of(target)
    }

    pub fn shadow_of(&self, h: SandboxId, target: Location) -> Option<Location> {
        match self.store.get(self.proxy_of(h, target)?) {
            StoredObject::SandboxProxy { shadow, .. } => Some(*shadow),
            _ => None,
        }
    }

    /// The value sandbox `h` would see for the global it was created with,
    /// unwrapped to the outside.
    pub(crate) fn outside_global(&self, h: SandboxId) -> Value {
        match self.sandbox(h).global.clone() {
            Some(Value::Loc(p)) => match self.store.get(p) {
                StoredObject::SandboxProxy { target, .. } => Value::Loc(*target),
                _ => Value::Loc(p),
            },
            Some(v) => v,
            None => Value::UNDEFINED,
        }
    }
}
