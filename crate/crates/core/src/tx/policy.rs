use crate::eval::{truthy, Interpreter};
use crate::heap::{Location, SandboxId, Value};
use crate::syntax::{Constant, Name};

use super::{EffectData, Selection, TxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    CommitOn,
    RollbackOn,
    CommitProp,
}

/// A policy that commits or rolls back writes to one target automatically.
#[derive(Debug, Clone)]
pub struct Rule {
    pub kind: RuleKind,
    pub target: Location,
    pub predicate: Option<Value>,
    pub prop: Option<Name>,
    /// Highest effect sequence number this rule has already considered.
    seen: u64,
}

impl Rule {
    pub fn commit_on(target: Location, predicate: Value) -> Rule {
        Rule {
            kind: RuleKind::CommitOn,
            target,
            predicate: Some(predicate),
            prop: None,
            seen: 0,
        }
    }

    pub fn rollback_on(target: Location, predicate: Value) -> Rule {
        Rule {
            kind: RuleKind::RollbackOn,
            target,
            predicate: Some(predicate),
            prop: None,
            seen: 0,
        }
    }

    pub fn commit_prop(target: Location, prop: &str) -> Rule {
        Rule {
            kind: RuleKind::CommitProp,
            target,
            predicate: None,
            prop: Some(prop.into()),
            seen: 0,
        }
    }
}

impl Interpreter {
    /// Installs `rule` on sandbox `h` and applies it to the writes logged so
    /// far. Installed rules run again after every later call or load.
    pub fn apply_rule(&mut self, h: SandboxId, rule: Rule) -> Result<(), TxError> {
        if let Some(p) = &rule.predicate {
            if !self.is_callable(p) {
                return Err(TxError::BadPredicate);
            }
        }
        self.sandbox_mut(h).rules.push(rule);
        let index = self.sandbox(h).rules.len() - 1;
        self.run_rule(h, index)
    }

    pub(super) fn run_rules(&mut self, h: SandboxId) -> Result<(), TxError> {
        for index in 0..self.sandbox(h).rules.len() {
            self.run_rule(h, index)?;
        }
        Ok(())
    }

    fn run_rule(&mut self, h: SandboxId, index: usize) -> Result<(), TxError> {
        let rule = self.sandbox(h).rules[index].clone();
        let pending: Vec<(u64, Option<Name>)> = self
            .sandbox(h)
            .log
            .iter()
            .filter(|r| {
                r.seq > rule.seen
                    && r.target == rule.target
                    && matches!(r.data, EffectData::Set { .. })
            })
            .map(|r| (r.seq, r.prop.clone()))
            .collect();
        if let Some(last) = self.sandbox(h).log.last().map(|r| r.seq) {
            self.sandbox_mut(h).rules[index].seen = last;
        }
        match rule.kind {
            RuleKind::CommitProp => {
                let prop = rule.prop.clone().unwrap_or_else(|| "".into());
                if pending.iter().any(|(_, p)| p.as_ref() == Some(&prop)) {
                    self.commit(
                        h,
                        Selection::Field {
                            target: rule.target,
                            prop,
                        },
                    )?;
                }
            }
            RuleKind::CommitOn | RuleKind::RollbackOn => {
                let predicate = rule.predicate.clone().ok_or(TxError::BadPredicate)?;
                for (seq, prop) in pending {
                    if !self.policy_holds(h, &predicate, prop.as_deref().unwrap_or(""))? {
                        continue;
                    }
                    if rule.kind == RuleKind::CommitOn {
                        self.commit(h, Selection::Effect { seq, strict: false })?;
                    } else {
                        self.rollback(h, Selection::Effect { seq, strict: false })?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Runs the predicate on a description of one write, inside a sandbox
    /// of its own so the predicate cannot change outside state.
    fn policy_holds(
        &mut self,
        h: SandboxId,
        predicate: &Value,
        prop: &str,
    ) -> Result<bool, TxError> {
        let effect = self.new_object(Value::NULL);
        let fields = [
            ("kind", Value::str("set")),
            ("name", Value::str(prop)),
            ("sandbox", Value::num(h.0 as f64)),
        ];
        for (k, v) in fields {
            self.put(effect, &Constant::str(k), v)?;
        }
        let global = self.outside_global(h);
        let judge = self.sandbox_new(global);
        let verdict = self.sandbox_call(judge, predicate, Value::Loc(effect))?;
        Ok(truthy(&verdict))
    }
}
