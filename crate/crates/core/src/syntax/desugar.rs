use std::rc::Rc;

use super::ast::{Constant, Expr, Name, GLOBAL_BINDER};
use super::error::DesugarError;

/// Removes surface sugar and resolves free identifiers.
///
/// With `global` set (script loads into a sandbox), free identifiers at the
/// top level resolve through that binder. Without it they are errors, except
/// inside sandbox bodies, where they resolve through the sandbox's own binder.
pub fn desugar(e: &Expr, global: Option<&str>) -> Result<Expr, DesugarError> {
    desugar_in_scope(e, global, &[])
}

/// Like [`desugar`], with `bound` names already in scope at the top level.
pub fn desugar_in_scope(
    e: &Expr,
    global: Option<&str>,
    bound: &[Name],
) -> Result<Expr, DesugarError> {
    let mut d = Desugarer {
        scope: bound
            .iter()
            .map(|n| Entry {
                name: n.clone(),
                sandbox_binder: false,
            })
            .collect(),
        floor: 0,
        binder: global.map(|g| (Rc::from(g), false)),
    };
    d.expr(e)
}

struct Entry {
    name: Name,
    sandbox_binder: bool,
}

struct Desugarer {
    scope: Vec<Entry>,
    /// Entries below this index are hidden by a `fresh` scope barrier.
    floor: usize,
    /// Binder free identifiers resolve through, and whether it must be
    /// lexically visible (sandbox binders) or is implicit (load global).
    binder: Option<(Name, bool)>,
}

impl Desugarer {
    fn lookup(&self, x: &str) -> Option<&Entry> {
        self.scope[self.floor..]
            .iter()
            .rev()
            .find(|e| &*e.name == x)
    }

    fn resolve_free(&self, x: &Name) -> Result<Rc<Expr>, DesugarError> {
        let Some((binder, lexical)) = &self.binder else {
            return Err(DesugarError::UnboundVariable { name: x.clone() });
        };
        if *lexical && !self.lookup(binder).is_some_and(|e| e.sandbox_binder) {
            return Err(DesugarError::ShadowedGlobal {
                name: x.clone(),
                binder: binder.clone(),
            });
        }
        Ok(Rc::new(Expr::Var(binder.clone())))
    }

    fn with_binding<T>(&mut self, names: &[&Name], f: impl FnOnce(&mut Self) -> T) -> T {
        for n in names {
            self.scope.push(Entry {
                name: (*n).clone(),
                sandbox_binder: false,
            });
        }
        let out = f(self);
        self.scope.truncate(self.scope.len() - names.len());
        out
    }

    fn sandbox_body(
        &mut self,
        param: &Name,
        body: &Expr,
        barrier: bool,
    ) -> Result<Expr, DesugarError> {
        let saved_floor = self.floor;
        let saved_binder = self.binder.replace((param.clone(), true));
        if barrier {
            self.floor = self.scope.len();
        }
        self.scope.push(Entry {
            name: param.clone(),
            sandbox_binder: true,
        });
        let out = self.expr(body);
        self.scope.pop();
        self.floor = saved_floor;
        self.binder = saved_binder;
        Ok(Expr::SbxAbs {
            param: param.clone(),
            body: Rc::new(out?),
        })
    }

    fn sub(&mut self, e: &Rc<Expr>) -> Result<Rc<Expr>, DesugarError> {
        Ok(Rc::new(self.expr(e)?))
    }

    fn expr(&mut self, e: &Expr) -> Result<Expr, DesugarError> {
        Ok(match e {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Var(x) if &**x == GLOBAL_BINDER || self.lookup(x).is_some() => {
                Expr::Var(x.clone())
            }
            Expr::Var(x) => Expr::Get(
                self.resolve_free(x)?,
                Rc::new(Expr::Const(Constant::Str(x.clone()))),
            ),
            Expr::Assign(x, v) => {
                if self.lookup(x).is_some() {
                    return Err(DesugarError::AssignToBinding { name: x.clone() });
                }
                let target = self.resolve_free(x)?;
                Expr::Put(
                    target,
                    Rc::new(Expr::Const(Constant::Str(x.clone()))),
                    self.sub(v)?,
                )
            }
            Expr::Binary(op, a, b) => Expr::Binary(*op, self.sub(a)?, self.sub(b)?),
            Expr::Unary(op, a) => Expr::Unary(*op, self.sub(a)?),
            Expr::Abs {
                self_name,
                param,
                body,
            } => {
                let mut names = Vec::with_capacity(2);
                if let Some(f) = self_name {
                    names.push(f);
                }
                names.push(param);
                let body = self.with_binding(&names, |d| d.sub(body))?;
                Expr::Abs {
                    self_name: self_name.clone(),
                    param: param.clone(),
                    body,
                }
            }
            Expr::App(f, a) => Expr::App(self.sub(f)?, self.sub(a)?),
            Expr::New(p) => Expr::New(self.sub(p)?),
            Expr::Get(o, k) => Expr::Get(self.sub(o)?, self.sub(k)?),
            Expr::Put(o, k, v) => Expr::Put(self.sub(o)?, self.sub(k)?, self.sub(v)?),
            Expr::SbxAbs { param, body } => {
                let barrier = self.binder.is_none();
                self.sandbox_body(param, body, barrier)?
            }
            Expr::Fresh(inner) => match &**inner {
                Expr::SbxAbs { param, body } => {
                    Expr::Fresh(Rc::new(self.sandbox_body(param, body, true)?))
                }
                _ => Expr::Fresh(self.sub(inner)?),
            },
            Expr::Let { name, value, body } => {
                let value = self.sub(value)?;
                let body = self.with_binding(&[name], |d| d.sub(body))?;
                Expr::App(
                    Rc::new(Expr::Abs {
                        self_name: None,
                        param: name.clone(),
                        body,
                    }),
                    value,
                )
            }
            Expr::Member(o, n) => {
                Expr::Get(self.sub(o)?, Rc::new(Expr::Const(Constant::Str(n.clone()))))
            }
            Expr::MemberPut(o, n, v) => Expr::Put(
                self.sub(o)?,
                Rc::new(Expr::Const(Constant::Str(n.clone()))),
                self.sub(v)?,
            ),
        })
    }
}
