//! Seeded random programs.
//!
//! Expressions are generated against a small type discipline so that most
//! programs run to completion. Objects are "typed": each carries `n0` (a
//! number), `s0` (a string), `o0` (another typed object) and `f0` (a
//! number function), either as own properties or through its prototype.

use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{pretty_print, BinOp, Expr, Name, UnOp};

use super::check::{NiCase, BODY_BINDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Num,
    Str,
    Bool,
    Obj,
    Fun,
}

const TYPES: [Ty; 5] = [Ty::Num, Ty::Str, Ty::Bool, Ty::Obj, Ty::Fun];

fn field(ty: Ty) -> &'static str {
    match ty {
        Ty::Num => "n0",
        Ty::Str => "s0",
        Ty::Obj => "o0",
        Ty::Fun => "f0",
        Ty::Bool => "b0",
    }
}

const STRINGS: [&str; 5] = ["a", "b", "x", "", "sbx"];

pub struct Generator {
    rng: ChaCha8Rng,
    scope: Vec<(Name, Ty)>,
    next: usize,
    /// Number of enclosing sandbox bodies.
    depth: usize,
    allow_sandbox: bool,
    /// Bias towards property writes, for noninterference bodies.
    write_bias: f64,
    /// Chance that a function body may use variables it closes over.
    capture: f64,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            scope: Vec::new(),
            next: 0,
            depth: 0,
            allow_sandbox: true,
            write_bias: 0.15,
            capture: 0.2,
        }
    }

    fn fresh_name(&mut self, prefix: &str) -> Name {
        self.next += 1;
        Rc::from(format!("{prefix}{}", self.next))
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p.clamp(0.0, 1.0))
    }

    fn vars_of(&self, ty: Ty) -> Vec<Name> {
        self.scope
            .iter()
            .filter(|(_, t)| *t == ty)
            .map(|(n, _)| n.clone())
            .collect()
    }

    fn with_var<T>(&mut self, name: Name, ty: Ty, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((name, ty));
        let out = f(self);
        self.scope.pop();
        out
    }

    /// Splits `size - 1` between `n` children, each getting at least one.
    fn split(&mut self, size: usize, n: usize) -> Vec<usize> {
        let total = size.saturating_sub(1).max(n);
        let mut cuts: Vec<usize> = (0..n - 1)
            .map(|_| self.rng.gen_range(0..=total - n))
            .collect();
        cuts.sort_unstable();
        let mut out = Vec::with_capacity(n);
        let mut prev = 0;
        for c in cuts {
            out.push(c - prev + 1);
            prev = c;
        }
        out.push(total - n - prev + 1);
        out
    }

    fn literal(&mut self, ty: Ty) -> Expr {
        match ty {
            Ty::Num => {
                let n: i32 = self.rng.gen_range(-3..10);
                if self.chance(0.1) {
                    Expr::num(n as f64 + 0.5)
                } else {
                    Expr::num(n as f64)
                }
            }
            Ty::Str => Expr::str(STRINGS.choose(&mut self.rng).unwrap()),
            Ty::Bool => Expr::Const(crate::syntax::Constant::Bool(self.rng.gen())),
            Ty::Fun => {
                let x = self.fresh_name("x");
                Expr::abs(&x, Expr::Var(x.clone()))
            }
            Ty::Obj => self.make_object(1),
        }
    }

    fn leaf(&mut self, ty: Ty) -> Expr {
        let vars = self.vars_of(ty);
        let free = self.depth > 0 && ty != Ty::Bool;
        let roll: f64 = self.rng.gen();
        if !vars.is_empty() && roll < 0.55 {
            return Expr::Var(vars.choose(&mut self.rng).unwrap().clone());
        }
        if free && roll < 0.75 {
            return Expr::var(field(ty));
        }
        if ty == Ty::Obj && !vars.is_empty() {
            return Expr::Var(vars.choose(&mut self.rng).unwrap().clone());
        }
        self.literal(ty)
    }

    /// An expression of type Obj, falling back to a constructor when no
    /// object is in scope.
    fn object(&mut self, size: usize) -> Expr {
        self.gen(Ty::Obj, size)
    }

    /// `let v = new p; let _ = v.n0 = ..; ...; v`
    fn make_object(&mut self, size: usize) -> Expr {
        let v = self.fresh_name("v");
        let protos = self.vars_of(Ty::Obj);
        let inherit = !protos.is_empty() && self.chance(0.4);
        let proto = if inherit {
            Expr::Var(protos.choose(&mut self.rng).unwrap().clone())
        } else {
            Expr::Const(crate::syntax::Constant::Null)
        };
        let parts = self.split(size, 3);
        let mut fields: Vec<(Ty, Expr)> = Vec::new();
        for ty in [Ty::Num, Ty::Str, Ty::Fun] {
            if !inherit || self.chance(0.3) {
                let s = parts[fields.len()];
                let e = if ty == Ty::Fun {
                    self.function(s)
                } else {
                    self.gen(ty, s)
                };
                fields.push((ty, e));
            }
        }
        let link = if inherit && self.chance(0.5) {
            None
        } else if !protos.is_empty() && self.chance(0.5) {
            Some(Expr::Var(protos.choose(&mut self.rng).unwrap().clone()))
        } else {
            Some(Expr::Var(v.clone()))
        };
        let mut body = Expr::Var(v.clone());
        if let Some(l) = link {
            body = seq(
                Expr::MemberPut(
                    Rc::new(Expr::Var(v.clone())),
                    field(Ty::Obj).into(),
                    Rc::new(l),
                ),
                body,
            );
        }
        for (ty, e) in fields.into_iter().rev() {
            body = seq(
                Expr::MemberPut(Rc::new(Expr::Var(v.clone())), field(ty).into(), Rc::new(e)),
                body,
            );
        }
        Expr::Let {
            name: v,
            value: Rc::new(Expr::new_obj(proto)),
            body: Rc::new(body),
        }
    }

    /// A number-to-number function.
    fn function(&mut self, size: usize) -> Expr {
        let x = self.fresh_name("x");
        let saved = if self.chance(self.capture) {
            None
        } else {
            Some(std::mem::take(&mut self.scope))
        };
        let saved_depth = self.depth;
        if saved.is_some() {
            self.depth = 0;
        }
        let body = self.with_var(x.clone(), Ty::Num, |g| {
            g.gen(Ty::Num, size.saturating_sub(1))
        });
        if let Some(s) = saved {
            self.scope = s;
            self.depth = saved_depth;
        }
        if self.chance(0.2) {
            let f = self.fresh_name("f");
            Expr::Abs {
                self_name: Some(f),
                param: x,
                body: Rc::new(body),
            }
        } else {
            Expr::Abs {
                self_name: None,
                param: x,
                body: Rc::new(body),
            }
        }
    }

    /// `(fresh (sbx g => e))(obj)`, or inside a sandbox sometimes a bare
    /// nested `(sbx h => e)(obj)`.
    fn sandbox_app(&mut self, ty: Ty, size: usize) -> Expr {
        let parts = self.split(size, 2);
        let arg = self.object(parts[1]);
        let binder = self.fresh_name("g");
        let bare = self.depth > 0 && self.chance(0.4);
        let saved = if bare {
            None
        } else {
            Some(std::mem::take(&mut self.scope))
        };
        self.depth += 1;
        let body = self.with_var(binder.clone(), Ty::Obj, |g| g.gen(ty, parts[0]));
        self.depth -= 1;
        if let Some(s) = saved {
            self.scope = s;
        }
        let abs = Expr::SbxAbs {
            param: binder,
            body: Rc::new(body),
        };
        let f = if bare { abs } else { Expr::fresh(abs) };
        Expr::app(f, arg)
    }

    fn write(&mut self, ty: Ty, size: usize) -> Expr {
        let parts = self.split(size, 2);
        let value = if ty == Ty::Fun {
            self.function(parts[1])
        } else {
            self.gen(ty, parts[1])
        };
        if self.depth > 0 && self.chance(0.3) {
            return Expr::Assign(field(ty).into(), Rc::new(value));
        }
        let target = self.object(parts[0]);
        if self.chance(0.2) {
            Expr::put(target, Expr::str(field(ty)), value)
        } else {
            Expr::MemberPut(Rc::new(target), field(ty).into(), Rc::new(value))
        }
    }

    fn read(&mut self, ty: Ty, size: usize) -> Expr {
        let target = self.object(size.saturating_sub(1).max(1));
        if self.chance(0.2) {
            Expr::get(target, Expr::str(field(ty)))
        } else {
            Expr::Member(Rc::new(target), field(ty).into())
        }
    }

    fn binding(&mut self, ty: Ty, size: usize) -> Expr {
        let parts = self.split(size, 2);
        if self.chance(0.3 + self.write_bias) {
            let wt = *[Ty::Num, Ty::Str, Ty::Obj, Ty::Fun]
                .choose(&mut self.rng)
                .unwrap();
            let w = self.write(wt, parts[0]);
            let body = self.gen(ty, parts[1]);
            return seq(w, body);
        }
        let bt = *TYPES.choose(&mut self.rng).unwrap();
        let value = if bt == Ty::Fun {
            self.function(parts[0])
        } else {
            self.gen(bt, parts[0])
        };
        let name = self.fresh_name("v");
        let body = self.with_var(name.clone(), bt, |g| g.gen(ty, parts[1]));
        Expr::Let {
            name,
            value: Rc::new(value),
            body: Rc::new(body),
        }
    }

    fn gen(&mut self, ty: Ty, size: usize) -> Expr {
        if size <= 1 {
            return self.leaf(ty);
        }
        let sandbox_ok = self.allow_sandbox && size >= 4;
        let roll: f64 = self.rng.gen();
        if roll < self.write_bias && ty != Ty::Bool {
            return self.write(ty, size);
        }
        if roll < self.write_bias + 0.15 {
            return self.binding(ty, size);
        }
        if sandbox_ok && roll < self.write_bias + 0.25 {
            return self.sandbox_app(ty, size);
        }
        match ty {
            Ty::Num => match self.rng.gen_range(0..10) {
                0..=3 => {
                    let op = *[
                        BinOp::Add,
                        BinOp::Add,
                        BinOp::Sub,
                        BinOp::Mul,
                        BinOp::Div,
                        BinOp::Rem,
                    ]
                    .choose(&mut self.rng)
                    .unwrap();
                    let p = self.split(size, 2);
                    Expr::binary(op, self.gen(Ty::Num, p[0]), self.gen(Ty::Num, p[1]))
                }
                4 => Expr::Unary(UnOp::Neg, Rc::new(self.gen(Ty::Num, size - 1))),
                5 | 6 => self.read(Ty::Num, size),
                7 | 8 => {
                    let p = self.split(size, 2);
                    Expr::app(self.gen(Ty::Fun, p[0]), self.gen(Ty::Num, p[1]))
                }
                _ => self.write(Ty::Num, size),
            },
            Ty::Str => match self.rng.gen_range(0..6) {
                0 | 1 => {
                    let p = self.split(size, 2);
                    Expr::binary(BinOp::Add, self.gen(Ty::Str, p[0]), self.gen(Ty::Str, p[1]))
                }
                2 => {
                    let t = *TYPES.choose(&mut self.rng).unwrap();
                    Expr::Unary(UnOp::TypeOf, Rc::new(self.gen(t, size - 1)))
                }
                3 | 4 => self.read(Ty::Str, size),
                _ => self.write(Ty::Str, size),
            },
            Ty::Bool => {
                let p = self.split(size, 2);
                match self.rng.gen_range(0..6) {
                    0 | 1 => {
                        let op = *[
                            BinOp::Lt,
                            BinOp::Le,
                            BinOp::Gt,
                            BinOp::Ge,
                            BinOp::StrictEq,
                            BinOp::StrictNe,
                        ]
                        .choose(&mut self.rng)
                        .unwrap();
                        Expr::binary(op, self.gen(Ty::Num, p[0]), self.gen(Ty::Num, p[1]))
                    }
                    2 => {
                        let t = *TYPES.choose(&mut self.rng).unwrap();
                        let op = if self.chance(0.5) {
                            BinOp::StrictEq
                        } else {
                            BinOp::StrictNe
                        };
                        Expr::binary(op, self.gen(t, p[0]), self.gen(t, p[1]))
                    }
                    3 => Expr::Unary(UnOp::Not, Rc::new(self.gen(Ty::Bool, size - 1))),
                    _ => {
                        let op = if self.chance(0.5) {
                            BinOp::And
                        } else {
                            BinOp::Or
                        };
                        Expr::binary(op, self.gen(Ty::Bool, p[0]), self.gen(Ty::Bool, p[1]))
                    }
                }
            }
            Ty::Obj => match self.rng.gen_range(0..6) {
                0 | 1 => self.make_object(size),
                2 => Expr::new_obj(self.gen(Ty::Obj, size - 1)),
                3 => self.read(Ty::Obj, size),
                4 => self.write(Ty::Obj, size),
                _ => self.leaf(Ty::Obj),
            },
            Ty::Fun => match self.rng.gen_range(0..4) {
                0 | 1 => self.function(size),
                2 => self.read(Ty::Fun, size),
                _ => self.write(Ty::Fun, size),
            },
        }
    }

    fn any(&mut self, size: usize) -> Expr {
        let ty = *TYPES.choose(&mut self.rng).unwrap();
        if ty == Ty::Fun {
            self.function(size)
        } else {
            self.gen(ty, size)
        }
    }
}

fn seq(first: Expr, then: Expr) -> Expr {
    Expr::Let {
        name: "_".into(),
        value: Rc::new(first),
        body: Rc::new(then),
    }
}

/// A closed program of roughly `size` nodes. Deterministic in `seed`.
pub fn gen_program(seed: u64, size: usize) -> String {
    pretty_print(&gen_program_expr(seed, size))
}

/// Like [`gen_program`], as a surface syntax tree.
pub fn gen_program_expr(seed: u64, size: usize) -> Expr {
    let mut g = Generator::new(seed);
    if size <= 1 {
        let ty = *[Ty::Num, Ty::Str, Ty::Bool].choose(&mut g.rng).unwrap();
        return g.literal(ty);
    }
    g.any(size)
}

/// Setup bindings as `let` text, plus the names of the objects it binds.
fn setup(g: &mut Generator, size: usize, allow_sandbox: bool) -> (String, Vec<Name>) {
    g.allow_sandbox = allow_sandbox;
    let mut text = String::new();
    let mut objects = Vec::new();
    let count = 2 + size / 10;
    for i in 0..count {
        let ty = if i < 2 {
            Ty::Obj
        } else {
            *TYPES.choose(&mut g.rng).unwrap()
        };
        let s = g.rng.gen_range(2..6);
        let value = match ty {
            Ty::Obj => g.make_object(s),
            Ty::Fun => g.function(s),
            _ => g.gen(ty, s),
        };
        let name = g.fresh_name("v");
        text.push_str(&format!("let {name} = {};\n", pretty_print(&value)));
        if ty == Ty::Obj {
            objects.push(name.clone());
        }
        g.scope.push((name, ty));
    }
    for _ in 0..g.rng.gen_range(0..3) {
        let a = objects.choose(&mut g.rng).unwrap().clone();
        let b = objects.choose(&mut g.rng).unwrap().clone();
        text.push_str(&format!("let _ = {a}.o0 = {b};\n"));
    }
    g.allow_sandbox = true;
    (text, objects)
}

/// A noninterference case: sandbox-free setup, a write-heavy sandbox body,
/// and one of the setup objects as the argument.
pub fn gen_ni_case(seed: u64, size: usize) -> NiCase {
    let mut g = Generator::new(seed);
    let (setup_text, objects) = setup(&mut g, size, false);
    let arg = objects.choose(&mut g.rng).unwrap().to_string();
    g.scope.clear();
    g.write_bias = 0.3;
    g.depth = 1;
    let body = g.with_var(BODY_BINDER.into(), Ty::Obj, |g| g.any(size));
    NiCase {
        setup: setup_text,
        body: pretty_print(&body),
        arg,
    }
}

/// A differential case: setup (which may already run sandboxes) and a
/// program over its bindings.
pub fn gen_diff_case(seed: u64, size: usize) -> (String, String) {
    let mut g = Generator::new(seed);
    let (setup_text, _) = setup(&mut g, size, true);
    let program = g.any(size);
    (setup_text, pretty_print(&program))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Interpreter;

    #[test]
    fn size_one_is_a_literal() {
        for seed in 0..20 {
            assert!(matches!(gen_program_expr(seed, 1), Expr::Const(_)));
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(gen_program(7, 30), gen_program(7, 30));
        assert_eq!(gen_ni_case(7, 30), gen_ni_case(7, 30));
    }

    #[test]
    fn programs_are_closed() {
        for seed in 0..200 {
            let src = gen_program(seed, 30);
            crate::syntax::parse_program(&src).unwrap_or_else(|e| panic!("{src}\n{e}"));
        }
    }

    #[test]
    fn mostly_error_free() {
        let ok = (0..200)
            .filter(|&seed| {
                Interpreter::new()
                    .eval_source(&gen_program(seed, 30))
                    .is_ok()
            })
            .count();
        assert!(ok >= 180, "{ok}/200");
    }
}
