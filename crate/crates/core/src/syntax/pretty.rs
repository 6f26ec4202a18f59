use super::ast::{format_number, Constant, Expr};
use super::token::{escape, is_identifier};

// Context strengths. Binary operators use their own precedence (1..=6).
const LOWEST: u8 = 0;
const UNARY: u8 = 7;
const POSTFIX: u8 = 8;
const ATOM: u8 = 9;

/// Renders an expression in surface syntax. The output reparses to the same
/// tree; parentheses are inserted wherever precedence requires them.
pub fn pretty_print(e: &Expr) -> String {
    let mut out = String::new();
    write(&mut out, e, LOWEST);
    out
}

fn strength(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) | Expr::Var(_) => ATOM,
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Unary(..) | Expr::New(_) | Expr::Fresh(_) => UNARY,
        Expr::App(..) | Expr::Get(..) | Expr::Member(..) => POSTFIX,
        Expr::Abs { .. }
        | Expr::SbxAbs { .. }
        | Expr::Let { .. }
        | Expr::Put(..)
        | Expr::MemberPut(..)
        | Expr::Assign(..) => LOWEST,
    }
}

fn write(out: &mut String, e: &Expr, min: u8) {
    if strength(e) < min {
        out.push('(');
        write(out, e, LOWEST);
        out.push(')');
        return;
    }
    match e {
        Expr::Const(c) => write_constant(out, c),
        Expr::Var(x) => out.push_str(x),
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            write(out, a, p);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write(out, b, p + 1);
        }
        Expr::Unary(op, a) => {
            out.push_str(op.symbol());
            if op.symbol() == "typeof" {
                out.push(' ');
            }
            // `- -x` and `-(1)` must not fuse into a literal or decrement.
            let needs_parens = op.symbol() == "-"
                && matches!(&**a, Expr::Unary(..) | Expr::Const(Constant::Number(_)));
            if needs_parens {
                out.push('(');
                write(out, a, LOWEST);
                out.push(')');
            } else {
                write(out, a, UNARY);
            }
        }
        Expr::Abs {
            self_name,
            param,
            body,
        } => {
            out.push_str("fun ");
            match self_name {
                Some(f) => {
                    out.push_str(f);
                    out.push('(');
                    out.push_str(param);
                    out.push(')');
                }
                None => out.push_str(param),
            }
            out.push_str(" => ");
            write(out, body, LOWEST);
        }
        Expr::SbxAbs { param, body } => {
            out.push_str("sbx ");
            out.push_str(param);
            out.push_str(" => ");
            write(out, body, LOWEST);
        }
        Expr::App(f, a) => {
            write(out, f, POSTFIX);
            out.push('(');
            write(out, a, LOWEST);
            out.push(')');
        }
        Expr::New(p) => {
            out.push_str("new ");
            write(out, p, ATOM);
        }
        Expr::Fresh(p) => {
            out.push_str("fresh ");
            write(out, p, ATOM);
        }
        Expr::Get(o, k) => {
            write(out, o, POSTFIX);
            out.push('[');
            write(out, k, LOWEST);
            out.push(']');
        }
        Expr::Put(o, k, v) => {
            write(out, o, POSTFIX);
            out.push('[');
            write(out, k, LOWEST);
            out.push_str("] = ");
            write(out, v, LOWEST);
        }
        Expr::Let { name, value, body } => {
            out.push_str("let ");
            out.push_str(name);
            out.push_str(" = ");
            write(out, value, LOWEST);
            out.push_str("; ");
            write(out, body, LOWEST);
        }
        Expr::Member(o, n) => {
            write(out, o, POSTFIX);
            write_member(out, n);
        }
        Expr::MemberPut(o, n, v) => {
            write(out, o, POSTFIX);
            write_member(out, n);
            out.push_str(" = ");
            write(out, v, LOWEST);
        }
        Expr::Assign(x, v) => {
            out.push_str(x);
            out.push_str(" = ");
            write(out, v, LOWEST);
        }
    }
}

fn write_member(out: &mut String, name: &str) {
    if is_identifier(name) {
        out.push('.');
        out.push_str(name);
    } else {
        out.push('[');
        out.push_str(&escape(name));
        out.push(']');
    }
}

fn write_constant(out: &mut String, c: &Constant) {
    match c {
        Constant::Number(n) if n.is_nan() => out.push_str("(0 / 0)"),
        Constant::Number(n) if n.is_infinite() => {
            out.push_str(if *n > 0.0 { "(1 / 0)" } else { "(-1 / 0)" })
        }
        Constant::Number(n) if n.is_sign_negative() => {
            out.push_str("(-");
            out.push_str(&format_number(-n));
            out.push(')');
        }
        Constant::Number(n) => out.push_str(&format_number(*n)),
        Constant::Str(s) => out.push_str(&escape(s)),
        other => out.push_str(&other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_str;

    #[test]
    fn atoms() {
        assert_eq!(pretty_print(&Expr::num(42.0)), "42");
        assert_eq!(pretty_print(&Expr::abs("x", Expr::var("x"))), "fun x => x");
        assert_eq!(pretty_print(&Expr::num(-1.5)), "(-1.5)");
    }

    #[test]
    fn reparses() {
        for src in [
            "f(x)(y)",
            "(fun x => x)(1)",
            "o[\"k\"] = (v[\"j\"] = 2)",
            "1 - (2 - 3)",
            "(1 - 2) - 3",
            "-(-x)",
            "-(1)",
            "(new p)[\"k\"]",
            "fresh (sbx g => g[\"a\"])(v)",
            "typeof typeof x",
            "let a = fun f(n) => f(n); a(a)",
            "o.x.y = o[\"not an ident\"]",
            "x = y = 3",
            "(fun x => x) === 1",
        ] {
            let e = parse_str(src).unwrap();
            let printed = pretty_print(&e);
            assert_eq!(
                parse_str(&printed).unwrap(),
                e,
                "{src} printed as {printed}"
            );
        }
    }

    #[test]
    fn special_numbers() {
        for n in [
            f64::NAN,
            f64::INFINITY,
            f64::NEG_INFINITY,
            -0.0,
            1e-7,
            1e300,
        ] {
            let printed = pretty_print(&Expr::num(n));
            let back = crate::eval::Interpreter::new()
                .eval_source(&printed)
                .unwrap();
            let crate::heap::Value::Const(Constant::Number(m)) = back else {
                panic!()
            };
            assert!(
                Constant::Number(n) == Constant::Number(m) || (n == 0.0 && m == 0.0),
                "{printed}"
            );
        }
    }
}
