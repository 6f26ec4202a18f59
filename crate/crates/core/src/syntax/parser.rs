use std::rc::Rc;

use super::ast::{BinOp, Constant, Expr, Name, UnOp};
use super::error::ParseError;
use super::token::{unescape, Position, Token, TokenKind};

/// Parses a complete token list into a (sugared) expression.
pub fn parse(tokens: &[Token]) -> Result<Expr, ParseError> {
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    if p.pos < tokens.len() {
        return Err(p.error("end of input"));
    }
    Ok(e)
}

/// Parses the longest expression at the start of `tokens` and reports how
/// many tokens it used. The REPL uses this to split `<expr> <expr>`
/// argument lists.
pub fn parse_prefix(tokens: &[Token]) -> Result<(Expr, usize), ParseError> {
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    Ok((e, p.pos))
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.tokens.get(self.pos + n)
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_keyword(&self, k: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(k))
    }

    fn error(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError {
                position: t.position,
                expected: expected.to_string(),
                found: format!("'{}'", t.lexeme),
                at_end: false,
            },
            None => ParseError {
                position: self.end_position(),
                expected: expected.to_string(),
                found: "end of input".into(),
                at_end: true,
            },
        }
    }

    fn end_position(&self) -> Position {
        match self.tokens.last() {
            Some(t) => Position {
                line: t.position.line,
                column: t.position.column + t.lexeme.chars().count() as u32,
            },
            None => Position { line: 1, column: 1 },
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.at_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("'{p}'")))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => {
                self.pos += 1;
                Ok(Rc::from(t.lexeme.as_str()))
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.binary(1)?;
        if !self.at_punct("=") {
            return Ok(lhs);
        }
        let eq = self.pos;
        self.pos += 1;
        let rhs = Rc::new(self.expr()?);
        match lhs {
            Expr::Var(x) => Ok(Expr::Assign(x, rhs)),
            Expr::Get(o, k) => Ok(Expr::Put(o, k, rhs)),
            Expr::Member(o, n) => Ok(Expr::MemberPut(o, n, rhs)),
            _ => {
                self.pos = eq;
                Err(self.error("assignable target before '='"))
            }
        }
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(t) if t.kind == TokenKind::Punct => BinOp::from_symbol(&t.lexeme),
                _ => None,
            };
            let Some(op) = op.filter(|op| op.precedence() >= min_prec) else {
                break;
            };
            self.pos += 1;
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::Binary(op, Rc::new(lhs), Rc::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let op = if self.at_punct("!") {
            UnOp::Not
        } else if self.at_punct("-") {
            if let Some(t) = self.peek_at(1).filter(|t| t.kind == TokenKind::Number) {
                self.pos += 2;
                let n = parse_number(t);
                return self.postfix(Expr::num(-n));
            }
            UnOp::Neg
        } else if self.at_keyword("typeof") {
            UnOp::TypeOf
        } else {
            return self.postfix_expr();
        };
        self.pos += 1;
        Ok(Expr::Unary(op, Rc::new(self.unary()?)))
    }

    fn postfix_expr(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        self.postfix(base)
    }

    fn postfix(&mut self, mut e: Expr) -> Result<Expr, ParseError> {
        loop {
            if self.at_punct("(") {
                self.pos += 1;
                let arg = self.expr()?;
                self.expect_punct(")")?;
                e = Expr::App(Rc::new(e), Rc::new(arg));
            } else if !self.member_suffix(&mut e)? {
                return Ok(e);
            }
        }
    }

    /// Consumes one `[e]` or `.name` suffix if present.
    fn member_suffix(&mut self, e: &mut Expr) -> Result<bool, ParseError> {
        if self.at_punct("[") {
            self.pos += 1;
            let key = self.expr()?;
            self.expect_punct("]")?;
            *e = Expr::Get(Rc::new(e.clone()), Rc::new(key));
            Ok(true)
        } else if self.at_punct(".") {
            self.pos += 1;
            let name = self.ident()?;
            *e = Expr::Member(Rc::new(e.clone()), name);
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Operand of `new` and `fresh`: a primary with member suffixes but no
    /// calls, so `fresh (sbx g => e)(v)` applies the fresh sandbox to `v`.
    fn member_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.member_suffix(&mut e)? {}
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some(t) = self.peek() else {
            return Err(self.error("expression"));
        };
        match t.kind {
            TokenKind::Number => {
                self.pos += 1;
                Ok(Expr::num(parse_number(t)))
            }
            TokenKind::Str => {
                self.pos += 1;
                Ok(Expr::Const(Constant::Str(Rc::from(unescape(&t.lexeme)))))
            }
            TokenKind::Ident => {
                self.pos += 1;
                Ok(Expr::Var(Rc::from(t.lexeme.as_str())))
            }
            TokenKind::Keyword => match t.lexeme.as_str() {
                "true" => self.constant(Constant::Bool(true)),
                "false" => self.constant(Constant::Bool(false)),
                "null" => self.constant(Constant::Null),
                "undefined" => self.constant(Constant::Undefined),
                "fun" => self.function(),
                "sbx" => {
                    self.pos += 1;
                    let param = self.ident()?;
                    self.expect_punct("=>")?;
                    Ok(Expr::SbxAbs {
                        param,
                        body: Rc::new(self.expr()?),
                    })
                }
                "let" => {
                    self.pos += 1;
                    let name = self.ident()?;
                    self.expect_punct("=")?;
                    let value = self.expr()?;
                    self.expect_punct(";")?;
                    let body = self.expr()?;
                    Ok(Expr::Let {
                        name,
                        value: Rc::new(value),
                        body: Rc::new(body),
                    })
                }
                "new" => {
                    self.pos += 1;
                    Ok(Expr::New(Rc::new(self.member_expr()?)))
                }
                "fresh" => {
                    self.pos += 1;
                    Ok(Expr::Fresh(Rc::new(self.member_expr()?)))
                }
                _ => Err(self.error("expression")),
            },
            TokenKind::Punct if t.lexeme == "(" => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            TokenKind::Punct => Err(self.error("expression")),
        }
    }

    fn constant(&mut self, c: Constant) -> Result<Expr, ParseError> {
        self.pos += 1;
        Ok(Expr::Const(c))
    }

    // fun (x) => e | fun f(x) => e | fun x => e
    fn function(&mut self) -> Result<Expr, ParseError> {
        self.pos += 1;
        let (self_name, param) = if self.at_punct("(") {
            self.pos += 1;
            let param = self.ident()?;
            self.expect_punct(")")?;
            (None, param)
        } else {
            let first = self.ident()?;
            if self.at_punct("(") {
                self.pos += 1;
                let param = self.ident()?;
                self.expect_punct(")")?;
                (Some(first), param)
            } else {
                (None, first)
            }
        };
        self.expect_punct("=>")?;
        let body = self.expr()?;
        Ok(Expr::Abs {
            self_name,
            param,
            body: Rc::new(body),
        })
    }
}

fn parse_number(t: &Token) -> f64 {
    // The lexer only admits decimal literals that `f64::from_str` accepts.
    t.lexeme.parse().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::tokenize;

    fn p(src: &str) -> Expr {
        parse(&tokenize(src).unwrap()).unwrap()
    }

    #[test]
    fn put_binds_weaker_than_get() {
        assert_eq!(
            p(r#"o["v"] = 1"#),
            Expr::put(Expr::var("o"), Expr::str("v"), Expr::num(1.0))
        );
    }

    #[test]
    fn fresh_sandbox() {
        assert_eq!(
            p("fresh (sbx g => undefined)"),
            Expr::fresh(Expr::sbx("g", Expr::undefined()))
        );
    }

    #[test]
    fn fresh_then_call() {
        assert_eq!(
            p("fresh (sbx g => g)(v)"),
            Expr::app(Expr::fresh(Expr::sbx("g", Expr::var("g"))), Expr::var("v"))
        );
    }

    #[test]
    fn application_is_left_associative() {
        assert_eq!(
            p("f(x)(y)"),
            Expr::app(Expr::app(Expr::var("f"), Expr::var("x")), Expr::var("y"))
        );
    }

    #[test]
    fn precedence_levels() {
        let e = p("1 + 2 * 3 === 7 && !false || x < y");
        let expected = Expr::binary(
            BinOp::Or,
            Expr::binary(
                BinOp::And,
                Expr::binary(
                    BinOp::StrictEq,
                    Expr::binary(
                        BinOp::Add,
                        Expr::num(1.0),
                        Expr::binary(BinOp::Mul, Expr::num(2.0), Expr::num(3.0)),
                    ),
                    Expr::num(7.0),
                ),
                Expr::Unary(UnOp::Not, Rc::new(Expr::Const(Constant::Bool(false)))),
            ),
            Expr::binary(BinOp::Lt, Expr::var("x"), Expr::var("y")),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn subtraction_is_left_associative() {
        assert_eq!(
            p("5 - 2 - 1"),
            Expr::binary(
                BinOp::Sub,
                Expr::binary(BinOp::Sub, Expr::num(5.0), Expr::num(2.0)),
                Expr::num(1.0)
            )
        );
    }

    #[test]
    fn function_forms() {
        assert_eq!(p("fun x => x"), Expr::abs("x", Expr::var("x")));
        assert_eq!(p("fun (x) => x"), Expr::abs("x", Expr::var("x")));
        assert_eq!(
            p("fun f(x) => f"),
            Expr::named_abs("f", "x", Expr::var("f"))
        );
    }

    #[test]
    fn let_and_members() {
        let e = p("let o = new null; o.x = o.y");
        let Expr::Let { name, value, body } = e else {
            panic!()
        };
        assert_eq!(&*name, "o");
        assert_eq!(*value, Expr::new_obj(Expr::Const(Constant::Null)));
        assert!(
            matches!(&*body, Expr::MemberPut(_, n, rhs) if &**n == "x" && matches!(&**rhs, Expr::Member(..)))
        );
    }

    #[test]
    fn negative_literal_folds() {
        assert_eq!(p("-1"), Expr::num(-1.0));
        assert_eq!(p("-x"), Expr::Unary(UnOp::Neg, Rc::new(Expr::var("x"))));
        assert_eq!(
            p("2 - 1"),
            Expr::binary(BinOp::Sub, Expr::num(2.0), Expr::num(1.0))
        );
    }

    #[test]
    fn new_takes_member_operand() {
        assert_eq!(
            p("new p(x)"),
            Expr::app(Expr::new_obj(Expr::var("p")), Expr::var("x"))
        );
        assert_eq!(
            p("new o.p"),
            Expr::new_obj(Expr::Member(Rc::new(Expr::var("o")), Rc::from("p")))
        );
    }

    #[test]
    fn errors_carry_position() {
        let err = parse(&tokenize("f(x").unwrap()).unwrap_err();
        assert!(err.at_end);
        let err = parse(&tokenize("1 + ) 2").unwrap()).unwrap_err();
        assert!(!err.at_end);
        assert_eq!(err.position.column, 5);
        assert!(parse(&tokenize("1 = 2").unwrap()).is_err());
        assert!(parse(&tokenize("a b").unwrap()).is_err());
    }

    #[test]
    fn prefix_parse_stops_between_arguments() {
        let toks = tokenize("setValue root").unwrap();
        let (e, used) = parse_prefix(&toks).unwrap();
        assert_eq!(e, Expr::var("setValue"));
        assert_eq!(used, 1);
    }
}
