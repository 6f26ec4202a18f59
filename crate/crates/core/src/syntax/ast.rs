use std::fmt;
use std::rc::Rc;

/// Identifiers and property names share one interned-ish representation.
pub type Name = Rc<str>;

/// Reserved binder that free identifiers resolve through inside sandbox code.
/// It cannot be produced by the lexer.
pub const GLOBAL_BINDER: &str = "%global";

#[derive(Debug, Clone)]
pub enum Constant {
    Number(f64),
    Str(Rc<str>),
    Bool(bool),
    Null,
    Undefined,
}

impl Constant {
    pub fn str(s: &str) -> Self {
        Constant::Str(Rc::from(s))
    }

    /// Strict equality as in `===`: NaN is not equal to itself.
    pub fn strict_eq(&self, other: &Constant) -> bool {
        match (self, other) {
            (Constant::Number(a), Constant::Number(b)) => a == b,
            (Constant::Str(a), Constant::Str(b)) => a == b,
            (Constant::Bool(a), Constant::Bool(b)) => a == b,
            (Constant::Null, Constant::Null) | (Constant::Undefined, Constant::Undefined) => true,
            _ => false,
        }
    }

    /// Canonical property key for this constant.
    pub fn to_key(&self) -> Name {
        match self {
            Constant::Str(s) => s.clone(),
            other => Rc::from(other.to_string()),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Constant::Number(_) => "number",
            Constant::Str(_) => "string",
            Constant::Bool(_) => "boolean",
            Constant::Null => "null",
            Constant::Undefined => "undefined",
        }
    }
}

/// Structural equality. Unlike [`Constant::strict_eq`], NaN equals NaN and
/// 0 is distinguished from -0, so syntax trees compare reflexively.
impl PartialEq for Constant {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Constant::Number(a), Constant::Number(b)) => {
                a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
            }
            _ => self.strict_eq(other),
        }
    }
}

pub fn format_number(n: f64) -> String {
    if n.is_nan() {
        "NaN".into()
    } else if n.is_infinite() {
        if n > 0.0 {
            "Infinity".into()
        } else {
            "-Infinity".into()
        }
    } else if n == 0.0 {
        "0".into()
    } else {
        format!("{n}")
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Number(n) => f.write_str(&format_number(*n)),
            Constant::Str(s) => f.write_str(s),
            Constant::Bool(b) => write!(f, "{b}"),
            Constant::Null => f.write_str("null"),
            Constant::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    StrictEq,
    StrictNe,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::StrictEq => "===",
            BinOp::StrictNe => "!==",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::StrictEq | BinOp::StrictNe => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            "===" => BinOp::StrictEq,
            "!==" => BinOp::StrictNe,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
    TypeOf,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Not => "!",
            UnOp::Neg => "-",
            UnOp::TypeOf => "typeof",
        }
    }
}

/// Expressions of the surface language. The first group of variants is the
/// core calculus; `Let`, `Member`, `MemberPut` and `Assign` are sugar that
/// [`desugar`](crate::syntax::desugar) removes.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Constant),
    Var(Name),
    Binary(BinOp, Rc<Expr>, Rc<Expr>),
    Unary(UnOp, Rc<Expr>),
    Abs {
        self_name: Option<Name>,
        param: Name,
        body: Rc<Expr>,
    },
    App(Rc<Expr>, Rc<Expr>),
    New(Rc<Expr>),
    Get(Rc<Expr>, Rc<Expr>),
    Put(Rc<Expr>, Rc<Expr>, Rc<Expr>),
    SbxAbs {
        param: Name,
        body: Rc<Expr>,
    },
    Fresh(Rc<Expr>),

    Let {
        name: Name,
        value: Rc<Expr>,
        body: Rc<Expr>,
    },
    Member(Rc<Expr>, Name),
    MemberPut(Rc<Expr>, Name, Rc<Expr>),
    Assign(Name, Rc<Expr>),
}

impl Expr {
    pub fn num(n: f64) -> Expr {
        Expr::Const(Constant::Number(n))
    }

    pub fn str(s: &str) -> Expr {
        Expr::Const(Constant::str(s))
    }

    pub fn var(x: &str) -> Expr {
        Expr::Var(Rc::from(x))
    }

    pub fn undefined() -> Expr {
        Expr::Const(Constant::Undefined)
    }

    pub fn abs(param: &str, body: Expr) -> Expr {
        Expr::Abs {
            self_name: None,
            param: Rc::from(param),
            body: Rc::new(body),
        }
    }

    pub fn named_abs(name: &str, param: &str, body: Expr) -> Expr {
        Expr::Abs {
            self_name: Some(Rc::from(name)),
            param: Rc::from(param),
            body: Rc::new(body),
        }
    }

    pub fn sbx(param: &str, body: Expr) -> Expr {
        Expr::SbxAbs {
            param: Rc::from(param),
            body: Rc::new(body),
        }
    }

    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Rc::new(f), Rc::new(a))
    }

    pub fn get(o: Expr, k: Expr) -> Expr {
        Expr::Get(Rc::new(o), Rc::new(k))
    }

    pub fn put(o: Expr, k: Expr, v: Expr) -> Expr {
        Expr::Put(Rc::new(o), Rc::new(k), Rc::new(v))
    }

    pub fn new_obj(proto: Expr) -> Expr {
        Expr::New(Rc::new(proto))
    }

    pub fn fresh(e: Expr) -> Expr {
        Expr::Fresh(Rc::new(e))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Rc::new(a), Rc::new(b))
    }

    pub fn is_sugar(&self) -> bool {
        matches!(
            self,
            Expr::Let { .. } | Expr::Member(..) | Expr::MemberPut(..) | Expr::Assign(..)
        )
    }

    /// True when no sugar node occurs anywhere in the tree.
    pub fn is_core(&self) -> bool {
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if e.is_sugar() {
                return false;
            }
            e.for_each_child(|c| stack.push(c));
        }
        true
    }

    pub fn for_each_child<'a>(&'a self, mut f: impl FnMut(&'a Expr)) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Binary(_, a, b) | Expr::App(a, b) | Expr::Get(a, b) => {
                f(a);
                f(b);
            }
            Expr::Unary(_, a)
            | Expr::New(a)
            | Expr::Fresh(a)
            | Expr::Member(a, _)
            | Expr::Assign(_, a) => f(a),
            Expr::Abs { body, .. } | Expr::SbxAbs { body, .. } => f(body),
            Expr::Put(a, b, c) => {
                f(a);
                f(b);
                f(c);
            }
            Expr::Let { value, body, .. } => {
                f(value);
                f(body);
            }
            Expr::MemberPut(a, _, b) => {
                f(a);
                f(b);
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            n += 1;
            e.for_each_child(|c| stack.push(c));
        }
        n
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::pretty_print(self))
    }
}
