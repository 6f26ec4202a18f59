use std::rc::Rc;

use crate::heap::Value;
use crate::syntax::{BinOp, Constant, UnOp};

use super::{ErrorKind, EvalError};

fn operand_error(op: &str, u: &Value, v: Option<&Value>) -> EvalError {
    let describe = |x: &Value| match x {
        Value::Const(c) => c.type_name(),
        Value::Loc(_) => "object",
        Value::Sandbox(_) => "sandbox",
    };
    let message = match v {
        Some(v) => format!(
            "operator {op} does not apply to {} and {}",
            describe(u),
            describe(v)
        ),
        None => format!("operator {op} does not apply to {}", describe(u)),
    };
    EvalError::new(ErrorKind::TypeError, message)
}

/// Binary operators. Operands must be like-typed constants, except `===`
/// and `!==`, which compare any two values by identity.
pub fn apply_binary(op: BinOp, u: &Value, v: &Value) -> Result<Value, EvalError> {
    use Constant::*;
    match op {
        BinOp::StrictEq => return Ok(Value::Const(Bool(u.same(v)))),
        BinOp::StrictNe => return Ok(Value::Const(Bool(!u.same(v)))),
        _ => {}
    }
    let err = || operand_error(op.symbol(), u, Some(v));
    let (Value::Const(a), Value::Const(b)) = (u, v) else {
        return Err(err());
    };
    let out = match (op, a, b) {
        (BinOp::Add, Number(x), Number(y)) => Number(x + y),
        (BinOp::Add, Str(x), Str(y)) => Str(Rc::from(format!("{x}{y}"))),
        (BinOp::Sub, Number(x), Number(y)) => Number(x - y),
        (BinOp::Mul, Number(x), Number(y)) => Number(x * y),
        (BinOp::Div, Number(x), Number(y)) => Number(x / y),
        (BinOp::Rem, Number(x), Number(y)) => Number(x % y),
        (BinOp::Lt, Number(x), Number(y)) => Bool(x < y),
        (BinOp::Le, Number(x), Number(y)) => Bool(x <= y),
        (BinOp::Gt, Number(x), Number(y)) => Bool(x > y),
        (BinOp::Ge, Number(x), Number(y)) => Bool(x >= y),
        (BinOp::Lt, Str(x), Str(y)) => Bool(x < y),
        (BinOp::Le, Str(x), Str(y)) => Bool(x <= y),
        (BinOp::Gt, Str(x), Str(y)) => Bool(x > y),
        (BinOp::Ge, Str(x), Str(y)) => Bool(x >= y),
        (BinOp::And, Bool(x), Bool(y)) => Bool(*x && *y),
        (BinOp::Or, Bool(x), Bool(y)) => Bool(*x || *y),
        _ => return Err(err()),
    };
    Ok(Value::Const(out))
}

/// Unary operators. `callable` tells `typeof` whether a location holds a
/// function, which needs the store.
pub fn apply_unary(op: UnOp, u: &Value, callable: bool) -> Result<Value, EvalError> {
    use Constant::*;
    let out = match (op, u) {
        (UnOp::Not, Value::Const(Bool(b))) => Bool(!b),
        (UnOp::Neg, Value::Const(Number(n))) => Number(-n),
        (UnOp::TypeOf, Value::Const(Null)) => Constant::str("object"),
        (UnOp::TypeOf, Value::Const(c)) => Constant::str(c.type_name()),
        (UnOp::TypeOf, Value::Sandbox(_)) => Constant::str("function"),
        (UnOp::TypeOf, Value::Loc(_)) => {
            Constant::str(if callable { "function" } else { "object" })
        }
        _ => return Err(operand_error(op.symbol(), u, None)),
    };
    Ok(Value::Const(out))
}

/// Truthiness used by policy predicates.
pub fn truthy(v: &Value) -> bool {
    match v {
        Value::Const(Constant::Bool(b)) => *b,
        Value::Const(Constant::Null | Constant::Undefined) => false,
        Value::Const(Constant::Number(n)) => *n != 0.0 && !n.is_nan(),
        Value::Const(Constant::Str(s)) => !s.is_empty(),
        Value::Loc(_) | Value::Sandbox(_) => true,
    }
}
