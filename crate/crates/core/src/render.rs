//! Human-readable rendering of values for the REPL and CLI.

use crate::heap::{Location, Store, StoredObject, Value};
use crate::syntax::{escape, is_identifier, Constant};

pub const DEFAULT_DEPTH: usize = 3;

/// Renders `v` structurally down to `depth` levels of objects. Strings are
/// quoted; see [`render_top`] for the unquoted top-level form.
pub fn render(store: &Store, v: &Value, depth: usize) -> String {
    let mut out = String::new();
    write_value(&mut out, store, v, depth);
    out
}

/// Like [`render`], but a top-level string prints without quotes.
pub fn render_top(store: &Store, v: &Value) -> String {
    match v {
        Value::Const(Constant::Str(s)) => s.to_string(),
        _ => render(store, v, DEFAULT_DEPTH),
    }
}

pub fn location_label(store: &Store, l: Location) -> String {
    match store.get(l) {
        StoredObject::Plain(p) if p.closure.is_some() => format!("fun#{}", l.0),
        StoredObject::Plain(_) => format!("obj#{}", l.0),
        StoredObject::SandboxProxy { .. } => format!("proxy#{}", l.0),
        StoredObject::OutwardProxy { .. } => format!("outward#{}", l.0),
    }
}

fn write_value(out: &mut String, store: &Store, v: &Value, depth: usize) {
    match v {
        Value::Const(Constant::Str(s)) => out.push_str(&escape(s)),
        Value::Const(c) => out.push_str(&c.to_string()),
        Value::Sandbox(sc) => {
            out.push_str("<sbx ");
            out.push_str(&sc.sandbox.to_string());
            out.push('>');
        }
        Value::Loc(l) => write_location(out, store, *l, depth),
    }
}

fn write_location(out: &mut String, store: &Store, l: Location, depth: usize) {
    out.push('<');
    out.push_str(&location_label(store, l));
    match store.get(l) {
        StoredObject::SandboxProxy { target, .. }
        | StoredObject::OutwardProxy { inner: target, .. } => {
            out.push_str(" → ");
            out.push_str(&location_label(store, *target));
        }
        StoredObject::Plain(p) => {
            if let Some(c) = &p.closure {
                out.push(' ');
                if let Some(name) = &c.self_name {
                    out.push_str(name);
                }
                out.push('(');
                out.push_str(&c.param);
                out.push(')');
            }
            if !p.dict.is_empty() || p.closure.is_none() {
                if depth == 0 {
                    out.push_str(" {...}");
                } else {
                    out.push_str(" {");
                    for (i, (k, v)) in p.dict.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        if is_identifier(k) {
                            out.push_str(k);
                        } else {
                            out.push_str(&escape(k));
                        }
                        out.push_str(": ");
                        write_value(out, store, v, depth - 1);
                    }
                    out.push('}');
                }
            }
        }
    }
    out.push('>');
}
