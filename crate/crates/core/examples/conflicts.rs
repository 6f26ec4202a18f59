//! Two sandboxes work on the same object. Disjoint fields do not
//! conflict; a read of a field the other sandbox wrote does.

use decent::heap::Value;
use decent::Interpreter;

fn main() {
    let mut it = Interpreter::new();
    let doc = it
        .eval_source("let d = new null; let _ = d.title = 'draft'; let _ = d.body = ''; d")
        .unwrap();
    let set_title = it.eval_source("fun (d) => d.title = 'final'").unwrap();
    let set_body = it.eval_source("fun (d) => d.body = 'text'").unwrap();
    let read_title = it.eval_source("fun (d) => d.title").unwrap();

    let a = it.sandbox_new(Value::UNDEFINED);
    let b = it.sandbox_new(Value::UNDEFINED);
    it.sandbox_call(a, &set_title, doc.clone()).unwrap();
    it.sandbox_call(b, &set_body, doc.clone()).unwrap();
    println!(
        "{a} vs {b} after disjoint writes: in conflict = {}",
        it.in_conflict_with(a, b)
    );

    it.sandbox_call(b, &read_title, doc).unwrap();
    for c in it.conflicts_with(a, b) {
        println!("{c}");
    }
}
