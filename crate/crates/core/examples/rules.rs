//! Policy rules commit or roll back writes automatically after each
//! sandbox call.

use decent::heap::Value;
use decent::render::render_top;
use decent::syntax::Constant;
use decent::{Interpreter, Rule};

fn main() {
    let mut it = Interpreter::new();
    let prefs = it
        .eval_source("let p = new null; let _ = p.theme = 'light'; let _ = p.admin = false; p")
        .unwrap();
    let target = prefs.as_loc().unwrap();
    let plugin = it
        .eval_source("fun (p) => let _ = p.theme = 'dark'; p.admin = true")
        .unwrap();
    let only_theme = it.eval_source("fun (e) => e.name === 'theme'").unwrap();

    let h = it.sandbox_new(Value::UNDEFINED);
    it.apply_rule(h, Rule::commit_on(target, only_theme))
        .unwrap();
    it.sandbox_call(h, &plugin, prefs).unwrap();

    let theme = it.get(target, &Constant::str("theme")).unwrap();
    let admin = it.get(target, &Constant::str("admin")).unwrap();
    println!("theme outside: {}", render_top(it.store(), &theme));
    println!("admin outside: {}", render_top(it.store(), &admin));
}
