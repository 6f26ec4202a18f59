//! Parses, desugars and evaluates a few programs of the core language.

use decent::render::render_top;
use decent::syntax::{desugar, parse_str, pretty_print};
use decent::Interpreter;

fn main() {
    let programs = [
        "1 + 2 * 3",
        "'sand' + 'box'",
        "let o = new null; let _ = o.x = 41; o.x + 1",
        "let p = new null; let _ = p.greet = 'hi'; let o = new p; o.greet",
        "let twice = fun (f) => fun (x) => f(f(x)); twice(fun (n) => n * 3)(2)",
        "typeof (fun (x) => x)",
    ];
    for src in programs {
        let mut it = Interpreter::new();
        let core = desugar(&parse_str(src).unwrap(), None).unwrap();
        match it.eval_source(src) {
            Ok(v) => println!(
                "{src}\n  core: {}\n  => {}",
                pretty_print(&core),
                render_top(it.store(), &v)
            ),
            Err(e) => println!("{src}\n  error: {e}"),
        }
    }
}
