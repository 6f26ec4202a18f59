//! Sandbox bodies that each try to change outside state in a different way.
//! With membranes every case must pass; without them every case must fail.

use super::check::NiCase;

const BASE: &str = "let o = new null; let _ = o.v = 0; let _ = o.s = \"s\"; \
let c = new null; let _ = c.v = 1; let _ = o.c = c; let _ = o.me = o; \
let p = new null; let _ = p.v = 2; let k = new p; \
let _ = o.inc = fun (x) => x.v = x.v + 1; let _ = o.mk = fun (x) => new null;";

pub fn mutation_corpus() -> Vec<NiCase> {
    let bodies: [(&str, &str); 20] = [
        ("g.v = 99", "o"),
        ("g.w = 1", "o"),
        ("g.s = \"t\"", "o"),
        ("g.c.v = 5", "o"),
        ("g.me.v = 7", "o"),
        ("g.v = g", "o"),
        ("g.v = new null", "o"),
        ("v = 3", "o"),
        ("g.inc(g)", "o"),
        ("g.inc(g.c)", "o"),
        ("g.c = g.mk(0)", "o"),
        ("g.v = 1", "k"),
        ("g.v = 3", "p"),
        ("(sbx h => h.v = 4)(g)", "o"),
        ("(fresh (sbx h => h.v = 4))(g)", "o"),
        ("let f = fun (x) => x.v = 8; f(g)", "o"),
        ("g.c.w = g.c", "o"),
        ("g[\"v\"] = 10", "o"),
        ("let n = new g; g.v = n", "o"),
        ("g.s = typeof g.s", "o"),
    ];
    bodies
        .iter()
        .map(|(body, arg)| NiCase::new(BASE, body, arg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ni::check::check_noninterference;

    #[test]
    fn corpus_passes_with_membranes_and_fails_without() {
        for case in mutation_corpus() {
            let on = check_noninterference(&case, 100_000, true).unwrap();
            assert!(on.passed(), "{}: {on}", case.body);
            let off = check_noninterference(&case, 100_000, false).unwrap();
            assert!(
                !off.passed(),
                "{} leaked nothing without membranes",
                case.body
            );
        }
    }
}
