//! Checks that a sandboxed body cannot change outside state, then turns
//! the membranes off to show the checker catching the leak.

use decent::ni::{check_noninterference, replay_witness, run_ni_suite, NiCase};

fn main() {
    let case = NiCase::new(
        "let o = new null; let _ = o.v = 0; let _ = o.c = new null;",
        "let _ = g.v = 99; g.c.w = g",
        "o",
    );
    println!("{}", case.program());
    for membranes in [true, false] {
        let report = check_noninterference(&case, 10_000, membranes).expect("case is well formed");
        println!(
            "membranes {}: {report}",
            if membranes { "on" } else { "off" }
        );
        if let Some(w) = &report.witness {
            if let Some((before, after)) = replay_witness(&case, 10_000, membranes, w) {
                println!(
                    "  replay of {}: {before} before, {after} after",
                    decent::ni::format_path(&w.path)
                );
            }
        }
    }
    let suite = run_ni_suite(0, 200, 30, 100_000, true);
    println!("generated suite: {}/{} pass", suite.passed, suite.total);
}
