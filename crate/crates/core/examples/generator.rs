//! Samples the random program generator and reports how many programs run
//! without error.

use decent::ni::{gen_program, run_ni_suite};
use decent::repl::run_source;
use decent::Config;

fn main() {
    let size: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(30);
    println!("sample (seed 7, size {size}):\n{}\n", gen_program(7, size));
    let mut ok = 0;
    let n = 200;
    for seed in 0..n {
        if run_source(
            &gen_program(seed, size),
            Config {
                step_budget: 100_000,
                ..Config::default()
            },
        )
        .is_ok()
        {
            ok += 1;
        }
    }
    println!("{ok}/{n} generated programs ran without error");
    let report = run_ni_suite(0, 100, size, 100_000, true);
    println!("noninterference: {}/{} pass", report.passed, report.total);
}
