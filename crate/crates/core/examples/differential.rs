//! Runs generated programs on a store and on a copy with every location
//! renamed; the outcomes must agree up to the renaming.

use decent::ni::{differential_trial, gen_diff_case};

fn main() {
    let (setup, program) = gen_diff_case(3, 12);
    println!("setup:   {setup}\nprogram: {program}\n");
    let mut agree = 0;
    for seed in 0..100 {
        let outcome = differential_trial(seed, 30, 100_000).expect("setup evaluates");
        if outcome.equivalent {
            agree += 1;
        } else {
            println!("seed {seed}: {}", outcome.detail);
        }
    }
    println!("{agree}/100 renamed runs equivalent");
}
