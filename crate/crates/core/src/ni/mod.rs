//! Executable noninterference: observational equivalence of stores, the
//! sandbox noninterference check, the differential check under location
//! renaming, and the random program generator driving both.

mod check;
mod corpus;
mod differential;
mod equiv;
mod gen;

pub use check::{
    check_noninterference, eval_setup, replay_witness, HarnessError, NIReport, NiCase, Verdict,
    ARG_NAME, BODY_BINDER,
};
pub use corpus::mutation_corpus;
pub use differential::{differential_check, differential_trial, random_permutation, DiffOutcome};
pub use equiv::{eq_env, eq_value, format_path, replay, shallow_eq, Equiv, PathStep, Witness};
pub use gen::{gen_diff_case, gen_ni_case, gen_program, gen_program_expr, Generator};

/// Tally of a suite run.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Cases whose setup or argument failed; neither pass nor fail.
    pub harness_errors: usize,
    pub first_failure: Option<NIReport>,
}

impl SuiteReport {
    fn record(&mut self, outcome: Result<NIReport, HarnessError>) {
        self.total += 1;
        match outcome {
            Ok(r) if r.passed() => self.passed += 1,
            Ok(r) => {
                self.failed += 1;
                self.first_failure.get_or_insert(r);
            }
            Err(_) => self.harness_errors += 1,
        }
    }
}

/// Runs generated cases for seeds `seed..seed + count`.
pub fn run_ni_suite(
    seed: u64,
    count: usize,
    size: usize,
    budget: u64,
    membranes: bool,
) -> SuiteReport {
    let mut report = SuiteReport::default();
    for s in seed..seed + count as u64 {
        let outcome =
            check_noninterference(&gen_ni_case(s, size), budget, membranes).map(|mut r| {
                r.seed = Some(s);
                r
            });
        report.record(outcome);
    }
    report
}

/// Runs the mutation corpus.
pub fn run_corpus(budget: u64, membranes: bool) -> SuiteReport {
    let mut report = SuiteReport::default();
    for case in mutation_corpus() {
        report.record(check_noninterference(&case, budget, membranes));
    }
    report
}
