//! Replays the tree primer transcript and prints the session log.
//!
//! ```text
//! cargo run --example primer
//! ```

use decent::repl::Session;

const PRIMER: &str = include_str!("../scripts/primer.djs");

fn main() {
    let mut session = Session::default();
    let transcript = session.run_transcript(PRIMER);
    print!("{}", transcript.output);
    if let Some(e) = transcript.first_error {
        eprintln!("primer failed: {e}");
        std::process::exit(1);
    }
}
