//! Drives a REPL session from a string, as `decent repl <file>` does.

use decent::repl::Session;
use decent::Config;

const TRANSCRIPT: &str = "\
counter = new null
_ = counter.n = 0
bump = fun (c) => c.n = c.n + 1
:sbx new s global=counter
:sbx call s bump counter
:sbx call s bump counter
counter.n
:effects s writes
:changes s
:commit s
counter.n
:stats s
";

fn main() {
    let t = Session::new(Config::default()).run_transcript(TRANSCRIPT);
    print!("{}", t.output);
}
