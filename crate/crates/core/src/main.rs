use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use decent::ni::{self, mutation_corpus, replay_witness, SuiteReport};
use decent::repl::{run_source, ReplError, Session};
use decent::Config;

const NI_VIOLATION: u8 = 3;
const USAGE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "decent",
    version,
    about = "Interpreter for a small object language with transactional sandboxes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a script and print its final value.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = decent::eval::DEFAULT_STEP_BUDGET)]
        step_budget: u64,
    },
    /// Interactive session; with a file, replay it as a transcript.
    Repl {
        file: Option<PathBuf>,
        #[arg(long, default_value_t = decent::eval::DEFAULT_STEP_BUDGET)]
        step_budget: u64,
    },
    /// Run the noninterference property suite.
    Ni {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 30)]
        size: usize,
        #[arg(long, default_value_t = 100_000)]
        step_budget: u64,
        /// Disable membranes (negative control).
        #[arg(long)]
        no_membrane: bool,
        /// Check the built-in mutation corpus instead of generated cases.
        #[arg(long)]
        corpus: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run { file, step_budget } => run(&file, step_budget),
        Command::Repl { file, step_budget } => repl(file, step_budget),
        Command::Ni {
            seed,
            count,
            size,
            step_budget,
            no_membrane,
            corpus,
        } => run_ni(seed, count, size, step_budget, !no_membrane, corpus),
    }
}

fn fail(e: &ReplError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn read(path: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(USAGE)
    })
}

fn run(file: &PathBuf, step_budget: u64) -> ExitCode {
    let src = match read(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match run_source(
        &src,
        Config {
            step_budget,
            ..Config::default()
        },
    ) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn repl(file: Option<PathBuf>, step_budget: u64) -> ExitCode {
    let mut session = Session::new(Config {
        step_budget,
        ..Config::default()
    });
    if let Some(path) = file {
        let text = match read(&path) {
            Ok(s) => s,
            Err(code) => return code,
        };
        if let Some(dir) = path.parent() {
            session.set_base_dir(dir);
        }
        let t = session.run_transcript(&text);
        print!("{}", t.output);
        return match t.first_error {
            Some(e) => ExitCode::from(e.exit_code() as u8),
            None => ExitCode::SUCCESS,
        };
    }

    let interactive = io::stdin().is_terminal();
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        if interactive {
            print!("{}", if session.is_pending() { ". " } else { "> " });
            let _ = io::stdout().flush();
        }
        let Some(Ok(line)) = lines.next() else { break };
        match session.feed(&line) {
            None => {}
            Some(Ok(out)) if out.is_empty() => {}
            Some(Ok(out)) => println!("{out}"),
            Some(Err(e)) => eprintln!("error: {e}"),
        }
        if session.is_done() {
            break;
        }
    }
    ExitCode::SUCCESS
}

fn run_ni(
    seed: u64,
    count: usize,
    size: usize,
    budget: u64,
    membranes: bool,
    corpus: bool,
) -> ExitCode {
    if count == 0 {
        eprintln!("usage: --count must be at least 1");
        return ExitCode::from(USAGE);
    }
    let report: SuiteReport = if corpus {
        ni::run_corpus(budget, membranes)
    } else {
        ni::run_ni_suite(seed, count, size, budget, membranes)
    };
    println!("{}/{} pass", report.passed, report.total);
    if report.harness_errors > 0 {
        println!("{} cases skipped: setup failed", report.harness_errors);
    }
    let Some(first) = &report.first_failure else {
        return ExitCode::SUCCESS;
    };
    println!("first failure: {first}");
    println!("program: {}", first.program);
    if let Some(w) = &first.witness {
        let case = match first.seed {
            Some(s) => Some(ni::gen_ni_case(s, size)),
            None => mutation_corpus()
                .into_iter()
                .find(|c| c.program() == first.program),
        };
        if let Some((before, after)) = case.and_then(|c| replay_witness(&c, budget, membranes, w)) {
            println!("replay: {before} before, {after} after");
        }
    }
    ExitCode::from(NI_VIOLATION)
}
