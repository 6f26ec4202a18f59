//! An interpreter for a small prototype-based JavaScript core with
//! transactional sandboxes.
//!
//! Code running in a sandbox reaches outside objects only through proxies.
//! Each proxy owns a shadow object that absorbs writes, and every crossing
//! is logged. A host can inspect what the sandbox did and then commit or
//! roll back its writes. Logs of two sandboxes can be checked for conflicts.
//!
//! The crate is organised bottom-up:
//!
//! * [`syntax`]: lexer, parser, desugarer and printer for the surface language.
//! * [`heap`]: values, environments and the append-only store.
//! * [`eval`]: the evaluator, including the wrap and recompile machinery.
//! * [`tx`]: sandbox handles with effect logs, commit, rollback and conflicts.
//! * [`ni`]: observational equivalence, the noninterference and differential
//!   checks, and a random program generator.
//! * [`repl`]: a line-oriented session with sandbox meta-commands.
//!
//! ```
//! use decent::{heap::Value, Interpreter};
//!
//! let mut it = Interpreter::new();
//! let v = it.eval_source("let o = new null; let _ = o.x = 41; o.x + 1").unwrap();
//! assert!(v.same(&Value::num(42.0)));
//! ```
//!
//! The `examples/` directory has one runnable program per capability; start
//! with `cargo run --example primer`.

pub mod eval;
pub mod heap;
pub mod ni;
pub mod render;
pub mod repl;
pub mod syntax;
pub mod tx;

pub use eval::{Config, ErrorKind, EvalError, Interpreter, RunError};
pub use heap::{Location, SandboxId, Value};
pub use tx::{Rule, Selection, TxError};
