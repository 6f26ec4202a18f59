//! Line-oriented sessions: plain expressions, top-level bindings and the
//! `:`-prefixed sandbox meta-commands.

use std::fmt;
use std::path::{Path, PathBuf};
use std::rc::Rc;

use indexmap::IndexMap;

use crate::eval::{Config, Interpreter, RunError};
use crate::heap::{Env, SandboxId, Value};
use crate::render::{location_label, render, render_top};
use crate::syntax::{
    self, desugar_in_scope, parse_prefix, tokenize, Expr, SyntaxError, Token, TokenKind,
};
use crate::tx::{format_effect, EffectKind, Rule, Selection, TxError};

#[derive(Debug, Clone, PartialEq)]
pub enum ReplError {
    Syntax(SyntaxError),
    Runtime(String),
    Usage(String),
}

impl ReplError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReplError::Runtime(_) | ReplError::Syntax(SyntaxError::Desugar(_)) => 1,
            ReplError::Syntax(_) => 2,
            ReplError::Usage(_) => 4,
        }
    }
}

impl fmt::Display for ReplError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplError::Syntax(e) => write!(f, "{e}"),
            ReplError::Runtime(m) => f.write_str(m),
            ReplError::Usage(m) => write!(f, "usage: {m}"),
        }
    }
}

impl std::error::Error for ReplError {}

impl From<SyntaxError> for ReplError {
    fn from(e: SyntaxError) -> Self {
        ReplError::Syntax(e)
    }
}

impl From<RunError> for ReplError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Syntax(s) => ReplError::Syntax(s),
            RunError::Eval(e) => ReplError::Runtime(e.to_string()),
        }
    }
}

impl From<TxError> for ReplError {
    fn from(e: TxError) -> Self {
        match e {
            TxError::Syntax(s) => ReplError::Syntax(s),
            other => ReplError::Runtime(other.to_string()),
        }
    }
}

/// Parses, desugars and evaluates a whole script, returning the rendered
/// final value.
pub fn run_source(src: &str, config: Config) -> Result<String, ReplError> {
    let mut it = Interpreter::with_config(config);
    let v = it.eval_source(src)?;
    Ok(render_top(it.store(), &v))
}

pub const HELP: &str = "\
expressions:   <expr>            evaluate and print
               <ident> = <expr>  bind at top level
sandboxes:     :sbx new <name> [global=<expr>]
               :sbx call <name> <expr> <expr>
               :sbx load <name> <path>
inspection:    :effects <name> [reads|writes] [of <expr>]
               :changes <name>   :diffs <name>   :stats <name>
               :conflicts <name> <name>
transactions:  :commit <name> [<seq>]   :rollback <name> [<seq>]
               :revert <name> <expr>
rules:         :rule <name> commiton|rollbackon <expr> <expr>
               :rule <name> commit <expr> <propname>
               :quit";

/// Output of replaying a whole transcript.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    pub output: String,
    pub first_error: Option<ReplError>,
}

pub struct Session {
    interp: Interpreter,
    env: Env,
    handles: IndexMap<String, SandboxId>,
    base_dir: PathBuf,
    pending: String,
    done: bool,
}

impl Default for Session {
    fn default() -> Self {
        Session::new(Config::default())
    }
}

impl Session {
    pub fn new(config: Config) -> Self {
        Session {
            interp: Interpreter::with_config(config),
            env: Env::empty(),
            handles: IndexMap::new(),
            base_dir: PathBuf::from("."),
            pending: String::new(),
            done: false,
        }
    }

    /// Directory `:sbx load` paths are relative to.
    pub fn set_base_dir(&mut self, dir: impl Into<PathBuf>) {
        self.base_dir = dir.into();
    }

    pub fn interpreter(&self) -> &Interpreter {
        &self.interp
    }

    pub fn interpreter_mut(&mut self) -> &mut Interpreter {
        &mut self.interp
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn handle(&self, name: &str) -> Option<SandboxId> {
        self.handles.get(name).copied()
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Whether an unfinished expression is waiting for more lines.
    pub fn is_pending(&self) -> bool {
        !self.pending.is_empty()
    }

    /// Feeds one input line. Returns `None` when there is nothing to
    /// report yet (blank line, comment, or an expression still open).
    pub fn feed(&mut self, line: &str) -> Option<Result<String, ReplError>> {
        if self.pending.is_empty() && line.trim_start().starts_with(':') {
            return Some(self.dispatch(line));
        }
        self.pending.push_str(line);
        self.pending.push('\n');
        match tokenize(&self.pending) {
            Ok(tokens) if tokens.is_empty() => {
                self.pending.clear();
                return None;
            }
            Err(e) => {
                self.pending.clear();
                return Some(Err(SyntaxError::from(e).into()));
            }
            Ok(_) => {}
        }
        match syntax::parse_str(&self.pending) {
            Err(e) if e.is_incomplete() => None,
            _ => {
                let input = std::mem::take(&mut self.pending);
                Some(self.dispatch(&input))
            }
        }
    }

    /// Abandons a partially entered expression.
    pub fn reset_pending(&mut self) {
        self.pending.clear();
    }

    /// Replays `text` line by line, echoing each input line before its
    /// output. Identical text always produces identical output.
    pub fn run_transcript(&mut self, text: &str) -> Transcript {
        let mut t = Transcript::default();
        for line in text.lines() {
            if self.done {
                break;
            }
            let marker = if self.is_pending() { ". " } else { "> " };
            t.output.push_str(marker);
            t.output.push_str(line);
            t.output.push('\n');
            match self.feed(line) {
                None => {}
                Some(Ok(out)) => {
                    if !out.is_empty() {
                        t.output.push_str(&out);
                        t.output.push('\n');
                    }
                }
                Some(Err(e)) => {
                    t.output.push_str(&format!("error: {e}\n"));
                    t.first_error.get_or_insert(e);
                }
            }
        }
        if self.is_pending() && !self.done {
            let e = ReplError::Syntax(
                syntax::parse_str(&self.pending)
                    .err()
                    .unwrap_or_else(|| unreachable!("pending input always fails to parse")),
            );
            t.output.push_str(&format!("error: {e}\n"));
            t.first_error.get_or_insert(e);
            self.pending.clear();
        }
        t
    }

    /// Handles one complete input: a meta-command or an expression.
    pub fn dispatch(&mut self, input: &str) -> Result<String, ReplError> {
        let trimmed = input.trim();
        if let Some(cmd) = trimmed.strip_prefix(':') {
            return self.meta(cmd);
        }
        let parsed = syntax::parse_str(trimmed)?;
        if let Expr::Assign(name, value) = &parsed {
            let v = self.eval_expr_ast(value)?;
            self.env = self.env.bind(name.clone(), v);
            return Ok(String::new());
        }
        let v = self.eval_expr_ast(&parsed)?;
        Ok(render_top(self.interp.store(), &v))
    }

    fn eval_expr_ast(&mut self, e: &Expr) -> Result<Value, ReplError> {
        let core = desugar_in_scope(e, None, &self.env.names()).map_err(SyntaxError::from)?;
        let env = self.env.clone();
        self.interp
            .eval(&env, &Rc::new(core))
            .map_err(|e| ReplError::Runtime(e.to_string()))
    }

    fn sandbox(&self, name: &str) -> Result<SandboxId, ReplError> {
        self.handle(name)
            .ok_or_else(|| ReplError::Runtime(format!("no sandbox named '{name}'")))
    }

    fn short(&self, v: &Value) -> String {
        match v {
            Value::Loc(l) => location_label(self.interp.store(), *l),
            _ => render(self.interp.store(), v, 0),
        }
    }

    fn meta(&mut self, cmd: &str) -> Result<String, ReplError> {
        let mut args = Args { rest: cmd };
        let verb = args
            .word()
            .ok_or_else(|| ReplError::Usage("empty command; try :help".into()))?;
        match verb {
            "help" => Ok(HELP.to_string()),
            "quit" | "q" => {
                self.done = true;
                Ok(String::new())
            }
            "sbx" => self.meta_sbx(&mut args),
            "effects" => self.meta_effects(&mut args),
            "commit" | "rollback" => {
                let h = self.sandbox(args.need_word(verb)?)?;
                let selection = match args.word() {
                    None => Selection::All,
                    Some(w) => {
                        let seq = w
                            .parse()
                            .map_err(|_| ReplError::Usage(format!(":{verb} <name> [<seq>]")))?;
                        Selection::Effect { seq, strict: false }
                    }
                };
                args.finish(verb)?;
                if verb == "commit" {
                    self.interp.commit(h, selection)?;
                    Ok("committed".into())
                } else {
                    self.interp.rollback(h, selection)?;
                    Ok("rolled back".into())
                }
            }
            "revert" => {
                let h = self.sandbox(args.need_word(verb)?)?;
                let target = self.arg_expr(&mut args, verb)?;
                args.finish(verb)?;
                self.interp.revert_of(h, &target)?;
                Ok("reverted".into())
            }
            "changes" => {
                let h = self.sandbox(args.need_word(verb)?)?;
                args.finish(verb)?;
                let changes = self.interp.changes_of(h, None);
                if changes.is_empty() {
                    return Ok("no changes".into());
                }
                let lines: Vec<String> = changes
                    .iter()
                    .map(|c| {
                        format!(
                            "change {}.{}: {} (outside {})",
                            location_label(self.interp.store(), c.target),
                            c.prop,
                            self.short(&c.shadow_value),
                            self.short(&c.outside_value)
                        )
                    })
                    .collect();
                Ok(lines.join("\n"))
            }
            "diffs" => {
                let h = self.sandbox(args.need_word(verb)?)?;
                args.finish(verb)?;
                let diffs = self.interp.differences_of(h, None)?;
                if diffs.is_empty() {
                    return Ok("no differences".into());
                }
                let lines: Vec<String> = diffs
                    .iter()
                    .map(|d| {
                        format!(
                            "difference {}.{}: observed {}, now {}",
                            location_label(self.interp.store(), d.target),
                            d.prop,
                            self.short(&d.observed),
                            self.short(&d.current)
                        )
                    })
                    .collect();
                Ok(lines.join("\n"))
            }
            "conflicts" => {
                let a = self.sandbox(args.need_word(verb)?)?;
                let b = self.sandbox(args.need_word(verb)?)?;
                args.finish(verb)?;
                let conflicts = self.interp.conflicts_with(a, b);
                if conflicts.is_empty() {
                    return Ok("no conflicts".into());
                }
                Ok(conflicts
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join("\n"))
            }
            "rule" => self.meta_rule(&mut args),
            "stats" => {
                let h = self.sandbox(args.need_word(verb)?)?;
                args.finish(verb)?;
                let s = self.interp.stats(h);
                Ok(format!(
                    "objects={} effects={} reads={} writes={} calls={}",
                    s.objects_wrapped,
                    s.effects_total,
                    s.distinct_reads,
                    s.distinct_writes,
                    s.distinct_calls
                ))
            }
            other => Err(ReplError::Usage(format!(
                "unknown command ':{other}'; try :help"
            ))),
        }
    }

    fn meta_sbx(&mut self, args: &mut Args<'_>) -> Result<String, ReplError> {
        let sub = args.need_word("sbx new|call|load")?;
        match sub {
            "new" => {
                let name = args.need_word("sbx new <name>")?.to_string();
                if self.handles.contains_key(&name) {
                    return Err(ReplError::Runtime(format!(
                        "sandbox '{name}' already exists"
                    )));
                }
                let global = match args.rest.trim_start().strip_prefix("global=") {
                    Some(rest) => {
                        args.rest = rest;
                        self.arg_expr(args, "sbx new <name> [global=<expr>]")?
                    }
                    None => Value::UNDEFINED,
                };
                args.finish("sbx new <name> [global=<expr>]")?;
                let h = self.interp.sandbox_new(global);
                self.handles.insert(name.clone(), h);
                Ok(format!("sandbox {name} = {h}"))
            }
            "call" => {
                let h = self.sandbox(args.need_word("sbx call <name> <expr> <expr>")?)?;
                let f = self.arg_expr(args, "sbx call <name> <expr> <expr>")?;
                let arg = self.arg_expr(args, "sbx call <name> <expr> <expr>")?;
                args.finish("sbx call <name> <expr> <expr>")?;
                let v = self.interp.sandbox_call(h, &f, arg)?;
                Ok(render_top(self.interp.store(), &v))
            }
            "load" => {
                let h = self.sandbox(args.need_word("sbx load <name> <path>")?)?;
                let path = args.rest.trim();
                if path.is_empty() {
                    return Err(ReplError::Usage("sbx load <name> <path>".into()));
                }
                let full = resolve(&self.base_dir, path);
                let src = std::fs::read_to_string(&full).map_err(|e| {
                    ReplError::Runtime(format!("cannot read {}: {e}", full.display()))
                })?;
                let v = self.interp.sandbox_load(h, &src)?;
                Ok(render_top(self.interp.store(), &v))
            }
            other => Err(ReplError::Usage(format!(
                "unknown sandbox command '{other}'"
            ))),
        }
    }

    fn meta_effects(&mut self, args: &mut Args<'_>) -> Result<String, ReplError> {
        const USAGE: &str = "effects <name> [reads|writes] [of <expr>]";
        let h = self.sandbox(args.need_word(USAGE)?)?;
        let mut filter: Option<bool> = None;
        let mut target = None;
        while let Some(w) = args.word() {
            match w {
                "reads" if filter.is_none() => filter = Some(true),
                "writes" if filter.is_none() => filter = Some(false),
                "of" if target.is_none() => target = Some(self.arg_expr(args, USAGE)?),
                _ => return Err(ReplError::Usage(USAGE.into())),
            }
        }
        let records = match &target {
            Some(t) => self.interp.effects_of(h, t),
            None => self.interp.sandbox(h).log.clone(),
        };
        let lines: Vec<String> = records
            .iter()
            .filter(|r| match filter {
                None => true,
                Some(true) => r.kind().is_read(),
                Some(false) => r.kind() == EffectKind::Set,
            })
            .map(|r| format_effect(r, false))
            .collect();
        if lines.is_empty() {
            return Ok("no effects".into());
        }
        Ok(lines.join("\n"))
    }

    fn meta_rule(&mut self, args: &mut Args<'_>) -> Result<String, ReplError> {
        const USAGE: &str =
            "rule <name> commiton|rollbackon <expr> <expr> | rule <name> commit <expr> <propname>";
        let h = self.sandbox(args.need_word(USAGE)?)?;
        let kind = args.need_word(USAGE)?;
        let target = self.arg_expr(args, USAGE)?;
        let target = self
            .interp
            .outside_target(h, &target)
            .ok_or_else(|| ReplError::Runtime("rule target must be an object".into()))?;
        let rule = match kind {
            "commiton" | "rollbackon" => {
                let predicate = self.arg_expr(args, USAGE)?;
                if kind == "commiton" {
                    Rule::commit_on(target, predicate)
                } else {
                    Rule::rollback_on(target, predicate)
                }
            }
            "commit" => Rule::commit_prop(target, args.need_word(USAGE)?),
            _ => return Err(ReplError::Usage(USAGE.into())),
        };
        args.finish(USAGE)?;
        self.interp.apply_rule(h, rule)?;
        Ok("rule installed".into())
    }

    /// Parses the longest expression at the front of `args` and evaluates
    /// it as outside code.
    fn arg_expr(&mut self, args: &mut Args<'_>, usage: &str) -> Result<Value, ReplError> {
        let tokens = tokenize(args.rest).map_err(SyntaxError::from)?;
        if tokens.is_empty() {
            return Err(ReplError::Usage(usage.into()));
        }
        let cut = argument_end(args.rest, &tokens);
        let (e, used) = parse_prefix(&tokens[..cut]).map_err(SyntaxError::from)?;
        args.rest = match tokens.get(used) {
            Some(t) => &args.rest[t.offset..],
            None => "",
        };
        self.eval_expr_ast(&e)
    }
}

fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Index of the first token of the next argument: a token at bracket
/// depth zero, separated by whitespace from a token that ends an operand,
/// and itself starting one. `o (f)` is then two arguments while `o(f)`
/// stays a call.
fn argument_end(src: &str, tokens: &[Token]) -> usize {
    let gap = |a: &Token, b: &Token| {
        src[a.offset + a.lexeme.len()..b.offset]
            .chars()
            .any(char::is_whitespace)
    };
    let ends_operand = |t: &Token| match t.kind {
        TokenKind::Ident | TokenKind::Number | TokenKind::Str => true,
        TokenKind::Keyword => matches!(&*t.lexeme, "true" | "false" | "null" | "undefined"),
        TokenKind::Punct => t.lexeme == ")" || t.lexeme == "]",
    };
    // A prefix `-` or `!` only counts when glued to its operand: `o -1`.
    let starts_operand = |i: usize| {
        let t = &tokens[i];
        match t.kind {
            TokenKind::Ident | TokenKind::Number | TokenKind::Str | TokenKind::Keyword => true,
            TokenKind::Punct if t.lexeme == "(" => true,
            TokenKind::Punct if t.lexeme == "-" || t.lexeme == "!" => {
                tokens.get(i + 1).is_some_and(|n| !gap(t, n))
            }
            TokenKind::Punct => false,
        }
    };
    let mut depth = 0i32;
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 && depth == 0 {
            let prev = &tokens[i - 1];
            let fun_name = i > 1 && tokens[i - 2].is_keyword("fun");
            if gap(prev, t) && ends_operand(prev) && starts_operand(i) && !fun_name {
                return i;
            }
        }
        if t.kind == TokenKind::Punct {
            match &*t.lexeme {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                _ => {}
            }
        }
    }
    tokens.len()
}

struct Args<'a> {
    rest: &'a str,
}

impl<'a> Args<'a> {
    fn word(&mut self) -> Option<&'a str> {
        let s = self.rest.trim_start();
        if s.is_empty() {
            self.rest = s;
            return None;
        }
        let end = s.find(char::is_whitespace).unwrap_or(s.len());
        self.rest = &s[end..];
        Some(&s[..end])
    }

    fn need_word(&mut self, usage: &str) -> Result<&'a str, ReplError> {
        self.word()
            .ok_or_else(|| ReplError::Usage(usage.to_string()))
    }

    fn finish(&self, usage: &str) -> Result<(), ReplError> {
        if self.rest.trim().is_empty() {
            Ok(())
        } else {
            Err(ReplError::Usage(usage.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(lines: &str) -> String {
        Session::default().run_transcript(lines).output
    }

    #[test]
    fn bindings_and_expressions() {
        let out = run("x = 40\nx + 2");
        assert_eq!(out, "> x = 40\n> x + 2\n42\n");
    }

    #[test]
    fn continuation_lines() {
        let out = run("let a = 1;\na + 1");
        assert_eq!(out, "> let a = 1;\n. a + 1\n2\n");
    }

    #[test]
    fn sandbox_commands() {
        let out = run(":sbx new s global=new null\n:effects s\n:conflicts s s\n:bogus");
        assert_eq!(
            out,
            "> :sbx new s global=new null\nsandbox s = SBX001\n> :effects s\nno effects\n\
             > :conflicts s s\nno conflicts\n> :bogus\nerror: usage: unknown command ':bogus'; try :help\n"
        );
    }

    #[test]
    fn unknown_sandbox_is_an_error() {
        let t = Session::default().run_transcript(":stats nope");
        assert!(matches!(t.first_error, Some(ReplError::Runtime(_))));
    }
}
