//! The `omega` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bar::BarMachine;
use crate::error::Error;
use crate::fsa::OmegaAutomaton;
use crate::grammar::{Cfg, Substitution};
use crate::kleene::{omega_power, read, write, OmegaKleeneExpr};
use crate::pda::{Bpda, PushdownAutomaton};
use crate::tree::RegularTree;
use crate::verify::{run_suite, Suite};
use crate::words::{Lasso, Symbol};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "omega", version, about = "ω-languages of finite and pushdown machines on lasso words")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide acceptance of a lasso word `u(v)^w` by an automaton file.
    CheckLasso {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        word: String,
    },
    /// Build the branch-guessing machine M̄ of a Büchi machine.
    BuildBar {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_value = "A")]
        separator: String,
        #[arg(long)]
        out: PathBuf,
        /// Rule-group listing; defaults to `<out>.provenance`.
        #[arg(long)]
        provenance: Option<PathBuf>,
    },
    /// Print the level-by-level code prefix of a regular tree.
    CodeTree {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value = "A")]
        separator: String,
    },
    /// Convert an ω-Kleene expression into a Büchi pushdown machine.
    KcToBpda {
        #[arg(long)]
        expr: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the expression `V^ω` for a grammar `V`.
    OmegaPower {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a λ-free substitution to an expression.
    Substitute {
        #[arg(long)]
        expr: PathBuf,
        #[arg(long)]
        subst: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a seeded property suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

enum Failure {
    Input(Error),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Runs `argv` (program name first), writing the report to `out` and
/// diagnostics to `err`; returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Input(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_MALFORMED
        }
        Err(Failure::Invariant(msg)) => {
            let _ = writeln!(err, "invariant violated: {msg}");
            EXIT_INVARIANT
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::CheckLasso { machine, word } => check_lasso(&machine, &word, out),
        Command::BuildBar { machine, separator, out: path, provenance } => {
            let base = read_bpda(&machine)?;
            let bm = BarMachine::build(&base, &Symbol::new(separator)?)?;
            write_machine(&path, &bm.bpda)?;
            let side = provenance.unwrap_or_else(|| sidecar(&path));
            write(&side, &bm.provenance_text())?;
            report(out, &format!("wrote {} ({} states, {} rules)", path.display(), bm.bpda.machine.states().len(), bm.bpda.machine.rules().len()))
        }
        Command::CodeTree { tree, levels, separator } => {
            let t = RegularTree::parse(&read(&tree)?)?;
            let h = t.h_prefix(levels, &Symbol::new(separator)?)?;
            report(out, &h.dotted())
        }
        Command::KcToBpda { expr, out: path } => {
            let e = OmegaKleeneExpr::read_file(&expr)?;
            let m = e.to_bpda()?;
            write_machine(&path, &m)?;
            report(out, &format!("wrote {} ({} states, {} rules)", path.display(), m.machine.states().len(), m.machine.rules().len()))
        }
        Command::OmegaPower { grammar, out: path } => {
            let g = Cfg::parse(&read(&grammar)?)?;
            write_expr(&path, &omega_power(&g)?)?;
            report(out, &format!("wrote {}", path.display()))
        }
        Command::Substitute { expr, subst, out: path } => {
            let e = OmegaKleeneExpr::read_file(&expr)?;
            let f = Substitution::read_file(&subst)?;
            write_expr(&path, &e.substitute(&f)?)?;
            report(out, &format!("wrote {}", path.display()))
        }
        Command::Verify { suite, seed } => {
            let r = run_suite(suite, seed)?;
            let _ = write!(out, "{}", r.render());
            Ok(if r.passed() { EXIT_OK } else { EXIT_INVARIANT })
        }
    }
}

fn report(out: &mut dyn Write, line: &str) -> Outcome {
    let _ = writeln!(out, "{line}");
    Ok(EXIT_OK)
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".provenance");
    PathBuf::from(s)
}

fn is_pushdown(text: &str) -> bool {
    text.lines().any(|l| l.trim_start().starts_with("stack:"))
}

/// A Büchi pushdown file, or a finite Büchi automaton file read as one.
fn read_bpda(path: &Path) -> std::result::Result<Bpda, Failure> {
    let text = read(path)?;
    if is_pushdown(&text) {
        return match PushdownAutomaton::parse(&text)? {
            PushdownAutomaton::Buchi(b) => Ok(b),
            PushdownAutomaton::Muller(_) => Err(Error::InvalidMachine("expected a Büchi machine, found a Muller table".into()).into()),
        };
    }
    match OmegaAutomaton::parse(&text)? {
        OmegaAutomaton::Buchi(b) => Ok(Bpda::from_buchi(&b)),
        OmegaAutomaton::Muller(_) => Err(Error::InvalidMachine("expected a Büchi machine, found a Muller table".into()).into()),
    }
}

fn write_machine(path: &Path, m: &Bpda) -> std::result::Result<(), Failure> {
    let text = m.to_text();
    write(path, &text)?;
    match PushdownAutomaton::parse(&read(path)?) {
        Ok(PushdownAutomaton::Buchi(back)) if &back == m => Ok(()),
        _ => Err(Failure::Invariant(format!("{} does not re-parse to the written machine", path.display()))),
    }
}

fn write_expr(path: &Path, e: &OmegaKleeneExpr) -> std::result::Result<(), Failure> {
    e.write_files(path)?;
    match OmegaKleeneExpr::read_file(path) {
        Ok(back) if &back == e => Ok(()),
        _ => Err(Failure::Invariant(format!("{} does not re-parse to the written expression", path.display()))),
    }
}

fn check_lasso(machine: &Path, word: &str, out: &mut dyn Write) -> Outcome {
    let text = read(machine)?;
    if is_pushdown(&text) {
        let PushdownAutomaton::Buchi(b) = PushdownAutomaton::parse(&text)? else {
            return Err(Error::InvalidMachine("lasso acceptance is decided for Büchi pushdown machines only".into()).into());
        };
        let w = Lasso::parse_with(word, b.machine.alphabet())?;
        return verdict(out, b.accepts_lasso(&w)?, None);
    }
    let a = OmegaAutomaton::parse(&text)?;
    let w = Lasso::parse_with(word, a.machine().alphabet())?;
    match a.accepts_lasso(&w)? {
        Some(run) => {
            if !run.replays(a.machine(), &w) {
                return Err(Failure::Invariant("run witness does not replay".into()));
            }
            verdict(out, true, Some(run.render(a.machine())))
        }
        None => verdict(out, false, None),
    }
}

fn verdict(out: &mut dyn Write, accepted: bool, witness: Option<String>) -> Outcome {
    let _ = writeln!(out, "{}", if accepted { "ACCEPT" } else { "REJECT" });
    if let Some(w) = witness {
        let _ = writeln!(out, "{w}");
    }
    Ok(if accepted { EXIT_OK } else { EXIT_REJECT })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("omega").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_are_malformed() {
        assert_eq!(run_args(&["no-such-verb"]).0, EXIT_MALFORMED);
        assert_eq!(run_args(&["verify", "--suite", "nope"]).0, EXIT_MALFORMED);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_file_is_malformed() {
        let (code, _, err) = run_args(&["code-tree", "--tree", "/nonexistent/t.tree", "--levels", "2"]);
        assert_eq!(code, EXIT_MALFORMED);
        assert!(err.contains("io error"));
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar(Path::new("x/bar.pda")), PathBuf::from("x/bar.pda.provenance"));
    }
}
