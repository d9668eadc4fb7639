//! Command-line front end. Exit codes are a stable contract:
//! 0 = TRUE, 1 = FALSE, 2 = usage or parse error, 3 = resource guard
//! tripped. The verdict line `RESULT: TRUE|FALSE` is machine-parseable.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use qctlii::suites;
use qctlii_core::formula::{
    formula_size, parse_formula, resolve_full, translate_structural, StateFormula,
};
use qctlii_core::kripke::parse_model;
use qctlii_core::mc::{check_structure, McError};
use qctlii_core::mctree::{check_tree_opts, TreeOptions, TreeRun};
use qctlii_core::Cks;

const EXIT_TRUE: u8 = 0;
const EXIT_FALSE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qctlii",
    about = "Model checker for quantified CTL* with imperfect information",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Semantics {
    /// Quantify over uniform labellings of the structure itself.
    Structure,
    /// Quantify over uniform labellings of the unfolding (hierarchical
    /// formulas only).
    Tree,
}

#[derive(clap::Args)]
struct FormulaArg {
    /// Formula text (ASCII syntax, e.g. "exists q^{1}. (q & E X !q)").
    #[arg(long, conflicts_with = "formula_file")]
    formula: Option<String>,
    /// Read the formula from a file instead.
    #[arg(long)]
    formula_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a formula on a model state and print RESULT: TRUE|FALSE.
    Check {
        /// Model file (one model per file).
        #[arg(long)]
        model: PathBuf,
        /// Name of the state to check from.
        #[arg(long)]
        state: String,
        #[arg(long, value_enum)]
        semantics: Semantics,
        #[command(flatten)]
        formula: FormulaArg,
        /// Also write every intermediate automaton to this directory
        /// (tree semantics only).
        #[arg(long)]
        dump_automata: Option<PathBuf>,
    },
    /// Print the structural translation of a quantified CTL formula.
    Translate {
        /// Model file supplying the local alphabets.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        formula: FormulaArg,
    },
    /// Run the tree-semantics pipeline and write every intermediate
    /// automaton to a directory.
    DumpAutomata {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        state: String,
        #[command(flatten)]
        formula: FormulaArg,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance suites and print one line per criterion.
    Selftest {
        /// Run only the named suite.
        #[arg(long)]
        only: Option<String>,
    },
}

fn usage_err(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn load_model(path: &Path) -> Result<Cks, ExitCode> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage_err(format_args!("cannot read {}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| usage_err(format_args!("{}: {e}", path.display())))
}

fn load_formula(arg: &FormulaArg) -> Result<StateFormula, ExitCode> {
    let text = match (&arg.formula, &arg.formula_file) {
        (Some(t), None) => t.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| usage_err(format_args!("cannot read {}: {e}", path.display())))?,
        _ => return Err(usage_err("exactly one of --formula, --formula-file required")),
    };
    parse_formula(&text).map_err(usage_err)
}

fn state_id(k: &Cks, name: &str) -> Result<usize, ExitCode> {
    k.state_id(name)
        .ok_or_else(|| usage_err(format_args!("unknown state '{name}'")))
}

fn mc_exit(e: McError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        McError::Input(_) => ExitCode::from(EXIT_USAGE),
        McError::Resource(_) => ExitCode::from(EXIT_RESOURCE),
    }
}

fn write_dumps(dir: &Path, run: &TreeRun) -> Result<(), ExitCode> {
    std::fs::create_dir_all(dir)
        .map_err(|e| usage_err(format_args!("cannot create {}: {e}", dir.display())))?;
    for (i, (label, text)) in run.dumps.iter().enumerate() {
        let slug: String = label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        let path = dir.join(format!("{i:03}_{slug}.txt"));
        let body = format!("{label}\n\n{text}");
        std::fs::write(&path, body)
            .map_err(|e| usage_err(format_args!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run_tree(
    k: &Cks,
    s: usize,
    f: &StateFormula,
    dump: Option<&Path>,
) -> Result<TreeRun, ExitCode> {
    let run = check_tree_opts(k, s, f, &TreeOptions::default()).map_err(mc_exit)?;
    if let Some(dir) = dump {
        write_dumps(dir, &run)?;
    }
    Ok(run)
}

fn cmd_check(
    model: &Path,
    state: &str,
    semantics: Semantics,
    formula: &FormulaArg,
    dump: Option<&Path>,
) -> Result<ExitCode, ExitCode> {
    let k = load_model(model)?;
    let f = load_formula(formula)?;
    let s = state_id(&k, state)?;
    let start = Instant::now();
    let verdict = match semantics {
        Semantics::Structure => {
            let v = check_structure(&k, s, &f).map_err(mc_exit)?;
            println!("model states: {}", k.state_count());
            v
        }
        Semantics::Tree => {
            let run = run_tree(&k, s, &f, dump)?;
            println!("model states: {}", k.state_count());
            println!("automaton states: {}", run.automaton_states);
            println!("intermediate automata: {}", run.dumps.len());
            run.verdict
        }
    };
    println!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    println!("RESULT: {}", if verdict { "TRUE" } else { "FALSE" });
    Ok(ExitCode::from(if verdict { EXIT_TRUE } else { EXIT_FALSE }))
}

fn cmd_translate(model: &Path, formula: &FormulaArg) -> Result<ExitCode, ExitCode> {
    let k = load_model(model)?;
    let f = load_formula(formula)?;
    let t = translate_structural(&f, k.locals()).map_err(usage_err)?;
    println!("{t}");
    // plain quantifiers carry Observation::Full; resolve before sizing
    eprintln!(
        "input size: {}, output size: {}",
        formula_size(&resolve_full(&f, k.n())),
        formula_size(&resolve_full(&t, k.n()))
    );
    Ok(ExitCode::from(EXIT_TRUE))
}

fn cmd_dump(
    model: &Path,
    state: &str,
    formula: &FormulaArg,
    out: &Path,
) -> Result<ExitCode, ExitCode> {
    let k = load_model(model)?;
    let f = load_formula(formula)?;
    let s = state_id(&k, state)?;
    let run = run_tree(&k, s, &f, Some(out))?;
    println!("wrote {} automata to {}", run.dumps.len(), out.display());
    println!("RESULT: {}", if run.verdict { "TRUE" } else { "FALSE" });
    Ok(ExitCode::from(if run.verdict { EXIT_TRUE } else { EXIT_FALSE }))
}

fn cmd_selftest(only: Option<&str>) -> Result<ExitCode, ExitCode> {
    let selected: Vec<_> = suites::criteria()
        .into_iter()
        .enumerate()
        .filter(|(_, (name, _))| only.map_or(true, |o| o == *name))
        .collect();
    if selected.is_empty() {
        let names: Vec<&str> = suites::criteria().iter().map(|(n, _)| *n).collect();
        return Err(usage_err(format_args!(
            "unknown suite; available: {}",
            names.join(", ")
        )));
    }
    let mut failed = false;
    for (i, (name, run)) in selected {
        match run() {
            Ok(stats) => println!("criterion {} ({name}): pass - {stats}", i + 1),
            Err(msg) => {
                failed = true;
                println!("criterion {} ({name}): FAIL - {msg}", i + 1);
            }
        }
    }
    Ok(ExitCode::from(if failed { EXIT_FALSE } else { EXIT_TRUE }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.command {
        Command::Check {
            model,
            state,
            semantics,
            formula,
            dump_automata,
        } => cmd_check(model, state, *semantics, formula, dump_automata.as_deref()),
        Command::Translate { model, formula } => cmd_translate(model, formula),
        Command::DumpAutomata {
            model,
            state,
            formula,
            out,
        } => cmd_dump(model, state, formula, out.as_path()),
        Command::Selftest { only } => cmd_selftest(only.as_deref()),
    };
    match r {
        Ok(code) => code,
        Err(code) => code,
    }
}
