//! `proctheory`: parse, evaluate and check `.pd` wiring-diagram files, and run
//! the seeded theorem suite.
//!
//! Exit codes: 0 success, 1 typecheck violations or failed checks, 2 parse,
//! resolution or I/O errors, 3 unknown property in a `check` directive.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use proctheory::check::{run_check, CheckError, TargetError};
use proctheory::diagram::{evaluate, parse, resolve, typecheck, Diagnostic, Diagram, Program, Property};
use proctheory::par::Execution;
use proctheory::theorems::{all_passed, run_all_with, run_one, Kernel, SuiteConfig};
use proctheory::theories::{canonical_rep, normalization, Theory, TheoryName};
use proctheory::{ProcessTensor, Tolerances};

const OK: u8 = 0;
const FAILED: u8 = 1;
const INPUT_ERROR: u8 = 2;
const UNKNOWN_PROPERTY: u8 = 3;

#[derive(Parser)]
#[command(name = "proctheory", version, about = "Quantum process theories: wiring diagrams and structural checks")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    /// Absolute zero threshold.
    #[arg(long, global = true, value_parser = positive)]
    tol_zero: Option<f64>,
    /// Relative equality threshold.
    #[arg(long, global = true, env = "PROCTHEORY_TOL_EQ", value_parser = positive)]
    tol_eq: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and resolve a file, then list its contents.
    Parse { file: PathBuf },
    /// Typecheck and evaluate diagrams.
    Eval {
        file: PathBuf,
        #[arg(long, default_value = "qcalc")]
        theory: TheoryName,
        /// Only this diagram (default: all, in file order).
        #[arg(long)]
        diagram: Option<String>,
    },
    /// Run the file's `check` directives.
    Check { file: PathBuf },
    /// Run the seeded theorem suite, one JSON line per check.
    Theorems {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,3", value_parser = at_least_one)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Only the check with this 1-based index.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=14))]
        only: Option<u64>,
        #[arg(long, value_enum, hide = true)]
        mutant: Option<Mutant>,
    },
    /// Print the class of each evaluated diagram modulo positive scalars.
    Quotient {
        file: PathBuf,
        #[arg(long)]
        diagram: Option<String>,
    },
}

/// Deliberately broken kernels for smoke-testing the suite.
#[derive(Clone, Copy, ValueEnum)]
enum Mutant {
    BulletUnscaled,
    CanonicalIdentity,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, found `{s}`")),
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected an integer >= 1, found `{s}`")),
    }
}

fn tolerances(t: &TolArgs) -> Tolerances {
    let mut tol = Tolerances::default();
    if let Some(z) = t.tol_zero {
        tol.zero_abs = z;
    }
    if let Some(e) = t.tol_eq {
        tol.eq_rel = e;
    }
    tol
}

fn report(file: &Path, diags: &[Diagnostic]) {
    let name = file.display().to_string();
    for d in diags {
        eprintln!("{}", d.render(&name));
    }
}

fn load(file: &Path, tol: &Tolerances) -> Result<Program, u8> {
    let src = std::fs::read_to_string(file).map_err(|e| {
        eprintln!("{}: {e}", file.display());
        INPUT_ERROR
    })?;
    let parsed = parse(&src).map_err(|d| {
        report(file, &[d]);
        INPUT_ERROR
    })?;
    resolve(&parsed, file.parent(), tol).map_err(|ds| {
        report(file, &ds);
        INPUT_ERROR
    })
}

/// Twelve significant digits, trailing zeros dropped, tiny values as 0.
fn num(x: f64, tol: &Tolerances) -> String {
    if x.abs() <= tol.zero_abs {
        return "0".to_string();
    }
    let digits = (11 - x.abs().log10().floor() as i32).clamp(0, 30) as usize;
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn complex(z: proctheory::C64, tol: &Tolerances) -> String {
    let (re, im) = (num(z.re, tol), num(z.im, tol));
    if im == "0" {
        re
    } else if let Some(abs) = im.strip_prefix('-') {
        format!("{re}-{abs}i")
    } else {
        format!("{re}+{im}i")
    }
}

/// `scalar v` for closed results, else the boundary types and the choi rows.
fn render_process(f: &ProcessTensor, tol: &Tolerances) -> String {
    if let Some(s) = f.as_scalar() {
        return format!("scalar {}", num(s.value(), tol));
    }
    let j = f.choi();
    let mut out = format!("{} -> {}", f.input(), f.output());
    for r in 0..j.rows() {
        let row: Vec<String> = (0..j.cols()).map(|c| complex(j[(r, c)], tol)).collect();
        write!(out, "\n  [{}]", row.join(", ")).expect("writing to a string");
    }
    out
}

fn selected<'a>(prog: &'a Program, only: &Option<String>) -> Result<Vec<&'a Diagram>, u8> {
    match only {
        Some(name) => match prog.diagram(name) {
            Some(d) => Ok(vec![d]),
            None => {
                eprintln!("no diagram named `{name}`");
                Err(INPUT_ERROR)
            }
        },
        None => Ok(prog.diagrams.iter().collect()),
    }
}

fn evaluated(
    file: &Path,
    prog: &Program,
    only: &Option<String>,
    theory: TheoryName,
    exec: Execution,
) -> Result<Vec<(String, ProcessTensor)>, u8> {
    let mut out = Vec::new();
    let mut violations = Vec::new();
    for d in selected(prog, only)? {
        match typecheck(d, Theory::of(theory).caps) {
            Ok(_) => match evaluate(d, &prog.boxes, exec) {
                Ok(v) => out.push((d.name.clone(), v)),
                Err(e) => {
                    eprintln!("{}: diagram `{}`: {e}", file.display(), d.name);
                    return Err(INPUT_ERROR);
                }
            },
            Err(v) => violations.extend(v),
        }
    }
    if violations.is_empty() {
        Ok(out)
    } else {
        report(file, &violations);
        Err(FAILED)
    }
}

fn cmd_parse(file: &Path, tol: &Tolerances) -> Result<u8, u8> {
    let prog = load(file, tol)?;
    println!(
        "{}: {} systems, {} boxes, {} reps, {} diagrams, {} checks",
        file.display(),
        prog.systems.len(),
        prog.boxes.len(),
        prog.reps.len(),
        prog.diagrams.len(),
        prog.checks.len()
    );
    for d in &prog.diagrams {
        println!("diagram {}: {} nodes, {} wires", d.name, d.nodes.len(), d.wires.len());
    }
    Ok(OK)
}

fn cmd_eval(file: &Path, theory: TheoryName, only: &Option<String>, tol: &Tolerances, exec: Execution) -> Result<u8, u8> {
    let prog = load(file, tol)?;
    for (name, v) in evaluated(file, &prog, only, theory, exec)? {
        println!("{name}: {}", render_process(&v, tol));
    }
    Ok(OK)
}

fn cmd_check(file: &Path, tol: &Tolerances, exec: Execution) -> Result<u8, u8> {
    let prog = load(file, tol)?;
    let unknown: Vec<_> = prog.checks.iter().filter(|c| matches!(c.property, Property::Unknown(_))).collect();
    if !unknown.is_empty() {
        for c in unknown {
            eprintln!("{}:{}: check: unknown property `{}`", file.display(), c.span, c.property.name());
        }
        return Err(UNKNOWN_PROPERTY);
    }
    let mut code = OK;
    for c in &prog.checks {
        match run_check(&prog, c, tol, exec) {
            Ok(r) => {
                println!("{r}");
                if !r.passed {
                    code = FAILED;
                }
            }
            Err(CheckError::Target(TargetError::IllTyped(name, diags))) => {
                println!("FAIL {} {name} in {}: does not typecheck", c.property.name(), c.theory);
                report(file, &diags);
                code = FAILED;
            }
            Err(CheckError::Target(e)) => {
                eprintln!("{}:{}: check: {e}", file.display(), c.span);
                return Err(INPUT_ERROR);
            }
            Err(CheckError::UnknownProperty(_)) => return Err(UNKNOWN_PROPERTY),
        }
    }
    Ok(code)
}

fn cmd_quotient(file: &Path, only: &Option<String>, tol: &Tolerances, exec: Execution) -> Result<u8, u8> {
    let prog = load(file, tol)?;
    for (name, v) in evaluated(file, &prog, only, TheoryName::QCalcQuotient, exec)? {
        let n = normalization(&v).value();
        let class = canonical_rep(&v, tol);
        if class.is_zero() {
            println!("{name}: class 0 (N = {})", num(n, tol));
        } else if class.canonical().is_closed() {
            println!("{name}: class 1 (N = {})", num(n, tol));
        } else {
            println!("{name}: N = {}, canonical {}", num(n, tol), render_process(class.canonical(), tol));
        }
    }
    Ok(OK)
}

fn cmd_theorems(cfg: &SuiteConfig, only: Option<u64>, mutant: Option<Mutant>) -> u8 {
    let mut kernel = Kernel::reference();
    match mutant {
        Some(Mutant::BulletUnscaled) => kernel.bullet = |g, f, _| proctheory::systems::compose_seq(g, f),
        Some(Mutant::CanonicalIdentity) => kernel.canonical = |f, _| f.clone(),
        None => {}
    }
    let reports = match only {
        Some(k) => vec![run_one(cfg, kernel, k as usize)],
        None => run_all_with(cfg, kernel),
    };
    for r in &reports {
        println!("{}", r.to_json_line());
    }
    if all_passed(&reports) {
        OK
    } else {
        FAILED
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = tolerances(&cli.tol);
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let code = match cli.command {
        Command::Parse { file } => cmd_parse(&file, &tol),
        Command::Eval { file, theory, diagram } => cmd_eval(&file, theory, &diagram, &tol, exec),
        Command::Check { file } => cmd_check(&file, &tol, exec),
        Command::Quotient { file, diagram } => cmd_quotient(&file, &diagram, &tol, exec),
        Command::Theorems { seed, dims, trials, only, mutant } => {
            let cfg = SuiteConfig { seed, dims, trials, tol, exec };
            Ok(cmd_theorems(&cfg, only, mutant))
        }
    };
    ExitCode::from(code.unwrap_or_else(|c| c))
}
