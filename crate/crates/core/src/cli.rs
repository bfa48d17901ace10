//! `kronpencil` command line: `solve`, `gamma`, `verify`, `oracle`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse or shape error,
//! 3 no solution, 4 internal failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use crate::config::SolverConfig;
use crate::error::Error;
use crate::io::{parse_problem, parse_solutions, to_json, ProblemFile, SolutionFile};
use crate::operators::{kronecker_determinants, kronecker_determinants_scaled, DeterminantTriple, Scaling};
use crate::oracle::{brute_force_solutions, OracleConfig};
use crate::two_param_solver::{solve, verify_inflated, verify_solution, SolvePath};
use crate::C64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_SOLUTION: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kronpencil", version, about = "Two-parameter rectangular matrix pencil solver")]
pub struct Cli {
    /// Log more (-v info, -vv debug) to standard error.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve (λ₀A₀ + λ₁A₁ + λ₂A₂)x = 0.
    Solve {
        input: PathBuf,
        /// Relative rank threshold.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        residual_tol: f64,
        #[arg(long, default_value_t = SolverConfig::default().seed)]
        seed: u64,
        /// Random trials in the nonsingular-combination search.
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[arg(long, default_value_t = 1e10)]
        cond_threshold: f64,
        /// Write the solution file here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print Γ₀, Γ₁, Γ₂.
    Gamma {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ScalingArg::Integer)]
        scaling: ScalingArg,
    },
    /// Check every entry of a solution file against a problem.
    Verify {
        input: PathBuf,
        solutions: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Brute-force chart scan plus Newton (n ≤ 4, m ≤ 6).
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = OracleConfig::default().grid)]
        grid: usize,
        #[arg(long, default_value_t = OracleConfig::default().refine_iters)]
        refine_iters: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingArg {
    Integer,
    Orthogonal,
}

impl From<ScalingArg> for Scaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Integer => Scaling::Integer,
            ScalingArg::Orthogonal => Scaling::Orthogonal,
        }
    }
}

/// A failed command: exit code plus message for standard error.
#[derive(Debug)]
struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Internal(_) | Error::NotCommuting { .. } | Error::StaleEigenvalue => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        Failure(code, e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Runs one command with `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match execute(cli.command) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> std::result::Result<ProblemFile, Failure> {
    parse_problem(&read(path)?).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> std::result::Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure(EXIT_INTERNAL, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Outcome {
    match command {
        Command::Solve { input, tol, residual_tol, seed, trials, cond_threshold, output } => {
            let file = load_problem(&input)?;
            let [a0, a1, a2] = file.matrices()?;
            let config = SolverConfig { rank_tol: tol, residual_tol, seed, trials, cond_threshold, ..SolverConfig::default() };
            let report = solve(&a0, &a1, &a2, &config)?;
            for line in &report.diagnostics.log {
                log::info!("{line}");
            }
            let out = SolutionFile::from_report(&report, &config, file.name.clone());
            emit(&to_json(&out)?, output.as_deref())?;
            if report.solutions.is_empty() || report.path == SolvePath::NoSolution {
                eprintln!("no solution");
                return Ok(EXIT_NO_SOLUTION);
            }
            Ok(EXIT_OK)
        }
        Command::Gamma { input, scaling } => {
            let file = load_problem(&input)?;
            let text = match (scaling, file.integer_problem()?) {
                (ScalingArg::Integer, Some(ip)) => format_int_triple(&kronecker_determinants(&ip)),
                _ => format_complex_triple(&kronecker_determinants_scaled(&file.problem()?, scaling.into())),
            };
            print!("{text}");
            Ok(EXIT_OK)
        }
        Command::Verify { input, solutions, tol } => {
            let p = load_problem(&input)?.problem()?;
            let sols = parse_solutions(&read(&solutions)?).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", solutions.display())))?;
            if let Some(bad) = sols.solutions.iter().position(|s| s.x.len() != p.n()) {
                return Err(Failure(
                    EXIT_INPUT,
                    format!("solution {bad} has x of length {}, problem has n = {}", sols.solutions[bad].x.len(), p.n()),
                ));
            }
            println!("{:>4}  {:>12}  {:>12}  {:>12}  result", "#", "residual", "sigma_min", "inflated");
            let mut all = true;
            for (i, s) in sols.solutions.iter().enumerate() {
                let (lambda, x) = (s.lambda_values(), s.x_vector());
                let r = verify_solution(&p, &lambda, &x, tol);
                let inf = verify_inflated(&p, &lambda, &x, tol);
                let worst = inf.pairs.iter().map(|c| c.residual).fold(0.0, f64::max);
                let pass = r.pass && inf.pass;
                all &= pass;
                println!(
                    "{i:>4}  {:>12.3e}  {:>12.3e}  {worst:>12.3e}  {}",
                    r.relative_residual,
                    r.sigma_min_relative,
                    if pass { "PASS" } else { "FAIL" }
                );
            }
            Ok(if all { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Command::Oracle { input, grid, refine_iters, output } => {
            let file = load_problem(&input)?;
            let p = file.problem()?;
            let cfg = OracleConfig { grid, refine_iters, ..OracleConfig::default() };
            let points = brute_force_solutions(&p, &cfg)?;
            let out = SolutionFile::from_oracle(&points, &SolverConfig::default(), file.name.clone());
            emit(&to_json(&out)?, output.as_deref())?;
            Ok(EXIT_OK)
        }
    }
}

fn format_table(name: &str, cells: Vec<Vec<String>>) -> String {
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let rows = cells.len();
    let cols = cells.first().map_or(0, Vec::len);
    let mut s = format!("{name} ({rows}x{cols})\n");
    for row in cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

fn format_int_triple(g: &DeterminantTriple<i64>) -> String {
    let mut s = String::new();
    for (i, m) in g.gamma.iter().enumerate() {
        let cells = m.row_iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        s.push_str(&format_table(&format!("Gamma{i}"), cells));
    }
    s
}

fn complex_cell(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn format_complex_triple(g: &DeterminantTriple<C64>) -> String {
    let mut s = String::new();
    for (i, m) in g.gamma.iter().enumerate() {
        let cells = rows_of(m);
        s.push_str(&format_table(&format!("Gamma{i}"), cells));
    }
    s
}

fn rows_of(m: &DMatrix<C64>) -> Vec<Vec<String>> {
    m.row_iter().map(|r| r.iter().map(|&z| complex_cell(z)).collect()).collect()
}
