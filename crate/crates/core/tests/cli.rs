//! The `kronpencil` binary end to end.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use common::*;
use kronpencil::io::{parse_solutions, to_json, ProblemFile, ReportPath, SolutionFile};
use kronpencil::pencil_solvers::ProjectiveEigenvalue;
use kronpencil::random::{complex_normal_matrix, rng};
use kronpencil::Problem64;
use nalgebra::DMatrix;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn kronpencil(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_kronpencil")).args(args).output().expect("spawn kronpencil");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn example(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name).display().to_string()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn write_problem(dir: &TempDir, name: &str, p: &Problem64) -> String {
    write(dir, name, &to_json(&ProblemFile::from_problem(p, None)).unwrap())
}

fn solutions(r: &Run) -> SolutionFile {
    parse_solutions(&r.stdout).unwrap_or_else(|e| panic!("{e}\nstdout: {}\nstderr: {}", r.stdout, r.stderr))
}

fn eigenvalues(f: &SolutionFile) -> Vec<ProjectiveEigenvalue> {
    f.solutions.iter().map(|s| ProjectiveEigenvalue::new(s.lambda_values()).unwrap()).collect()
}

fn same_set(a: &[ProjectiveEigenvalue], b: &[ProjectiveEigenvalue], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|u| b.iter().any(|v| u.distance(v) <= tol))
}

/// Integer tables printed by `gamma`.
fn parse_tables(text: &str) -> Vec<DMatrix<i64>> {
    let mut out = Vec::new();
    let mut lines = text.lines().peekable();
    while let Some(head) = lines.next() {
        let dims = head.rsplit_once('(').unwrap().1.trim_end_matches(')');
        let (r, c) = dims.split_once('x').unwrap();
        let (r, c): (usize, usize) = (r.parse().unwrap(), c.parse().unwrap());
        let mut vals = Vec::new();
        for _ in 0..r {
            vals.extend(lines.next().unwrap().split_whitespace().map(|v| v.parse::<i64>().unwrap()));
        }
        out.push(DMatrix::from_row_slice(r, c, &vals));
    }
    out
}

#[test]
fn solve_example1() {
    let r = kronpencil(&["solve", &example("ex1.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let f = solutions(&r);
    assert_eq!(f.solutions.len(), 6);
    assert_eq!(f.report.path, ReportPath::GenericCommuting);
    let want: Vec<_> = ex1_eigenvalues().into_iter().map(|l| ProjectiveEigenvalue::new(l).unwrap()).collect();
    assert!(same_set(&eigenvalues(&f), &want, 1e-3));
}

#[test]
fn solve_example2() {
    let r = kronpencil(&["solve", &example("ex2.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let f = solutions(&r);
    assert_eq!(f.report.path, ReportPath::SimultaneousPencils);
    assert_eq!(f.solutions.len(), 2);
    assert_eq!(f.solutions.iter().filter(|s| s.continuum).count(), 1);
    assert!(f.report.alpha_used.is_none());
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"A0\": [[1, 2]");
    assert_eq!(kronpencil(&["solve", &bad]).code, 2);
    let ragged = write(&dir, "ragged.json", r#"{"A0": [[1, 2], [3]], "A1": [[1, 2], [3, 4]], "A2": [[1, 2], [3, 4]]}"#);
    assert_eq!(kronpencil(&["solve", &ragged]).code, 2);
    let square = write(&dir, "square.json", r#"{"A0": [[1]], "A1": [[2]], "A2": [[3]]}"#);
    let r = kronpencil(&["solve", &square]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("error"));
    assert_eq!(kronpencil(&["solve", "/nonexistent/problem.json"]).code, 2);
    assert_eq!(kronpencil(&["solve", &example("ex1.json"), "--no-such-flag"]).code, 2);
    assert_eq!(kronpencil(&["gamma", &bad]).code, 2);
    assert_eq!(kronpencil(&["--help"]).code, 0);
}

#[test]
fn gamma_integer_tables() {
    for (file, want) in [("ex1.json", ex1_gamma()), ("ex2.json", ex2_gamma()), ("ex3.json", ex3_gamma())] {
        let r = kronpencil(&["gamma", &example(file), "--scaling", "integer"]);
        assert_eq!(r.code, 0);
        assert_eq!(parse_tables(&r.stdout), want.to_vec(), "{file}");
    }
    let dir = TempDir::new().unwrap();
    let tiny = write(&dir, "tiny.json", r#"{"A0": [[1], [2]], "A1": [[3], [4]], "A2": [[5], [7]]}"#);
    let r = kronpencil(&["gamma", &tiny]);
    assert_eq!(r.code, 0);
    let t = parse_tables(&r.stdout);
    assert_eq!(t.len(), 3);
    assert!(t.iter().all(|m| m.shape() == (1, 1)));
    let r = kronpencil(&["gamma", &example("ex3.json"), "--scaling", "orthogonal"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("Gamma0 (6x3)"));
}

#[test]
fn verify_outcomes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ex3.sol.json").display().to_string();
    assert_eq!(kronpencil(&["solve", &example("ex3.json"), "--output", &out]).code, 0);
    let r = kronpencil(&["verify", &example("ex3.json"), &out]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.stdout.contains("PASS"));

    let mut f = parse_solutions(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(f.solutions.len(), 1);
    f.solutions[0].lambda[1][0] += 0.25;
    let tampered = write(&dir, "tampered.json", &to_json(&f).unwrap());
    let r = kronpencil(&["verify", &example("ex3.json"), &tampered]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("FAIL"));

    // Example 1 has n = 3; Example 3 solutions have n = 2.
    assert_eq!(kronpencil(&["verify", &example("ex1.json"), &out]).code, 2);
    let junk = write(&dir, "junk.json", "[]");
    assert_eq!(kronpencil(&["verify", &example("ex3.json"), &junk]).code, 2);
}

#[test]
fn solve_then_verify_always_passes() {
    let dir = TempDir::new().unwrap();
    let mut inputs: Vec<String> = ["ex1.json", "ex2.json", "ex3.json"].iter().map(|f| example(f)).collect();
    for seed in 0..4u64 {
        let mut g = rng(seed, 80);
        let n = 2 + (seed % 2) as usize;
        let a: [_; 3] = std::array::from_fn(|_| complex_normal_matrix::<f64>(&mut g, n + 1, n));
        let p = Problem64::new(a[0].clone(), a[1].clone(), a[2].clone()).unwrap();
        inputs.push(write_problem(&dir, &format!("r{seed}.json"), &p));
    }
    for (i, input) in inputs.iter().enumerate() {
        let out = dir.path().join(format!("s{i}.json")).display().to_string();
        assert_eq!(kronpencil(&["solve", input, "--output", &out]).code, 0, "{input}");
        let r = kronpencil(&["verify", input, &out]);
        assert_eq!(r.code, 0, "{input}\n{}", r.stdout);
    }
}

#[test]
fn no_solution_exit_3() {
    let dir = TempDir::new().unwrap();
    let a: [_; 3] = std::array::from_fn(|k| complex_normal_matrix::<f64>(&mut rng(1, k as u64), 4, 2));
    let p = Problem64::new(a[0].clone(), a[1].clone(), a[2].clone()).unwrap();
    let input = write_problem(&dir, "tall.json", &p);
    let r = kronpencil(&["solve", &input]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    let f = solutions(&r);
    assert!(f.solutions.is_empty());
    assert_eq!(f.report.path, ReportPath::NoSolution);
}

#[test]
fn deterministic_output() {
    let a = kronpencil(&["solve", &example("ex1.json"), "--seed", "17"]);
    let b = kronpencil(&["solve", &example("ex1.json"), "--seed", "17"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let c = kronpencil(&["solve", &example("ex1.json"), "--seed", "18"]);
    assert!(same_set(&eigenvalues(&solutions(&a)), &eigenvalues(&solutions(&c)), 1e-8));
}

#[test]
fn oracle_command() {
    let r = kronpencil(&["oracle", &example("ex3.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let f = solutions(&r);
    assert_eq!(f.report.path, ReportPath::Oracle);
    assert_eq!(eigenvalues(&f).len(), 1);
    assert!(eigenvalues(&f)[0].distance(&lam([1.0, -2.0, -3.0])) <= 1e-6);

    let oracle = solutions(&kronpencil(&["oracle", &example("ex1.json")]));
    let solved = solutions(&kronpencil(&["solve", &example("ex1.json")]));
    assert!(same_set(&eigenvalues(&oracle), &eigenvalues(&solved), 1e-6));

    let dir = TempDir::new().unwrap();
    let a: [_; 3] = std::array::from_fn(|k| complex_normal_matrix::<f64>(&mut rng(4, k as u64), 4, 3));
    let input = write_problem(&dir, "r43.json", &Problem64::new(a[0].clone(), a[1].clone(), a[2].clone()).unwrap());
    let r = kronpencil(&["oracle", &input]);
    assert_eq!(r.code, 0);
    assert_eq!(solutions(&r).solutions.len(), 6);

    let big: [_; 3] = std::array::from_fn(|k| complex_normal_matrix::<f64>(&mut rng(5, k as u64), 6, 5));
    let input = write_problem(&dir, "big.json", &Problem64::new(big[0].clone(), big[1].clone(), big[2].clone()).unwrap());
    assert_eq!(kronpencil(&["oracle", &input]).code, 2);
}
