//! JSON problem and solution files.
//!
//! Complex numbers are `[re, im]` pairs; problem files also accept plain reals.
//! Floats are written as `{:.16e}` so every `f64` survives a round trip.

use std::io::Write;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg_core::PencilProblem;
use crate::oracle::OraclePoint;
use crate::pencil_solvers::ProjectiveEigenvalue;
use crate::two_param_solver::{SolvePath, SolveReport, Solution};
use crate::{CMatrix, CVector, IntProblem, Problem64, C64};

/// A matrix entry: `[re, im]` or a bare real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl Entry {
    pub fn value(self) -> C64 {
        match self {
            Entry::Pair([re, im]) => Complex::new(re, im),
            Entry::Real(re) => Complex::new(re, 0.0),
        }
    }
}

pub type Pair = [f64; 2];

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: Pair) -> C64 {
    Complex::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "A0")]
    pub a0: Vec<Vec<Entry>>,
    #[serde(rename = "A1")]
    pub a1: Vec<Vec<Entry>>,
    #[serde(rename = "A2")]
    pub a2: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_solutions: Option<usize>,
}

fn rows_to_matrix(rows: &[Vec<Entry>], label: &str) -> Result<CMatrix> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return Err(Error::ZeroDimension);
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("{label}: row {bad} has {} entries, row 0 has {n}", rows[bad].len())));
    }
    Ok(CMatrix::from_fn(m, n, |i, j| rows[i][j].value()))
}

fn matrix_to_rows(a: &CMatrix) -> Vec<Vec<Entry>> {
    a.row_iter().map(|r| r.iter().map(|&z| Entry::Pair(pair(z))).collect()).collect()
}

impl ProblemFile {
    pub fn from_problem(p: &Problem64, name: Option<String>) -> Self {
        ProblemFile {
            name,
            a0: matrix_to_rows(p.a(0)),
            a1: matrix_to_rows(p.a(1)),
            a2: matrix_to_rows(p.a(2)),
            expected_solutions: None,
        }
    }

    pub fn matrices(&self) -> Result<[CMatrix; 3]> {
        Ok([rows_to_matrix(&self.a0, "A0")?, rows_to_matrix(&self.a1, "A1")?, rows_to_matrix(&self.a2, "A2")?])
    }

    pub fn problem(&self) -> Result<Problem64> {
        let [a0, a1, a2] = self.matrices()?;
        PencilProblem::new(a0, a1, a2)
    }

    /// The problem over `i64` when every entry is an exact integer.
    pub fn integer_problem(&self) -> Result<Option<IntProblem>> {
        let [a0, a1, a2] = self.matrices()?;
        let exact = |a: &CMatrix| -> Option<nalgebra::DMatrix<i64>> {
            let ok = a.iter().all(|z| z.im == 0.0 && z.re.fract() == 0.0 && z.re.abs() < 2f64.powi(53));
            ok.then(|| a.map(|z| z.re as i64))
        };
        match (exact(&a0), exact(&a1), exact(&a2)) {
            (Some(b0), Some(b1), Some(b2)) => Ok(Some(PencilProblem::new(b0, b1, b2)?)),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionEntry {
    /// Canonical unit-norm representative.
    pub lambda: [Pair; 3],
    /// `(λ₁/λ₀, λ₂/λ₀)` when `|λ₀| > 1e-8`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_chart_lambda0_eq_1: Option<[Pair; 2]>,
    pub x: Vec<Pair>,
    pub residual: f64,
    pub decomposable: bool,
    pub continuum: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuum_constraint: Option<[Pair; 3]>,
}

const CHART_CUTOFF: f64 = 1e-8;

fn lambda_pairs(l: &ProjectiveEigenvalue<f64>) -> [Pair; 3] {
    l.coords().map(pair)
}

fn chart0(l: &ProjectiveEigenvalue<f64>) -> Option<[Pair; 2]> {
    let c = l.coords();
    (c[0].norm() > CHART_CUTOFF).then(|| [pair(c[1] / c[0]), pair(c[2] / c[0])])
}

impl SolutionEntry {
    pub fn from_solution(s: &Solution<f64>) -> Self {
        SolutionEntry {
            lambda: lambda_pairs(&s.lambda),
            lambda_chart_lambda0_eq_1: chart0(&s.lambda),
            x: s.x.iter().map(|&z| pair(z)).collect(),
            residual: s.residual,
            decomposable: s.decomposable,
            continuum: s.continuum,
            continuum_constraint: s.continuum_constraint.as_ref().map(lambda_pairs),
        }
    }

    pub fn from_oracle(o: &OraclePoint<f64>) -> Self {
        SolutionEntry {
            lambda: lambda_pairs(&o.lambda),
            lambda_chart_lambda0_eq_1: chart0(&o.lambda),
            x: o.x.iter().map(|&z| pair(z)).collect(),
            residual: o.sigma_relative,
            decomposable: true,
            continuum: false,
            continuum_constraint: None,
        }
    }

    pub fn lambda_values(&self) -> [C64; 3] {
        self.lambda.map(unpair)
    }

    pub fn x_vector(&self) -> CVector {
        CVector::from_iterator(self.x.len(), self.x.iter().map(|&p| unpair(p)))
    }
}

/// How a solution file was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportPath {
    GenericCommuting,
    SimultaneousPencils,
    NoSolution,
    Oracle,
}

impl From<SolvePath> for ReportPath {
    fn from(p: SolvePath) -> Self {
        match p {
            SolvePath::GenericCommuting => ReportPath::GenericCommuting,
            SolvePath::SimultaneousPencils => ReportPath::SimultaneousPencils,
            SolvePath::NoSolution => ReportPath::NoSolution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub decomposable_tol: f64,
    pub dedup_tol: f64,
}

impl From<&SolverConfig> for Tolerances {
    fn from(c: &SolverConfig) -> Self {
        Tolerances {
            rank_tol: c.rank_tol,
            residual_tol: c.residual_tol,
            decomposable_tol: c.decomposable_tol,
            dedup_tol: c.dedup_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub path: ReportPath,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub alpha_used: Option<[Pair; 3]>,
    pub gamma_condition: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub solutions: Vec<SolutionEntry>,
    pub report: ReportMeta,
}

impl SolutionFile {
    pub fn from_report(report: &SolveReport<f64>, config: &SolverConfig, name: Option<String>) -> Self {
        SolutionFile {
            name,
            solutions: report.solutions.iter().map(SolutionEntry::from_solution).collect(),
            report: ReportMeta {
                path: report.path.into(),
                seed: config.seed,
                tolerances: config.into(),
                alpha_used: report.alpha_used.map(|a| a.map(pair)),
                gamma_condition: report.gamma_condition,
            },
        }
    }

    pub fn from_oracle(points: &[OraclePoint<f64>], config: &SolverConfig, name: Option<String>) -> Self {
        SolutionFile {
            name,
            solutions: points.iter().map(SolutionEntry::from_oracle).collect(),
            report: ReportMeta {
                path: ReportPath::Oracle,
                seed: config.seed,
                tolerances: config.into(),
                alpha_used: None,
                gamma_condition: None,
            },
        }
    }
}

/// Compact JSON with floats in `{:.16e}`: 17 significant digits, enough to
/// recover every `f64` exactly.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExactFloatFormatter;

impl serde_json::ser::Formatter for ExactFloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{value:.8e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloatFormatter);
    value.serialize(&mut ser).map_err(|e| Error::Internal(format!("serialization: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Internal(e.to_string()))
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_solutions(text: &str) -> Result<SolutionFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}
