//! The driver: normalize, deflate, pick a path, extract eigenvectors, verify.

use std::time::Instant;

use nalgebra::{Complex, ComplexField};
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::config::{PathChoice, SolverConfig};
use crate::error::{Error, Result};
use crate::kron_structure::scaled_compressors;
use crate::linalg_core::{
    canonicalize, decomposable_in_span_where, kron_square, normalize_problem, nullspace, numerical_rank,
    singular_values, spectral_norm, symmetric_rank_one_factor, PencilProblem, SpanSearch,
};
use crate::operators::{kronecker_determinants, pencil_commutators, DeterminantTriple};
use crate::pencil_solvers::{
    combine, commutation_residual, commuting_joint_eigs, deflated_residual, find_nonsingular_combination,
    simultaneous_deflated_solutions, DeflatedSolution, Projective, ProjectiveEigenvalue, SolutionKind, PAIRS,
};
use crate::scalar::{lit, Real};
use crate::{CMatrix, CVector};

/// One solution, or one representative of a continuum family.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<R: Real> {
    pub lambda: ProjectiveEigenvalue<R>,
    /// Unit eigenvector in the input coordinates.
    pub x: CVector<R>,
    /// `σ_min(λ₀A₀ + λ₁A₁ + λ₂A₂) / Σ|λᵢ|·‖Aᵢ‖`.
    pub residual: R,
    /// `x ⊗ x` was certified inside the lifted deflated null space.
    pub decomposable: bool,
    pub continuum: bool,
    /// For a continuum: `c` with `c·λ = 0` on the whole family.
    pub continuum_constraint: Option<ProjectiveEigenvalue<R>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolvePath {
    GenericCommuting,
    SimultaneousPencils,
    NoSolution,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub seed: u64,
    /// `(m, n)` after normalization.
    pub normalized_shape: (usize, usize),
    pub log: Vec<String>,
    /// Stage name and wall time in milliseconds.
    pub timings_ms: Vec<(String, f64)>,
    pub commutation_residual: Option<f64>,
    /// Candidates that failed verification, as `λ` triples.
    pub rejected: Vec<[Complex<f64>; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<R: Real> {
    pub solutions: Vec<Solution<R>>,
    pub path: SolvePath,
    pub alpha_used: Option<[Complex<R>; 3]>,
    /// Condition number of the combined `Γ` on the commuting path.
    pub gamma_condition: Option<R>,
    pub diagnostics: Diagnostics,
}

/// Residual checks of a candidate `(λ, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport<R: Real> {
    /// `‖A(λ)x‖ / (Σ|λᵢ|·‖Aᵢ‖·‖x‖)`
    pub relative_residual: R,
    /// `σ_min(A(λ)) / Σ|λᵢ|·‖Aᵢ‖`
    pub sigma_min_relative: R,
    pub pass: bool,
}

fn pencil_scale<R: Real>(p: &PencilProblem<Complex<R>>, lambda: &[Complex<R>; 3]) -> R {
    (0..3).fold(R::zero(), |s, i| s + lambda[i].modulus() * spectral_norm(p.a(i)))
}

fn to_c64<R: Real>(z: Complex<R>) -> Complex<f64> {
    Complex::new(z.re.to_subset().unwrap_or(f64::NAN), z.im.to_subset().unwrap_or(f64::NAN))
}

/// Checks `(λ₀A₀ + λ₁A₁ + λ₂A₂)x = 0`.
pub fn verify_solution<R: Real>(p: &PencilProblem<Complex<R>>, lambda: &[Complex<R>; 3], x: &CVector<R>, tol: R) -> ResidualReport<R> {
    let a = p.combine(lambda);
    let scale = pencil_scale(p, lambda);
    let xn = x.norm();
    if scale.is_zero() || xn.is_zero() {
        let z = R::zero();
        return ResidualReport { relative_residual: z, sigma_min_relative: z, pass: !xn.is_zero() };
    }
    let rel = (&a * x).norm() / (scale * xn);
    let smin = singular_values(&a).last().copied().unwrap_or_else(R::zero) / scale;
    ResidualReport { relative_residual: rel, sigma_min_relative: smin, pass: rel <= tol && smin <= tol }
}

/// One inflated pencil check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCheck<R: Real> {
    pub pair: (usize, usize),
    pub residual: R,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflatedReport<R: Real> {
    pub pairs: Vec<PairCheck<R>>,
    pub pass: bool,
}

/// Checks `(λᵢΔⱼ − λⱼΔᵢ)(x⊗x) = 0` for the three pairs with the dense commutators.
pub fn verify_inflated<R: Real>(p: &PencilProblem<Complex<R>>, lambda: &[Complex<R>; 3], x: &CVector<R>, tol: R) -> InflatedReport<R> {
    let d = pencil_commutators(p);
    let z = kron_square(x);
    let zn = z.norm();
    let pairs: Vec<PairCheck<R>> = PAIRS
        .iter()
        .map(|&(i, j)| {
            let m = &d[j] * lambda[i] - &d[i] * lambda[j];
            let den = (lambda[i].modulus() * d[j].norm() + lambda[j].modulus() * d[i].norm()) * zn;
            let residual = if den.is_zero() { R::zero() } else { (m * &z).norm() / den };
            PairCheck { pair: (i, j), residual, pass: residual <= tol }
        })
        .collect();
    let pass = pairs.iter().all(|c| c.pass);
    InflatedReport { pairs, pass }
}

/// `z = V̂ᵀy` for each column of `basis`.
fn lift<R: Real>(basis: &CMatrix<R>, n: usize) -> Vec<CVector<R>> {
    let (vh, _) = scaled_compressors::<i64>(n).expect("n >= 1");
    let vt = vh.transpose().to_dense().map(|v| Complex::new(lit::<R>(v as f64), R::zero()));
    basis.column_iter().map(|y| &vt * y).collect()
}

fn span_search(config: &SolverConfig) -> SpanSearch {
    SpanSearch { starts: config.search_starts, max_iters: 400, seed: config.seed }
}

/// Eigenvector for `λ` from the deflated null space `basis` (first column is `y`).
///
/// Tries `V̂ᵀy = x ⊗ x` (or a decomposable element of the lifted span), then the
/// null space of `λ₀A₀ + λ₁A₁ + λ₂A₂`.
pub fn extract_eigenvector<R: Real>(
    lambda: &ProjectiveEigenvalue<R>,
    basis: &CMatrix<R>,
    p: &PencilProblem<Complex<R>>,
    config: &SolverConfig,
) -> Result<(CVector<R>, bool)> {
    if basis.ncols() == 0 || basis.column(0).norm().is_zero() {
        return Err(Error::ZeroInput("deflated vector y = 0".into()));
    }
    let l = lambda.coords();
    let res_tol = lit::<R>(config.residual_tol);
    let dec_tol = lit::<R>(config.decomposable_tol);
    let solves = |x: &CVector<R>| verify_solution(p, l, x, res_tol).relative_residual <= res_tol;
    let lifted = lift(basis, p.n());
    if lifted.len() == 1 {
        if let Some(x) = symmetric_rank_one_factor(&lifted[0], dec_tol)? {
            if solves(&x) {
                return Ok((canonicalize(&x), true));
            }
        }
    } else if let Some(found) = decomposable_in_span_where(&lifted, dec_tol, span_search(config), &solves) {
        return Ok((canonicalize(&found.x), true));
    }
    let ns = nullspace(&p.combine(l), lit::<R>(config.rank_tol));
    if ns.ncols() == 0 {
        return Err(Error::StaleEigenvalue);
    }
    Ok((canonicalize(&ns.column(0).into_owned()), false))
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Representative of `{λ : Cλ = 0}`: the projection of the coordinate axis
/// closest to the family.
fn family_representative<R: Real>(null: &CMatrix<R>) -> Option<ProjectiveEigenvalue<R>> {
    let mut best: Option<(R, CVector<R>)> = None;
    for k in 0..3 {
        let mut e = CVector::<R>::zeros(3);
        e[k] = Complex::one();
        let proj = null * (null.adjoint() * e);
        let w = proj.norm();
        if best.as_ref().is_none_or(|(bw, _)| w > *bw * (R::one() + lit(1e-9))) {
            best = Some((w, proj));
        }
    }
    let (_, v) = best?;
    Projective::new([v[0], v[1], v[2]]).ok()
}

/// Solutions carried by the common kernel of `Γ`: a decomposable `x⊗x` there
/// solves every deflated pencil, and `λ` must satisfy `[A₀x A₁x A₂x]λ = 0`.
fn kernel_solutions<R: Real>(
    kernel: &CMatrix<R>,
    p: &PencilProblem<Complex<R>>,
    config: &SolverConfig,
    log: &mut Vec<String>,
) -> Vec<Solution<R>> {
    if kernel.ncols() == 0 {
        return Vec::new();
    }
    let tol = lit::<R>(config.rank_tol);
    let constraint = |x: &CVector<R>| {
        let mut c = CMatrix::<R>::zeros(p.m(), 3);
        for i in 0..3 {
            c.set_column(i, &(p.a(i) * x));
        }
        c
    };
    let lifted = lift(kernel, p.n());
    let admissible = |x: &CVector<R>| numerical_rank(&constraint(x), tol) < 3;
    let Some(found) = decomposable_in_span_where(&lifted, lit(config.decomposable_tol), span_search(config), admissible) else {
        log.push(format!("common kernel of dimension {} holds no admissible decomposable vector", kernel.ncols()));
        return Vec::new();
    };
    let x = canonicalize(&found.x);
    let c = constraint(&x);
    let null = nullspace(&c, tol);
    let rank = 3 - null.ncols();
    log.push(format!("common kernel vector gives constraint rank {rank}"));
    let (lambda, cont, normal) = match null.ncols() {
        1 => match Projective::new([null[(0, 0)], null[(1, 0)], null[(2, 0)]]) {
            Ok(l) => (l, false, None),
            Err(_) => return Vec::new(),
        },
        2 => {
            let Some(rep) = family_representative(&null) else { return Vec::new() };
            let (_, v) = crate::linalg_core::full_right(&c);
            let n0 = v.column(0).conjugate();
            (rep, true, Projective::new([n0[0], n0[1], n0[2]]).ok())
        }
        _ => return Vec::new(),
    };
    vec![Solution { lambda, x, residual: R::zero(), decomposable: true, continuum: cont, continuum_constraint: normal }]
}

/// Runs the full pipeline on `(A₀, A₁, A₂)`.
pub fn solve<R: Real>(a0: &CMatrix<R>, a1: &CMatrix<R>, a2: &CMatrix<R>, config: &SolverConfig) -> Result<SolveReport<R>> {
    let start = Instant::now();
    let rank_tol = lit::<R>(config.rank_tol);
    let res_tol = lit::<R>(config.residual_tol);
    let dedup = lit::<R>(config.dedup_tol);
    let original = PencilProblem::new(a0.clone(), a1.clone(), a2.clone());
    let (p, maps) = normalize_problem(a0, a1, a2, rank_tol)?;
    let original = original.unwrap_or_else(|_| p.clone());
    let (m, n) = (p.m(), p.n());
    let mut diag = Diagnostics { seed: config.seed, normalized_shape: (m, n), ..Default::default() };
    if !maps.is_identity() {
        diag.log.push(format!("normalized {}x{} to {m}x{n}", a0.nrows(), a0.ncols()));
    }
    let gamma = kronecker_determinants(&p);
    diag.timings_ms.push(("gamma".into(), elapsed_ms(start)));

    let mut path = SolvePath::SimultaneousPencils;
    let mut alpha_used = None;
    let mut gamma_condition = None;
    let mut deflated: Vec<DeflatedSolution<R>> = Vec::new();
    let mut kernel = CMatrix::<R>::zeros(gamma.shape().1, 0);
    let mut generic_done = false;

    if config.path == PathChoice::Auto && m == n + 1 {
        let comb = find_nonsingular_combination(&gamma, config.seed, config.trials, lit(config.cond_threshold))?;
        match comb {
            Some(comb) => {
                diag.log.push(format!("nonsingular combination, cond {:.3e}", comb.condition.to_subset().unwrap_or(f64::NAN)));
                match generic_path(&gamma, &comb.alpha, comb.condition, config, &mut diag) {
                    Ok(d) => {
                        deflated = d;
                        path = SolvePath::GenericCommuting;
                        alpha_used = Some(comb.alpha);
                        gamma_condition = Some(comb.condition);
                        generic_done = true;
                    }
                    Err(e) => diag.log.push(format!("commuting path failed ({e}); using simultaneous pencils")),
                }
            }
            None => diag.log.push("no nonsingular combination within the trial budget".into()),
        }
    }
    if !generic_done {
        let sim = simultaneous_deflated_solutions(&gamma, rank_tol, dedup, config.seed)?;
        diag.log.extend(sim.log);
        deflated = sim.solutions;
        kernel = sim.common_kernel;
    }
    diag.timings_ms.push(("deflated".into(), elapsed_ms(start)));

    let mut solutions: Vec<Solution<R>> = Vec::new();
    for d in &deflated {
        let l = d.lambda.coords();
        let (x, decomposable) = match extract_eigenvector(&d.lambda, &d.basis, &p, config) {
            Ok(v) => v,
            Err(e) => {
                diag.log.push(format!("eigenvector extraction failed: {e}"));
                diag.rejected.push(l.map(to_c64));
                continue;
            }
        };
        let continuum = d.kind == SolutionKind::ContinuumRepresentative;
        solutions.push(Solution { lambda: d.lambda, x, residual: R::zero(), decomposable, continuum, continuum_constraint: d.constraint });
    }
    solutions.extend(kernel_solutions(&kernel, &p, config, &mut diag.log));

    // Lift to the input coordinates and verify there.
    let mut verified: Vec<Solution<R>> = Vec::new();
    for mut s in solutions {
        s.x = canonicalize(&maps.lift_x(&s.x));
        let l = *s.lambda.coords();
        let report = verify_solution(&original, &l, &s.x, res_tol);
        if !report.pass {
            diag.log.push(format!(
                "rejected candidate: residual {:.3e}, sigma {:.3e}",
                report.relative_residual.to_subset().unwrap_or(f64::NAN),
                report.sigma_min_relative.to_subset().unwrap_or(f64::NAN)
            ));
            diag.rejected.push(l.map(to_c64));
            continue;
        }
        s.residual = report.sigma_min_relative;
        if verified.iter().any(|v| v.continuum == s.continuum && v.lambda.distance(&s.lambda) <= dedup) {
            continue;
        }
        verified.push(s);
    }
    diag.timings_ms.push(("total".into(), elapsed_ms(start)));

    if verified.is_empty() {
        if m == n + 1 {
            return Err(Error::Internal("m = n+1 guarantees a solution but none verified".into()));
        }
        path = SolvePath::NoSolution;
    }
    Ok(SolveReport { solutions: verified, path, alpha_used, gamma_condition, diagnostics: diag })
}

fn generic_path<R: Real>(
    gamma: &DeterminantTriple<Complex<R>>,
    alpha: &[Complex<R>; 3],
    cond: R,
    config: &SolverConfig,
    diag: &mut Diagnostics,
) -> Result<Vec<DeflatedSolution<R>>> {
    let g = combine(gamma, alpha);
    let lu = g.lu();
    let mut ms = Vec::with_capacity(3);
    for gi in &gamma.gamma {
        ms.push(lu.solve(gi).ok_or_else(|| Error::Internal("combined Γ is singular".into()))?);
    }
    let ms: [CMatrix<R>; 3] = ms.try_into().expect("three matrices");
    let res = commutation_residual(&ms);
    diag.commutation_residual = res.to_subset();
    let comm_tol = lit::<R>(config.rank_tol) * cond.max(R::one());
    let pairs = commuting_joint_eigs(&ms, comm_tol, config.seed)?;
    let dedup = lit::<R>(config.dedup_tol);
    let res_tol = lit::<R>(config.residual_tol);
    let mut out: Vec<DeflatedSolution<R>> = Vec::new();
    for pair in pairs {
        let lambda = Projective::new(pair.lambda)?;
        let r = deflated_residual(gamma, lambda.coords(), &pair.y);
        if r > res_tol * cond.max(R::one()) {
            diag.log.push(format!("joint eigenpair off the deflated pencils: {:.3e}", r.to_subset().unwrap_or(f64::NAN)));
            continue;
        }
        if out.iter().any(|d| d.lambda.distance(&lambda) <= dedup) {
            continue;
        }
        out.push(DeflatedSolution { lambda, y: pair.y.clone(), basis: pair.eigenspace, kind: SolutionKind::Isolated, constraint: None });
    }
    Ok(out)
}
