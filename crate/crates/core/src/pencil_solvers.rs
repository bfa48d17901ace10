//! One-parameter rectangular pencils, simultaneous deflated pencils and the
//! commuting joint eigenproblem.

use nalgebra::{Complex, ComplexField, Schur};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg_core::{canonicalize, full_left, full_right, nullspace_abs, rank_above, singular_values, spectral_norm};
use crate::operators::DeterminantTriple;
use crate::random;
use crate::scalar::{lit, Real};
use crate::{CMatrix, CVector};

/// Point of complex projective space, stored with unit 2-norm and the
/// dominant coordinate real positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projective<R: Real, const N: usize> {
    coords: [Complex<R>; N],
}

/// `(λ₀ : λ₁ : λ₂)`.
pub type ProjectiveEigenvalue<R = f64> = Projective<R, 3>;
/// `(ν₁ : ν₂)`.
pub type ProjectivePair<R = f64> = Projective<R, 2>;

impl<R: Real, const N: usize> Projective<R, N> {
    pub fn new(coords: [Complex<R>; N]) -> Result<Self> {
        let v = CVector::from_row_slice(&coords);
        if v.norm().is_zero() || !v.norm().is_finite() {
            return Err(Error::ZeroInput("projective point needs a finite nonzero coordinate".into()));
        }
        let c = canonicalize(&v);
        Ok(Projective { coords: std::array::from_fn(|i| c[i]) })
    }

    pub fn coords(&self) -> &[Complex<R>; N] {
        &self.coords
    }

    pub fn to_vector(&self) -> CVector<R> {
        CVector::from_row_slice(&self.coords)
    }

    /// Sine of the angle between the two complex lines.
    pub fn distance(&self, other: &Self) -> R {
        let a = self.to_vector();
        let b = other.to_vector();
        let proj = b.dotc(&a);
        (a - b * proj).norm()
    }

    /// Coordinates divided by coordinate `k`, when `|λ_k| > 1e-8`.
    pub fn chart(&self, k: usize) -> Option<[Complex<R>; N]> {
        let d = self.coords[k];
        (d.modulus() > lit(1e-8)).then(|| self.coords.map(|c| c / d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionKind {
    Isolated,
    ContinuumRepresentative,
}

/// `(ν₁A + ν₂B)x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneParamSolution<R: Real> {
    pub nu: ProjectivePair<R>,
    pub x: CVector<R>,
    pub kind: SolutionKind,
}

/// Result of [`solve_rect_pencil`].
#[derive(Debug, Clone, PartialEq)]
pub struct RectPencilSolution<R: Real> {
    pub isolated: Vec<OneParamSolution<R>>,
    /// Present when every `ν` gives rank loss.
    pub continuum: Option<OneParamSolution<R>>,
    /// Generic rank of `ν₁A + ν₂B`.
    pub normal_rank: usize,
    /// Rank decisions of the staircase, in order.
    pub log: Vec<String>,
}

struct Staircase<R: Real> {
    a: CMatrix<R>,
    b: CMatrix<R>,
    cols_removed: usize,
    rows_removed: usize,
}

/// Deflates the right singular and infinite structure of `A − μB` until `B`
/// has full column rank.
fn right_staircase<R: Real>(mut a: CMatrix<R>, mut b: CMatrix<R>, thr: R, log: &mut Vec<String>, tag: &str) -> Staircase<R> {
    let (mut rows_removed, mut cols_removed) = (0, 0);
    loop {
        let (p, q) = a.shape();
        if q == 0 {
            break;
        }
        let (sb, v) = full_right(&b);
        let s = q - rank_above(&sb, thr);
        if s == 0 {
            break;
        }
        // Null directions of B first.
        let mut vr = CMatrix::zeros(q, q);
        vr.columns_mut(0, s).copy_from(&v.columns(q - s, s));
        vr.columns_mut(s, q - s).copy_from(&v.columns(0, q - s));
        let av = &a * &vr;
        let bv = &b * &vr;
        let a1 = av.columns(0, s).into_owned();
        let (u, sa) = full_left(&a1);
        let r = rank_above(&sa, thr);
        let uh = u.adjoint();
        let a_next = (&uh * &av).view((r, s), (p - r, q - s)).into_owned();
        let b_next = (&uh * &bv).view((r, s), (p - r, q - s)).into_owned();
        log.push(format!("{tag}: {p}x{q} block, null(B) = {s}, rank(A1) = {r}"));
        log::debug!("staircase {tag}: {p}x{q}, nullity {s}, rank {r}");
        a = a_next;
        b = b_next;
        rows_removed += r;
        cols_removed += s;
    }
    Staircase { a, b, cols_removed, rows_removed }
}

fn pencil_at<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>, nu: &[Complex<R>; 2]) -> CMatrix<R> {
    a * nu[0] + b * nu[1]
}

/// Right singular vector for the smallest singular value.
fn smallest_right_vector<R: Real>(m: &CMatrix<R>) -> CVector<R> {
    let (_, v) = full_right(m);
    v.column(m.ncols() - 1).into_owned()
}

/// Merges points closer than `tol`, averaging each cluster.
fn cluster_points<R: Real, const N: usize>(points: Vec<Projective<R, N>>, tol: R) -> Vec<Vec<Projective<R, N>>> {
    let mut clusters: Vec<Vec<Projective<R, N>>> = Vec::new();
    for p in points {
        match clusters.iter_mut().find(|c| c[0].distance(&p) <= tol) {
            Some(c) => c.push(p),
            None => clusters.push(vec![p]),
        }
    }
    clusters
}

fn average<R: Real, const N: usize>(c: &[Projective<R, N>]) -> Option<Projective<R, N>> {
    let mut acc = CVector::<R>::zeros(N);
    for p in c {
        let v = p.to_vector();
        // Align phases before summing.
        let ph = acc.dotc(&v);
        let ph = if ph.modulus().is_zero() { Complex::one() } else { ph.unscale(ph.modulus()) };
        acc += v / ph;
    }
    Projective::new(std::array::from_fn(|i| acc[i])).ok()
}

/// Isolated `(ν₁ : ν₂)` with `ν₁A + ν₂B` losing rank, and a continuum flag.
///
/// A seeded Möbius change of parameter moves any eigenvalue away from infinity,
/// a staircase strips the right and then the left singular structure, and the
/// regular square remainder is solved as an ordinary eigenproblem. Candidates
/// are kept only when the rank drop verifies on the original pencil.
pub fn solve_rect_pencil<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>, tol: R, seed: u64) -> Result<RectPencilSolution<R>> {
    let (p, q) = a.shape();
    if b.shape() != (p, q) {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    if p < q {
        return Err(Error::UnsupportedShape(format!("pencil is {p}x{q}; need rows >= cols")));
    }
    let mut log = Vec::new();
    let mut rng = random::rng(seed, 11);
    let scale = spectral_norm(a) + spectral_norm(b);
    if q == 0 {
        return Ok(RectPencilSolution { isolated: Vec::new(), continuum: None, normal_rank: 0, log });
    }
    let representative = |nu: [Complex<R>; 2]| -> Result<OneParamSolution<R>> {
        let x = canonicalize(&smallest_right_vector(&pencil_at(a, b, &nu)));
        Ok(OneParamSolution { nu: Projective::new(nu)?, x, kind: SolutionKind::ContinuumRepresentative })
    };
    if scale.is_zero() {
        let nu = [random::complex_normal(&mut rng), random::complex_normal(&mut rng)];
        return Ok(RectPencilSolution { isolated: Vec::new(), continuum: Some(representative(nu)?), normal_rank: 0, log });
    }
    let thr = tol * scale;

    // A' = αA + βB, B' = γA + δB; then A' − μB' = (α − μγ)A + (β − μδ)B.
    let mob = loop {
        let m: [Complex<R>; 4] = std::array::from_fn(|_| random::complex_normal(&mut rng));
        let det = m[0] * m[3] - m[1] * m[2];
        let norm = m.iter().map(|z| z.modulus_squared()).fold(R::zero(), |s, v| s + v);
        if det.modulus() > lit::<R>(0.1) * norm {
            break m;
        }
    };
    let a1 = a * mob[0] + b * mob[1];
    let b1 = a * mob[2] + b * mob[3];

    let right = right_staircase(a1, b1, thr, &mut log, "right");
    let defect = right.cols_removed - right.rows_removed.min(right.cols_removed);
    let normal_rank = q - defect;
    let left = right_staircase(right.a.transpose(), right.b.transpose(), thr, &mut log, "left");
    let (ra, rb) = (left.a.transpose(), left.b.transpose());
    log.push(format!("regular part {}x{}", ra.nrows(), ra.ncols()));

    let mut mus: Vec<Option<Complex<R>>> = vec![None];
    if ra.nrows() > 0 {
        let (ra, rb) = if ra.is_square() {
            (ra, rb)
        } else {
            // Rank decisions disagreed; a random square projection keeps every
            // rank-drop point among the candidates.
            log.push("regular part not square; projecting".into());
            let k = ra.ncols();
            let w = random::complex_normal_matrix::<R>(&mut rng, ra.nrows(), k);
            (w.adjoint() * &ra, w.adjoint() * &rb)
        };
        if ra.nrows() > 0 {
            match rb.clone().lu().solve(&ra) {
                Some(m) if m.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => {
                    let (_, t) = Schur::new(m).unpack();
                    mus.extend(t.diagonal().iter().map(|&v| Some(v)));
                }
                _ => log.push("regular part has singular B; no finite candidates".into()),
            }
        }
    }

    let candidates: Vec<ProjectivePair<R>> = mus
        .into_iter()
        .filter_map(|mu| {
            let nu = match mu {
                Some(mu) => [mob[0] - mu * mob[2], mob[1] - mu * mob[3]],
                None => [mob[2], mob[3]],
            };
            Projective::new(nu).ok()
        })
        .collect();

    let rank_drop = |nu: &ProjectivePair<R>| -> Option<R> {
        if normal_rank == 0 {
            return None;
        }
        let s = singular_values(&pencil_at(a, b, nu.coords()));
        let v = s.get(normal_rank - 1).copied().unwrap_or_else(R::zero);
        (v <= thr).then_some(v)
    };
    let mut isolated: Vec<OneParamSolution<R>> = Vec::new();
    for cluster in cluster_points(candidates, lit(1e-6)) {
        let mut keep = Vec::new();
        if let Some(avg) = average(&cluster).filter(|c| rank_drop(c).is_some()) {
            keep.push(avg);
        } else {
            keep.extend(cluster.iter().filter(|c| rank_drop(c).is_some()).copied());
        }
        for nu in keep {
            if isolated.iter().any(|s| s.nu.distance(&nu) <= lit(1e-6)) {
                continue;
            }
            let x = canonicalize(&smallest_right_vector(&pencil_at(a, b, nu.coords())));
            isolated.push(OneParamSolution { nu, x, kind: SolutionKind::Isolated });
        }
    }
    let continuum = if defect > 0 {
        log.push(format!("continuum: {defect} right minimal indices"));
        let nu = [random::complex_normal(&mut rng), random::complex_normal(&mut rng)];
        Some(representative(nu)?)
    } else {
        None
    };
    Ok(RectPencilSolution { isolated, continuum, normal_rank, log })
}

/// Nonsingular combination `Σ αᵢΓᵢ` and its condition number.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination<R: Real> {
    pub alpha: [Complex<R>; 3],
    pub condition: R,
}

fn condition_number<R: Real>(m: &CMatrix<R>) -> R {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > R::zero() => hi / lo,
        _ => R::max_value().unwrap_or_else(R::one),
    }
}

/// Tries `e₀, e₁, e₂` and then `trials` seeded random unit `α`.
pub fn find_nonsingular_combination<R: Real>(
    gamma: &DeterminantTriple<Complex<R>>,
    seed: u64,
    trials: usize,
    cond_threshold: R,
) -> Result<Option<Combination<R>>> {
    let (r, c) = gamma.shape();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    let mut rng = random::rng(seed, 3);
    let basis = (0..3).map(|k| std::array::from_fn(|i| if i == k { Complex::one() } else { Complex::zero() }));
    let random = (0..trials).map(|_| {
        let v = random::unit_complex_vector::<R>(&mut rng, 3);
        [v[0], v[1], v[2]]
    });
    for alpha in basis.chain(random) {
        let g = combine(gamma, &alpha);
        let cond = condition_number(&g);
        if cond < cond_threshold {
            return Ok(Some(Combination { alpha, condition: cond }));
        }
    }
    Ok(None)
}

/// `α₀Γ₀ + α₁Γ₁ + α₂Γ₂`.
pub fn combine<R: Real>(gamma: &DeterminantTriple<Complex<R>>, alpha: &[Complex<R>; 3]) -> CMatrix<R> {
    &gamma.gamma[0] * alpha[0] + &gamma.gamma[1] * alpha[1] + &gamma.gamma[2] * alpha[2]
}

/// A common eigenvector of three commuting matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEigenpair<R: Real> {
    pub lambda: [Complex<R>; 3],
    pub y: CVector<R>,
    /// Size of the eigenvalue cluster of the random combination.
    pub multiplicity: usize,
    /// Orthonormal basis of common eigenvectors.
    pub eigenspace: CMatrix<R>,
}

/// Largest relative commutator `‖MᵢMⱼ − MⱼMᵢ‖ / (‖Mᵢ‖‖Mⱼ‖)`.
pub fn commutation_residual<R: Real>(m: &[CMatrix<R>; 3]) -> R {
    let mut worst = R::zero();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let den = m[i].norm() * m[j].norm();
        if den.is_zero() {
            continue;
        }
        let r = (&m[i] * &m[j] - &m[j] * &m[i]).norm() / den;
        if r > worst {
            worst = r;
        }
    }
    worst
}

/// Simultaneous eigenpairs of commuting `M₀, M₁, M₂`.
pub fn commuting_joint_eigs<R: Real>(m: &[CMatrix<R>; 3], tol: R, seed: u64) -> Result<Vec<JointEigenpair<R>>> {
    let k = m[0].nrows();
    for mi in m {
        if mi.shape() != (k, k) {
            return Err(Error::NotSquare { rows: mi.nrows(), cols: mi.ncols() });
        }
    }
    let res = commutation_residual(m);
    if res > tol {
        return Err(Error::NotCommuting { residual: res.to_subset().unwrap_or(f64::NAN), tol: tol.to_subset().unwrap_or(f64::NAN) });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut rng = random::rng(seed, 5);
    let beta = random::unit_complex_vector::<R>(&mut rng, 3);
    let c = &m[0] * beta[0] + &m[1] * beta[1] + &m[2] * beta[2];
    let (q, t) = Schur::new(c.clone()).unpack();
    let mu: Vec<Complex<R>> = t.diagonal().iter().copied().collect();
    let cnorm = spectral_norm(&c).max(R::min_value().unwrap_or_else(R::zero));
    let cluster_tol = lit::<R>(1e-6) * cnorm;

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (idx, &v) in mu.iter().enumerate() {
        match clusters.iter_mut().find(|cl| cl.iter().any(|&j| (mu[j] - v).modulus() <= cluster_tol)) {
            Some(cl) => cl.push(idx),
            None => clusters.push(vec![idx]),
        }
    }

    let rayleigh = |y: &CVector<R>| -> [Complex<R>; 3] {
        let yy = y.dotc(y);
        std::array::from_fn(|i| y.dotc(&(&m[i] * y)) / yy)
    };
    let mut out = Vec::new();
    for cl in clusters {
        if cl.len() == 1 {
            let tt = cl[0];
            let mut w = CVector::<R>::zeros(k);
            w[tt] = Complex::one();
            for j in (0..tt).rev() {
                let mut s = Complex::<R>::zero();
                for l in j + 1..=tt {
                    s += t[(j, l)] * w[l];
                }
                let mut den = t[(j, j)] - mu[tt];
                if den.modulus() <= R::default_epsilon() * cnorm {
                    den = Complex::new(R::default_epsilon() * cnorm, R::zero());
                }
                w[j] = -s / den;
            }
            let y = (&q * w).normalize();
            out.push(JointEigenpair { lambda: rayleigh(&y), eigenspace: CMatrix::from_columns(&[y.clone()]), y, multiplicity: 1 });
        } else {
            let mean: Complex<R> = cl.iter().fold(Complex::<R>::zero(), |s, &j| s + mu[j]) / Complex::new(lit::<R>(cl.len() as f64), R::zero());
            let spread = cl.iter().map(|&j| (mu[j] - mean).modulus()).fold(R::zero(), |a, b| a.max(b));
            let thr: R = (spread * lit::<R>(10.0)).max(lit::<R>(1e-8) * cnorm);
            let shifted = &c - CMatrix::<R>::identity(k, k) * mean;
            let mut e: CMatrix<R> = nullspace_abs(&shifted, thr);
            if e.ncols() == 0 {
                e = CMatrix::from_columns(&[smallest_right_vector(&shifted)]);
            }
            let d = Complex::new(lit::<R>(e.ncols() as f64), R::zero());
            let lambda: [Complex<R>; 3] = std::array::from_fn(|i| (e.adjoint() * &m[i] * &e).trace() / d);
            let mut stacked = CMatrix::<R>::zeros(3 * k, e.ncols());
            for i in 0..3 {
                let mi = &m[i] - CMatrix::<R>::identity(k, k) * lambda[i];
                stacked.rows_mut(i * k, k).copy_from(&(mi * &e));
            }
            let mnorm = m.iter().map(|x| spectral_norm(x)).fold(R::zero(), |a, b| a.max(b));
            let common = nullspace_abs(&stacked, thr.max(lit::<R>(1e-8) * mnorm));
            let space = if common.ncols() > 0 { &e * common } else { e };
            let y = space.column(0).into_owned();
            out.push(JointEigenpair { lambda: rayleigh(&y), y, multiplicity: cl.len(), eigenspace: space });
        }
    }
    Ok(out)
}

/// Pairs `(i, j)` of the deflated pencils `λᵢΓⱼ − λⱼΓᵢ`.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// A simultaneous solution of the three deflated pencils.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflatedSolution<R: Real> {
    pub lambda: ProjectiveEigenvalue<R>,
    /// Common null vector outside the common kernel of `Γ₀, Γ₁, Γ₂`.
    pub y: CVector<R>,
    /// Common null space at `λ`, including the common kernel.
    pub basis: CMatrix<R>,
    pub kind: SolutionKind,
    /// For a continuum representative: `c` with `c·λ = 0` along the family.
    pub constraint: Option<ProjectiveEigenvalue<R>>,
}

/// Output of [`simultaneous_deflated_solutions`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimultaneousSolutions<R: Real> {
    pub solutions: Vec<DeflatedSolution<R>>,
    /// Basis of `ker Γ₀ ∩ ker Γ₁ ∩ ker Γ₂`; these vectors solve every pencil for every `λ`.
    pub common_kernel: CMatrix<R>,
    pub pivot: Option<(usize, usize)>,
    /// Pivot-pencil candidates before filtering, as `(pair, ν)`.
    pub candidates: Vec<((usize, usize), ProjectivePair<R>)>,
    pub log: Vec<String>,
}

fn pair_pencil<R: Real>(g: &[CMatrix<R>; 3], (i, j): (usize, usize), lambda: &[Complex<R>; 3]) -> CMatrix<R> {
    &g[j] * lambda[i] - &g[i] * lambda[j]
}

fn stacked_pencils<R: Real>(g: &[CMatrix<R>; 3], lambda: &[Complex<R>; 3]) -> CMatrix<R> {
    let (r, c) = g[0].shape();
    let mut s = CMatrix::zeros(3 * r, c);
    for (k, pair) in PAIRS.iter().enumerate() {
        s.rows_mut(k * r, r).copy_from(&pair_pencil(g, *pair, lambda));
    }
    s
}

/// Common solutions `(λ, y)` of `(λᵢΓⱼ − λⱼΓᵢ)y = 0` for all three pairs.
pub fn simultaneous_deflated_solutions<R: Real>(
    gamma: &DeterminantTriple<Complex<R>>,
    tol: R,
    dedup_tol: R,
    seed: u64,
) -> Result<SimultaneousSolutions<R>> {
    let (rows, cols) = gamma.shape();
    let g = &gamma.gamma;
    let mut log = Vec::new();
    let scale = g.iter().map(|x| spectral_norm(x)).fold(R::zero(), |a, b| a + b);
    let empty = |kernel: CMatrix<R>, log: Vec<String>| SimultaneousSolutions {
        solutions: Vec::new(),
        common_kernel: kernel,
        pivot: None,
        candidates: Vec::new(),
        log,
    };
    if scale.is_zero() {
        log.push("all Γ vanish".into());
        return Ok(empty(CMatrix::identity(cols, cols), log));
    }
    let thr = tol * scale;

    let mut all = CMatrix::<R>::zeros(3 * rows, cols);
    for (k, gk) in g.iter().enumerate() {
        all.rows_mut(k * rows, rows).copy_from(gk);
    }
    let (s, v) = full_right(&all);
    let rank = rank_above(&s, thr);
    let kernel = v.columns(rank, cols - rank).into_owned();
    let qc = v.columns(0, rank).into_owned();
    log.push(format!("common kernel dimension {}", cols - rank));
    if rank == 0 {
        return Ok(empty(kernel, log));
    }
    let red: [CMatrix<R>; 3] = std::array::from_fn(|k| &g[k] * &qc);

    // Regularity proxy: smallest singular value of a random member, relative.
    let mut rng = random::rng(seed, 17);
    let mut ranked: Vec<((usize, usize), R)> = PAIRS
        .iter()
        .map(|&(i, j)| {
            let a = random::complex_normal::<R>(&mut rng);
            let b = random::complex_normal::<R>(&mut rng);
            let m = &red[j] * a - &red[i] * b;
            let sv = singular_values(&m);
            let den = spectral_norm(&red[i]) + spectral_norm(&red[j]);
            let proxy = if den.is_zero() { R::zero() } else { *sv.last().unwrap() / den };
            ((i, j), proxy)
        })
        .collect();
    ranked.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(std::cmp::Ordering::Equal));

    let mut pivot = None;
    let mut per_pair: Vec<((usize, usize), Vec<ProjectivePair<R>>)> = Vec::new();
    for &((i, j), proxy) in &ranked {
        let sol = solve_rect_pencil(&red[j], &(-&red[i]), tol, seed)?;
        log.push(format!("pair ({i},{j}) proxy {:.3e}: {} isolated, continuum {}", proxy.to_subset().unwrap_or(f64::NAN), sol.isolated.len(), sol.continuum.is_some()));
        log.extend(sol.log.iter().map(|l| format!("  ({i},{j}) {l}")));
        let nus = sol.isolated.iter().map(|s| s.nu).collect();
        if sol.continuum.is_none() {
            pivot = Some((i, j));
            per_pair = vec![((i, j), nus)];
            break;
        }
        per_pair.push(((i, j), nus));
    }
    if pivot.is_none() {
        log.push("every pivot pencil has a continuum; using isolated candidates of all pairs".into());
    }

    let candidates: Vec<((usize, usize), ProjectivePair<R>)> =
        per_pair.iter().flat_map(|(pair, nus)| nus.iter().map(move |nu| (*pair, *nu))).collect();
    let mut solutions: Vec<DeflatedSolution<R>> = Vec::new();
    for &((i, j), nu) in &candidates {
        let kk = 3 - i - j;
        let [li, lj] = *nu.coords();
        let mut base = [Complex::zero(); 3];
        base[i] = li;
        base[j] = lj;
        let y = nullspace_abs(&pair_pencil(&red, (i, j), &base), thr);
        if y.ncols() == 0 {
            continue;
        }
        let gk = &red[kk] * &y;
        let mut sa = CMatrix::<R>::zeros(2 * rows, y.ncols());
        let mut sb = CMatrix::<R>::zeros(2 * rows, y.ncols());
        sa.rows_mut(0, rows).copy_from(&(&gk * li));
        sa.rows_mut(rows, rows).copy_from(&(&gk * lj));
        sb.rows_mut(0, rows).copy_from(&(-(&red[i] * &y)));
        sb.rows_mut(rows, rows).copy_from(&(-(&red[j] * &y)));
        let sub = solve_rect_pencil(&sa, &sb, tol, seed ^ 0x9e37)?;
        let mut points: Vec<(ProjectivePair<R>, SolutionKind)> =
            sub.isolated.iter().map(|s| (s.nu, SolutionKind::Isolated)).collect();
        if let Some(cont) = &sub.continuum {
            log.push(format!("third parameter free along ({i},{j}) candidate"));
            points.push((cont.nu, SolutionKind::ContinuumRepresentative));
        }
        for (st, kind) in points {
            let [s, t] = *st.coords();
            let mut raw = [Complex::zero(); 3];
            raw[i] = s * li;
            raw[j] = s * lj;
            raw[kk] = t;
            let Ok(lambda) = Projective::new(raw) else { continue };
            if solutions.iter().any(|d| d.lambda.distance(&lambda) <= dedup_tol) {
                continue;
            }
            let ns = nullspace_abs(&stacked_pencils(&red, lambda.coords()), thr);
            if ns.ncols() == 0 {
                continue;
            }
            let constrained = &qc * ns;
            let mut basis = CMatrix::<R>::zeros(cols, constrained.ncols() + kernel.ncols());
            basis.columns_mut(0, constrained.ncols()).copy_from(&constrained);
            basis.columns_mut(constrained.ncols(), kernel.ncols()).copy_from(&kernel);
            let y = canonicalize(&constrained.column(0).into_owned());
            // Family (s·λᵢ°, s·λⱼ°, t): λⱼ°·λᵢ − λᵢ°·λⱼ = 0.
            let constraint = (kind == SolutionKind::ContinuumRepresentative)
                .then(|| {
                    let mut c = [Complex::zero(); 3];
                    c[i] = lj;
                    c[j] = -li;
                    Projective::new(c).ok()
                })
                .flatten();
            solutions.push(DeflatedSolution { lambda, y, basis, kind, constraint });
        }
    }
    Ok(SimultaneousSolutions { solutions, common_kernel: kernel, pivot, candidates, log })
}

/// `‖(λᵢΓⱼ − λⱼΓᵢ)y‖` maximized over the three pairs, relative to `Σ|λ|·‖Γ‖·‖y‖`.
pub fn deflated_residual<R: Real>(gamma: &DeterminantTriple<Complex<R>>, lambda: &[Complex<R>; 3], y: &CVector<R>) -> R {
    let g = &gamma.gamma;
    let scale = g.iter().map(|x| spectral_norm(x)).fold(R::zero(), |a, b| a + b)
        * lambda.iter().map(|l| l.modulus()).fold(R::zero(), |a, b| a + b)
        * y.norm();
    if scale.is_zero() {
        return R::zero();
    }
    PAIRS
        .iter()
        .map(|&pair| (pair_pencil(g, pair, lambda) * y).norm() / scale)
        .fold(R::zero(), |a, b| a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn c(re: f64) -> C64 {
        Complex::new(re, 0.0)
    }

    fn cm(rows: usize, cols: usize, v: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(rows, cols, &v.iter().map(|&x| c(x)).collect::<Vec<_>>())
    }

    fn pair(a: f64, b: f64) -> ProjectivePair {
        Projective::new([c(a), c(b)]).unwrap()
    }

    #[test]
    fn projective_canonical() {
        let p = Projective::new([c(-2.0), c(1.0), c(0.0)]).unwrap();
        assert!((p.coords()[0] - c(2.0 / 5f64.sqrt())).norm() < 1e-15);
        let q = Projective::new([c(4.0), c(-2.0), c(0.0)]).unwrap();
        assert!(p.distance(&q) < 1e-15);
        assert!(Projective::new([c(0.0), c(0.0)]).is_err());
        let chart = Projective::new([c(2.0), c(-2.0), c(0.0)]).unwrap().chart(0).unwrap();
        assert!((chart[1] - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_pencil() {
        let sol = solve_rect_pencil(&CMatrix::identity(2, 2), &cm(2, 2, &[2.0, 0.0, 0.0, 3.0]), 1e-10, 1).unwrap();
        assert!(sol.continuum.is_none());
        assert_eq!(sol.isolated.len(), 2);
        for (target, x) in [(pair(-2.0, 1.0), 0), (pair(-3.0, 1.0), 1)] {
            let hit = sol.isolated.iter().find(|s| s.nu.distance(&target) < 1e-10).expect("eigenvalue");
            assert!((hit.x[x].modulus() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn tall_pencil_without_solution() {
        let sol = solve_rect_pencil(&cm(2, 1, &[1.0, 0.0]), &cm(2, 1, &[0.0, 1.0]), 1e-10, 1).unwrap();
        assert!(sol.isolated.is_empty());
        assert!(sol.continuum.is_none());
        assert!(solve_rect_pencil(&cm(1, 2, &[1.0, 0.0]), &cm(1, 2, &[0.0, 1.0]), 1e-10, 1).is_err());
    }

    #[test]
    fn singular_pencil_with_isolated_point() {
        // Column 2 is killed for every ν; column 1 only at ν ∝ (1, −1).
        let a = cm(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let b = cm(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let sol = solve_rect_pencil(&a, &b, 1e-10, 3).unwrap();
        assert!(sol.continuum.is_some());
        assert_eq!(sol.normal_rank, 1);
        assert_eq!(sol.isolated.len(), 1);
        assert!(sol.isolated[0].nu.distance(&pair(1.0, -1.0)) < 1e-10);
    }

    #[test]
    fn combination_examples() {
        let g = DeterminantTriple {
            gamma: [CMatrix::identity(2, 2), CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)],
            scaling: crate::Scaling::Integer,
        };
        let found = find_nonsingular_combination(&g, 1, 8, 1e8).unwrap().unwrap();
        assert_eq!(found.alpha, [c(1.0), c(0.0), c(0.0)]);
        let rect = DeterminantTriple { gamma: [CMatrix::zeros(3, 2), CMatrix::zeros(3, 2), CMatrix::zeros(3, 2)], scaling: crate::Scaling::Integer };
        assert!(find_nonsingular_combination(&rect, 1, 8, 1e8).is_err());
    }

    #[test]
    fn diagonal_joint_eigs() {
        let m = [cm(2, 2, &[1.0, 0.0, 0.0, 2.0]), cm(2, 2, &[3.0, 0.0, 0.0, 4.0]), cm(2, 2, &[5.0, 0.0, 0.0, 6.0])];
        let pairs = commuting_joint_eigs(&m, 1e-10, 9).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in pairs {
            let k = if p.y[0].modulus() > 0.5 { 0 } else { 1 };
            for i in 0..3 {
                assert!((p.lambda[i] - m[i][(k, k)]).norm() < 1e-12);
            }
        }
        let bad = [cm(2, 2, &[0.0, 1.0, 0.0, 0.0]), cm(2, 2, &[0.0, 0.0, 1.0, 0.0]), CMatrix::identity(2, 2)];
        assert!(matches!(commuting_joint_eigs(&bad, 1e-10, 9), Err(Error::NotCommuting { .. })));
    }

    #[test]
    fn identity_triple_collapses_to_one_point() {
        let g = DeterminantTriple { gamma: [CMatrix::identity(3, 3), CMatrix::identity(3, 3), CMatrix::identity(3, 3)], scaling: crate::Scaling::Integer };
        let res = simultaneous_deflated_solutions(&g, 1e-8, 1e-6, 4).unwrap();
        assert_eq!(res.solutions.len(), 1);
        let want = Projective::new([c(1.0), c(1.0), c(1.0)]).unwrap();
        assert!(res.solutions[0].lambda.distance(&want) < 1e-10);
        assert_eq!(res.solutions[0].basis.ncols(), 3);
    }
}
