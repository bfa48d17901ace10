//! Rank-revealing primitives, problem normalization and symmetric rank-one
//! factorization.

use nalgebra::{Complex, ComplexField, DMatrix, Scalar};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::kron_structure::unvec;
use crate::random;
use crate::scalar::{lit, Real};
use crate::svd::checked_svd;
use crate::{CMatrix, CVector};

/// The triple `(A₀, A₁, A₂)`, all `m×n` with `m > n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilProblem<T: Scalar> {
    a: [DMatrix<T>; 3],
    normalized: bool,
}

impl<T: Scalar> PencilProblem<T> {
    pub fn new(a0: DMatrix<T>, a1: DMatrix<T>, a2: DMatrix<T>) -> Result<Self> {
        let s = a0.shape();
        if a1.shape() != s || a2.shape() != s {
            return Err(Error::DimensionMismatch(format!(
                "A0 is {:?}, A1 is {:?}, A2 is {:?}",
                s,
                a1.shape(),
                a2.shape()
            )));
        }
        if s.0 == 0 || s.1 == 0 {
            return Err(Error::ZeroDimension);
        }
        if s.0 <= s.1 {
            return Err(Error::UnsupportedShape(format!("need m > n, got {}x{}", s.0, s.1)));
        }
        Ok(PencilProblem { a: [a0, a1, a2], normalized: false })
    }

    pub fn m(&self) -> usize {
        self.a[0].nrows()
    }

    pub fn n(&self) -> usize {
        self.a[0].ncols()
    }

    pub fn a(&self, i: usize) -> &DMatrix<T> {
        &self.a[i]
    }

    pub fn matrices(&self) -> &[DMatrix<T>; 3] {
        &self.a
    }

    /// Both rank conditions were checked by [`normalize_problem`].
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U + Copy) -> PencilProblem<U> {
        PencilProblem { a: self.a.each_ref().map(|m| m.map(f)), normalized: self.normalized }
    }
}

impl<R: Real> PencilProblem<Complex<R>> {
    /// `λ₀A₀ + λ₁A₁ + λ₂A₂`.
    pub fn combine(&self, lambda: &[Complex<R>; 3]) -> CMatrix<R> {
        &self.a[0] * lambda[0] + &self.a[1] * lambda[1] + &self.a[2] * lambda[2]
    }
}

/// Unitary compression with the rank it revealed.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionResult<R: Real> {
    pub transform: CMatrix<R>,
    pub compressed: CMatrix<R>,
    pub rank: usize,
}

/// Singular values in decreasing order.
pub fn singular_values<R: Real>(m: &CMatrix<R>) -> Vec<R> {
    if m.is_empty() {
        return Vec::new();
    }
    checked_svd(m).singular_values.iter().copied().collect()
}

pub fn spectral_norm<R: Real>(m: &CMatrix<R>) -> R {
    singular_values(m).first().copied().unwrap_or_else(R::zero)
}

/// Singular values above `tol·σ_max`.
pub fn numerical_rank<R: Real>(m: &CMatrix<R>, tol: R) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > R::zero() && top.is_finite() => rank_above(&s, tol * top),
        _ => 0,
    }
}

/// Count of singular values strictly above an absolute threshold.
pub(crate) fn rank_above<R: Real>(s: &[R], threshold: R) -> usize {
    s.iter().filter(|&&v| v > threshold).count()
}

/// Full `p×p` left singular basis and the singular values.
pub(crate) fn full_left<R: Real>(m: &CMatrix<R>) -> (CMatrix<R>, Vec<R>) {
    let (p, q) = m.shape();
    if p == 0 {
        return (CMatrix::zeros(0, 0), Vec::new());
    }
    if q == 0 {
        return (CMatrix::identity(p, p), Vec::new());
    }
    let padded;
    let src = if q < p {
        padded = m.clone().resize_horizontally(p, Complex::zero());
        &padded
    } else {
        m
    };
    let svd = checked_svd(src);
    let s: Vec<R> = svd.singular_values.iter().copied().take(p.min(q)).collect();
    (svd.u.expect("requested U"), s)
}

/// Singular values and a full `q×q` right singular basis.
pub(crate) fn full_right<R: Real>(m: &CMatrix<R>) -> (Vec<R>, CMatrix<R>) {
    let (p, q) = m.shape();
    if q == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    if p == 0 {
        return (Vec::new(), CMatrix::identity(q, q));
    }
    let padded;
    let src = if p < q {
        padded = m.clone().resize_vertically(q, Complex::zero());
        &padded
    } else {
        m
    };
    let svd = checked_svd(src);
    let s: Vec<R> = svd.singular_values.iter().copied().take(p.min(q)).collect();
    (s, svd.v_t.expect("requested V").adjoint())
}

fn relative_threshold<R: Real>(s: &[R], tol: R) -> R {
    s.first().map_or(R::zero(), |&top| tol * top)
}

/// `W·M = [R; 0]` with `W` unitary and `R` of full row rank.
pub fn row_compression<R: Real>(m: &CMatrix<R>, tol: R) -> CompressionResult<R> {
    let (u, s) = full_left(m);
    let rank = rank_above(&s, relative_threshold(&s, tol));
    row_compress_with(m, u, rank)
}

pub(crate) fn row_compress_with<R: Real>(m: &CMatrix<R>, u: CMatrix<R>, rank: usize) -> CompressionResult<R> {
    let w = u.adjoint();
    let mut c = &w * m;
    c.rows_mut(rank, m.nrows() - rank).fill(Complex::zero());
    CompressionResult { transform: w, compressed: c, rank }
}

/// `M·V = [R 0]` with `V` unitary and `R` of full column rank.
pub fn column_compression<R: Real>(m: &CMatrix<R>, tol: R) -> CompressionResult<R> {
    let (s, v) = full_right(m);
    let rank = rank_above(&s, relative_threshold(&s, tol));
    let mut c = m * &v;
    c.columns_mut(rank, m.ncols() - rank).fill(Complex::zero());
    CompressionResult { transform: v, compressed: c, rank }
}

/// Orthonormal basis of the right null space at relative tolerance `tol`.
pub fn nullspace<R: Real>(m: &CMatrix<R>, tol: R) -> CMatrix<R> {
    let (s, v) = full_right(m);
    let rank = rank_above(&s, relative_threshold(&s, tol));
    v.columns(rank, m.ncols() - rank).into_owned()
}

/// Null space with an absolute singular-value threshold.
pub(crate) fn nullspace_abs<R: Real>(m: &CMatrix<R>, threshold: R) -> CMatrix<R> {
    let (s, v) = full_right(m);
    let rank = rank_above(&s, threshold);
    v.columns(rank, m.ncols() - rank).into_owned()
}

/// Maps produced by [`normalize_problem`]: `A'ᵢ = L·Aᵢ·R`, and `x = R·x'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionMaps<R: Real> {
    /// `m' × m`, orthonormal rows.
    pub left: CMatrix<R>,
    /// `n × n'`, orthonormal columns.
    pub right: CMatrix<R>,
}

impl<R: Real> ReductionMaps<R> {
    pub fn is_identity(&self) -> bool {
        let (a, b) = (self.left.shape(), self.right.shape());
        a.0 == a.1 && b.0 == b.1 && self.left == CMatrix::identity(a.0, a.0) && self.right == CMatrix::identity(b.0, b.0)
    }

    /// Eigenvector in the original coordinates.
    pub fn lift_x(&self, x: &CVector<R>) -> CVector<R> {
        &self.right * x
    }
}

/// Removes common column and row null directions so that `[A₀;A₁;A₂]` has full
/// column rank and `[A₀ A₁ A₂]` full row rank.
pub fn normalize_problem<R: Real>(
    a0: &CMatrix<R>,
    a1: &CMatrix<R>,
    a2: &CMatrix<R>,
    tol: R,
) -> Result<(PencilProblem<Complex<R>>, ReductionMaps<R>)> {
    let (m, n) = a0.shape();
    if a1.shape() != (m, n) || a2.shape() != (m, n) {
        return Err(Error::DimensionMismatch(format!(
            "A0 is {:?}, A1 is {:?}, A2 is {:?}",
            a0.shape(),
            a1.shape(),
            a2.shape()
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut a = [a0.clone(), a1.clone(), a2.clone()];

    let mut stacked = CMatrix::zeros(3 * m, n);
    for (i, ai) in a.iter().enumerate() {
        stacked.rows_mut(i * m, m).copy_from(ai);
    }
    let col = column_compression(&stacked, tol);
    let right = if col.rank < n {
        log::debug!("normalize: common column null space of dimension {}", n - col.rank);
        let r = col.transform.columns(0, col.rank).into_owned();
        a = a.map(|ai| ai * &r);
        r
    } else {
        CMatrix::identity(n, n)
    };
    let n2 = right.ncols();

    let mut wide = CMatrix::zeros(m, 3 * n2);
    for (i, ai) in a.iter().enumerate() {
        wide.columns_mut(i * n2, n2).copy_from(ai);
    }
    let row = row_compression(&wide, tol);
    let left = if row.rank < m {
        log::debug!("normalize: common row null space of dimension {}", m - row.rank);
        let l = row.transform.rows(0, row.rank).into_owned();
        a = a.map(|ai| &l * ai);
        l
    } else {
        CMatrix::identity(m, m)
    };
    let m2 = left.nrows();
    if n2 == 0 || m2 <= n2 {
        return Err(Error::UnsupportedShape(format!(
            "normalized problem is {m2}x{n2}; need m > n >= 1"
        )));
    }
    let [b0, b1, b2] = a;
    let mut p = PencilProblem::new(b0, b1, b2)?;
    p.normalized = true;
    Ok((p, ReductionMaps { left, right }))
}

/// Index of the largest-modulus entry; near-ties (relative 1e-9) go to the smallest index.
pub(crate) fn dominant_index<R: Real>(x: &[Complex<R>]) -> usize {
    let top = x.iter().map(|v| v.modulus()).fold(R::zero(), |a, b| if b > a { b } else { a });
    let cut = top * (R::one() - lit(1e-9));
    x.iter().position(|v| v.modulus() >= cut).unwrap_or(0)
}

/// Unit 2-norm with the dominant entry real positive.
pub fn canonicalize<R: Real>(x: &CVector<R>) -> CVector<R> {
    let n = x.norm();
    if n.is_zero() {
        return x.clone();
    }
    let k = dominant_index(x.as_slice());
    let phase = x[k].unscale(x[k].modulus());
    x.map(|v| v / phase).unscale(n)
}

/// `x ⊗ x`.
pub fn kron_square<R: Real>(x: &CVector<R>) -> CVector<R> {
    x.kronecker(x)
}

fn symmetric_part<R: Real>(z: &CVector<R>) -> Result<CMatrix<R>> {
    let zm = unvec(z)?;
    Ok((&zm + zm.transpose()) * Complex::new(lit::<R>(0.5), R::zero()))
}

/// Best `x` with `x·xᵀ` close to a complex symmetric `s`, from the top singular triple.
fn dominant_symmetric_factor<R: Real>(s: &CMatrix<R>) -> Option<CVector<R>> {
    let svd = checked_svd(s);
    let sigma = svd.singular_values[0];
    if sigma.is_zero() {
        return None;
    }
    let u = svd.u.expect("requested U").column(0).into_owned();
    let alpha2 = (u.adjoint() * s * u.conjugate())[(0, 0)];
    Some(u * alpha2.sqrt())
}

/// Flips the sign of `x` (the only freedom that keeps `x ⊗ x`) so the dominant
/// entry has positive real part, or positive imaginary part if it is imaginary.
fn fix_square_sign<R: Real>(x: CVector<R>) -> CVector<R> {
    let d = x[dominant_index(x.as_slice())];
    let flip = d.re < R::zero() || (d.re.is_zero() && d.im < R::zero());
    if flip {
        -x
    } else {
        x
    }
}

/// If `unvec(z)` is symmetric rank one within `tol`, returns `x` with `x ⊗ x ≈ z`.
pub fn symmetric_rank_one_factor<R: Real>(z: &CVector<R>, tol: R) -> Result<Option<CVector<R>>> {
    let zn = z.norm();
    if zn.is_zero() {
        return Err(Error::ZeroInput("z = 0".into()));
    }
    let s = symmetric_part(z)?;
    let Some(x) = dominant_symmetric_factor(&s) else {
        return Ok(None);
    };
    let x = fix_square_sign(x);
    let err = (kron_square(&x) - z).norm();
    Ok((err <= tol * zn).then_some(x))
}

/// A rank-one element of a span: coefficients and factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanDecomposition<R: Real> {
    pub coefficients: CVector<R>,
    pub x: CVector<R>,
}

/// Budget and seed of the span search.
#[derive(Debug, Clone, Copy)]
pub struct SpanSearch {
    pub starts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for SpanSearch {
    fn default() -> Self {
        SpanSearch { starts: 48, max_iters: 400, seed: 0x5eed }
    }
}

/// Finds a combination of `basis` that is strongly decomposable.
pub fn decomposable_in_span<R: Real>(basis: &[CVector<R>], tol: R, search: SpanSearch) -> Option<SpanDecomposition<R>> {
    decomposable_in_span_where(basis, tol, search, |_| true)
}

/// As [`decomposable_in_span`], keeping only factors accepted by `accept`.
pub fn decomposable_in_span_where<R: Real>(
    basis: &[CVector<R>],
    tol: R,
    search: SpanSearch,
    accept: impl Fn(&CVector<R>) -> bool,
) -> Option<SpanDecomposition<R>> {
    let d = basis.len();
    if d == 0 {
        return None;
    }
    let len = basis[0].len();
    let n = crate::kron_structure::exact_sqrt(len)?;
    let g = CMatrix::from_columns(basis);
    let try_coeffs = |c: &CVector<R>| -> Option<SpanDecomposition<R>> {
        let v = &g * c;
        if v.norm() <= R::default_epsilon() {
            return None;
        }
        let x = symmetric_rank_one_factor(&v, tol).ok()??;
        accept(&x).then(|| SpanDecomposition { coefficients: c.clone(), x })
    };
    // Single basis vectors first.
    for k in 0..d {
        let mut c = CVector::zeros(d);
        c[k] = Complex::one();
        if let Some(found) = try_coeffs(&c) {
            return Some(found);
        }
    }
    if d == 1 {
        return None;
    }
    if d == 2 && n >= 2 {
        for c in pencil_sweep(basis, search.seed) {
            if let Some(found) = try_coeffs(&c) {
                return Some(found);
            }
        }
    }
    if d >= 3 {
        for c in relinearized_candidates(&g, n, tol) {
            if let Some(found) = try_coeffs(&c) {
                return Some(found);
            }
        }
    }
    let q = g.clone().qr().q();
    let g_svd = checked_svd(&g);
    for start in 0..search.starts {
        let mut rng = random::rng(search.seed, 1000 + start as u64);
        let c0 = random::unit_complex_vector::<R>(&mut rng, d);
        let v = alternating_projection(&q, &g * c0, search.max_iters);
        let Some(v) = v else { continue };
        let v = symmetric_part(&v).ok().and_then(|s| dominant_symmetric_factor(&s)).and_then(|x| polish_rank_one(&q, x)).unwrap_or(v);
        let Ok(c) = g_svd.solve(&v, R::eps() * g_svd.singular_values[0]) else { continue };
        if let Some(found) = try_coeffs(&c) {
            return Some(found);
        }
    }
    None
}

/// Alternates between the best symmetric rank-one approximation and the
/// orthogonal projection onto `range(q)`.
fn alternating_projection<R: Real>(q: &CMatrix<R>, mut v: CVector<R>, iters: usize) -> Option<CVector<R>> {
    let stop = lit::<R>(1e-15);
    for _ in 0..iters {
        let nv = v.norm();
        if nv <= R::default_epsilon() {
            return None;
        }
        v.unscale_mut(nv);
        let s = symmetric_part(&v).ok()?;
        let x = dominant_symmetric_factor(&s)?;
        let r = kron_square(&x);
        let next = q * (q.adjoint() * &r);
        let gap = (&r - &next).norm() / r.norm();
        v = next;
        if gap < stop {
            break;
        }
    }
    Some(v)
}

/// Coefficients `c` with `unvec(G·c)` symmetric of rank one, found linearly.
///
/// Every `2×2` minor of `Z(c) = Σ cₖZₖ` is a linear form in the symmetric
/// product `c·cᵀ`. When the rank-one members form a single projective point the
/// null space of those forms is one-dimensional and `c·cᵀ` is read off it.
/// Larger null spaces yield each basis vector's rank-one factor as a guess.
fn relinearized_candidates<R: Real>(g: &CMatrix<R>, n: usize, tol: R) -> Vec<CVector<R>> {
    // Restrict to the combinations whose unvec is symmetric.
    let anti = CMatrix::from_fn(g.nrows(), g.ncols(), |r, k| {
        let (i, j) = (r % n, r / n);
        (g[(i + j * n, k)] - g[(j + i * n, k)]).unscale(lit(2.0))
    });
    let sym_dirs = if anti.norm() <= R::eps() * g.norm() { CMatrix::identity(g.ncols(), g.ncols()) } else { nullspace(&anti, tol) };
    let e = sym_dirs.ncols();
    if e == 0 {
        return Vec::new();
    }
    let gs = g * &sym_dirs;
    let z: Vec<CMatrix<R>> = (0..e).map(|k| CMatrix::from_fn(n, n, |i, j| gs[(i + j * n, k)])).collect();
    let pairs: Vec<(usize, usize)> = (0..e).flat_map(|a| (a..e).map(move |b| (a, b))).collect();
    let idx: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut rows = Vec::new();
    for (ri, &(i, j)) in idx.iter().enumerate() {
        for &(k, l) in &idx[ri..] {
            let term = |a: usize, b: usize| z[a][(i, k)] * z[b][(j, l)] - z[a][(i, l)] * z[b][(j, k)];
            rows.push(pairs.iter().map(|&(a, b)| if a == b { term(a, a) } else { term(a, b) + term(b, a) }).collect::<Vec<_>>());
        }
    }
    if rows.is_empty() {
        return Vec::new();
    }
    let m = CMatrix::from_fn(rows.len(), pairs.len(), |r, c| rows[r][c]);
    let ns = nullspace(&m, tol);
    let mut out = Vec::new();
    for col in ns.column_iter() {
        let mut y = CMatrix::<R>::zeros(e, e);
        for (&(a, b), &v) in pairs.iter().zip(col.iter()) {
            y[(a, b)] = v;
            y[(b, a)] = v;
        }
        if let Some(c) = dominant_symmetric_factor(&y) {
            out.push(&sym_dirs * c);
        }
    }
    out
}

/// Gauss–Newton on `(I − QQᴴ)(x ⊗ x) = 0` with `x₀ᴴx = x₀ᴴx₀` fixed; returns
/// the projection of `x ⊗ x` onto `range(q)`.
fn polish_rank_one<R: Real>(q: &CMatrix<R>, x0: CVector<R>) -> Option<CVector<R>> {
    let n = x0.len();
    let nn = n * n;
    let w = x0.clone();
    let mut x = x0;
    let perp = |v: &CVector<R>| v - q * (q.adjoint() * v);
    for _ in 0..40 {
        let xx = kron_square(&x);
        let r = perp(&xx);
        if r.norm() <= R::eps() * lit(4.0) * xx.norm() {
            break;
        }
        let mut j = CMatrix::<R>::zeros(nn + 1, n);
        for col in 0..n {
            let mut e = CVector::<R>::zeros(n);
            e[col] = Complex::one();
            let d = perp(&(e.kronecker(&x) + x.kronecker(&e)));
            j.view_mut((0, col), (nn, 1)).copy_from(&d);
        }
        j.view_mut((nn, 0), (1, n)).copy_from(&w.adjoint());
        let mut rhs = CVector::<R>::zeros(nn + 1);
        rhs.rows_mut(0, nn).copy_from(&(-r));
        let step = checked_svd(&j).solve(&rhs, R::eps() * lit(100.0)).ok()?;
        x += &step;
        if !x.norm().is_finite() {
            return None;
        }
        if step.norm() <= R::eps() * x.norm() {
            break;
        }
    }
    let xx = kron_square(&x);
    Some(q * (q.adjoint() * xx))
}

/// Coefficients `(1, t)` where a seeded `2×2` projection of `Z₁ + t·Z₂` is
/// singular, plus `(0, 1)`. Every rank-one member of the span is among them.
fn pencil_sweep<R: Real>(basis: &[CVector<R>], seed: u64) -> Vec<CVector<R>> {
    let (Ok(z1), Ok(z2)) = (symmetric_part(&basis[0]), symmetric_part(&basis[1])) else {
        return Vec::new();
    };
    let n = z1.nrows();
    let mut rng = random::rng(seed, 7);
    let p = random::complex_normal_matrix::<R>(&mut rng, n, 2);
    let w = random::complex_normal_matrix::<R>(&mut rng, n, 2);
    let m1 = p.transpose() * &z1 * &w;
    let m2 = p.transpose() * &z2 * &w;
    let c0 = m1[(0, 0)] * m1[(1, 1)] - m1[(0, 1)] * m1[(1, 0)];
    let c2 = m2[(0, 0)] * m2[(1, 1)] - m2[(0, 1)] * m2[(1, 0)];
    let c1 = m1[(0, 0)] * m2[(1, 1)] + m2[(0, 0)] * m1[(1, 1)] - m1[(0, 1)] * m2[(1, 0)] - m2[(0, 1)] * m1[(1, 0)];
    let mut out = Vec::new();
    let mk = |t: Complex<R>| CVector::from_vec(vec![Complex::one(), t]);
    let scale = c0.modulus() + c1.modulus() + c2.modulus();
    let tiny = scale * lit::<R>(1e-13);
    if c2.modulus() > tiny {
        let disc = (c1 * c1 - c0 * c2 * lit::<R>(4.0)).sqrt();
        let two_c2 = c2 * lit::<R>(2.0);
        out.push(mk((-c1 + disc) / two_c2));
        out.push(mk((-c1 - disc) / two_c2));
    } else if c1.modulus() > tiny {
        out.push(mk(-c0 / c1));
    }
    out.push(CVector::from_vec(vec![Complex::zero(), Complex::one()]));
    out
}
