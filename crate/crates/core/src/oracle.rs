//! Brute-force solution finder for small problems, independent of the
//! deflation pipeline: grid scans of `σ_min(A(λ))` over three affine charts,
//! then Gauss–Newton on `A(λ)x = 0, wᴴx = 1`.

use nalgebra::{Complex, ComplexField};
use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg_core::{canonicalize, full_right, singular_values, spectral_norm, PencilProblem};
use crate::pencil_solvers::{Projective, ProjectiveEigenvalue};
use crate::scalar::{lit, Real};
use crate::svd::checked_svd;
use crate::{CMatrix, CVector};

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Grid points per real axis of each chart.
    pub grid: usize,
    pub refine_iters: usize,
    /// Relative `σ_min` below which a refined point is accepted.
    pub accept_tol: f64,
    pub dedup_tol: f64,
    /// Largest number of starts refined per chart.
    pub max_starts: usize,
    /// Lattice points whose linearised root distance is below this many
    /// lattice steps become Newton starts.
    pub start_radius: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { grid: 9, refine_iters: 60, accept_tol: 1e-10, dedup_tol: 1e-6, max_starts: 400, start_radius: 1.0 }
    }
}

pub const MAX_ROWS: usize = 6;
pub const MAX_COLS: usize = 4;

/// One oracle solution.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePoint<R: Real> {
    pub lambda: ProjectiveEigenvalue<R>,
    pub x: CVector<R>,
    pub sigma_relative: R,
}

fn chart_lambda<R: Real>(k: usize, u: Complex<R>, v: Complex<R>) -> [Complex<R>; 3] {
    match k {
        0 => [Complex::one(), u, v],
        1 => [u, Complex::one(), v],
        _ => [u, v, Complex::one()],
    }
}

fn free_indices(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// All isolated solutions it can find; `n ≤ 4`, `m ≤ 6`.
pub fn brute_force_solutions<R: Real>(p: &PencilProblem<Complex<R>>, cfg: &OracleConfig) -> Result<Vec<OraclePoint<R>>> {
    if p.m() > MAX_ROWS || p.n() > MAX_COLS {
        return Err(Error::UnsupportedShape(format!(
            "oracle handles m <= {MAX_ROWS}, n <= {MAX_COLS}; got {}x{}",
            p.m(),
            p.n()
        )));
    }
    let norms: [R; 3] = std::array::from_fn(|i| spectral_norm(p.a(i)));
    let scale = |l: &[Complex<R>; 3]| (0..3).fold(R::zero(), |s, i| s + l[i].modulus() * norms[i]);
    let sigma = |l: &[Complex<R>; 3]| {
        let sc = scale(l);
        if sc.is_zero() {
            return R::zero();
        }
        singular_values(&p.combine(l)).last().copied().unwrap_or_else(R::zero) / sc
    };
    let g = cfg.grid.max(2);
    let h = 2.0 / (g - 1) as f64;
    let accept = lit::<R>(cfg.accept_tol);
    let mut found: Vec<OraclePoint<R>> = Vec::new();
    let try_start = |k: usize, u: Complex<R>, v: Complex<R>, found: &mut Vec<OraclePoint<R>>| {
        let Some((l, x)) = refine(p, k, u, v, cfg.refine_iters) else { return };
        let s = sigma(&l);
        if s > accept {
            return;
        }
        let Ok(lambda) = Projective::new(l) else { return };
        if found.iter().any(|f| f.lambda.distance(&lambda) <= lit(cfg.dedup_tol)) {
            return;
        }
        found.push(OraclePoint { lambda, x: canonicalize(&x), sigma_relative: s });
    };

    for k in 0..3 {
        let axis: Vec<R> = (0..g).map(|i| lit::<R>(-1.0 + h * i as f64)).collect();
        let (iu, iv) = free_indices(k);
        // Linearised distance to the nearest root from each lattice point:
        // σ_min over the gradient of σ_min in the two chart coordinates.
        let mut starts: Vec<(R, [usize; 4])> = Vec::new();
        for a in 0..g {
            for b in 0..g {
                for c in 0..g {
                    for d in 0..g {
                        let l = chart_lambda(k, Complex::new(axis[a], axis[b]), Complex::new(axis[c], axis[d]));
                        let m = p.combine(&l);
                        let svd = checked_svd(&m);
                        let (Some(lu), Some(rv)) = (svd.u.as_ref(), svd.v_t.as_ref()) else { continue };
                        let last = p.n() - 1;
                        let Some(j) = (0..=last).min_by(|&x, &y| {
                            svd.singular_values[x].partial_cmp(&svd.singular_values[y]).unwrap_or(std::cmp::Ordering::Equal)
                        }) else {
                            continue;
                        };
                        let left = lu.column(j);
                        let right = rv.row(j).adjoint();
                        let gu = left.dotc(&(p.a(iu) * &right)).modulus();
                        let gv = left.dotc(&(p.a(iv) * &right)).modulus();
                        let grad = (gu * gu + gv * gv).sqrt();
                        let dist = if grad.is_zero() { R::max_value().unwrap_or_else(R::one) } else { svd.singular_values[j] / grad };
                        if dist <= lit::<R>(cfg.start_radius * h) {
                            starts.push((dist, [a, b, c, d]));
                        }
                    }
                }
            }
        }
        starts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
        starts.truncate(cfg.max_starts);
        for (_, [a, b, c, d]) in starts {
            let u = Complex::new(axis[a], axis[b]);
            let v = Complex::new(axis[c], axis[d]);
            try_start(k, u, v, &mut found);
        }
    }
    // Close roots share basins on the lattice. Restart from each root's
    // conjugate and from small axis offsets around it until nothing new turns up.
    let mut done = 0;
    while done < found.len() {
        let l = found[done].lambda.coords();
        done += 1;
        let k = (0..3).max_by(|&i, &j| l[i].modulus().partial_cmp(&l[j].modulus()).unwrap_or(std::cmp::Ordering::Equal)).unwrap_or(0);
        let (iu, iv) = free_indices(k);
        let (u0, v0) = (l[iu] / l[k], l[iv] / l[k]);
        try_start(k, u0.conj(), v0.conj(), &mut found);
        for r in [0.05, 0.15, 0.4] {
            let r = lit::<R>(r);
            for dir in 0..8 {
                let step = if dir % 2 == 0 { r } else { -r };
                let e = match dir / 2 {
                    0 | 2 => Complex::new(step, R::zero()),
                    _ => Complex::new(R::zero(), step),
                };
                let (u, v) = if dir / 2 < 2 { (u0 + e, v0) } else { (u0, v0 + e) };
                try_start(k, u, v, &mut found);
            }
        }
    }
    Ok(found)
}

/// Gauss–Newton on `F(u, v, x) = [A(λ)x; wᴴx − 1]` in chart `k`.
fn refine<R: Real>(p: &PencilProblem<Complex<R>>, k: usize, mut u: Complex<R>, mut v: Complex<R>, iters: usize) -> Option<([Complex<R>; 3], CVector<R>)> {
    let (m, n) = (p.m(), p.n());
    let (iu, iv) = free_indices(k);
    let a0 = p.combine(&chart_lambda(k, u, v));
    let (_, vr) = full_right(&a0);
    let mut x = vr.column(n - 1).into_owned();
    let w = x.clone();
    let big = lit::<R>(1e8);
    let mut best = R::max_value().unwrap_or_else(R::one);
    let mut stalled = 0;
    for _ in 0..iters {
        let l = chart_lambda(k, u, v);
        let a = p.combine(&l);
        let mut f = CVector::<R>::zeros(m + 1);
        f.rows_mut(0, m).copy_from(&(&a * &x));
        f[m] = w.dotc(&x) - Complex::one();
        let fnorm = f.norm();
        if fnorm <= R::default_epsilon() * lit(10.0) {
            break;
        }
        if fnorm < best * lit(0.5) {
            best = fnorm;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 8 {
                break;
            }
        }
        let mut j = CMatrix::<R>::zeros(m + 1, n + 2);
        j.view_mut((0, 0), (m, n)).copy_from(&a);
        j.view_mut((0, n), (m, 1)).copy_from(&(p.a(iu) * &x));
        j.view_mut((0, n + 1), (m, 1)).copy_from(&(p.a(iv) * &x));
        j.view_mut((m, 0), (1, n)).copy_from(&w.adjoint());
        let svd = checked_svd(&j);
        let step = svd.solve(&f, R::default_epsilon() * lit(100.0)).ok()?;
        x -= step.rows(0, n);
        u -= step[n];
        v -= step[n + 1];
        if !(u.modulus() < big && v.modulus() < big) || !x.norm().is_finite() {
            return None;
        }
        if step.norm() <= R::default_epsilon() * lit(10.0) * (R::one() + x.norm()) {
            break;
        }
    }
    Some((chart_lambda(k, u, v), x))
}
