//! Checked complex SVD.
//!
//! nalgebra's implicit-shift bidiagonal QR occasionally returns a wrong
//! factorization for rank-deficient complex input (a tiny diagonal entry next
//! to a large superdiagonal one gets deflated without chasing). Every result is
//! verified by reconstruction and, on failure, recomputed with one-sided Jacobi,
//! which is slower but unconditionally accurate.

use nalgebra::{Complex, ComplexField, Dyn, SVD};
use num_traits::One;

use crate::scalar::{lit, Real};
use crate::{CMatrix, CVector};

pub type ComplexSvd<R> = SVD<Complex<R>, Dyn, Dyn>;

/// Thin SVD with singular values in decreasing order and both factors.
pub fn checked_svd<R: Real>(m: &CMatrix<R>) -> ComplexSvd<R> {
    let fast = SVD::new(m.clone(), true, true);
    if is_accurate(m, &fast) {
        return fast;
    }
    log::debug!("SVD of a {}x{} matrix failed verification; using Jacobi", m.nrows(), m.ncols());
    jacobi_svd(m)
}

fn is_accurate<R: Real>(m: &CMatrix<R>, svd: &ComplexSvd<R>) -> bool {
    let (Some(u), Some(vt)) = (svd.u.as_ref(), svd.v_t.as_ref()) else { return false };
    if svd.singular_values.iter().any(|s| !s.is_finite()) {
        return false;
    }
    let k = svd.singular_values.len();
    let slack = R::eps() * lit(1e3) * lit((m.nrows() + m.ncols()) as f64);
    let us = CMatrix::from_fn(u.nrows(), k, |i, j| u[(i, j)].scale(svd.singular_values[j]));
    let recon = (us * vt - m).norm();
    let eye = CMatrix::<R>::identity(k, k);
    recon <= slack * m.norm() && (u.adjoint() * u - &eye).norm() <= slack && (vt * vt.adjoint() - eye).norm() <= slack
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn jacobi_svd<R: Real>(m: &CMatrix<R>) -> ComplexSvd<R> {
    let (p, q) = m.shape();
    if p < q {
        // A = (Aᴴ)ᴴ = V Σ Uᴴ.
        let t = jacobi_svd(&m.adjoint());
        return SVD {
            u: t.v_t.map(|vt| vt.adjoint()),
            v_t: t.u.map(|u| u.adjoint()),
            singular_values: t.singular_values,
        };
    }
    let mut a = m.clone();
    let mut v = CMatrix::<R>::identity(q, q);
    let eps = R::eps();
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..q {
            for j in i + 1..q {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dotc(&a.column(j));
                let g = gamma.modulus();
                if g.is_zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.unscale(g).conj();
                let zeta = (beta - alpha) / (g + g);
                let sign = if zeta < R::zero() { -R::one() } else { R::one() };
                let t = sign / (zeta.abs() + (R::one() + zeta * zeta).sqrt());
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, i, j, c, s, phase);
                rotate(&mut v, i, j, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..q).collect();
    let norms: Vec<R> = (0..q).map(|k| a.column(k).norm()).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap_or(std::cmp::Ordering::Equal));
    let sigma = nalgebra::DVector::from_iterator(q, order.iter().map(|&k| norms[k]));
    let top = sigma.iter().copied().fold(R::zero(), |x, y| if y > x { y } else { x });
    let mut cols: Vec<CVector<R>> = Vec::with_capacity(q);
    let mut extra = 0;
    for (rank, &k) in order.iter().enumerate() {
        let col = a.column(k).into_owned();
        let candidate = if sigma[rank] > top * eps * lit(q as f64) && sigma[rank] > R::zero() {
            col.unscale(sigma[rank])
        } else {
            // Null column: any unit vector orthogonal to the ones kept.
            loop {
                let mut e = CVector::<R>::zeros(p);
                e[extra % p] = Complex::one();
                extra += 1;
                if let Some(w) = orthonormalize(&e, &cols) {
                    break w;
                }
            }
        };
        let w = orthonormalize(&candidate, &cols).unwrap_or(candidate);
        cols.push(w);
    }
    let u = CMatrix::from_columns(&cols);
    let v_sorted = CMatrix::from_columns(&order.iter().map(|&k| v.column(k).into_owned()).collect::<Vec<_>>());
    SVD { u: Some(u), v_t: Some(v_sorted.adjoint()), singular_values: sigma }
}

/// Columns `i, j` ← `(c·xᵢ − s·φ·xⱼ, s·xᵢ + c·φ·xⱼ)`.
fn rotate<R: Real>(x: &mut CMatrix<R>, i: usize, j: usize, c: R, s: R, phase: Complex<R>) {
    for r in 0..x.nrows() {
        let xi = x[(r, i)];
        let xj = x[(r, j)] * phase;
        x[(r, i)] = xi.scale(c) - xj.scale(s);
        x[(r, j)] = xi.scale(s) + xj.scale(c);
    }
}

/// Twice-repeated Gram–Schmidt of `x` against orthonormal `basis`.
fn orthonormalize<R: Real>(x: &CVector<R>, basis: &[CVector<R>]) -> Option<CVector<R>> {
    let mut w = x.clone();
    for _ in 0..2 {
        for b in basis {
            let proj = b.dotc(&w);
            w -= b * proj;
        }
    }
    let n = w.norm();
    (n > lit::<R>(0.5) * x.norm() && !n.is_zero()).then(|| w.unscale(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{complex_normal_matrix, rng, unit_complex_vector};

    fn check(m: &CMatrix<f64>, s: &ComplexSvd<f64>) {
        let u = s.u.as_ref().unwrap();
        let vt = s.v_t.as_ref().unwrap();
        let k = s.singular_values.len();
        let us = CMatrix::from_fn(u.nrows(), k, |i, j| u[(i, j)] * s.singular_values[j]);
        assert!((us * vt - m).norm() <= 1e-12 * m.norm().max(1.0));
        assert!((u.adjoint() * u - CMatrix::identity(k, k)).norm() <= 1e-12);
        assert!((vt * vt.adjoint() - CMatrix::identity(k, k)).norm() <= 1e-12);
        assert!(s.singular_values.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn jacobi_matches_random_shapes() {
        for seed in 0..40u64 {
            let mut g = rng(seed, 0);
            let (p, q, r) = (1 + (seed % 6) as usize, 1 + (seed / 6 % 5) as usize, 1 + (seed % 3) as usize);
            let m = complex_normal_matrix::<f64>(&mut g, p, r) * complex_normal_matrix::<f64>(&mut g, r, q);
            let s = jacobi_svd(&m);
            check(&m, &s);
            let reference = checked_svd(&m);
            for (a, b) in s.singular_values.iter().zip(reference.singular_values.iter()) {
                assert!((a - b).abs() <= 1e-12 * reference.singular_values[0]);
            }
        }
    }

    #[test]
    fn rank_one_symmetric_that_trips_bidiagonal_qr() {
        let x = unit_complex_vector::<f64>(&mut rng(7367145850502352473, 1), 7);
        let m = &x * x.transpose();
        let s = checked_svd(&m);
        check(&m, &s);
        assert!((s.singular_values[0] - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn zero_matrix() {
        let m = CMatrix::<f64>::zeros(3, 2);
        let s = checked_svd(&m);
        check(&m, &s);
        assert!(s.singular_values.iter().all(|v| *v == 0.0));
    }
}
