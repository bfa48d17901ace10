//! Shared fixtures: the three worked examples and problem generators.
#![allow(dead_code)]

use kronpencil::pencil_solvers::{Projective, ProjectiveEigenvalue};
use kronpencil::{CMatrix, IntProblem, C64};
use nalgebra::{Complex, DMatrix};
use rand::Rng;

pub fn int(rows: usize, cols: usize, v: &[i64]) -> DMatrix<i64> {
    DMatrix::from_row_slice(rows, cols, v)
}

pub fn to_complex(m: &DMatrix<i64>) -> CMatrix {
    m.map(|v| Complex::new(v as f64, 0.0))
}

pub fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub fn lam(v: [f64; 3]) -> ProjectiveEigenvalue {
    Projective::new(v.map(c)).unwrap()
}

pub fn ex1() -> [DMatrix<i64>; 3] {
    [
        int(4, 3, &[2, 3, 1, 2, 2, 2, 4, 4, 3, 5, 5, 4]),
        int(4, 3, &[3, 3, 1, 1, 2, 2, 2, 3, 3, 4, 2, 4]),
        int(4, 3, &[3, 1, 2, 3, 3, 3, 3, 4, 4, 4, 4, 5]),
    ]
}

pub fn ex2() -> [DMatrix<i64>; 3] {
    [
        int(3, 2, &[1, 0, 4, 0, 7, 0]),
        int(3, 2, &[2, 0, 5, 0, 8, 0]),
        int(3, 2, &[3, 0, 0, 6, 9, 0]),
    ]
}

pub fn ex3() -> [DMatrix<i64>; 3] {
    [
        int(4, 2, &[2, 4, 6, 0, 0, 2, 6, 0]),
        int(4, 2, &[1, 0, 0, 1, 0, 0, 0, 0]),
        int(4, 2, &[0, 0, 2, 0, 0, 2, 2, 0]),
    ]
}

pub fn int_problem(a: &[DMatrix<i64>; 3]) -> IntProblem {
    IntProblem::new(a[0].clone(), a[1].clone(), a[2].clone()).unwrap()
}

pub fn complex_triple(a: &[DMatrix<i64>; 3]) -> [CMatrix; 3] {
    [to_complex(&a[0]), to_complex(&a[1]), to_complex(&a[2])]
}

/// Uniform integer matrix with entries in `-range..=range`.
pub fn random_int(rng: &mut impl Rng, rows: usize, cols: usize, range: i64) -> DMatrix<i64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-range..=range))
}

pub fn random_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    kronpencil::random::complex_normal_matrix(rng, rows, cols)
}

/// Γ tables printed for the worked examples.
pub fn ex1_gamma() -> [DMatrix<i64>; 3] {
    [
        int(6, 6, &[
            12, 14, -2, 22, 8, 12, 6, 18, -4, 20, 4, 14, 0, 20, -6, 28, -2, 22, -6, -2, -2, -10, -10, -4, -16, 4,
            -4, -12, -22, 0, -8, 8, -2, -4, -12, 6,
        ]),
        int(6, 6, &[
            0, -14, 2, -14, 2, -12, 12, -16, 4, -2, 12, -10, 14, -14, 6, 0, 16, -10, 12, 8, 2, 20, 14, 10, 14, 14,
            4, 28, 18, 18, -2, 8, 2, 6, 0, 8,
        ]),
        int(6, 6, &[
            -8, 0, 0, -10, -6, 0, -16, -6, 0, -24, -10, -2, -14, -18, 0, -28, -10, -6, 0, -4, 0, -4, -2, -4, 6,
            -12, 0, -6, 4, -12, 12, -14, 0, -2, 10, -10,
        ]),
    ]
}

pub fn ex2_gamma() -> [DMatrix<i64>; 3] {
    [
        int(3, 3, &[-30, 0, 24, -12, 0, 0, 90, 0, -96]),
        int(3, 3, &[24, 0, -12, 24, 0, 0, -72, 0, 84]),
        int(3, 3, &[-6, 0, 0, -12, 0, 0, -6, 0, 0]),
    ]
}

pub fn ex3_gamma() -> [DMatrix<i64>; 3] {
    [
        int(6, 3, &[4, 0, 0, 0, 0, 4, 4, 0, 0, 0, 4, 0, 0, 0, 4, 0, 0, 0]),
        int(6, 3, &[-8, 0, -16, 0, -16, -8, -8, 0, -16, 0, 0, -16, 0, 0, 0, 0, 0, 16]),
        int(6, 3, &[-12, 8, 4, 0, 0, -4, -12, 0, 0, 0, -4, 0, 0, 0, -12, 0, 0, 0]),
    ]
}

/// Eigenvalues of the first example in the λ₀ = 1 chart.
pub fn ex1_eigenvalues() -> Vec<[C64; 3]> {
    let r = |a: f64, b: f64| [c(1.0), c(a), c(b)];
    vec![
        r(-1.0, 0.0),
        r(-0.0674, 0.2755),
        r(1.1714, -1.5777),
        [c(1.0), Complex::new(-0.8627, -0.1011), Complex::new(1.2215, -0.8717)],
        [c(1.0), Complex::new(-0.8627, 0.1011), Complex::new(1.2215, 0.8717)],
        r(-1.1025, 0.0630),
    ]
}
