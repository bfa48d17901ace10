//! Seeded random draws. Every randomized routine derives its generator from a
//! `(seed, stream)` pair so results do not depend on call order.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{lit, Real};

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn complex_normal<R: Real>(rng: &mut impl Rng) -> Complex<R> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(lit(re), lit(im))
}

pub fn complex_normal_matrix<R: Real>(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<Complex<R>> {
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Complex normal vector scaled to unit 2-norm.
pub fn unit_complex_vector<R: Real>(rng: &mut impl Rng, len: usize) -> DVector<Complex<R>> {
    let v = DVector::from_fn(len, |_, _| complex_normal(rng));
    let n = v.norm();
    v.unscale(n)
}
