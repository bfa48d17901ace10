//! Commutation, projection and selection matrices on `vec`-ed square matrices,
//! plus `vec`/`unvec`.
//!
//! Conventions: `vec` stacks columns, so entry `(a, b)` of an `n×n` matrix
//! (0-based) sits at position `b*n + a`. Strict-lower pairs `(i, j)`, `j < i`,
//! are numbered by [`StrictPairIndex`].

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Scalar};

use crate::error::{Error, Result};
use crate::scalar::{Field, Real, Ring};

/// Sparse matrix stored as sorted `(row, col, value)` triplets, 0-based.
///
/// No duplicate positions and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, T)>,
}

/// The structure matrices are sparse with entries in a handful of values.
pub type SparseZeroOneMatrix<T> = SparseMatrix<T>;

impl<T: Ring> SparseMatrix<T> {
    /// Builds from arbitrary-order triplets; rejects duplicates, zeros and out-of-range positions.
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(usize, usize, T)>) -> Result<Self> {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        for w in entries.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(Error::InvalidIndex(format!("duplicate entry at ({}, {})", w[0].0, w[0].1)));
            }
        }
        for &(r, c, v) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::InvalidIndex(format!("({r}, {c}) outside {rows}x{cols}")));
            }
            if v.is_zero() {
                return Err(Error::InvalidIndex(format!("stored zero at ({r}, {c})")));
            }
        }
        Ok(SparseMatrix { rows, cols, entries })
    }

    // Callers guarantee sorted, distinct, nonzero entries.
    fn from_sorted(rows: usize, cols: usize, entries: Vec<(usize, usize, T)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
        SparseMatrix { rows, cols, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_sorted(n, n, (0..n).map(|i| (i, i, T::one())).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_sorted(rows, cols, Vec::new())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        match self.entries.binary_search_by_key(&(r, c), |&(a, b, _)| (a, b)) {
            Ok(k) => self.entries[k].2,
            Err(_) => T::zero(),
        }
    }

    /// Entries of row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let start = self.entries.partition_point(|e| e.0 < r);
        self.entries[start..].iter().take_while(move |e| e.0 == r).map(|e| (e.1, e.2))
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut e: Vec<_> = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        e.sort_by_key(|&(r, c, _)| (r, c));
        Self::from_sorted(self.cols, self.rows, e)
    }

    pub fn scale(&self, s: T) -> Self {
        let e = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, v * s))
            .filter(|e| !e.2.is_zero())
            .collect();
        Self::from_sorted(self.rows, self.cols, e)
    }

    /// Applies `f` entrywise (e.g. to move into a complex or rational type).
    pub fn map<U: Ring>(&self, f: impl Fn(T) -> U) -> SparseMatrix<U> {
        let e = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, f(v)))
            .filter(|e| !e.2.is_zero())
            .collect();
        SparseMatrix::from_sorted(self.rows, self.cols, e)
    }

    fn merge(&self, other: &Self, sign: T) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for &(r, c, v) in &self.entries {
            acc.insert((r, c), v);
        }
        for &(r, c, v) in &other.entries {
            let slot = acc.entry((r, c)).or_insert_with(T::zero);
            *slot += sign * v;
        }
        let e = acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|((r, c), v)| (r, c, v)).collect();
        Ok(Self::from_sorted(self.rows, self.cols, e))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.merge(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.merge(other, -T::one())
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for &(r, k, v) in &self.entries {
            for (c, w) in other.row(k) {
                let slot = acc.entry((r, c)).or_insert_with(T::zero);
                *slot += v * w;
            }
        }
        let e = acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|((r, c), v)| (r, c, v)).collect();
        Ok(Self::from_sorted(self.rows, other.cols, e))
    }

    /// Stacks matrices vertically; all must share the column count.
    pub fn vstack(blocks: &[&Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut e = Vec::new();
        let mut off = 0;
        for b in blocks {
            if b.cols != cols {
                return Err(Error::DimensionMismatch("vstack column counts differ".into()));
            }
            e.extend(b.entries.iter().map(|&(r, c, v)| (r + off, c, v)));
            off += b.rows;
        }
        Ok(Self::from_sorted(off, cols, e))
    }

    pub fn mul_vec(&self, x: &DVector<T>) -> Result<DVector<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("{} columns vs vector of {}", self.cols, x.len())));
        }
        let mut y = DVector::zeros(self.rows);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        Ok(y)
    }

    /// `self * m`.
    pub fn mul_dense(&self, m: &DMatrix<T>) -> Result<DMatrix<T>> {
        if m.nrows() != self.cols {
            return Err(Error::DimensionMismatch(format!("{} columns vs {} rows", self.cols, m.nrows())));
        }
        let mut out = DMatrix::zeros(self.rows, m.ncols());
        for &(r, k, v) in &self.entries {
            for c in 0..m.ncols() {
                out[(r, c)] += v * m[(k, c)];
            }
        }
        Ok(out)
    }

    /// `m * selfᵀ`.
    pub fn dense_mul_transpose(&self, m: &DMatrix<T>) -> Result<DMatrix<T>> {
        if m.ncols() != self.cols {
            return Err(Error::DimensionMismatch(format!("{} columns vs {} columns", m.ncols(), self.cols)));
        }
        let mut out = DMatrix::zeros(m.nrows(), self.rows);
        for &(c, k, v) in &self.entries {
            for r in 0..m.nrows() {
                out[(r, c)] += m[(r, k)] * v;
            }
        }
        Ok(out)
    }

    /// Every row holds exactly one entry and it equals 1.
    pub fn is_selection(&self) -> bool {
        let mut seen = vec![0usize; self.rows];
        for &(r, _, v) in &self.entries {
            if v != T::one() {
                return false;
            }
            seen[r] += 1;
        }
        seen.iter().all(|&s| s == 1)
    }

    /// Selection matrix that is also a bijection on columns.
    pub fn is_permutation(&self) -> bool {
        if self.rows != self.cols || !self.is_selection() {
            return false;
        }
        let mut hit = vec![false; self.cols];
        for &(_, c, _) in &self.entries {
            if hit[c] {
                return false;
            }
            hit[c] = true;
        }
        true
    }
}

/// Strict-lower position `(i, j)`, `1 ≤ j < i ≤ n`, with linear index
/// `k = (j−1)n + i − j(j+1)/2`. Everything here is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrictPairIndex {
    i: usize,
    j: usize,
    k: usize,
}

impl StrictPairIndex {
    pub fn new(i: usize, j: usize, n: usize) -> Result<Self> {
        if !(1 <= j && j < i && i <= n) {
            return Err(Error::InvalidIndex(format!("need 1 <= j < i <= n, got i={i}, j={j}, n={n}")));
        }
        let k = (j - 1) * n + i - j * (j + 1) / 2;
        Ok(StrictPairIndex { i, j, k })
    }

    /// Inverse of the `(i, j) → k` map.
    pub fn from_linear(k: usize, n: usize) -> Result<Self> {
        let count = n * n.saturating_sub(1) / 2;
        if k == 0 || k > count {
            return Err(Error::InvalidIndex(format!("k={k} outside 1..={count}")));
        }
        let mut base = 0;
        for j in 1..n {
            let len = n - j;
            if k <= base + len {
                return Self::new(j + (k - base), j, n);
            }
            base += len;
        }
        unreachable!()
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// 0-based `(row, col)` of the lower entry.
    pub fn zero_based(&self) -> (usize, usize) {
        (self.i - 1, self.j - 1)
    }
}

/// All strict-lower pairs of an `n×n` matrix in increasing `k`.
pub fn strict_pairs(n: usize) -> impl Iterator<Item = StrictPairIndex> {
    (1..n).flat_map(move |j| (j + 1..=n).map(move |i| StrictPairIndex::new(i, j, n).expect("valid pair")))
}

/// `vec` position of entry `(a, b)` (0-based) of an `n×n` matrix.
#[inline]
pub fn vec_pos(a: usize, b: usize, n: usize) -> usize {
    b * n + a
}

/// Column-major stacking of a square matrix.
pub fn vec<T: Scalar>(z: &DMatrix<T>) -> Result<DVector<T>> {
    if z.nrows() != z.ncols() {
        return Err(Error::NotSquare { rows: z.nrows(), cols: z.ncols() });
    }
    Ok(DVector::from_column_slice(z.as_slice()))
}

/// Inverse of [`vec`] for a vector of length `n²`.
pub fn unvec<T: Scalar>(v: &DVector<T>) -> Result<DMatrix<T>> {
    let n = exact_sqrt(v.len()).ok_or(Error::NotPerfectSquare(v.len()))?;
    Ok(DMatrix::from_column_slice(n, n, v.as_slice()))
}

pub(crate) fn exact_sqrt(len: usize) -> Option<usize> {
    let r = (len as f64).sqrt().round() as usize;
    (r * r == len).then_some(r)
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroDimension)
    } else {
        Ok(())
    }
}

/// `Kⁿ` with `K·vec(Z) = vec(Zᵀ)`.
pub fn commutation_matrix<T: Ring>(n: usize) -> Result<SparseMatrix<T>> {
    check_dim(n)?;
    // Row vec_pos(a, b) of vec(Zᵀ) reads Z[b, a].
    let mut e = Vec::with_capacity(n * n);
    for b in 0..n {
        for a in 0..n {
            e.push((vec_pos(a, b, n), vec_pos(b, a, n), T::one()));
        }
    }
    Ok(SparseMatrix::from_sorted(n * n, n * n, e))
}

/// Symmetric and skew projectors `H = (I+K)/2`, `F = (I−K)/2`.
pub fn projectors<T: Field>(n: usize) -> Result<(SparseMatrix<T>, SparseMatrix<T>)> {
    check_dim(n)?;
    let half = T::half();
    let mut h = Vec::with_capacity(2 * n * n);
    let mut f = Vec::with_capacity(2 * n * n);
    for b in 0..n {
        for a in 0..n {
            let p = vec_pos(a, b, n);
            let q = vec_pos(b, a, n);
            if p == q {
                h.push((p, p, T::one()));
            } else {
                let (lo, hi) = (p.min(q), p.max(q));
                let (lo_f, hi_f) = if lo == p { (half, -half) } else { (-half, half) };
                h.push((p, lo, half));
                h.push((p, hi, half));
                f.push((p, lo, lo_f));
                f.push((p, hi, hi_f));
            }
        }
    }
    Ok((SparseMatrix::from_sorted(n * n, n * n, h), SparseMatrix::from_sorted(n * n, n * n, f)))
}

/// Diagonal, strict-lower and strict-upper selection matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionMatrices<T> {
    /// `n × n²`, picks `Z[i,i]`.
    pub diag: SparseMatrix<T>,
    /// `n(n−1)/2 × n²`, row `k` picks `Z[i,j]`.
    pub lower: SparseMatrix<T>,
    /// `n(n−1)/2 × n²`, row `k` picks `Z[j,i]`.
    pub upper: SparseMatrix<T>,
}

impl<T: Ring> SelectionMatrices<T> {
    /// `[S_D; S_L; S_U]`.
    pub fn stacked(&self) -> SparseMatrix<T> {
        SparseMatrix::vstack(&[&self.diag, &self.lower, &self.upper]).expect("shared column count")
    }
}

pub fn selection_matrices<T: Ring>(n: usize) -> Result<SelectionMatrices<T>> {
    check_dim(n)?;
    let nn = n * n;
    let p = n * (n - 1) / 2;
    let diag = (0..n).map(|i| (i, vec_pos(i, i, n), T::one())).collect();
    let mut lower = Vec::with_capacity(p);
    let mut upper = Vec::with_capacity(p);
    for (r, pair) in strict_pairs(n).enumerate() {
        let (i, j) = pair.zero_based();
        lower.push((r, vec_pos(i, j, n), T::one()));
        upper.push((r, vec_pos(j, i, n), T::one()));
    }
    Ok(SelectionMatrices {
        diag: SparseMatrix::from_sorted(n, nn, diag),
        lower: SparseMatrix::from_sorted(p, nn, lower),
        upper: SparseMatrix::from_sorted(p, nn, upper),
    })
}

/// Orthogonal `T = [V; U]` splitting `vec`-space into symmetric and skew parts.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalTransform<R> {
    pub t: SparseMatrix<R>,
    /// `n(n+1)/2 × n²`: diagonal rows then strict-lower rows in `k` order.
    pub v: SparseMatrix<R>,
    /// `n(n−1)/2 × n²`, rows in `k` order.
    pub u: SparseMatrix<R>,
}

/// Builds `V = [S_D; √2·S_L]·H`, `U = −√2·S_U·F` and `T = [V; U]` entrywise.
pub fn orthogonal_transform<R: Real>(n: usize) -> Result<OrthogonalTransform<R>> {
    check_dim(n)?;
    let w = R::one() / (R::one() + R::one()).sqrt();
    let (v, u) = compressor_pattern(n, R::one(), w, w);
    let t = SparseMatrix::vstack(&[&v, &u])?;
    Ok(OrthogonalTransform { t, v, u })
}

/// Integer compressors `V̂ = [S_D; 2·S_L]·H` and `Û = −2·S_U·F`.
///
/// `V̂·z` lists `Z[i,i]` then `Z[i,j] + Z[j,i]`; `Û·z` lists `Z[i,j] − Z[j,i]` for `i > j`.
pub fn scaled_compressors<T: Ring>(n: usize) -> Result<(SparseMatrix<T>, SparseMatrix<T>)> {
    check_dim(n)?;
    Ok(compressor_pattern(n, T::one(), T::one(), T::one()))
}

fn compressor_pattern<T: Ring>(n: usize, d: T, sym: T, skew: T) -> (SparseMatrix<T>, SparseMatrix<T>) {
    let nn = n * n;
    let p = n * (n - 1) / 2;
    let mut v: Vec<_> = (0..n).map(|i| (i, vec_pos(i, i, n), d)).collect();
    let mut u = Vec::with_capacity(2 * p);
    for (r, pair) in strict_pairs(n).enumerate() {
        let (i, j) = pair.zero_based();
        let lo = vec_pos(i, j, n);
        let up = vec_pos(j, i, n);
        // lo < up because j < i.
        v.push((n + r, lo, sym));
        v.push((n + r, up, sym));
        u.push((r, lo, skew));
        u.push((r, up, -skew));
    }
    (SparseMatrix::from_sorted(n + p, nn, v), SparseMatrix::from_sorted(p, nn, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn vec_examples() {
        let z = DMatrix::from_row_slice(2, 2, &[1, 3, 2, 4]);
        assert_eq!(vec(&z).unwrap().as_slice(), &[1, 2, 3, 4]);
        assert_eq!(vec(&DMatrix::<i64>::identity(2, 2)).unwrap().as_slice(), &[1, 0, 0, 1]);
        assert!(vec(&DMatrix::<i64>::zeros(2, 3)).is_err());
        let back = unvec(&vec(&z).unwrap()).unwrap();
        assert_eq!(back, z);
    }

    #[test]
    fn vec_label_order() {
        let z = DMatrix::from_fn(3, 3, |i, j| 10 * (i as i64 + 1) + j as i64 + 1);
        assert_eq!(vec(&z).unwrap().as_slice(), &[11, 21, 31, 12, 22, 32, 13, 23, 33]);
    }

    #[test]
    fn commutation_small() {
        let k1 = commutation_matrix::<i64>(1).unwrap();
        assert_eq!(k1.to_dense(), DMatrix::from_element(1, 1, 1));
        let k2 = commutation_matrix::<i64>(2).unwrap();
        let v = DVector::from_column_slice(&[1, 3, 2, 4]);
        assert_eq!(k2.mul_vec(&v).unwrap().as_slice(), &[1, 2, 3, 4]);
        assert!(commutation_matrix::<i64>(0).is_err());
    }

    #[test]
    fn projectors_small() {
        let (h, f) = projectors::<Ratio<i64>>(1).unwrap();
        assert_eq!(h.to_dense()[(0, 0)], Ratio::from_integer(1));
        assert_eq!(f.nnz(), 0);
        let (_, f2) = projectors::<f64>(2).unwrap();
        let s = DVector::from_column_slice(&[1.0, 2.0, 2.0, 5.0]);
        assert_eq!(f2.mul_vec(&s).unwrap(), DVector::zeros(4));
    }

    #[test]
    fn selection_small() {
        let s = selection_matrices::<i64>(2).unwrap();
        assert_eq!(s.diag.entries(), &[(0, 0, 1), (1, 3, 1)]);
        assert_eq!(s.lower.entries(), &[(0, 1, 1)]);
        assert_eq!(s.upper.entries(), &[(0, 2, 1)]);
        let s1 = selection_matrices::<i64>(1).unwrap();
        assert_eq!(s1.lower.rows(), 0);
        assert_eq!(s1.upper.rows(), 0);
    }

    #[test]
    fn strict_pair_bijection() {
        for n in 1..=7 {
            let ks: Vec<usize> = strict_pairs(n).map(|p| p.k()).collect();
            assert_eq!(ks, (1..=n * (n - 1) / 2).collect::<Vec<_>>());
            for p in strict_pairs(n) {
                assert_eq!(StrictPairIndex::from_linear(p.k(), n).unwrap(), p);
            }
        }
        assert!(StrictPairIndex::new(2, 2, 3).is_err());
        assert!(StrictPairIndex::from_linear(0, 3).is_err());
    }

    #[test]
    fn orthogonal_examples() {
        let t1 = orthogonal_transform::<f64>(1).unwrap();
        assert_eq!(t1.t.to_dense(), DMatrix::from_element(1, 1, 1.0));
        let t2 = orthogonal_transform::<f64>(2).unwrap();
        let xx = DVector::from_column_slice(&[1.0, 2.0, 2.0, 4.0]);
        let v = t2.v.mul_vec(&xx).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && (v[1] - 4.0).abs() < 1e-15);
        assert!((v[2] - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(t2.u.mul_vec(&xx).unwrap().norm() < 1e-15);
    }

    #[test]
    fn scaled_compressors_n2() {
        let (vh, uh) = scaled_compressors::<i64>(2).unwrap();
        let z = DVector::from_column_slice(&[5, 7, 11, 13]);
        assert_eq!(vh.mul_vec(&z).unwrap().as_slice(), &[5, 13, 18]);
        assert_eq!(uh.mul_vec(&z).unwrap().as_slice(), &[-4]);
        let (v1, u1) = scaled_compressors::<i64>(1).unwrap();
        assert_eq!(v1.to_dense(), DMatrix::from_element(1, 1, 1));
        assert_eq!(u1.rows(), 0);
    }

    #[test]
    fn triplet_validation() {
        assert!(SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1), (0, 0, 2)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(0, 0, 0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1)]).is_err());
        let m = SparseMatrix::from_triplets(2, 2, vec![(1, 0, 3), (0, 1, 2)]).unwrap();
        assert_eq!(m.get(1, 0), 3);
        assert_eq!(m.get(0, 0), 0);
    }
}
