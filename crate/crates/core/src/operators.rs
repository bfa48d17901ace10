//! Kronecker commutators, their block structure under `T`, and the Kronecker
//! determinants `Γ₀, Γ₁, Γ₂`.

use nalgebra::{ComplexField, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kron_structure::{exact_sqrt, orthogonal_transform, scaled_compressors, strict_pairs};
use crate::linalg_core::PencilProblem;
use crate::scalar::{Real, Ring};

/// Scaling of the compressors used to build `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// `Û`, `V̂` with entries in `{0, ±1}`; integer inputs give integer `Γ`.
    Integer,
    /// Rows of the orthogonal `T`.
    Orthogonal,
}

fn check_same_shape<T: Ring>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// `A⊗B − B⊗A`.
pub fn kron_commutator<T: Ring>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_same_shape(a, b)?;
    Ok(a.kronecker(b) - b.kronecker(a))
}

/// `A⊗B + B⊗A`.
pub fn kron_anticommutator<T: Ring>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_same_shape(a, b)?;
    Ok(a.kronecker(b) + b.kronecker(a))
}

/// A commutator together with the matching anti-commutator.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorPair<T: Ring> {
    pub delta: DMatrix<T>,
    pub anti: Option<DMatrix<T>>,
}

impl<T: Ring> CommutatorPair<T> {
    pub fn new(a: &DMatrix<T>, b: &DMatrix<T>, with_anti: bool) -> Result<Self> {
        let delta = kron_commutator(a, b)?;
        let anti = if with_anti { Some(kron_anticommutator(a, b)?) } else { None };
        Ok(CommutatorPair { delta, anti })
    }
}

/// Cyclic index pairs `(j, k)` with `Δᵢ = A_j⊗A_k − A_k⊗A_j`.
pub const CYCLIC: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

/// `(Δ₀, Δ₁, Δ₂)`.
pub fn pencil_commutators<T: Ring>(p: &PencilProblem<T>) -> [DMatrix<T>; 3] {
    CYCLIC.map(|(j, k)| kron_commutator(p.a(j), p.a(k)).expect("validated problem"))
}

/// The four blocks of `Tᵐ·M·(Tⁿ)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedBlocks<T: Ring> {
    /// `Vᵐ·M·(Vⁿ)ᵀ`
    pub b11: DMatrix<T>,
    /// `Vᵐ·M·(Uⁿ)ᵀ`
    pub b12: DMatrix<T>,
    /// `Uᵐ·M·(Vⁿ)ᵀ`
    pub b21: DMatrix<T>,
    /// `Uᵐ·M·(Uⁿ)ᵀ`
    pub b22: DMatrix<T>,
}

/// Applies the orthogonal transforms on both sides of an `m²×n²` matrix.
pub fn transform_blocks<T>(m: &DMatrix<T>) -> Result<TransformedBlocks<T>>
where
    T: Ring + ComplexField,
    T::RealField: Real,
{
    let mm = exact_sqrt(m.nrows()).ok_or(Error::NotPerfectSquare(m.nrows()))?;
    let nn = exact_sqrt(m.ncols()).ok_or(Error::NotPerfectSquare(m.ncols()))?;
    if mm == 0 || nn == 0 {
        return Err(Error::ZeroDimension);
    }
    let left = orthogonal_transform::<T::RealField>(mm)?;
    let right = orthogonal_transform::<T::RealField>(nn)?;
    let lift = |x: T::RealField| T::from_real(x);
    let (vl, ul) = (left.v.map(lift), left.u.map(lift));
    let (vr, ur) = (right.v.map(lift), right.u.map(lift));
    let vm = vl.mul_dense(m)?;
    let um = ul.mul_dense(m)?;
    Ok(TransformedBlocks {
        b11: vr.dense_mul_transpose(&vm)?,
        b12: ur.dense_mul_transpose(&vm)?,
        b21: vr.dense_mul_transpose(&um)?,
        b22: ur.dense_mul_transpose(&um)?,
    })
}

/// Off-diagonal blocks `(Δ₁₂, Δ₂₁)` of a transformed commutator.
pub fn block_antidiagonalize<T>(delta: &DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)>
where
    T: Ring + ComplexField,
    T::RealField: Real,
{
    let b = transform_blocks(delta)?;
    Ok((b.b12, b.b21))
}

/// Diagonal blocks `(Δ̃₁₁, Δ̃₂₂)` of a transformed anti-commutator.
pub fn block_diagonalize_anti<T>(anti: &DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)>
where
    T: Ring + ComplexField,
    T::RealField: Real,
{
    let b = transform_blocks(anti)?;
    Ok((b.b11, b.b22))
}

/// `Γ₀, Γ₁, Γ₂`, each `m(m−1)/2 × n(n+1)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantTriple<T: Ring> {
    pub gamma: [DMatrix<T>; 3],
    pub scaling: Scaling,
}

impl<T: Ring> DeterminantTriple<T> {
    pub fn shape(&self) -> (usize, usize) {
        self.gamma[0].shape()
    }

    pub fn map<U: Ring>(&self, f: impl Fn(T) -> U + Copy) -> DeterminantTriple<U> {
        DeterminantTriple { gamma: self.gamma.each_ref().map(|g| g.map(f)), scaling: self.scaling }
    }
}

impl<T> DeterminantTriple<T>
where
    T: Ring + ComplexField,
    T::RealField: Real,
{
    /// Rescales an integer-scaled triple to orthogonal scaling (and returns
    /// orthogonal input unchanged).
    pub fn to_orthogonal(&self, n: usize) -> Self {
        if self.scaling == Scaling::Orthogonal {
            return self.clone();
        }
        let one = <T::RealField as num_traits::One>::one();
        let r = T::from_real(one / (one + one).sqrt());
        let gamma = self.gamma.each_ref().map(|g| {
            let mut g = g.clone();
            for c in 0..g.ncols() {
                // Diagonal labels lose one factor √2 (from Û), lower labels two.
                let s = if c < n { r } else { r * r };
                g.column_mut(c).iter_mut().for_each(|v| *v *= s);
            }
            g
        });
        DeterminantTriple { gamma, scaling: Scaling::Orthogonal }
    }
}

/// Integer-scaled `Γᵢ = Û·Δᵢ·V̂ᵀ`, assembled entry by entry.
///
/// Row `(p, q)`, `p > q`, and column label `(s, t)`, `s ≥ t`, give
/// `Δ[(p,q),C] − Δ[(q,p),C]` with `Δ[·,C]` summed over both orders of `(s, t)`
/// when `s ≠ t`. Nothing of size `m²×n²` is formed.
pub fn kronecker_determinants<T: Ring>(p: &PencilProblem<T>) -> DeterminantTriple<T> {
    let (m, n) = (p.m(), p.n());
    let rows: Vec<(usize, usize)> = strict_pairs(m).map(|s| s.zero_based()).collect();
    let mut cols: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    cols.extend(strict_pairs(n).map(|s| s.zero_based()));

    let gamma = CYCLIC.map(|(j, k)| {
        let (x, y) = (p.a(j), p.a(k));
        // Δ[(a,b),(c,d)] for Δ = X⊗Y − Y⊗X with vec-ordered row and column pairs.
        let d = |a: usize, b: usize, c: usize, e: usize| x[(b, e)] * y[(a, c)] - y[(b, e)] * x[(a, c)];
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            let (pp, qq) = rows[r];
            let (s, t) = cols[c];
            let col = |a: usize, b: usize| {
                if s == t {
                    d(a, b, s, s)
                } else {
                    d(a, b, s, t) + d(a, b, t, s)
                }
            };
            col(pp, qq) - col(qq, pp)
        })
    });
    DeterminantTriple { gamma, scaling: Scaling::Integer }
}

/// Same triple through the dense commutators: `Û·Δᵢ·V̂ᵀ`.
pub fn kronecker_determinants_via_commutators<T: Ring>(p: &PencilProblem<T>) -> DeterminantTriple<T> {
    let (vh, _) = scaled_compressors::<T>(p.n()).expect("n >= 1");
    let (_, uh) = scaled_compressors::<T>(p.m()).expect("m >= 1");
    let gamma = pencil_commutators(p).map(|d| {
        let ud = uh.mul_dense(&d).expect("shapes");
        vh.dense_mul_transpose(&ud).expect("shapes")
    });
    DeterminantTriple { gamma, scaling: Scaling::Integer }
}

/// Γ in the requested scaling.
pub fn kronecker_determinants_scaled<T>(p: &PencilProblem<T>, scaling: Scaling) -> DeterminantTriple<T>
where
    T: Ring + ComplexField,
    T::RealField: Real,
{
    let g = kronecker_determinants(p);
    match scaling {
        Scaling::Integer => g,
        Scaling::Orthogonal => g.to_orthogonal(p.n()),
    }
}
