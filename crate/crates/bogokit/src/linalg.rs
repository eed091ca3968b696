//! Dense complex linear-algebra helpers built on `nalgebra`.
//!
//! Everything in the crate works with [`CMatrix`] (a dense `DMatrix` of
//! `Complex64`). The helpers here cover the few spectral routines needed on
//! top of `nalgebra`: sorted Hermitian eigendecompositions, functions of
//! Hermitian matrices (square roots, unitary exponentials) and block
//! assembly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;
/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = DVector<C64>;

/// Shorthand for a complex number.
#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Shorthand for a real number promoted to a complex one.
#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest absolute value of any entry (0 for an empty matrix).
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest absolute value of any entry of a vector.
pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `true` when every entry has finite real and imaginary parts.
pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Entrywise complex conjugate.
pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

/// Entrywise complex conjugate of a vector.
pub fn conj_vec(v: &CVector) -> CVector {
    v.map(|z| z.conj())
}

/// Hermitian part `(m + m*)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * cr(0.5)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// ascending order and eigenvectors (columns) permuted accordingly.
///
/// The input is symmetrized first so that round-off asymmetry does not leak
/// into the result.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| cr(f(x))),
    ));
    &vecs * d * vecs.adjoint()
}

/// `exp(-i·t·h)` for Hermitian `h`, computed through the eigendecomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| C64::from_polar(1.0, -t * x)),
    ));
    &vecs * d * vecs.adjoint()
}

/// `exp(g)` for skew-Hermitian `g` (so that `i·g` is Hermitian).
pub fn expm_skew_hermitian(g: &CMatrix) -> CMatrix {
    // g = -i·h with h = i·g Hermitian, hence exp(g) = exp(-i·h).
    let h = g * c(0.0, 1.0);
    expm_hermitian(&h, 1.0)
}

/// Spectral (operator 2-) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let (vals, _) = eigh(&(m.adjoint() * m));
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Identity matrix of size `n`.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Assembles `[[a, b], [c, d]]` from four equally sized square blocks.
pub fn block2(a: &CMatrix, b: &CMatrix, c_: &CMatrix, d: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c_);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Splits a `2n × 2n` matrix into its four `n × n` blocks
/// `(top-left, top-right, bottom-left, bottom-right)`.
pub fn split2(m: &CMatrix) -> (CMatrix, CMatrix, CMatrix, CMatrix) {
    let n = m.nrows() / 2;
    (
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    )
}

/// The symplectic signature `S = diag(I, -I)` of size `2n`.
pub fn signature(n: usize) -> CMatrix {
    let mut s = CMatrix::identity(2 * n, 2 * n);
    for i in n..2 * n {
        s[(i, i)] = cr(-1.0);
    }
    s
}

/// The block swap `Σ = [[0, I], [I, 0]]` of size `2n`.
pub fn swap_blocks(n: usize) -> CMatrix {
    let z = CMatrix::zeros(n, n);
    let i = identity(n);
    block2(&z, &i, &i, &z)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Groups sorted values into clusters whose consecutive gaps are `<= gap`.
/// Returns half-open index ranges.
pub fn cluster_sorted(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Orthogonalizes `v` against the orthonormal columns collected so far and
/// returns the normalized remainder if its norm exceeds `threshold`.
pub fn orthonormalize_against(basis: &[CVector], v: &CVector, threshold: f64) -> Option<CVector> {
    let mut w = v.clone();
    // Two passes of classical Gram–Schmidt are as stable as modified G–S.
    for _ in 0..2 {
        for b in basis {
            let proj = b.dotc(&w);
            w -= b * proj;
        }
    }
    let nrm = w.norm();
    (nrm > threshold).then(|| w / cr(nrm))
}

/// Converts a real matrix to a complex one.
pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(cr)
}
