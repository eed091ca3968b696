//! Quadratic Hamiltonians, their block matrices and their diagonalization by
//! Bogoliubov transformations.
//!
//! A quadratic Hamiltonian
//!
//! ```text
//!     H = ½ Σ_{jl} (2 h_jl a†_j a_l ± k_jl a†_j a†_l + k̄_jl a_j a_l)
//! ```
//!
//! (upper sign bosonic with `kᵀ = k`, lower sign fermionic with `kᵀ = −k`) is
//! identified with the block matrix
//!
//! ```text
//!     bosonic:   A_H = [[h,  k], [k̄,  h̄]]        fermionic:   A_H = [[h, −k], [k̄, −h̄]]
//! ```
//!
//! Diagonalization finds a Bogoliubov map `V` with `V* A_H V = diag(E, ±E)`,
//! `E ≥ 0` sorted in descending order. Both routes only use Hermitian
//! eigendecompositions:
//!
//! * bosonic: with `A = A_H > 0` and `S = diag(I, −I)`, the Hermitian matrix
//!   `K = A^{1/2} S A^{1/2}` has the same spectrum as `S·A` (pairs `±E`).
//!   Orthonormal eigenvectors `W₊` of the positive part give
//!   `V = A^{−1/2} [W₊E^{1/2}, Σ W̄₊E^{1/2}]` with `Σ` the block swap;
//! * fermionic: eigenvectors of `A_H` for positive eigenvalues, completed by
//!   an orthonormal basis of the kernel adapted to the antiunitary symmetry
//!   `x ↦ Σx̄`, which requires an even kernel dimension.

use std::sync::Arc;

use crate::algebra::{validate_bogoliubov, BogoliubovMap, Statistics};
use crate::error::{Error, Result};
use crate::linalg::{
    self, block2, conj, conj_vec, cr, eigh, hermitian_function, identity, kron, max_abs, op_norm,
    signature, split2, swap_blocks, CMatrix, CVector, C64,
};
use crate::renorm::{classify_ren1, Classification, RenSequence, Tail};

/// A finite quadratic Hamiltonian given by its coefficient matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    pub h: CMatrix,
    pub k: CMatrix,
    pub statistics: Statistics,
}

impl QuadraticHamiltonian {
    /// Checks shapes, finiteness and the symmetries `h* = h`, `kᵀ = ±k`.
    pub fn new(h: CMatrix, k: CMatrix, statistics: Statistics, tol: f64) -> Result<Self> {
        let n = h.nrows();
        if !h.is_square() || k.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "h is {}x{}, k is {}x{}; both must be n x n",
                h.nrows(),
                h.ncols(),
                k.nrows(),
                k.ncols()
            )));
        }
        if !linalg::all_finite(&h) || !linalg::all_finite(&k) {
            return Err(Error::NonFiniteEntry("Hamiltonian coefficients".into()));
        }
        let herm = max_abs(&(&h - h.adjoint()));
        if herm > tol {
            return Err(Error::SymmetryViolation(format!(
                "h deviates from h* by {herm:e}"
            )));
        }
        let sign = statistics.relation_sign();
        // bosonic: k − kᵀ, fermionic: k + kᵀ
        let sym = max_abs(&(&k + k.transpose() * cr(sign)));
        if sym > tol {
            let what = match statistics {
                Statistics::Bosonic => "k deviates from kᵀ",
                Statistics::Fermionic => "k deviates from −kᵀ",
            };
            return Err(Error::SymmetryViolation(format!("{what} by {sym:e}")));
        }
        Ok(Self { h, k, statistics })
    }

    /// Number of modes.
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }
}

/// The block matrix `A_H` (see the module documentation for the signs).
pub fn hamiltonian_to_blocks(ham: &QuadraticHamiltonian) -> CMatrix {
    let (h, k) = (&ham.h, &ham.k);
    match ham.statistics {
        Statistics::Bosonic => block2(h, k, &conj(k), &conj(h)),
        Statistics::Fermionic => block2(h, &-k, &conj(k), &-conj(h)),
    }
}

/// Recovers `(h, k)` from a block matrix, checking the block structure.
pub fn blocks_to_hamiltonian(
    a: &CMatrix,
    statistics: Statistics,
    tol: f64,
) -> Result<QuadraticHamiltonian> {
    check_block_shape(a)?;
    let (h, b, kbar, d) = split2(a);
    let (k, dh, dk) = match statistics {
        Statistics::Bosonic => (b.clone(), &d - conj(&h), &kbar - conj(&b)),
        Statistics::Fermionic => (-&b, &d + conj(&h), &kbar + conj(&b)),
    };
    let dev = max_abs(&dh).max(max_abs(&dk));
    if dev > tol {
        return Err(Error::SymmetryViolation(format!(
            "lower blocks of A_H deviate from the required structure by {dev:e}"
        )));
    }
    QuadraticHamiltonian::new(h, k, statistics, tol)
}

/// Outcome of a diagonalization: `V* A_H V = diag(E, ±E)` up to `residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalizationResult {
    pub map: BogoliubovMap,
    pub energies: Vec<f64>,
    /// Max-entry norm of `V* A_H V − diag(E, ±E)`.
    pub residual: f64,
}

/// Diagonalizes a Hamiltonian of either statistics.
pub fn diagonalize(ham: &QuadraticHamiltonian, tol: f64) -> Result<DiagonalizationResult> {
    let a = hamiltonian_to_blocks(ham);
    match ham.statistics {
        Statistics::Bosonic => diagonalize_bosonic(&a, tol),
        Statistics::Fermionic => diagonalize_fermionic(&a, tol),
    }
}

/// Bosonic diagonalization of `A_H = [[h, k], [k̄, h̄]]`.
///
/// Requires `h > 0` and `‖h^{−1/2} k h^{−1/2}‖ < 1`; both are checked and
/// reported as [`Error::NotPositive`] and [`Error::GramTooLarge`]. The Gram
/// norm must stay below `1 − 10·tol` so that a numerically marginal input is
/// rejected rather than diagonalized with a huge condition number.
pub fn diagonalize_bosonic(a: &CMatrix, tol: f64) -> Result<DiagonalizationResult> {
    check_tol(tol)?;
    let ham = blocks_to_hamiltonian(a, Statistics::Bosonic, tol.max(1e-12 * max_abs(a)))?;
    let n = ham.dim();
    if n == 0 {
        return Ok(empty_result(Statistics::Bosonic));
    }
    let (hvals, _) = eigh(&ham.h);
    let min_eig = hvals[0];
    if min_eig <= tol {
        return Err(Error::NotPositive {
            min_eigenvalue: min_eig,
        });
    }
    let h_inv_sqrt = hermitian_function(&ham.h, |x| 1.0 / x.sqrt());
    let gram = &h_inv_sqrt * &ham.k * &h_inv_sqrt;
    let gnorm = op_norm(&gram);
    if gnorm >= 1.0 - 10.0 * tol {
        return Err(Error::GramTooLarge { norm: gnorm });
    }

    let a = linalg::hermitian_part(a);
    let a_sqrt = hermitian_function(&a, |x| x.max(0.0).sqrt());
    let a_inv_sqrt = hermitian_function(&a, |x| 1.0 / x.sqrt());
    let s = signature(n);
    let kmat = linalg::hermitian_part(&(&a_sqrt * &s * &a_sqrt));
    let (vals, vecs) = eigh(&kmat);
    // Eigenvalues come in ±E pairs; the upper half is the positive part.
    let mut cols: Vec<(f64, CVector)> = Vec::with_capacity(n);
    for j in n..2 * n {
        let e = vals[j];
        if e <= 0.0 {
            return Err(Error::NoConvergence(format!(
                "symplectic spectrum is not split into ±E pairs (eigenvalue {e:e})"
            )));
        }
        let x = &a_inv_sqrt * vecs.column(j) * cr(e.sqrt());
        cols.push((e, x));
    }
    finish(&a, cols, Statistics::Bosonic, tol)
}

/// Fermionic diagonalization of `A_H = [[h, −k], [k̄, −h̄]]`.
pub fn diagonalize_fermionic(a: &CMatrix, tol: f64) -> Result<DiagonalizationResult> {
    check_tol(tol)?;
    let ham = blocks_to_hamiltonian(a, Statistics::Fermionic, tol.max(1e-12 * max_abs(a)))?;
    let n = ham.dim();
    if n == 0 {
        return Ok(empty_result(Statistics::Fermionic));
    }
    let a = linalg::hermitian_part(a);
    let (vals, vecs) = eigh(&a);
    let zero = tol * op_norm(&a).max(1.0);
    let mut cols: Vec<(f64, CVector)> = Vec::with_capacity(n);
    let mut kernel: Vec<CVector> = Vec::new();
    for (j, &e) in vals.iter().enumerate() {
        if e > zero {
            cols.push((e, vecs.column(j).into_owned()));
        } else if e >= -zero {
            kernel.push(vecs.column(j).into_owned());
        }
    }
    if kernel.len() % 2 != 0 {
        return Err(Error::OddKernel {
            dimension: kernel.len(),
        });
    }
    if cols.len() + kernel.len() / 2 != n {
        return Err(Error::NoConvergence(format!(
            "spectrum of A_H is not symmetric: {} positive, {} zero eigenvalues for n = {n}",
            cols.len(),
            kernel.len()
        )));
    }
    for w in kernel_pairs(&kernel, n)? {
        cols.push((0.0, w));
    }
    finish(&a, cols, Statistics::Fermionic, tol)
}

/// Builds `w = (r₁ + i r₂)/√2` from a basis of the kernel that is real
/// with respect to `J x = Σ x̄`, so that `{w, Jw}` are orthonormal.
fn kernel_pairs(kernel: &[CVector], n: usize) -> Result<Vec<CVector>> {
    let sigma = swap_blocks(n);
    let jmap = |x: &CVector| &sigma * conj_vec(x);
    let mut real_basis: Vec<CVector> = Vec::new();
    for v in kernel {
        let jv = jmap(v);
        for cand in [v + &jv, (v - &jv) * C64::i()] {
            if real_basis.len() == kernel.len() {
                break;
            }
            if let Some(r) = linalg::orthonormalize_against(&real_basis, &cand, 1e-8) {
                // Re-symmetrise to remove round-off drift away from J-reality.
                let r = (&r + jmap(&r)) * cr(0.5);
                let r = r.normalize();
                real_basis.push(r);
            }
        }
    }
    if real_basis.len() != kernel.len() {
        return Err(Error::DegenerateBasis(format!(
            "found {} J-real kernel vectors for a kernel of dimension {}",
            real_basis.len(),
            kernel.len()
        )));
    }
    let s = cr(std::f64::consts::FRAC_1_SQRT_2);
    Ok(real_basis
        .chunks(2)
        .map(|p| (&p[0] + &p[1] * C64::i()) * s)
        .collect())
}

/// Sorts, phase-fixes, assembles `V` and measures the residual.
fn finish(
    a: &CMatrix,
    mut cols: Vec<(f64, CVector)>,
    statistics: Statistics,
    tol: f64,
) -> Result<DiagonalizationResult> {
    let n = cols.len();
    cols.sort_by(|x, y| y.0.total_cmp(&x.0));
    let sigma = swap_blocks(n);
    let mut first = CMatrix::zeros(2 * n, n);
    for (j, (_, x)) in cols.iter().enumerate() {
        first.set_column(j, &phase_fixed(x, n));
    }
    let second = &sigma * conj(&first);
    let mut v = CMatrix::zeros(2 * n, 2 * n);
    v.view_mut((0, 0), (2 * n, n)).copy_from(&first);
    v.view_mut((0, n), (2 * n, n)).copy_from(&second);

    let energies: Vec<f64> = cols
        .iter()
        .map(|(e, _)| if e.abs() <= tol { 0.0 } else { *e })
        .collect();
    let mut target = CMatrix::zeros(2 * n, 2 * n);
    for (j, &e) in energies.iter().enumerate() {
        target[(j, j)] = cr(e);
        // bosonic diag(E, E), fermionic diag(E, −E)
        target[(n + j, n + j)] = cr(-statistics.relation_sign() * e);
    }
    let residual = max_abs(&(v.adjoint() * a * &v - target));
    let scale = op_norm(a).max(1.0);
    if residual > tol * scale {
        return Err(Error::NoConvergence(format!(
            "V*A_H V deviates from diag(E, ±E) by {residual:e}"
        )));
    }
    let map = BogoliubovMap::from_block_matrix(&v, statistics, tol * scale)?;
    let report = validate_bogoliubov(&map, tol * scale)?;
    if !report.passed {
        return Err(Error::NoConvergence(format!(
            "assembled map violates the Bogoliubov relations by {:e}",
            report.max_residual
        )));
    }
    Ok(DiagonalizationResult {
        map,
        energies,
        residual,
    })
}

/// Multiplies `x` by a phase making its largest upper-block entry real and
/// positive (or, if the upper block vanishes, its largest lower entry).
fn phase_fixed(x: &CVector, n: usize) -> CVector {
    let pick = |range: std::ops::Range<usize>| {
        range
            .max_by(|&i, &j| x[i].norm().total_cmp(&x[j].norm()))
            .filter(|&i| x[i].norm() > 1e-9 * x.norm())
    };
    let idx = pick(0..n).or_else(|| pick(n..2 * n));
    match idx {
        Some(i) => {
            let z = x[i];
            x * (z.conj() / z.norm())
        }
        None => x.clone(),
    }
}

fn empty_result(statistics: Statistics) -> DiagonalizationResult {
    DiagonalizationResult {
        map: BogoliubovMap::identity(0, statistics),
        energies: Vec::new(),
        residual: 0.0,
    }
}

fn check_block_shape(a: &CMatrix) -> Result<()> {
    if !a.is_square() || a.nrows() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "A_H must be 2n x 2n, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !linalg::all_finite(a) {
        return Err(Error::NonFiniteEntry("A_H".into()));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::BadParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

/// The normal-ordering constant `c = ½ Σ_j (E_jj − h_jj)` as a classified
/// formal sum.
#[derive(Clone)]
pub struct NormalOrderingConstant {
    pub terms: RenSequence,
    pub classification: Classification,
}

/// Builds the constant from per-index rules.
///
/// `h_diag(j)` and `energy(j)` return the summed diagonal entries of `h` and
/// `E` belonging to index `j` (an index may hold several modes, e.g. a
/// momentum shell). `tail` declares the asymptotics of the terms
/// `½(energy(j) − h_diag(j))`; an [`Tail::Unknown`] tail classifies as
/// indeterminate.
pub fn normal_ordering_constant(
    h_diag: impl Fn(u64) -> f64 + Send + Sync + 'static,
    energy: impl Fn(u64) -> f64 + Send + Sync + 'static,
    start: u64,
    tail: Tail,
    horizon: u64,
) -> NormalOrderingConstant {
    let h_diag = Arc::new(h_diag);
    let energy = Arc::new(energy);
    let terms = RenSequence::infinite_real(start, tail, move |j| 0.5 * (energy(j) - h_diag(j)))
        .with_horizon(horizon);
    let classification = classify_ren1(&terms);
    NormalOrderingConstant {
        terms,
        classification,
    }
}

/// The constant for finitely many modes: exact terms `½(E_j − h_jj)`.
pub fn normal_ordering_constant_finite(
    h: &CMatrix,
    energies: &[f64],
) -> Result<NormalOrderingConstant> {
    if !h.is_square() || h.nrows() != energies.len() {
        return Err(Error::DimensionMismatch(format!(
            "h is {}x{} but {} energies were given",
            h.nrows(),
            h.ncols(),
            energies.len()
        )));
    }
    let terms = RenSequence::finite_real(
        energies
            .iter()
            .enumerate()
            .map(|(j, e)| 0.5 * (e - h[(j, j)].re))
            .collect(),
    );
    let classification = classify_ren1(&terms);
    Ok(NormalOrderingConstant {
        terms,
        classification,
    })
}

/// Ladder operators `a_1 … a_n` on the truncated multi-mode Fock space.
///
/// The basis index is `Σ_j n_j d^{j−1}` with `d = cutoff + 1` (mode 1 least
/// significant), i.e. mode `j` is the `j`-th Kronecker factor from the right.
/// Fermionic operators carry a Jordan–Wigner string `σ_z` on all higher
/// modes, matching [`crate::fock::fermionic_pair_operators`].
pub fn multimode_operators(
    statistics: Statistics,
    modes: usize,
    cutoff: usize,
) -> Result<Vec<CMatrix>> {
    let sp = crate::fock::mode_operators(statistics, cutoff)?;
    let d = sp.cutoff + 1;
    if d.checked_pow(modes as u32).is_none_or(|t| t > 4096) {
        return Err(Error::BadParameter(format!(
            "{modes} modes with {d} levels exceed the truncated-space limit of 4096 states"
        )));
    }
    let mut string = identity(d);
    if statistics == Statistics::Fermionic {
        string[(1, 1)] = cr(-1.0);
    }
    let ops = (1..=modes)
        .map(|j| {
            let mut op = identity(1);
            for l in (1..=modes).rev() {
                let factor = if l == j {
                    &sp.a
                } else if l > j {
                    &string
                } else {
                    &identity(d)
                };
                op = kron(&op, factor);
            }
            op
        })
        .collect();
    Ok(ops)
}

/// The Hamiltonian `H` as a matrix on the truncated Fock space.
pub fn second_quantize(ham: &QuadraticHamiltonian, ops: &[CMatrix]) -> CMatrix {
    let dim = ops.first().map_or(1, |a| a.nrows());
    let pair_sign = -ham.statistics.relation_sign(); // + bosonic, − fermionic
    let mut hmat = CMatrix::zeros(dim, dim);
    for (j, aj) in ops.iter().enumerate() {
        let ajd = aj.adjoint();
        for (l, al) in ops.iter().enumerate() {
            let ald = al.adjoint();
            let (hjl, kjl) = (ham.h[(j, l)], ham.k[(j, l)]);
            if hjl != C64::new(0.0, 0.0) {
                hmat += &ajd * al * hjl;
            }
            if kjl != C64::new(0.0, 0.0) {
                hmat += (&ajd * &ald * (kjl * pair_sign) + aj * al * kjl.conj()) * cr(0.5);
            }
        }
    }
    hmat
}

/// `A†(F) = Σ_j (f₁ⱼ a†_j + f₂ⱼ a_j)` on the truncated Fock space.
pub fn generator_operator(f: &CVector, ops: &[CMatrix]) -> CMatrix {
    let n = ops.len();
    let dim = ops.first().map_or(1, |a| a.nrows());
    let mut out = CMatrix::zeros(dim, dim);
    for (j, aj) in ops.iter().enumerate() {
        out += aj.adjoint() * f[j] + aj * f[n + j];
    }
    out
}

/// Checks the Heisenberg identity `A†(i M F) = i[H, A†(F)]` for the canonical
/// generator `F = e_{basis_index}` of `ℂⁿ ⊕ ℂⁿ`, with `M = A_H S` (bosonic)
/// or `M = A_H` (fermionic).
///
/// Both sides are compared as operators applied to the Fock basis states of
/// total occupation `≤ sector_bound`; for bosons the bound must leave three
/// levels of headroom below the cutoff so the truncation does not enter.
/// Returns the max-entry residual.
pub fn heisenberg_identity_check(
    ham: &QuadraticHamiltonian,
    basis_index: usize,
    cutoff: usize,
    sector_bound: usize,
) -> Result<f64> {
    let n = ham.dim();
    if basis_index >= 2 * n {
        return Err(Error::BadParameter(format!(
            "basis index {basis_index} out of range for {n} modes"
        )));
    }
    let bound = match ham.statistics {
        Statistics::Bosonic => {
            if cutoff < sector_bound + 3 {
                return Err(Error::BadCutoff(format!(
                    "cutoff {cutoff} must exceed the sector bound {sector_bound} by at least 3"
                )));
            }
            sector_bound
        }
        Statistics::Fermionic => n,
    };
    let ops = multimode_operators(ham.statistics, n, cutoff)?;
    let d = if ham.statistics == Statistics::Bosonic {
        cutoff + 1
    } else {
        2
    };
    let hmat = second_quantize(ham, &ops);
    let mut f = CVector::zeros(2 * n);
    f[basis_index] = cr(1.0);
    let a_h = hamiltonian_to_blocks(ham);
    let m = match ham.statistics {
        Statistics::Bosonic => &a_h * signature(n),
        Statistics::Fermionic => a_h,
    };
    let lhs = generator_operator(&(&m * &f * C64::i()), &ops);
    let af = generator_operator(&f, &ops);
    let rhs = (&hmat * &af - &af * &hmat) * C64::i();
    let diff = lhs - rhs;
    let dim = diff.nrows();
    let mut worst = 0.0_f64;
    for idx in 0..dim {
        let (mut rest, mut occ) = (idx, 0);
        for _ in 0..n {
            occ += rest % d;
            rest /= d;
        }
        if occ <= bound {
            worst = worst.max(linalg::max_abs_vec(&diff.column(idx).into_owned()));
        }
    }
    Ok(worst)
}
