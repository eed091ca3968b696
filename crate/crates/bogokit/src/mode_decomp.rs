//! The antilinear operator `C = u*vJ` and the decomposition of a
//! transformation into independent modes.
//!
//! `C` is stored as the matrix `M = u*v`, so that `C x = M x̄`. For bosons
//! `M` is symmetric and `C` is an antilinear self-adjoint operator; for
//! fermions `M` is antisymmetric. `C` commutes with `u*u`, whose eigenspaces
//! therefore organize the decomposition:
//!
//! * Bosons: on each eigenspace of `u*u` (eigenvalue `μ²`) the map
//!   `C/λ` with `λ = μν` is an antiunitary involution. Its fixed vectors
//!   `f_j` give `u f_j = μ_j g_j` and `v f̄_j = ν_j g_j` with `μ_j² − ν_j² = 1`.
//! * Fermions: eigenvalue `1` of `u*u` gives invariant modes, eigenvalue `0`
//!   particle–hole modes, and eigenvalues `α² ∈ (0, 1)` Cooper pairs. On a
//!   Cooper-pair eigenspace `C/λ` (with `λ = αβ`) squares to `−1`, so vectors
//!   come in pairs `(f_e, f_o = C f_e/λ)` with
//!   `u f_e = α g_e`, `u f_o = α g_o`, `v f̄_e = β g_o`, `v f̄_o = −β g_e`.

use serde::{Deserialize, Serialize};

use crate::algebra::{validate_bogoliubov, BogoliubovMap, Statistics};
use crate::error::{Error, Result};
use crate::linalg::{
    self, cluster_sorted, conj_vec, cr, eigh, orthonormalize_against, CMatrix, CVector, C64,
};

/// One bosonic mode: `u f = μ g`, `v f̄ = ν g`.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonicMode {
    pub index: usize,
    pub mu: f64,
    pub nu: f64,
    /// Input mode vector.
    pub f: CVector,
    /// Output mode vector.
    pub g: CVector,
}

/// Kind of a fermionic mode or mode pair.
#[derive(Debug, Clone, PartialEq)]
pub enum FermionicModeKind {
    /// `u f = g`, `v f̄ = 0`.
    Invariant { f: CVector, g: CVector },
    /// `u f = 0`, `v f̄ = g`.
    ParticleHole { f: CVector, g: CVector },
    /// `u f_e = α g_e`, `u f_o = α g_o`, `v f̄_e = β g_o`, `v f̄_o = −β g_e`.
    CooperPair {
        alpha: f64,
        beta: f64,
        f_even: CVector,
        f_odd: CVector,
        g_even: CVector,
        g_odd: CVector,
    },
}

impl FermionicModeKind {
    /// `"Invariant"`, `"ParticleHole"` or `"CooperPair"`.
    pub fn name(&self) -> &'static str {
        match self {
            FermionicModeKind::Invariant { .. } => "Invariant",
            FermionicModeKind::ParticleHole { .. } => "ParticleHole",
            FermionicModeKind::CooperPair { .. } => "CooperPair",
        }
    }

    /// Parameter-only view of the kind.
    pub fn params(&self) -> FermionicParams {
        match self {
            FermionicModeKind::Invariant { .. } => FermionicParams::Invariant,
            FermionicModeKind::ParticleHole { .. } => FermionicParams::ParticleHole,
            FermionicModeKind::CooperPair { alpha, beta, .. } => FermionicParams::CooperPair {
                alpha: *alpha,
                beta: *beta,
            },
        }
    }
}

/// Fermionic mode kind without its vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FermionicParams {
    Invariant,
    ParticleHole,
    CooperPair { alpha: f64, beta: f64 },
}

impl FermionicParams {
    /// Cooper pair with the given `β`, `α = √(1 − β²)`.
    pub fn cooper_from_beta(beta: f64) -> Self {
        FermionicParams::CooperPair {
            alpha: (1.0 - beta * beta).max(0.0).sqrt(),
            beta,
        }
    }
}

/// One entry of a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Bosonic(BosonicMode),
    Fermionic(FermionicModeKind),
}

/// Decomposition of a transformation into modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub statistics: Statistics,
    pub modes: Vec<Mode>,
    /// Largest entrywise deviation of the reconstructed `(u, v)`.
    pub residual: f64,
}

impl ModeDecomposition {
    /// Reassembles `(u, v)` from the modes.
    pub fn reconstruct(&self, n: usize) -> (CMatrix, CMatrix) {
        let mut u = CMatrix::zeros(n, n);
        let mut v = CMatrix::zeros(n, n);
        let outer = |g: &CVector, f: &CVector| g * f.adjoint();
        let outer_t = |g: &CVector, f: &CVector| g * f.transpose();
        for m in &self.modes {
            match m {
                Mode::Bosonic(b) => {
                    u += outer(&b.g, &b.f) * cr(b.mu);
                    v += outer_t(&b.g, &b.f) * cr(b.nu);
                }
                Mode::Fermionic(FermionicModeKind::Invariant { f, g }) => u += outer(g, f),
                Mode::Fermionic(FermionicModeKind::ParticleHole { f, g }) => v += outer_t(g, f),
                Mode::Fermionic(FermionicModeKind::CooperPair {
                    alpha,
                    beta,
                    f_even,
                    f_odd,
                    g_even,
                    g_odd,
                }) => {
                    u += (outer(g_even, f_even) + outer(g_odd, f_odd)) * cr(*alpha);
                    v += (outer_t(g_odd, f_even) - outer_t(g_even, f_odd)) * cr(*beta);
                }
            }
        }
        (u, v)
    }

    /// Bosonic modes, if any.
    pub fn bosonic_modes(&self) -> impl Iterator<Item = &BosonicMode> {
        self.modes.iter().filter_map(|m| match m {
            Mode::Bosonic(b) => Some(b),
            _ => None,
        })
    }

    /// Fermionic mode kinds, if any.
    pub fn fermionic_modes(&self) -> impl Iterator<Item = &FermionicModeKind> {
        self.modes.iter().filter_map(|m| match m {
            Mode::Fermionic(k) => Some(k),
            _ => None,
        })
    }
}

fn require_valid(map: &BogoliubovMap, tol: f64) -> Result<()> {
    let report = validate_bogoliubov(map, tol)?;
    if !report.passed {
        return Err(Error::NotValidated(report.max_residual));
    }
    Ok(())
}

/// The matrix `M = u*v` of the antilinear operator `C = u*vJ`
/// (`C x = M x̄`). The map must satisfy the relations within `tol`.
pub fn build_c(map: &BogoliubovMap, tol: f64) -> Result<CMatrix> {
    require_valid(map, tol)?;
    Ok(map.u.adjoint() * &map.v)
}

/// Largest deviation of `M` from symmetry (bosons) or antisymmetry
/// (fermions).
pub fn c_asymmetry(m: &CMatrix, statistics: Statistics) -> f64 {
    match statistics {
        Statistics::Bosonic => linalg::max_abs(&(m - m.transpose())),
        Statistics::Fermionic => linalg::max_abs(&(m + m.transpose())),
    }
}

/// Threshold below which an eigenvalue of `|C|` counts as zero.
fn zero_threshold(tol: f64, m: &CMatrix) -> f64 {
    tol.max(1e-12 * linalg::op_norm(m))
}

/// Threshold for grouping eigenvalues of `u*u` into degenerate clusters.
fn cluster_gap(tol: f64, uu: &CMatrix) -> f64 {
    tol.max(1e-12 * linalg::op_norm(uu))
}

/// `|C|` on an eigenvector `f` of `u*u`, read off as `‖M* f‖` (equal to
/// `√(μ²(μ² − 1))` for bosons and `√(α²(1 − α²))` for fermions). Computing it
/// from `M` rather than from the eigenvalue keeps round-off at `ε‖M‖`
/// instead of `√ε` near `|C| = 0`.
fn mode_lambdas(m: &CMatrix, vecs: &CMatrix) -> Vec<f64> {
    let ma = m.adjoint();
    (0..vecs.ncols())
        .map(|i| (&ma * vecs.column(i)).norm())
        .collect()
}

/// Eigenspaces of `u*u` (ascending eigenvalues `vals`), split wherever
/// either the eigenvalue or `|C|` jumps by more than its gap. Near
/// `|C| = 0` distinct modes can have eigenvalues of `u*u` closer than any
/// usable gap while `|C|` still separates them.
fn mode_clusters(
    vals: &[f64],
    lambdas: &[f64],
    val_gap: f64,
    lambda_gap: f64,
) -> Vec<(std::ops::Range<usize>, f64)> {
    let mut out = Vec::new();
    for range in cluster_sorted(vals, val_gap) {
        let mut start = range.start;
        for i in range.start + 1..=range.end {
            if i == range.end || (lambdas[i] - lambdas[i - 1]).abs() > lambda_gap {
                let sq = (start..i).map(|j| lambdas[j] * lambdas[j]).sum::<f64>()
                    / (i - start) as f64;
                out.push((start..i, sq.sqrt()));
                start = i;
            }
        }
    }
    out
}

/// Antilinear application `x ↦ M x̄ / λ`.
fn apply_j(m: &CMatrix, x: &CVector, lambda: f64) -> CVector {
    m * conj_vec(x) / cr(lambda)
}

/// Mode decomposition of a bosonic transformation. Modes are sorted by
/// descending `ν`; ties keep eigenvector order.
pub fn decompose_bosonic(map: &BogoliubovMap, tol: f64) -> Result<ModeDecomposition> {
    if map.statistics != Statistics::Bosonic {
        return Err(Error::NotBosonic);
    }
    let m = build_c(map, tol)?;
    let n = map.dim();
    let uu = map.u.adjoint() * &map.u;
    let (vals, vecs) = eigh(&uu);
    let zero = zero_threshold(tol, &m);
    let mut fs: Vec<CVector> = Vec::with_capacity(n);
    let lambdas = mode_lambdas(&m, &vecs);
    for (range, lambda) in mode_clusters(&vals, &lambdas, cluster_gap(tol, &uu), zero) {
        let mu2 = range.clone().map(|i| vals[i]).sum::<f64>() / range.len() as f64;
        let cols: Vec<CVector> = range.clone().map(|i| vecs.column(i).into_owned()).collect();
        if lambda <= zero {
            fs.extend(cols);
            continue;
        }
        // Fixed vectors of the antiunitary involution C/λ on this eigenspace.
        let mut fixed: Vec<CVector> = Vec::new();
        for p in &cols {
            for cand in [p.clone(), p * C64::i()] {
                let y = &cand + apply_j(&m, &cand, lambda);
                let mut local = fs.clone();
                local.extend(fixed.iter().cloned());
                if let Some(w) = orthonormalize_against(&local, &y, 1e-6) {
                    fixed.push(w);
                }
                if fixed.len() == range.len() {
                    break;
                }
            }
            if fixed.len() == range.len() {
                break;
            }
        }
        if fixed.len() != range.len() {
            return Err(Error::DegenerateBasis(format!(
                "found {} of {} fixed vectors of C/λ for μ² = {mu2}",
                fixed.len(),
                range.len()
            )));
        }
        fs.extend(fixed);
    }
    let mut modes: Vec<BosonicMode> = fs
        .into_iter()
        .map(|f| {
            let uf = &map.u * &f;
            let mu = uf.norm();
            let g = uf / cr(mu);
            let vf = &map.v * conj_vec(&f);
            let nu = g.dotc(&vf).re;
            BosonicMode {
                index: 0,
                mu,
                nu,
                f,
                g,
            }
        })
        .collect();
    modes.sort_by(|a, b| b.nu.total_cmp(&a.nu));
    for (i, md) in modes.iter_mut().enumerate() {
        md.index = i;
    }
    let mut dec = ModeDecomposition {
        statistics: Statistics::Bosonic,
        modes: modes.into_iter().map(Mode::Bosonic).collect(),
        residual: 0.0,
    };
    dec.residual = reconstruction_residual(&dec, map);
    Ok(dec)
}

/// Mode decomposition of a fermionic transformation. Modes are ordered:
/// particle–hole modes, Cooper pairs by descending `β`, invariant modes.
pub fn decompose_fermionic(map: &BogoliubovMap, tol: f64) -> Result<ModeDecomposition> {
    if map.statistics != Statistics::Fermionic {
        return Err(Error::NotFermionic);
    }
    let m = build_c(map, tol)?;
    let uu = map.u.adjoint() * &map.u;
    let (vals, vecs) = eigh(&uu);
    let zero = zero_threshold(tol, &m);
    let mut particle_hole = Vec::new();
    let mut pairs = Vec::new();
    let mut invariant = Vec::new();
    let mut basis: Vec<CVector> = Vec::new();
    let lambdas = mode_lambdas(&m, &vecs);
    for (range, lambda) in mode_clusters(&vals, &lambdas, cluster_gap(tol, &uu), zero) {
        let a2 = (range.clone().map(|i| vals[i]).sum::<f64>() / range.len() as f64).clamp(0.0, 1.0);
        let cols: Vec<CVector> = range.clone().map(|i| vecs.column(i).into_owned()).collect();
        if lambda <= zero {
            for f in cols {
                if a2 > 0.5 {
                    let uf = &map.u * &f;
                    let g = &uf / cr(uf.norm());
                    invariant.push(FermionicModeKind::Invariant { f: f.clone(), g });
                } else {
                    let vf = &map.v * conj_vec(&f);
                    let g = &vf / cr(vf.norm());
                    particle_hole.push(FermionicModeKind::ParticleHole { f: f.clone(), g });
                }
                basis.push(f);
            }
            continue;
        }
        if range.len() % 2 != 0 {
            return Err(Error::UnpairedEigenvector {
                eigenvalue: lambda,
                dimension: range.len(),
            });
        }
        let start = basis.len();
        for p in &cols {
            if basis.len() - start == range.len() {
                break;
            }
            let Some(fe) = orthonormalize_against(&basis, p, 1e-6) else {
                continue;
            };
            let fo_raw = apply_j(&m, &fe, lambda);
            let mut with_even = basis.clone();
            with_even.push(fe.clone());
            let Some(fo) = orthonormalize_against(&with_even, &fo_raw, 1e-6) else {
                return Err(Error::DegenerateBasis(format!(
                    "C/λ maps a vector onto its own span (λ = {lambda})"
                )));
            };
            let ue = &map.u * &fe;
            let alpha = ue.norm();
            let g_even = ue / cr(alpha);
            let g_odd = (&map.u * &fo) / cr(alpha);
            let beta = g_odd.dotc(&(&map.v * conj_vec(&fe))).re;
            basis.push(fe.clone());
            basis.push(fo.clone());
            pairs.push(FermionicModeKind::CooperPair {
                alpha,
                beta,
                f_even: fe,
                f_odd: fo,
                g_even,
                g_odd,
            });
        }
        if basis.len() - start != range.len() {
            return Err(Error::DegenerateBasis(format!(
                "paired {} of {} vectors for λ = {lambda}",
                basis.len() - start,
                range.len()
            )));
        }
    }
    pairs.sort_by(|a, b| match (a, b) {
        (
            FermionicModeKind::CooperPair { beta: x, .. },
            FermionicModeKind::CooperPair { beta: y, .. },
        ) => y.total_cmp(x),
        _ => std::cmp::Ordering::Equal,
    });
    let modes = particle_hole
        .into_iter()
        .chain(pairs)
        .chain(invariant)
        .map(Mode::Fermionic)
        .collect();
    let mut dec = ModeDecomposition {
        statistics: Statistics::Fermionic,
        modes,
        residual: 0.0,
    };
    dec.residual = reconstruction_residual(&dec, map);
    Ok(dec)
}

/// Dispatches on the statistics of the map.
pub fn decompose(map: &BogoliubovMap, tol: f64) -> Result<ModeDecomposition> {
    match map.statistics {
        Statistics::Bosonic => decompose_bosonic(map, tol),
        Statistics::Fermionic => decompose_fermionic(map, tol),
    }
}

fn reconstruction_residual(dec: &ModeDecomposition, map: &BogoliubovMap) -> f64 {
    let (u, v) = dec.reconstruct(map.dim());
    linalg::max_abs(&(u - &map.u)).max(linalg::max_abs(&(v - &map.v)))
}
