//! Truncated per-mode Fock spaces and numerical checks of implementers.
//!
//! Bosonic modes are truncated at a maximal occupation (`cutoff`); fermionic
//! modes are exact two-dimensional spaces. Two fermionic modes live on the
//! four-dimensional space with basis index `n₁ + 2·n₂`; operators are built
//! as `mode₂ ⊗ mode₁` with the Jordan–Wigner string on the second factor:
//!
//! ```text
//!     a₂ = a ⊗ I,     a₁ = σ_z ⊗ a,     σ_z = diag(1, −1).
//! ```
//!
//! With this convention `a†₂a†₁Ω = +|1,1⟩`, so the Cooper-pair implementer
//! `exp(−ξ(a†₂a†₁ − a₁a₂))` maps the vacuum to `(cos ξ, 0, 0, −sin ξ)`.

use serde::{Deserialize, Serialize};

use crate::algebra::Statistics;
use crate::error::{Error, Result};
use crate::linalg::{self, cr, expm_skew_hermitian, identity, kron, CMatrix, CVector};
use crate::mode_decomp::FermionicParams;
use crate::renorm::KahanSum;

/// Ladder operators on one truncated mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedModeSpace {
    pub statistics: Statistics,
    /// Maximal occupation (always 1 for fermions).
    pub cutoff: usize,
    pub a: CMatrix,
    pub adag: CMatrix,
    pub n: CMatrix,
}

/// Amplitudes over an occupation basis of one or two modes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    /// Maximal occupation per mode.
    pub cutoff: usize,
    /// Number of modes (1 or 2); two-mode index is `n₁ + (cutoff+1)·n₂`.
    pub modes: usize,
    pub amplitudes: CVector,
}

impl StateVector {
    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// Per-sector residuals of a conjugation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugationReport {
    /// Entry `s`: largest `‖(U a# U* − b#)ψ‖` over basis states `ψ` with
    /// total occupation `s`.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub passed: bool,
}

/// What to implement: a bosonic squeeze `ξ` or a fermionic mode kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModeTarget {
    Bosonic { xi: f64 },
    Fermionic(FermionicParams),
}

/// Ladder matrices `a|n⟩ = √n|n−1⟩`, `a†|n⟩ = √(n+1)|n+1⟩` (truncated).
pub fn mode_operators(statistics: Statistics, cutoff: usize) -> Result<TruncatedModeSpace> {
    let cutoff = match statistics {
        Statistics::Fermionic => 1,
        Statistics::Bosonic if cutoff >= 1 => cutoff,
        Statistics::Bosonic => {
            return Err(Error::BadCutoff("bosonic cutoff must be at least 1".into()))
        }
    };
    let d = cutoff + 1;
    let mut a = CMatrix::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = cr((k as f64).sqrt());
    }
    let adag = a.adjoint();
    let n = &adag * &a;
    Ok(TruncatedModeSpace {
        statistics,
        cutoff,
        a,
        adag,
        n,
    })
}

/// Annihilators `(a₁, a₂)` on the four-dimensional two-mode fermionic space.
pub fn fermionic_pair_operators() -> (CMatrix, CMatrix) {
    let a = mode_operators(Statistics::Fermionic, 1)
        .expect("fermionic space")
        .a;
    let mut sz = identity(2);
    sz[(1, 1)] = cr(-1.0);
    let a1 = kron(&sz, &a);
    let a2 = kron(&a, &identity(2));
    (a1, a2)
}

/// `exp(−(ξ/2)(a†² − a²))` on the truncated bosonic space.
pub fn build_implementer_bosonic(xi: f64, cutoff: usize) -> Result<CMatrix> {
    if !xi.is_finite() {
        return Err(Error::BadParameter(format!("xi must be finite, got {xi}")));
    }
    let sp = mode_operators(Statistics::Bosonic, cutoff)?;
    let gen = (&sp.adag * &sp.adag - &sp.a * &sp.a) * cr(-0.5 * xi);
    Ok(expm_skew_hermitian(&gen))
}

/// Angle `ξ ∈ [0, π/2]` with `sin ξ = β`, `cos ξ = α`.
pub fn cooper_angle(alpha: f64, beta: f64) -> f64 {
    beta.atan2(alpha)
}

/// Implementer of one fermionic mode kind: identity (2×2) for invariant
/// modes, `a† + a` (2×2) for particle–hole modes and the 4×4
/// `exp(−ξ(a†₂a†₁ − a₁a₂))` with `sin ξ = β` for Cooper pairs.
pub fn build_implementer_fermionic(kind: FermionicParams) -> Result<CMatrix> {
    match kind {
        FermionicParams::Invariant => Ok(identity(2)),
        FermionicParams::ParticleHole => {
            let sp = mode_operators(Statistics::Fermionic, 1)?;
            Ok(&sp.adag + &sp.a)
        }
        FermionicParams::CooperPair { alpha, beta } => {
            check_cooper(alpha, beta)?;
            let xi = cooper_angle(alpha, beta);
            let (a1, a2) = fermionic_pair_operators();
            let gen = (a2.adjoint() * a1.adjoint() - &a1 * &a2) * cr(-xi);
            Ok(expm_skew_hermitian(&gen))
        }
    }
}

fn check_cooper(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 0.0 && beta >= 0.0 && (alpha * alpha + beta * beta - 1.0).abs() <= 1e-8) {
        return Err(Error::BadParameter(format!(
            "Cooper pair needs α, β ≥ 0 with α² + β² = 1, got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

/// Total occupation of each basis index.
fn sectors(dim_per_mode: usize, modes: usize) -> Vec<usize> {
    match modes {
        1 => (0..dim_per_mode).collect(),
        _ => (0..dim_per_mode * dim_per_mode)
            .map(|i| i % dim_per_mode + i / dim_per_mode)
            .collect(),
    }
}

/// Per-sector maximum of `‖(lhs − rhs) e_i‖` over basis columns.
fn sector_residuals(
    pairs: &[(CMatrix, CMatrix)],
    occupation: &[usize],
    sector_bound: usize,
) -> Vec<f64> {
    let mut res = vec![0.0_f64; sector_bound + 1];
    for (lhs, rhs) in pairs {
        let diff = lhs - rhs;
        for (i, &s) in occupation.iter().enumerate() {
            if s <= sector_bound {
                res[s] = res[s].max(diff.column(i).norm());
            }
        }
    }
    res
}

/// Checks `U a# U* = b#` on basis states up to `sector_bound`.
///
/// * Bosonic `ξ`: `U a U* = cosh ξ·a + sinh ξ·a†` and its adjoint
///   (truncation-limited).
/// * Cooper pair: `U a₂ U* = cos ξ·a₂ + sin ξ·a†₁`,
///   `U a₁ U* = cos ξ·a₁ − sin ξ·a†₂` and their adjoints (exact).
/// * Particle–hole: `U a U* = a†`; invariant: `U a U* = a`.
pub fn verify_conjugation(
    target: ModeTarget,
    cutoff: usize,
    sector_bound: usize,
    tol: f64,
) -> Result<ConjugationReport> {
    let (pairs, occupation) = match target {
        ModeTarget::Bosonic { xi } => {
            if sector_bound > cutoff {
                return Err(Error::BadCutoff(format!(
                    "sector bound {sector_bound} exceeds cutoff {cutoff}"
                )));
            }
            let u = build_implementer_bosonic(xi, cutoff)?;
            let sp = mode_operators(Statistics::Bosonic, cutoff)?;
            let b = &sp.a * cr(xi.cosh()) + &sp.adag * cr(xi.sinh());
            let lhs = &u * &sp.a * u.adjoint();
            let lhs_dag = &u * &sp.adag * u.adjoint();
            (
                vec![(lhs, b.clone()), (lhs_dag, b.adjoint())],
                sectors(cutoff + 1, 1),
            )
        }
        ModeTarget::Fermionic(kind) => {
            let u = build_implementer_fermionic(kind)?;
            match kind {
                FermionicParams::CooperPair { alpha, beta } => {
                    let xi = cooper_angle(alpha, beta);
                    let (a1, a2) = fermionic_pair_operators();
                    let (s, c) = xi.sin_cos();
                    let b2 = &a2 * cr(c) + a1.adjoint() * cr(s);
                    let b1 = &a1 * cr(c) - a2.adjoint() * cr(s);
                    let conj = |x: &CMatrix| &u * x * u.adjoint();
                    (
                        vec![
                            (conj(&a2), b2.clone()),
                            (conj(&a1), b1.clone()),
                            (conj(&a1.adjoint()), b1.adjoint()),
                            (conj(&a2.adjoint()), b2.adjoint()),
                        ],
                        sectors(2, 2),
                    )
                }
                FermionicParams::ParticleHole | FermionicParams::Invariant => {
                    let sp = mode_operators(Statistics::Fermionic, 1)?;
                    let b = if matches!(kind, FermionicParams::ParticleHole) {
                        sp.adag.clone()
                    } else {
                        sp.a.clone()
                    };
                    let lhs = &u * &sp.a * u.adjoint();
                    let lhs_dag = &u * &sp.adag * u.adjoint();
                    (
                        vec![(lhs, b.clone()), (lhs_dag, b.adjoint())],
                        sectors(2, 1),
                    )
                }
            }
        }
    };
    let bound = sector_bound.min(*occupation.iter().max().unwrap_or(&0));
    let residuals = sector_residuals(&pairs, &occupation, bound);
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ConjugationReport {
        residuals,
        max_residual,
        passed: max_residual <= tol,
    })
}

/// Normalized bosonic vacuum `(1 − 4t²)^{1/4} Σ_N (−t)^N √((2N)!)/N! |2N⟩`
/// with `t = ν/(2μ)`, truncated at `cutoff`.
pub fn bosonic_vacuum(t: f64, cutoff: usize) -> Result<StateVector> {
    if !(0.0..0.5).contains(&t.abs()) {
        return Err(Error::BadParameter(format!(
            "|t| must be below 1/2, got {t}"
        )));
    }
    let mut amp = CVector::zeros(cutoff + 1);
    let pref = (1.0 - 4.0 * t * t).powf(0.25);
    // c_N = (−t)^N √((2N)!)/N!;  c_{N+1}/c_N = −t √((2N+1)(2N+2))/(N+1).
    let mut cn = pref;
    let mut n = 0usize;
    while 2 * n <= cutoff {
        amp[2 * n] = cr(cn);
        cn *= -t * (((2 * n + 1) * (2 * n + 2)) as f64).sqrt() / (n + 1) as f64;
        n += 1;
    }
    Ok(StateVector {
        cutoff,
        modes: 1,
        amplitudes: amp,
    })
}

/// Fermionic Cooper-pair vacuum `α·(Ω − (β/α) a†₂a†₁Ω) = (α, 0, 0, −β)`.
pub fn cooper_vacuum(alpha: f64, beta: f64) -> Result<StateVector> {
    check_cooper(alpha, beta)?;
    let mut amp = CVector::zeros(4);
    amp[0] = cr(alpha);
    amp[3] = cr(-beta);
    Ok(StateVector {
        cutoff: 1,
        modes: 2,
        amplitudes: amp,
    })
}

/// Result of a vacuum-annihilation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumCheck {
    /// `‖(ν a† + μ a)Ω_V‖` in the truncated space, excluding the top level
    /// where the truncated `a†` is cut off (bosons); exact for fermions.
    pub residual: f64,
    /// Norm of the part of the exact vacuum beyond the cutoff.
    pub tail_norm: f64,
}

/// Checks that the transformed annihilators kill the vacuum built from the
/// amplitude rule.
pub fn vacuum_annihilation_check(target: ModeTarget, cutoff: usize) -> Result<VacuumCheck> {
    match target {
        ModeTarget::Bosonic { xi } => {
            let (mu, nu) = (xi.cosh(), xi.sinh());
            let t = nu / (2.0 * mu);
            let sp = mode_operators(Statistics::Bosonic, cutoff)?;
            let omega = bosonic_vacuum(t, cutoff)?;
            let out = (&sp.adag * cr(nu) + &sp.a * cr(mu)) * &omega.amplitudes;
            let residual = out.rows(0, cutoff).norm();
            Ok(VacuumCheck {
                residual,
                tail_norm: bosonic_vacuum_tail(t, cutoff),
            })
        }
        ModeTarget::Fermionic(FermionicParams::CooperPair { alpha, beta }) => {
            let omega = cooper_vacuum(alpha, beta)?;
            let (a1, a2) = fermionic_pair_operators();
            let xi = cooper_angle(alpha, beta);
            let (s, c) = xi.sin_cos();
            // Transformed annihilators are the conjugates U a U*.
            let b2 = &a2 * cr(c) + a1.adjoint() * cr(s);
            let b1 = &a1 * cr(c) - a2.adjoint() * cr(s);
            let r = (&b1 * &omega.amplitudes)
                .norm()
                .max((&b2 * &omega.amplitudes).norm());
            Ok(VacuumCheck {
                residual: r,
                tail_norm: 0.0,
            })
        }
        ModeTarget::Fermionic(FermionicParams::ParticleHole) => {
            // Ω_V = |1⟩ and b = a†.
            let sp = mode_operators(Statistics::Fermionic, 1)?;
            let omega = CVector::from_vec(vec![cr(0.0), cr(1.0)]);
            Ok(VacuumCheck {
                residual: (&sp.adag * omega).norm(),
                tail_norm: 0.0,
            })
        }
        ModeTarget::Fermionic(FermionicParams::Invariant) => {
            let sp = mode_operators(Statistics::Fermionic, 1)?;
            let omega = CVector::from_vec(vec![cr(1.0), cr(0.0)]);
            Ok(VacuumCheck {
                residual: (&sp.a * omega).norm(),
                tail_norm: 0.0,
            })
        }
    }
}

/// Norm of the normalized bosonic vacuum beyond occupation `cutoff`.
fn bosonic_vacuum_tail(t: f64, cutoff: usize) -> f64 {
    let x = 4.0 * t * t;
    if x == 0.0 {
        return 0.0;
    }
    // Probability p_N = √(1 − x) C(2N,N) (x/4)^N; p_{N+1}/p_N ≤ x.
    let mut p = (1.0 - x).sqrt();
    let mut acc = 0.0;
    let mut n = 0usize;
    loop {
        if 2 * n > cutoff {
            acc += p;
            if p < 1e-300 || p * x / (1.0 - x) < 1e-18 * acc {
                acc += p * x / (1.0 - x);
                break;
            }
        }
        p *= t * t * ((2 * n + 1) * (2 * n + 2)) as f64 / ((n + 1) * (n + 1)) as f64;
        n += 1;
    }
    acc.sqrt()
}

/// A truncated series value with a rigorous remainder bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// `E[N^power]` in the normalized bosonic vacuum with parameter `t`:
/// `(1 − 4t²)^{1/2} Σ_N C(2N, N) t^{2N} (2N)^power`, summed for at most
/// `max_terms` terms with a geometric remainder bound.
pub fn particle_number_moment(t: f64, power: u32, max_terms: usize) -> Result<SeriesValue> {
    if !(0.0..0.5).contains(&t.abs()) {
        return Err(Error::BadParameter(format!(
            "|t| must be below 1/2 for the series to converge, got {t}"
        )));
    }
    let pref = (1.0 - 4.0 * t * t).sqrt();
    let t2 = t * t;
    let mut base = 1.0_f64; // C(2N, N) t^{2N}
    let mut sum = KahanSum::default();
    let mut last = 0.0;
    let mut used = 0;
    for n in 0..max_terms.max(1) {
        let weight = if power == 0 {
            1.0
        } else {
            ((2 * n) as f64).powi(power as i32)
        };
        last = base * weight;
        sum.add(cr(last));
        used = n + 1;
        // Ratio bound for all later terms.
        let k = (n + 1) as f64;
        let r = 4.0 * t2 * (1.0 + 1.0 / k).powi(power as i32);
        if n >= 1 && r < 1.0 && last * r / (1.0 - r) <= 1e-18 * sum.total().re {
            break;
        }
        base *= t2 * ((2 * n + 1) * (2 * n + 2)) as f64 / ((n + 1) * (n + 1)) as f64;
    }
    let k = used as f64;
    let r = 4.0 * t2 * (1.0 + 1.0 / k.max(1.0)).powi(power as i32);
    let tail = if r < 1.0 {
        last * r / (1.0 - r)
    } else {
        f64::INFINITY
    };
    Ok(SeriesValue {
        value: pref * sum.total().re,
        tail_bound: pref * tail + 4.0 * f64::EPSILON * pref * sum.abs_total(),
        terms: used,
    })
}

/// `‖N^n Ω_V‖²` for the normalized bosonic vacuum with parameter `t`; this is
/// the moment `E[N^{2n}]`.
pub fn rapid_decay_norm(t: f64, n: u32, max_terms: usize) -> Result<SeriesValue> {
    particle_number_moment(t, 2 * n, max_terms)
}

/// Partial sums `Σ_{k ≤ K'} φ_k·α` for `K' = 1..=K`.
pub fn coherent_divergence_probe(alpha: f64, phi: impl Fn(u64) -> f64, k_max: u64) -> Vec<f64> {
    let mut acc = KahanSum::default();
    (1..=k_max)
        .map(|k| {
            acc.add(cr(phi(k) * alpha));
            acc.total().re
        })
        .collect()
}

/// `max|U*U − I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    linalg::max_abs(&(u.adjoint() * u - identity(u.nrows())))
}
