//! Where a transformation can be implemented, and its vacuum data.
//!
//! A transformation is either a finite matrix map or a countable
//! [`ModeFamily`]: a generator of per-index groups of modes (a group may be a
//! single mode or, e.g., a momentum shell) with a declared tail class for the
//! group contributions to `tr(v*v)`. Verdicts:
//!
//! * Fock space: `tr(v*v) < ∞` (Shale–Stinespring).
//! * Infinite tensor product: always, for countable mode families.
//! * Extended state space: always for bosons; for fermions iff only finitely
//!   many modes are particle–hole transformed.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{BogoliubovMap, Statistics};
use crate::error::{Error, Result};
use crate::linalg::{cr, C64};
use crate::mode_decomp::{FermionicParams, Mode, ModeDecomposition};
use crate::renorm::{Classification, RenSequence, Tail, Ternary, DEFAULT_HORIZON};

/// Parameters of one mode of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModeParams {
    /// `u f = μ g`, `v f̄ = ν g` with `μ² − ν² = 1`.
    Bosonic {
        mu: f64,
        nu: f64,
    },
    Fermionic(FermionicParams),
}

impl ModeParams {
    /// Bosonic mode with `ν = sinh ξ`.
    pub fn squeeze(xi: f64) -> Self {
        ModeParams::Bosonic {
            mu: xi.cosh(),
            nu: xi.sinh(),
        }
    }

    /// Contribution to `tr(v*v)`: `ν²`, `2β²` for a Cooper pair (two modes),
    /// `1` for a particle–hole mode and `0` for an invariant mode.
    pub fn trace_vv(&self) -> f64 {
        match self {
            ModeParams::Bosonic { nu, .. } => nu * nu,
            ModeParams::Fermionic(FermionicParams::CooperPair { beta, .. }) => 2.0 * beta * beta,
            ModeParams::Fermionic(FermionicParams::ParticleHole) => 1.0,
            ModeParams::Fermionic(FermionicParams::Invariant) => 0.0,
        }
    }

    /// Contribution to the renormalization exponent: `¼ log(1 − ν²/μ²)` for
    /// bosons, `log α` for Cooper pairs, `0` otherwise.
    pub fn renorm_term(&self) -> f64 {
        match self {
            ModeParams::Bosonic { mu, nu } => 0.25 * (1.0 - (nu * nu) / (mu * mu)).ln(),
            ModeParams::Fermionic(FermionicParams::CooperPair { alpha, .. }) => alpha.ln(),
            ModeParams::Fermionic(_) => 0.0,
        }
    }

    fn is_particle_hole(&self) -> bool {
        matches!(self, ModeParams::Fermionic(FermionicParams::ParticleHole))
    }
}

/// A count that may be infinite or undeclared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Count {
    Finite(u64),
    Infinite,
    Unknown,
}

/// Index set of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IndexSet {
    /// Indices `start..start+len`.
    Finite(u64),
    /// Indices `start..`; `tail` declares the decay of the per-index
    /// contributions to `tr(v*v)`, `particle_holes` the total number of
    /// particle–hole modes.
    Countable {
        tail: Tail,
        particle_holes: Count,
        horizon: u64,
    },
}

/// Generator of per-index groups of modes.
pub type ModeGenerator = Arc<dyn Fn(u64) -> Vec<ModeParams> + Send + Sync>;

/// Countable collection of independent modes.
#[derive(Clone)]
pub struct ModeFamily {
    pub statistics: Statistics,
    pub start: u64,
    pub index_set: IndexSet,
    generator: ModeGenerator,
}

impl fmt::Debug for ModeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModeFamily")
            .field("statistics", &self.statistics)
            .field("start", &self.start)
            .field("index_set", &self.index_set)
            .finish_non_exhaustive()
    }
}

impl ModeFamily {
    /// Family with one group of modes per index.
    pub fn new(
        statistics: Statistics,
        start: u64,
        index_set: IndexSet,
        generator: impl Fn(u64) -> Vec<ModeParams> + Send + Sync + 'static,
    ) -> Self {
        Self {
            statistics,
            start,
            index_set,
            generator: Arc::new(generator),
        }
    }

    /// Finite family from an explicit list of modes (indices from 1).
    pub fn from_modes(statistics: Statistics, modes: Vec<ModeParams>) -> Self {
        let len = modes.len() as u64;
        let modes = Arc::new(modes);
        Self::new(statistics, 1, IndexSet::Finite(len), move |j| {
            vec![modes[(j - 1) as usize]]
        })
    }

    /// Countable family with one mode per index `j ≥ 1`.
    pub fn countable(
        statistics: Statistics,
        tail: Tail,
        particle_holes: Count,
        mode: impl Fn(u64) -> ModeParams + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            statistics,
            1,
            IndexSet::Countable {
                tail,
                particle_holes,
                horizon: DEFAULT_HORIZON,
            },
            move |j| vec![mode(j)],
        )
    }

    /// Finite family from a mode decomposition.
    pub fn from_decomposition(dec: &ModeDecomposition) -> Self {
        let modes = dec
            .modes
            .iter()
            .map(|m| match m {
                Mode::Bosonic(b) => ModeParams::Bosonic { mu: b.mu, nu: b.nu },
                Mode::Fermionic(k) => ModeParams::Fermionic(k.params()),
            })
            .collect();
        Self::from_modes(dec.statistics, modes)
    }

    /// Replaces the evaluation horizon of a countable family.
    pub fn with_horizon(mut self, h: u64) -> Self {
        if let IndexSet::Countable { horizon, .. } = &mut self.index_set {
            *horizon = h;
        }
        self
    }

    /// Modes of group `j`.
    pub fn modes(&self, j: u64) -> Vec<ModeParams> {
        (self.generator)(j)
    }

    /// Particle–hole count: exact for finite families, declared otherwise.
    pub fn particle_hole_count(&self) -> Count {
        match self.index_set {
            IndexSet::Finite(len) => {
                let count = (self.start..self.start + len)
                    .map(|j| {
                        self.modes(j)
                            .iter()
                            .filter(|m| m.is_particle_hole())
                            .count() as u64
                    })
                    .sum();
                Count::Finite(count)
            }
            IndexSet::Countable { particle_holes, .. } => particle_holes,
        }
    }

    fn sequence(
        &self,
        tail: Tail,
        term: impl Fn(&ModeParams) -> f64 + Send + Sync + 'static,
    ) -> RenSequence {
        let gen = self.generator.clone();
        let f = move |j: u64| cr(gen(j).iter().map(&term).sum::<f64>());
        match self.index_set {
            IndexSet::Finite(len) => {
                let values = (self.start..self.start + len).map(f).collect();
                RenSequence::finite(values)
            }
            IndexSet::Countable { horizon, .. } => {
                RenSequence::infinite(self.start, tail, f).with_horizon(horizon)
            }
        }
    }
}

/// Input of [`shale_stinespring`].
#[derive(Debug, Clone)]
pub enum Transformation<'a> {
    Map(&'a BogoliubovMap),
    Family(&'a ModeFamily),
}

/// `tr(v*v)` as a classified formal sum.
///
/// Finite matrices give the exact column sums `Σ_j ‖v e_j‖²`. Countable
/// families must declare a tail, otherwise [`Error::UnknownTail`].
pub fn shale_stinespring(t: Transformation<'_>) -> Result<RenSequence> {
    match t {
        Transformation::Map(map) => {
            let values: Vec<C64> = (0..map.dim())
                .map(|j| cr(map.v.column(j).norm_squared()))
                .collect();
            Ok(RenSequence::finite(values))
        }
        Transformation::Family(fam) => match fam.index_set {
            IndexSet::Countable {
                tail: Tail::Unknown,
                ..
            } => Err(Error::UnknownTail),
            IndexSet::Countable { tail, .. } => Ok(fam.sequence(tail, ModeParams::trace_vv)),
            IndexSet::Finite(_) => Ok(fam.sequence(Tail::Unknown, ModeParams::trace_vv)),
        },
    }
}

/// Implementability verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImplementabilityVerdict {
    /// Unitarily implementable on Fock space.
    pub fock: Ternary,
    /// Implementable on the infinite tensor product space.
    pub itp: Ternary,
    /// Implementable on the extended state space.
    pub ess: Ternary,
    /// Classification of `tr(v*v)`.
    pub trace_vv: Classification,
    pub particle_hole_count: Count,
}

/// Implementability of a mode family.
pub fn classify_implementability(fam: &ModeFamily) -> ImplementabilityVerdict {
    let trace_vv = match shale_stinespring(Transformation::Family(fam)) {
        Ok(seq) => seq.classify(),
        Err(_) => Classification::Indeterminate,
    };
    let particle_hole_count = fam.particle_hole_count();
    let fock = match (trace_vv, particle_hole_count) {
        (_, Count::Infinite) => Ternary::No,
        (Classification::Summable { .. }, _) => Ternary::Yes,
        (Classification::DivergentPlus | Classification::DivergentMinus, _) => Ternary::No,
        _ => Ternary::Unknown,
    };
    let ess = match fam.statistics {
        Statistics::Bosonic => Ternary::Yes,
        Statistics::Fermionic => match particle_hole_count {
            Count::Finite(_) => Ternary::Yes,
            Count::Infinite => Ternary::No,
            Count::Unknown if fock == Ternary::Yes => Ternary::Yes,
            Count::Unknown => Ternary::Unknown,
        },
    };
    ImplementabilityVerdict {
        fock,
        itp: Ternary::Yes,
        ess,
        trace_vv,
        particle_hole_count,
    }
}

/// Renormalization exponent and per-mode vacuum amplitudes.
#[derive(Debug, Clone)]
pub struct VacuumDescription {
    /// `𝔯` with `Ω_V = e^𝔯 Ψ_V`.
    pub renorm_exponent: RenSequence,
    family: ModeFamily,
}

impl VacuumDescription {
    /// Unnormalized amplitude of `Ψ_V` for mode `m` of group `j`.
    ///
    /// * Bosonic: occupation `2N` has `(−ν/(2μ))^N √((2N)!)/N!`, odd
    ///   occupations vanish.
    /// * Cooper pair: occupation index `n₁ + 2n₂`; `1` on `(0,0)`, `−β/α` on
    ///   `(1,1)`.
    /// * Particle–hole: `1` on occupation 1. Invariant: `1` on occupation 0.
    pub fn amplitude(&self, j: u64, m: usize, occupation: usize) -> Option<f64> {
        let modes = self.family.modes(j);
        let mode = modes.get(m)?;
        Some(match *mode {
            ModeParams::Bosonic { mu, nu } => {
                if occupation % 2 == 1 {
                    0.0
                } else {
                    let t = nu / (2.0 * mu);
                    let mut c = 1.0;
                    for n in 0..occupation / 2 {
                        c *= -t * (((2 * n + 1) * (2 * n + 2)) as f64).sqrt() / (n + 1) as f64;
                    }
                    c
                }
            }
            ModeParams::Fermionic(FermionicParams::CooperPair { alpha, beta }) => {
                match occupation {
                    0 => 1.0,
                    3 => -beta / alpha,
                    _ => 0.0,
                }
            }
            ModeParams::Fermionic(FermionicParams::ParticleHole) => f64::from(occupation == 1),
            ModeParams::Fermionic(FermionicParams::Invariant) => f64::from(occupation == 0),
        })
    }
}

/// Vacuum data of a family: renormalization exponent `¼ Σ log(1 − ν²/μ²)`
/// (bosons) or `Σ log α_i` (fermions) and the amplitude rules.
pub fn vacuum_data(fam: &ModeFamily) -> Result<VacuumDescription> {
    let verdict = classify_implementability(fam);
    if verdict.itp != Ternary::Yes {
        return Err(Error::PrereqFailed(
            "family is not implementable on the infinite tensor product".into(),
        ));
    }
    let tail = match fam.index_set {
        // |¼ log(1 − ν²/μ²)| ≤ ¼ ν² and |log α| ≈ β²/2 for small β, so the
        // declared decay of tr(v*v) carries over.
        IndexSet::Countable {
            tail:
                Tail::PowerDecay {
                    exponent,
                    coefficient,
                },
            ..
        } => Tail::PowerDecay {
            exponent,
            coefficient: coefficient.map(|c| match fam.statistics {
                Statistics::Bosonic => 0.25 * c,
                Statistics::Fermionic => c,
            }),
        },
        IndexSet::Countable {
            tail: Tail::Exact { value },
            ..
        } if value == 0.0 => Tail::Exact { value: 0.0 },
        _ => Tail::Unknown,
    };
    Ok(VacuumDescription {
        renorm_exponent: fam.sequence(tail, ModeParams::renorm_term),
        family: fam.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_v_has_zero_trace() {
        let c = shale_stinespring(Transformation::Map(&BogoliubovMap::identity(
            3,
            Statistics::Bosonic,
        )))
        .unwrap()
        .classify();
        assert_eq!(c.value(), Some(cr(0.0)));
    }

    #[test]
    fn inverse_square_family_sums_to_basel() {
        let fam = ModeFamily::countable(
            Statistics::Bosonic,
            Tail::PowerDecay {
                exponent: 2.0,
                coefficient: Some(1.0),
            },
            Count::Finite(0),
            |j| {
                let nu = 1.0 / j as f64;
                ModeParams::Bosonic {
                    mu: (1.0 + nu * nu).sqrt(),
                    nu,
                }
            },
        );
        let Classification::Summable { value, bound } =
            shale_stinespring(Transformation::Family(&fam))
                .unwrap()
                .classify()
        else {
            panic!()
        };
        assert!((value.re - PI * PI / 6.0).abs() <= bound && bound < 1e-5);
    }

    #[test]
    fn unknown_tail_is_an_error() {
        let fam =
            ModeFamily::countable(Statistics::Bosonic, Tail::Unknown, Count::Finite(0), |_| {
                ModeParams::squeeze(0.1)
            });
        assert_eq!(
            shale_stinespring(Transformation::Family(&fam)).unwrap_err(),
            Error::UnknownTail
        );
        let v = classify_implementability(&fam);
        assert_eq!(v.fock, Ternary::Unknown);
        assert_eq!(v.itp, Ternary::Yes);
    }

    #[test]
    fn identity_family_is_implementable_everywhere() {
        let fam = ModeFamily::from_modes(
            Statistics::Fermionic,
            vec![ModeParams::Fermionic(FermionicParams::Invariant); 4],
        );
        let v = classify_implementability(&fam);
        assert_eq!(
            (v.fock, v.itp, v.ess),
            (Ternary::Yes, Ternary::Yes, Ternary::Yes)
        );
        let vac = vacuum_data(&fam).unwrap();
        assert_eq!(vac.renorm_exponent.classify().value(), Some(cr(0.0)));
        assert_eq!(vac.amplitude(1, 0, 0), Some(1.0));
    }

    #[test]
    fn infinite_particle_holes_block_extended_state_space() {
        let fam = ModeFamily::countable(
            Statistics::Fermionic,
            Tail::power(0.0),
            Count::Infinite,
            |_| ModeParams::Fermionic(FermionicParams::ParticleHole),
        )
        .with_horizon(1000);
        let v = classify_implementability(&fam);
        assert_eq!(
            (v.fock, v.itp, v.ess),
            (Ternary::No, Ternary::Yes, Ternary::No)
        );
    }

    #[test]
    fn half_particle_hole_pairs_renormalize_to_minus_infinity() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let fam = ModeFamily::countable(
            Statistics::Fermionic,
            Tail::power(0.0),
            Count::Finite(0),
            move |_| ModeParams::Fermionic(FermionicParams::CooperPair { alpha: s, beta: s }),
        )
        .with_horizon(1000);
        let vac = vacuum_data(&fam).unwrap();
        assert_eq!(
            vac.renorm_exponent.classify(),
            Classification::DivergentMinus
        );
        let v = classify_implementability(&fam);
        assert_eq!((v.fock, v.ess), (Ternary::No, Ternary::Yes));
    }

    #[test]
    fn bosonic_vacuum_prefactor_from_renorm_exponent() {
        // t = ν/(2μ) = 0.3 ⇒ ν/μ = 0.6 and e^𝔯 = (1 − 0.36)^{1/4} = √0.8.
        let nu = 0.6 / (1.0 - 0.36_f64).sqrt();
        let mu = (1.0 + nu * nu).sqrt();
        let fam = ModeFamily::from_modes(Statistics::Bosonic, vec![ModeParams::Bosonic { mu, nu }]);
        let r = vacuum_data(&fam)
            .unwrap()
            .renorm_exponent
            .classify()
            .value()
            .unwrap()
            .re;
        assert!((r.exp() - 0.8_f64.sqrt()).abs() < 1e-15);
    }
}
