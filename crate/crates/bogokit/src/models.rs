//! Three application families on the momentum lattice `ℤ³`:
//!
//! * a bosonic squeezing model `h_p = √(|p|² + m²) + κ`, `k_p = κ`, whose
//!   pair-creation sum `Σ v_p²` grows linearly in the cutoff radius;
//! * a BCS pairing model with `ε_p = |p|²/(2m) − μ` and gap `Δ_p ≠ 0`;
//! * a pair-creation model in an external field with time-dependent
//!   kinetic terms `ε_{p,±}(t)` and coupling `f_p(t)`.
//!
//! Each momentum `p` carries an independent block; lattice points are
//! enumerated lexicographically.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{BogoliubovMap, Statistics};
use crate::diagonalize::{
    diagonalize_fermionic, normal_ordering_constant, DiagonalizationResult, NormalOrderingConstant,
    QuadraticHamiltonian,
};
use crate::error::{Error, Result};
use crate::implementability::{Count, IndexSet, ModeFamily, ModeParams};
use crate::linalg::{c, cr, expm_hermitian, identity, max_abs, CMatrix, C64};
use crate::mode_decomp::FermionicParams;
use crate::renorm::{KahanSum, Tail};

/// A lattice momentum.
pub type Momentum = [i64; 3];

/// `|p|²`.
pub fn norm_sq(p: &Momentum) -> i64 {
    p.iter().map(|x| x * x).sum()
}

/// `|p|`.
pub fn norm(p: &Momentum) -> f64 {
    (norm_sq(p) as f64).sqrt()
}

/// All `p ∈ ℤ³` with `|p| ≤ R`, shell by shell (see [`shell_points`]) and
/// lexicographic within each shell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellLattice {
    pub radius: u32,
    pub points: Vec<Momentum>,
}

impl ShellLattice {
    pub fn new(radius: u32) -> Self {
        let points = (0..=u64::from(radius)).flat_map(shell_points).collect();
        Self { radius, points }
    }

    /// Shell index of each point, aligned with `points`.
    pub fn shells(&self) -> Vec<u64> {
        self.points.iter().map(|p| shell_index(p)).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Lattice points of shell `j`: `p = 0` for `j = 0`, otherwise
/// `j − 1 < |p| ≤ j`; lexicographic order.
pub fn shell_points(j: u64) -> Vec<Momentum> {
    let r = j as i64;
    let (lo, hi) = if j == 0 {
        (-1, 0)
    } else {
        ((r - 1) * (r - 1), r * r)
    };
    let mut points = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            let rest = hi - x * x - y * y;
            if rest < 0 {
                continue;
            }
            let zmax = (rest as f64).sqrt() as i64 + 1;
            for z in -zmax..=zmax {
                let n2 = x * x + y * y + z * z;
                if n2 > lo && n2 <= hi {
                    points.push([x, y, z]);
                }
            }
        }
    }
    points
}

/// Shell of `p`: 0 for the origin, otherwise `⌈|p|⌉`.
pub fn shell_index(p: &Momentum) -> u64 {
    let n2 = norm_sq(p) as u64;
    let mut j = (n2 as f64).sqrt().ceil() as u64;
    // Correct any rounding so that (j−1)² < n2 ≤ j².
    while j * j < n2 {
        j += 1;
    }
    while j > 0 && (j - 1) * (j - 1) >= n2 {
        j -= 1;
    }
    j
}

/// Number of lattice points with `|p|² = n`, for `n ≤ radius²`.
pub fn lattice_multiplicities(radius: u32) -> Vec<u64> {
    let r = i64::from(radius);
    let mut mult = vec![0u64; (r * r + 1) as usize];
    for x in -r..=r {
        for y in -r..=r {
            let rest = r * r - x * x - y * y;
            if rest < 0 {
                continue;
            }
            let zmax = (rest as f64).sqrt() as i64;
            for z in -zmax..=zmax {
                mult[(x * x + y * y + z * z) as usize] += 1;
            }
        }
    }
    mult
}

/// `(|p|², multiplicity)` pairs of shell `j` (see [`shell_points`]) for
/// families whose modes depend on `|p|` only.
struct RadialShells {
    table: Arc<Vec<u64>>,
}

impl RadialShells {
    fn new(horizon: u64) -> Self {
        // Families are evaluated up to their horizon; cap the table size.
        let r = horizon.min(512) as u32;
        Self {
            table: Arc::new(lattice_multiplicities(r)),
        }
    }

    fn shell(&self, j: u64) -> Vec<(i64, u64)> {
        let (lo, hi) = if j == 0 {
            (0, 0)
        } else {
            ((j - 1) * (j - 1) + 1, j * j)
        };
        if (hi as usize) < self.table.len() {
            (lo..=hi)
                .map(|n| (n as i64, self.table[n as usize]))
                .filter(|&(_, m)| m > 0)
                .collect()
        } else {
            let mut out: Vec<(i64, u64)> = Vec::new();
            let mut pts: Vec<i64> = shell_points(j).iter().map(norm_sq).collect();
            pts.sort_unstable();
            for n in pts {
                match out.last_mut() {
                    Some((last, m)) if *last == n => *m += 1,
                    _ => out.push((n, 1)),
                }
            }
            out
        }
    }
}

/// Sums `f(p)` over a slice of momenta in parallel; the reduction order is
/// fixed, so results are reproducible for any thread count.
fn ordered_sum(points: &[Momentum], f: impl Fn(&Momentum) -> f64 + Sync) -> f64 {
    const CHUNK: usize = 4096;
    let partials: Vec<KahanSum> = points
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut s = KahanSum::default();
            for p in chunk {
                s.add(cr(f(p)));
            }
            s
        })
        .collect();
    let mut total = KahanSum::default();
    for s in &partials {
        total.merge(s);
    }
    total.total().re
}

// ---------------------------------------------------------------------------
// Bosonic squeezing model
// ---------------------------------------------------------------------------

/// Mass `m > 0` and coupling `κ` with `κ > −m/2`, `κ ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WickModelParams {
    pub m: f64,
    pub kappa: f64,
}

impl WickModelParams {
    pub fn new(m: f64, kappa: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::ConstraintViolated(format!(
                "mass must be positive, got {m}"
            )));
        }
        if !kappa.is_finite() || kappa == 0.0 || kappa <= -m / 2.0 {
            return Err(Error::ConstraintViolated(format!(
                "need κ > −m/2 and κ ≠ 0, got κ = {kappa}, m = {m}"
            )));
        }
        Ok(Self { m, kappa })
    }
}

/// Closed-form diagonalization of one momentum of the squeezing model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WickMode {
    pub h: f64,
    pub k: f64,
    /// `G = k/h`.
    pub g: f64,
    pub u: f64,
    pub v: f64,
    pub e: f64,
}

impl WickMode {
    /// `(h, k) ↦` closed-form `(u, v, E)`; requires `|k| < h`.
    pub fn from_hk(h: f64, k: f64) -> Result<Self> {
        if !(k.abs() < h) {
            return Err(Error::ConstraintViolated(format!(
                "need |k| < h, got h = {h}, k = {k}"
            )));
        }
        let g = k / h;
        let s = (1.0 - g * g).sqrt();
        let cp = (0.5 + 1.0 / (2.0 * s)).sqrt();
        let u = cp;
        let v = -cp * g / (1.0 + s);
        // h² − k² = (h − k)(h + k) avoids cancellation for small k
        let e = ((h - k) * (h + k)).sqrt();
        Ok(Self { h, k, g, u, v, e })
    }

    /// The single-mode Bogoliubov map `(u, v)`.
    pub fn map(&self) -> BogoliubovMap {
        BogoliubovMap {
            u: CMatrix::from_element(1, 1, cr(self.u)),
            v: CMatrix::from_element(1, 1, cr(self.v)),
            statistics: Statistics::Bosonic,
        }
    }

    /// The single-mode Hamiltonian `(h, k)`.
    pub fn hamiltonian(&self) -> QuadraticHamiltonian {
        QuadraticHamiltonian {
            h: CMatrix::from_element(1, 1, cr(self.h)),
            k: CMatrix::from_element(1, 1, cr(self.k)),
            statistics: Statistics::Bosonic,
        }
    }
}

/// `h_p = √(|p|² + m²) + κ`, `k_p = κ` and its closed-form diagonalization.
pub fn wick_mode(params: &WickModelParams, p: &Momentum) -> Result<WickMode> {
    let omega = ((norm_sq(p) as f64) + params.m * params.m).sqrt();
    WickMode::from_hk(omega + params.kappa, params.kappa)
}

/// `v_p²` as a function of `|p|`.
fn wick_v_sq(params: &WickModelParams, radius: f64) -> f64 {
    let omega = (radius * radius + params.m * params.m).sqrt();
    let m = WickMode::from_hk(omega + params.kappa, params.kappa).expect("validated parameters");
    m.v * m.v
}

/// Partial pair-creation sums `Σ_{|p| ≤ R} v_p²` for each radius.
pub fn wick_divergence_probe(params: &WickModelParams, radii: &[u32]) -> Result<Vec<(u32, f64)>> {
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadParameter(
            "radii must be strictly increasing".into(),
        ));
    }
    Ok(radii
        .iter()
        .map(|&r| {
            let lattice = ShellLattice::new(r);
            (
                r,
                ordered_sum(&lattice.points, |p| wick_v_sq(params, norm(p))),
            )
        })
        .collect())
}

/// Result of the large-momentum lower bound `v_p² ≥ κ²d²/(4|p|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WickBound {
    pub d: f64,
    /// Smallest integer radius from which the bound holds for every lattice
    /// point up to `checked_radius`.
    pub p_max: u32,
    pub checked_radius: u32,
}

/// Finds the radius beyond which `v_p² ≥ κ²d²/(4|p|²)` holds (`0 < d < 1`).
///
/// Every lattice norm `√n`, `1 ≤ n ≤ checked_radius²`, is tested. Returns
/// `None` if the bound still fails at the largest radius.
pub fn wick_lower_bound(
    params: &WickModelParams,
    d: f64,
    checked_radius: u32,
) -> Result<Option<WickBound>> {
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::BadParameter(format!(
            "d must lie in (0, 1), got {d}"
        )));
    }
    let k2 = params.kappa * params.kappa;
    let r2max = u64::from(checked_radius) * u64::from(checked_radius);
    let mut last_fail: Option<u64> = None;
    for n2 in 1..=r2max {
        let rho = (n2 as f64).sqrt();
        if wick_v_sq(params, rho) < k2 * d * d / (4.0 * rho * rho) {
            last_fail = Some(n2);
        }
    }
    let p_max = match last_fail {
        None => 1,
        Some(n2) if n2 == r2max => return Ok(None),
        Some(n2) => (n2 as f64).sqrt().floor() as u32 + 1,
    };
    Ok(Some(WickBound {
        d,
        p_max,
        checked_radius,
    }))
}

/// The squeezing model as a family of momentum shells (index `j ≥ 0`).
///
/// Each shell holds `≈ 4πj²` modes with `ν² ≈ κ²/(4j²)`, so the per-shell
/// contribution to `tr(v*v)` tends to the constant `πκ²`.
pub fn wick_family(params: &WickModelParams, horizon: u64) -> ModeFamily {
    let params = *params;
    let shells = RadialShells::new(horizon);
    ModeFamily::new(
        Statistics::Bosonic,
        0,
        IndexSet::Countable {
            tail: Tail::power(0.0),
            particle_holes: Count::Finite(0),
            horizon,
        },
        move |j| {
            let mut modes = Vec::new();
            for (n2, mult) in shells.shell(j) {
                let m = wick_radial_mode(&params, n2);
                modes.extend(std::iter::repeat_n(
                    ModeParams::Bosonic {
                        mu: m.u.abs(),
                        nu: m.v.abs(),
                    },
                    mult as usize,
                ));
            }
            modes
        },
    )
}

fn wick_radial_mode(params: &WickModelParams, n2: i64) -> WickMode {
    let omega = ((n2 as f64) + params.m * params.m).sqrt();
    WickMode::from_hk(omega + params.kappa, params.kappa).expect("validated parameters")
}

/// Per-shell normal-ordering terms `½ Σ_{p ∈ shell j} (E_p − h_p)`.
///
/// Asymptotically `½(E_p − h_p) ≈ −κ²/(4|p|)`, so the shell term grows like
/// `−πκ² j` (declared tail exponent −1).
pub fn wick_normal_ordering(params: &WickModelParams, horizon: u64) -> NormalOrderingConstant {
    let shells = Arc::new(RadialShells::new(horizon));
    let (p1, p2) = (*params, *params);
    let (s1, s2) = (shells.clone(), shells);
    normal_ordering_constant(
        move |j| wick_shell_sum(&p1, &s1, j, |m| m.h),
        move |j| wick_shell_sum(&p2, &s2, j, |m| m.e),
        0,
        Tail::power(-1.0),
        horizon,
    )
}

fn wick_shell_sum(
    params: &WickModelParams,
    shells: &RadialShells,
    j: u64,
    f: fn(&WickMode) -> f64,
) -> f64 {
    shells
        .shell(j)
        .iter()
        .map(|&(n2, mult)| mult as f64 * f(&wick_radial_mode(params, n2)))
        .sum()
}

// ---------------------------------------------------------------------------
// BCS model
// ---------------------------------------------------------------------------

/// Gap function `p ↦ Δ_p`.
pub type GapFn = Arc<dyn Fn(&Momentum) -> C64 + Send + Sync>;

/// BCS parameters: mass, chemical potential and gap function.
#[derive(Clone)]
pub struct BcsModelParams {
    pub m: f64,
    pub mu: f64,
    pub delta: GapFn,
}

impl fmt::Debug for BcsModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BcsModelParams")
            .field("m", &self.m)
            .field("mu", &self.mu)
            .finish_non_exhaustive()
    }
}

impl BcsModelParams {
    pub fn new(
        m: f64,
        mu: f64,
        delta: impl Fn(&Momentum) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) || !mu.is_finite() {
            return Err(Error::ConstraintViolated(format!(
                "need m > 0 and finite μ, got m = {m}, μ = {mu}"
            )));
        }
        Ok(Self {
            m,
            mu,
            delta: Arc::new(delta),
        })
    }

    /// Momentum-independent gap `Δ_p = Δ₀`.
    pub fn constant_gap(m: f64, mu: f64, delta: C64) -> Result<Self> {
        Self::new(m, mu, move |_| delta)
    }

    /// `ε_p = |p|²/(2m) − μ`.
    pub fn kinetic(&self, p: &Momentum) -> f64 {
        norm_sq(p) as f64 / (2.0 * self.m) - self.mu
    }
}

/// One momentum pair `(p↑, p↓)` of the BCS model.
#[derive(Debug, Clone, PartialEq)]
pub struct BcsMode {
    pub eps: f64,
    pub delta: C64,
    pub e: f64,
    pub u: C64,
    pub v: f64,
    /// `A_{H,p}` on `(p↑, p↓)` in the fermionic block convention.
    pub a_block: CMatrix,
    /// The diagonalizing `V_p`.
    pub v_block: CMatrix,
    pub cooper: FermionicParams,
}

impl BcsMode {
    pub fn map(&self) -> BogoliubovMap {
        let n = 2;
        BogoliubovMap {
            u: self.v_block.view((0, 0), (n, n)).into_owned(),
            v: self.v_block.view((0, n), (n, n)).into_owned(),
            statistics: Statistics::Fermionic,
        }
    }

    pub fn hamiltonian(&self) -> QuadraticHamiltonian {
        let mut k = CMatrix::zeros(2, 2);
        k[(0, 1)] = self.delta;
        k[(1, 0)] = -self.delta;
        QuadraticHamiltonian {
            h: CMatrix::identity(2, 2) * cr(self.eps),
            k,
            statistics: Statistics::Fermionic,
        }
    }
}

/// Closed-form diagonalization of a pair block with kinetic term `ε` and gap `Δ ≠ 0`.
pub fn bcs_pair(eps: f64, delta: C64) -> Result<BcsMode> {
    if delta.norm() == 0.0 {
        return Err(Error::ZeroGap);
    }
    if !eps.is_finite() || !delta.re.is_finite() || !delta.im.is_finite() {
        return Err(Error::BadParameter("non-finite BCS parameters".into()));
    }
    let dn = delta.norm();
    let e = eps.hypot(dn);
    // E − ε = |Δ|²/(E + ε) avoids cancellation when ε > 0 dominates
    let gap = if eps > 0.0 {
        dn * dn / (e + eps)
    } else {
        e - eps
    };
    let nrm = gap.hypot(dn);
    let u = delta / nrm;
    let v = gap / nrm;
    let z = cr(0.0);
    let d = delta;
    #[rustfmt::skip]
    let a_block = CMatrix::from_row_slice(4, 4, &[
        cr(eps), z, z, -d,
        z, cr(eps), d, z,
        z, d.conj(), cr(-eps), z,
        -d.conj(), z, z, cr(-eps),
    ]);
    let vv = cr(v);
    #[rustfmt::skip]
    let v_block = CMatrix::from_row_slice(4, 4, &[
        u, z, z, vv,
        z, u, -vv, z,
        z, vv, u.conj(), z,
        -vv, z, z, u.conj(),
    ]);
    Ok(BcsMode {
        eps,
        delta,
        e,
        u,
        v,
        a_block,
        v_block,
        cooper: FermionicParams::CooperPair {
            alpha: u.norm(),
            beta: v,
        },
    })
}

/// The BCS block at momentum `p`.
pub fn bcs_mode(params: &BcsModelParams, p: &Momentum) -> Result<BcsMode> {
    bcs_pair(params.kinetic(p), (params.delta)(p))
}

/// The BCS model as a family of momentum shells (one Cooper pair per `p`).
pub fn bcs_family(params: &BcsModelParams, tail: Tail, horizon: u64) -> ModeFamily {
    let params = params.clone();
    ModeFamily::new(
        Statistics::Fermionic,
        0,
        IndexSet::Countable {
            tail,
            particle_holes: Count::Finite(0),
            horizon,
        },
        move |j| {
            shell_points(j)
                .iter()
                .map(|p| {
                    ModeParams::Fermionic(bcs_mode(&params, p).expect("non-vanishing gap").cooper)
                })
                .collect()
        },
    )
}

/// A finite BCS family on the given momenta.
pub fn bcs_finite_family(params: &BcsModelParams, points: &[Momentum]) -> Result<ModeFamily> {
    let modes = points
        .iter()
        .map(|p| Ok(ModeParams::Fermionic(bcs_mode(params, p)?.cooper)))
        .collect::<Result<_>>()?;
    Ok(ModeFamily::from_modes(Statistics::Fermionic, modes))
}

/// Direct sum of the BCS pair blocks over `points`: `(h, k)` with modes
/// ordered `(p₁↑, p₂↑, …, p₁↓, p₂↓, …)`.
pub fn bcs_hamiltonian(
    params: &BcsModelParams,
    points: &[Momentum],
) -> Result<QuadraticHamiltonian> {
    let n = points.len();
    let mut h = CMatrix::zeros(2 * n, 2 * n);
    let mut k = CMatrix::zeros(2 * n, 2 * n);
    for (i, p) in points.iter().enumerate() {
        let eps = params.kinetic(p);
        let d = (params.delta)(p);
        h[(i, i)] = cr(eps);
        h[(n + i, n + i)] = cr(eps);
        k[(i, n + i)] = d;
        k[(n + i, i)] = -d;
    }
    Ok(QuadraticHamiltonian {
        h,
        k,
        statistics: Statistics::Fermionic,
    })
}

// ---------------------------------------------------------------------------
// Pair creation in an external field
// ---------------------------------------------------------------------------

/// Time-dependent coefficient `(p, t) ↦ value`.
pub type CoefficientFn = Arc<dyn Fn(&Momentum, f64) -> f64 + Send + Sync>;

/// `ε_{p,±}(t)` and the real coupling `f_p(t)`.
#[derive(Clone)]
pub struct QedModelParams {
    pub eps_plus: CoefficientFn,
    pub eps_minus: CoefficientFn,
    pub f: CoefficientFn,
    /// Set when the coefficients do not depend on `t`.
    pub time_independent: bool,
}

impl fmt::Debug for QedModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QedModelParams")
            .field("time_independent", &self.time_independent)
            .finish_non_exhaustive()
    }
}

impl QedModelParams {
    pub fn new(
        eps_plus: impl Fn(&Momentum, f64) -> f64 + Send + Sync + 'static,
        eps_minus: impl Fn(&Momentum, f64) -> f64 + Send + Sync + 'static,
        f: impl Fn(&Momentum, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            eps_plus: Arc::new(eps_plus),
            eps_minus: Arc::new(eps_minus),
            f: Arc::new(f),
            time_independent: false,
        }
    }

    /// Momentum- and time-independent coefficients.
    pub fn constant(eps_plus: f64, eps_minus: f64, f: f64) -> Self {
        let mut q = Self::new(move |_, _| eps_plus, move |_, _| eps_minus, move |_, _| f);
        q.time_independent = true;
        q
    }

    /// A closed-form profile: `ε_{p,±}(t) = √(|p|² + m²) ± δ cos(ωt)` and
    /// `f_p(t) = F cos(ωt)/(1 + |p|)`.
    pub fn oscillating(mass: f64, detuning: f64, field: f64, omega: f64) -> Self {
        let e0 = move |p: &Momentum| ((norm_sq(p) as f64) + mass * mass).sqrt();
        let mut q = Self::new(
            move |p, t| e0(p) + detuning * (omega * t).cos(),
            move |p, t| e0(p) - detuning * (omega * t).cos(),
            move |p, t| field * (omega * t).cos() / (1.0 + norm(p)),
        );
        q.time_independent = omega == 0.0;
        q
    }
}

/// `A_{H,p}(t)` on `(a_p, b_p)`.
pub fn qed_mode_matrix(params: &QedModelParams, p: &Momentum, t: f64) -> CMatrix {
    qed_matrix_from(
        (params.eps_plus)(p, t),
        (params.eps_minus)(p, t),
        (params.f)(p, t),
    )
}

fn qed_matrix_from(ep: f64, em: f64, f: f64) -> CMatrix {
    let z = cr(0.0);
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(4, 4, &[
        cr(ep), z, z, cr(-f),
        z, cr(em), cr(f), z,
        z, cr(f), cr(-ep), z,
        cr(-f), z, z, cr(-em),
    ]);
    m
}

/// The four nontrivial entries of a pair-block propagator: `U₁ = (1,1)`,
/// `V₁ = (1,4)`, `U₂ = (2,2)`, `V₂ = (2,3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QedBlocks {
    pub u1: C64,
    pub v1: C64,
    pub u2: C64,
    pub v2: C64,
}

impl QedBlocks {
    fn from_matrix(m: &CMatrix) -> Self {
        Self {
            u1: m[(0, 0)],
            v1: m[(0, 3)],
            u2: m[(1, 1)],
            v2: m[(1, 2)],
        }
    }

    /// `|V₁|² + |V₂|²`.
    pub fn shale_term(&self) -> f64 {
        self.v1.norm_sqr() + self.v2.norm_sqr()
    }

    /// `max(||U₁|² + |V₁|² − 1|, ||U₂|² + |V₂|² − 1|)`.
    pub fn unitarity_residual(&self) -> f64 {
        (self.u1.norm_sqr() + self.v1.norm_sqr() - 1.0)
            .abs()
            .max((self.u2.norm_sqr() + self.v2.norm_sqr() - 1.0).abs())
    }
}

/// Exact propagator entries for constant coefficients over a time span `τ`.
///
/// The block on `(a_p, b†_p)` is `[[ε₊, −f], [−f, −ε₋]] = m·I + [[e, −f], [−f, −e]]`
/// with `m = (ε₊ − ε₋)/2`, `e = (ε₊ + ε₋)/2`; with `Ω = √(e² + f²)`,
///
/// ```text
///     U₁ = e^{−iτm}(cos τΩ − i e sin τΩ / Ω),   V₁ =  e^{−iτm} i f sin τΩ / Ω,
///     U₂ = e^{+iτm}(cos τΩ − i e sin τΩ / Ω),   V₂ = −e^{+iτm} i f sin τΩ / Ω.
/// ```
pub fn qed_constant_blocks(eps_plus: f64, eps_minus: f64, f: f64, tau: f64) -> QedBlocks {
    let m = 0.5 * (eps_plus - eps_minus);
    let e = 0.5 * (eps_plus + eps_minus);
    let omega = e.hypot(f);
    let (cs, sn_over) = if omega == 0.0 {
        (1.0, tau)
    } else {
        ((tau * omega).cos(), (tau * omega).sin() / omega)
    };
    let ph = C64::from_polar(1.0, -tau * m);
    let diag = c(cs, -e * sn_over);
    let off = c(0.0, f * sn_over);
    QedBlocks {
        u1: ph * diag,
        v1: ph * off,
        u2: ph.conj() * diag,
        v2: -ph.conj() * off,
    }
}

/// Magnitude `|ū v · 2 sin(τE)| = |f sin(τE)|/E` of the pair-creation
/// amplitude when `ε₊ = ε₋ = ε` (`E = √(ε² + f²)`).
pub fn qed_symmetric_amplitude(eps: f64, f: f64, tau: f64) -> f64 {
    let e = eps.hypot(f);
    if e == 0.0 {
        0.0
    } else {
        (f * (tau * e).sin() / e).abs()
    }
}

/// Propagators of one momentum block over `[s, t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QedDynamics {
    /// `exp(−i ∫ₛᵗ A(τ) dτ)` with the integral by composite Gauss–Legendre.
    pub unordered: CMatrix,
    /// Time-ordered product of midpoint exponentials.
    pub ordered: CMatrix,
    pub blocks: QedBlocks,
    pub shale_term: f64,
    /// Max-entry difference between the two propagators.
    pub ordering_discrepancy: f64,
    /// `‖U*U − I‖_max` of the unordered propagator.
    pub unitarity_residual: f64,
}

/// Five-point Gauss–Legendre nodes and weights on `[−1, 1]`.
const GL5: [(f64, f64); 5] = [
    (0.0, 128.0 / 225.0),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Computes both propagators of `A_{H,p}` from `s` to `t` with `steps`
/// panels / time slices.
pub fn qed_dynamics(
    params: &QedModelParams,
    p: &Momentum,
    s: f64,
    t: f64,
    steps: usize,
) -> Result<QedDynamics> {
    if steps == 0 {
        return Err(Error::BadSteps);
    }
    if !s.is_finite() || !t.is_finite() {
        return Err(Error::BadParameter("times must be finite".into()));
    }
    let dt = (t - s) / steps as f64;
    let mut integral = CMatrix::zeros(4, 4);
    let mut ordered = identity(4);
    for i in 0..steps {
        let mid = s + (i as f64 + 0.5) * dt;
        for &(x, w) in &GL5 {
            integral += qed_mode_matrix(params, p, mid + 0.5 * dt * x) * cr(0.5 * dt * w);
        }
        ordered = expm_hermitian(&qed_mode_matrix(params, p, mid), dt) * ordered;
    }
    let unordered = expm_hermitian(&integral, 1.0);
    let blocks = QedBlocks::from_matrix(&unordered);
    let ordering_discrepancy = max_abs(&(&unordered - &ordered));
    let unitarity_residual = max_abs(&(unordered.adjoint() * &unordered - identity(4)));
    Ok(QedDynamics {
        shale_term: blocks.shale_term(),
        unordered,
        ordered,
        blocks,
        ordering_discrepancy,
        unitarity_residual,
    })
}

/// The instantaneous diagonalization of `A_{H,p}(t)`.
///
/// For `ε₊ = ε₋` this reproduces the pair-block structure of the BCS model
/// with `Δ = f`.
pub fn qed_instantaneous(
    params: &QedModelParams,
    p: &Momentum,
    t: f64,
) -> Result<DiagonalizationResult> {
    diagonalize_fermionic(&qed_mode_matrix(params, p, t), 1e-10)
}
