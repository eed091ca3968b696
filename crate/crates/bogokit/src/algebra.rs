//! Bogoliubov transformations as complex block matrices.
//!
//! A transformation on `n` modes is stored as the pair `(u, v)` of `n × n`
//! complex matrices. It acts on generalized vectors `F = (f₁, f₂)`, which
//! encode `A†(F) = Σ_j f₁_j a†_j + f₂_j a_j`, through the block matrix
//!
//! ```text
//!     V = [[u, v], [v̄, ū]]
//! ```
//!
//! The canonical commutation (bosons) or anticommutation (fermions)
//! relations are preserved by `V` and by `V*` exactly when
//!
//! ```text
//!     u*u ∓ vᵀv̄ = 1,   u*v ∓ vᵀū = 0,   uu* ∓ vv* = 1,   uvᵀ ∓ vuᵀ = 0,
//! ```
//!
//! with `−` for bosons and `+` for fermions. Complex conjugation is entrywise
//! conjugation in the fixed canonical basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, block2, c, conj, cr, split2, CMatrix, CVector, C64};

/// Default tolerance for validating analytically constructed maps.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Particle statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bosonic,
    Fermionic,
}

impl Statistics {
    /// Sign `s` in the relations `u*u + s·vᵀv̄ = 1` etc.:
    /// `−1` for bosons and `+1` for fermions.
    pub fn relation_sign(self) -> f64 {
        match self {
            Statistics::Bosonic => -1.0,
            Statistics::Fermionic => 1.0,
        }
    }

    /// Lower-case name used in the JSON formats.
    pub fn name(self) -> &'static str {
        match self {
            Statistics::Bosonic => "bosonic",
            Statistics::Fermionic => "fermionic",
        }
    }
}

/// Norm used when measuring relation residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualNorm {
    /// Largest absolute entry; dimension independent and cheap (default).
    MaxEntry,
    /// Spectral norm.
    Operator,
}

impl ResidualNorm {
    fn eval(self, m: &CMatrix) -> f64 {
        match self {
            ResidualNorm::MaxEntry => linalg::max_abs(m),
            ResidualNorm::Operator => linalg::op_norm(m),
        }
    }
}

/// A Bogoliubov transformation `V = [[u, v], [v̄, ū]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMap {
    pub u: CMatrix,
    pub v: CMatrix,
    pub statistics: Statistics,
}

/// Generalized vector `F = (f₁, f₂)` encoding `Σ f₁_j a†_j + f₂_j a_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedVector {
    pub f1: CVector,
    pub f2: CVector,
}

impl GeneralizedVector {
    /// Builds a generalized vector, checking that both parts have equal length.
    pub fn new(f1: CVector, f2: CVector) -> Result<Self> {
        if f1.len() != f2.len() {
            return Err(Error::DimensionMismatch(format!(
                "generalized vector parts have lengths {} and {}",
                f1.len(),
                f2.len()
            )));
        }
        Ok(Self { f1, f2 })
    }

    /// `(e_j, 0)`: the generator `a†_j`.
    pub fn creation(n: usize, j: usize) -> Self {
        let mut f1 = CVector::zeros(n);
        f1[j] = cr(1.0);
        Self {
            f1,
            f2: CVector::zeros(n),
        }
    }

    /// `(0, e_j)`: the generator `a_j`.
    pub fn annihilation(n: usize, j: usize) -> Self {
        let mut f2 = CVector::zeros(n);
        f2[j] = cr(1.0);
        Self {
            f1: CVector::zeros(n),
            f2,
        }
    }

    /// Number of modes.
    pub fn dim(&self) -> usize {
        self.f1.len()
    }

    /// Stacked `2n` vector `(f₁; f₂)`.
    pub fn stacked(&self) -> CVector {
        let n = self.dim();
        CVector::from_iterator(2 * n, self.f1.iter().chain(self.f2.iter()).copied())
    }

    /// Inverse of [`GeneralizedVector::stacked`].
    pub fn from_stacked(x: &CVector) -> Self {
        let n = x.len() / 2;
        Self {
            f1: x.rows(0, n).into_owned(),
            f2: x.rows(n, n).into_owned(),
        }
    }
}

/// Residuals of the four defining relations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    /// Residuals of `u*u ∓ vᵀv̄ − 1`, `u*v ∓ vᵀū`, `uu* ∓ vv* − 1`, `uvᵀ ∓ vuᵀ`.
    pub residuals: [f64; 4],
    pub max_residual: f64,
    pub passed: bool,
    pub tolerance: f64,
}

/// Representation conventions for the `2n × 2n` matrix of a transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepresentationTag {
    /// Pairs `(f₁, f₂)` of coefficient vectors in `ℓ² ⊕ ℓ²` (the default).
    L2DirectSum,
    /// `h ⊕ h*`, where the second summand is the conjugate space.
    HplusHstar,
    /// `h ⊕ h` with `(f₁, f₂) ↦ a†(f₁) + a(f̄₂)`; the induced action is not
    /// linear and therefore has no matrix.
    HplusH,
}

impl BogoliubovMap {
    /// Builds a map after checking shapes and finiteness (relations are not
    /// checked; use [`validate_bogoliubov`]).
    pub fn new(u: CMatrix, v: CMatrix, statistics: Statistics) -> Result<Self> {
        if !u.is_square() || !v.is_square() || u.shape() != v.shape() {
            return Err(Error::DimensionMismatch(format!(
                "u is {}x{}, v is {}x{}; both must be square of equal size",
                u.nrows(),
                u.ncols(),
                v.nrows(),
                v.ncols()
            )));
        }
        if !linalg::all_finite(&u) {
            return Err(Error::NonFiniteEntry("u".into()));
        }
        if !linalg::all_finite(&v) {
            return Err(Error::NonFiniteEntry("v".into()));
        }
        Ok(Self { u, v, statistics })
    }

    /// Number of modes `n`.
    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// The identity transformation on `n` modes.
    pub fn identity(n: usize, statistics: Statistics) -> Self {
        Self {
            u: linalg::identity(n),
            v: CMatrix::zeros(n, n),
            statistics,
        }
    }

    /// Passive transformation `u = w`, `v = 0` for a unitary `w`.
    pub fn passive(w: CMatrix, statistics: Statistics) -> Result<Self> {
        let n = w.nrows();
        Self::new(w, CMatrix::zeros(n, n), statistics)
    }

    /// Diagonal bosonic squeeze: `u = diag(cosh ξ_j)`, `v = diag(sinh ξ_j)`.
    pub fn squeeze(xi: &[f64]) -> Self {
        let u = CMatrix::from_diagonal(&CVector::from_iterator(
            xi.len(),
            xi.iter().map(|x| cr(x.cosh())),
        ));
        let v = CMatrix::from_diagonal(&CVector::from_iterator(
            xi.len(),
            xi.iter().map(|x| cr(x.sinh())),
        ));
        Self {
            u,
            v,
            statistics: Statistics::Bosonic,
        }
    }

    /// Bosonic squeeze of strength `xi` on mode `i` of an `n`-mode system.
    pub fn single_squeeze(n: usize, i: usize, xi: f64) -> Self {
        let mut m = Self::identity(n, Statistics::Bosonic);
        m.u[(i, i)] = cr(xi.cosh());
        m.v[(i, i)] = cr(xi.sinh());
        m
    }

    /// Bosonic two-mode squeeze of strength `xi` between modes `i ≠ j`.
    pub fn pair_squeeze(n: usize, i: usize, j: usize, xi: f64) -> Self {
        let mut m = Self::identity(n, Statistics::Bosonic);
        m.u[(i, i)] = cr(xi.cosh());
        m.u[(j, j)] = cr(xi.cosh());
        m.v[(i, j)] = cr(xi.sinh());
        m.v[(j, i)] = cr(xi.sinh());
        m
    }

    /// Fermionic pairing rotation of angle `xi` between modes `i ≠ j`:
    /// `u = cos ξ` on both modes, `v_ij = sin ξ = −v_ji`.
    pub fn pairing_rotation(n: usize, i: usize, j: usize, xi: f64) -> Self {
        let mut m = Self::identity(n, Statistics::Fermionic);
        m.u[(i, i)] = cr(xi.cos());
        m.u[(j, j)] = cr(xi.cos());
        m.v[(i, j)] = cr(xi.sin());
        m.v[(j, i)] = cr(-xi.sin());
        m
    }

    /// Passive Givens rotation between modes `i ≠ j` with mixing angle
    /// `theta` and relative phase `phi`.
    pub fn givens(
        n: usize,
        i: usize,
        j: usize,
        theta: f64,
        phi: f64,
        statistics: Statistics,
    ) -> Self {
        let mut m = Self::identity(n, statistics);
        let (s, co) = theta.sin_cos();
        m.u[(i, i)] = cr(co);
        m.u[(j, j)] = cr(co);
        m.u[(i, j)] = -C64::from_polar(s, phi);
        m.u[(j, i)] = C64::from_polar(s, -phi);
        m
    }

    /// Passive phase rotation `a_i ↦ e^{iφ} a_i`.
    pub fn phase(n: usize, i: usize, phi: f64, statistics: Statistics) -> Self {
        let mut m = Self::identity(n, statistics);
        m.u[(i, i)] = C64::from_polar(1.0, phi);
        m
    }

    /// The `2n × 2n` block matrix `[[u, v], [v̄, ū]]`.
    pub fn block_matrix(&self) -> CMatrix {
        block2(&self.u, &self.v, &conj(&self.v), &conj(&self.u))
    }

    /// Reads `(u, v)` from a `2n × 2n` block matrix, requiring the lower
    /// blocks to equal `(v̄, ū)` within `tol`.
    pub fn from_block_matrix(m: &CMatrix, statistics: Statistics, tol: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "block matrix must be 2n x 2n, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let (a, b, cc, d) = split2(m);
        let dev = linalg::max_abs(&(cc - conj(&b))).max(linalg::max_abs(&(d - conj(&a))));
        if dev > tol {
            return Err(Error::SymmetryViolation(format!(
                "lower blocks differ from the conjugated upper blocks by {dev:e}"
            )));
        }
        Self::new(a, b, statistics)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::BadParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

fn check_shape(map: &BogoliubovMap) -> Result<()> {
    BogoliubovMap::new(map.u.clone(), map.v.clone(), map.statistics).map(|_| ())
}

/// Residuals of the four defining relations in the max-entry norm.
pub fn validate_bogoliubov(map: &BogoliubovMap, tol: f64) -> Result<RelationReport> {
    validate_bogoliubov_with_norm(map, tol, ResidualNorm::MaxEntry)
}

/// Residuals of the four defining relations in the chosen norm.
pub fn validate_bogoliubov_with_norm(
    map: &BogoliubovMap,
    tol: f64,
    norm: ResidualNorm,
) -> Result<RelationReport> {
    check_tol(tol)?;
    check_shape(map)?;
    let s = cr(map.statistics.relation_sign());
    let (u, v) = (&map.u, &map.v);
    let n = map.dim();
    let id = linalg::identity(n);
    let ubar = conj(u);
    let vbar = conj(v);
    let r1 = u.adjoint() * u + v.transpose() * &vbar * s - &id;
    let r2 = u.adjoint() * v + v.transpose() * &ubar * s;
    let r3 = u * u.adjoint() + v * v.adjoint() * s - &id;
    let r4 = u * v.transpose() + v * u.transpose() * s;
    let residuals = [
        norm.eval(&r1),
        norm.eval(&r2),
        norm.eval(&r3),
        norm.eval(&r4),
    ];
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(RelationReport {
        residuals,
        max_residual,
        passed: max_residual <= tol,
        tolerance: tol,
    })
}

/// Deviation `max|V*V − I|` of the full block matrix from unitarity.
pub fn unitarity_residual(map: &BogoliubovMap) -> f64 {
    let b = map.block_matrix();
    linalg::max_abs(&(b.adjoint() * &b - linalg::identity(2 * map.dim())))
}

/// The adjoint `V* = [[u*, vᵀ], [v*, uᵀ]]`, i.e. the map `(u*, vᵀ)`.
pub fn adjoint(map: &BogoliubovMap) -> Result<BogoliubovMap> {
    check_shape(map)?;
    Ok(BogoliubovMap {
        u: map.u.adjoint(),
        v: map.v.transpose(),
        statistics: map.statistics,
    })
}

/// Block product `a · b`, repacked as `(u, v)`.
pub fn compose(a: &BogoliubovMap, b: &BogoliubovMap) -> Result<BogoliubovMap> {
    check_shape(a)?;
    check_shape(b)?;
    if a.statistics != b.statistics {
        return Err(Error::StatisticsMismatch);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose {}-mode and {}-mode maps",
            a.dim(),
            b.dim()
        )));
    }
    let u = &a.u * &b.u + &a.v * conj(&b.v);
    let v = &a.u * &b.v + &a.v * conj(&b.u);
    Ok(BogoliubovMap {
        u,
        v,
        statistics: a.statistics,
    })
}

/// `V F = (u f₁ + v f₂, v̄ f₁ + ū f₂)`: the coefficients of the transformed
/// generator in the original creation/annihilation basis.
pub fn apply_to_generator(map: &BogoliubovMap, f: &GeneralizedVector) -> Result<GeneralizedVector> {
    check_shape(map)?;
    if f.f1.len() != map.dim() || f.f2.len() != map.dim() {
        return Err(Error::DimensionMismatch(format!(
            "generator has length ({}, {}), map has {} modes",
            f.f1.len(),
            f.f2.len(),
            map.dim()
        )));
    }
    let f1 = &map.u * &f.f1 + &map.v * &f.f2;
    let f2 = conj(&map.v) * &f.f1 + conj(&map.u) * &f.f2;
    Ok(GeneralizedVector { f1, f2 })
}

/// Matrix of a linear operator `h → h*` (or `h* → h`) written in the bases
/// `(e_j)` and `(J e_j)`: conjugating with `J` conjugates every entry.
fn conjugate_with_j(m: &CMatrix) -> CMatrix {
    conj(m)
}

/// The `2n × 2n` matrix of the transformation in the requested convention.
///
/// * `L2DirectSum`: `[[u, v], [v̄, ū]]`.
/// * `HplusHstar`: `[[U, J*VJ*], [V, JUJ*]]` with `U = u` and `V = J v`,
///   written in the basis `(e_j) ⊕ (J e_j)`.
/// * `HplusH`: rejected with [`Error::UnsupportedTarget`] (nonlinear).
pub fn convert_representation(map: &BogoliubovMap, target: RepresentationTag) -> Result<CMatrix> {
    check_shape(map)?;
    match target {
        RepresentationTag::L2DirectSum => Ok(map.block_matrix()),
        RepresentationTag::HplusHstar => {
            let big_u = map.u.clone();
            // V = J v maps h → h*; its matrix between (e_j) and (J e_j) is v̄.
            let big_v = conjugate_with_j(&map.v);
            // J* V J* maps h* → h and J U J* maps h* → h*.
            let upper_right = conjugate_with_j(&big_v);
            let lower_right = conjugate_with_j(&big_u);
            Ok(block2(&big_u, &upper_right, &big_v, &lower_right))
        }
        RepresentationTag::HplusH => Err(Error::UnsupportedTarget(
            "the h ⊕ h representation acts nonlinearly and has no matrix".into(),
        )),
    }
}

/// Inverse of [`convert_representation`]: reads `(u, v)` back from a matrix
/// in the given convention, checking the block structure within `tol`.
pub fn from_representation(
    m: &CMatrix,
    source: RepresentationTag,
    statistics: Statistics,
    tol: f64,
) -> Result<BogoliubovMap> {
    match source {
        RepresentationTag::L2DirectSum => BogoliubovMap::from_block_matrix(m, statistics, tol),
        RepresentationTag::HplusHstar => {
            if !m.is_square() || m.nrows() % 2 != 0 {
                return Err(Error::DimensionMismatch(format!(
                    "expected a 2n x 2n matrix, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let (big_u, upper_right, big_v, lower_right) = split2(m);
            let dev = linalg::max_abs(&(upper_right - conjugate_with_j(&big_v)))
                .max(linalg::max_abs(&(lower_right - conjugate_with_j(&big_u))));
            if dev > tol {
                return Err(Error::SymmetryViolation(format!(
                    "h ⊕ h* blocks inconsistent by {dev:e}"
                )));
            }
            BogoliubovMap::new(big_u, conjugate_with_j(&big_v), statistics)
        }
        RepresentationTag::HplusH => Err(Error::UnsupportedTarget(
            "the h ⊕ h representation acts nonlinearly and has no matrix".into(),
        )),
    }
}

/// Imaginary unit, re-exported for building phases in callers.
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Convenience: `e^{iφ}`.
pub fn phase(phi: f64) -> C64 {
    c(phi.cos(), phi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_passes_with_zero_residuals() {
        let r =
            validate_bogoliubov(&BogoliubovMap::identity(3, Statistics::Bosonic), 1e-10).unwrap();
        assert_eq!(r.residuals, [0.0; 4]);
        assert!(r.passed);
    }

    #[test]
    fn hyperbolic_squeeze_passes() {
        let r = validate_bogoliubov(&BogoliubovMap::squeeze(&[0.7]), 1e-10).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn u_equals_v_equals_one_fails_with_unit_residual() {
        let m = BogoliubovMap::new(
            linalg::identity(1),
            linalg::identity(1),
            Statistics::Bosonic,
        )
        .unwrap();
        let r = validate_bogoliubov(&m, 1e-10).unwrap();
        assert_eq!(r.residuals[0], 1.0);
        assert!(!r.passed);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let e = BogoliubovMap::new(
            linalg::identity(2),
            linalg::identity(3),
            Statistics::Bosonic,
        )
        .unwrap_err();
        assert_eq!(e.reason(), "DimensionMismatch");
    }

    #[test]
    fn non_finite_entry_is_rejected() {
        let mut u = linalg::identity(2);
        u[(0, 1)] = cr(f64::NAN);
        let e = BogoliubovMap::new(u, CMatrix::zeros(2, 2), Statistics::Fermionic).unwrap_err();
        assert_eq!(e.reason(), "NonFiniteEntry");
    }

    #[test]
    fn adjoint_of_real_squeeze_is_itself() {
        let m = BogoliubovMap::squeeze(&[0.4, -0.2]);
        assert_eq!(adjoint(&m).unwrap(), m);
    }

    #[test]
    fn compose_squeezes_adds_parameters() {
        let m = compose(
            &BogoliubovMap::squeeze(&[0.3]),
            &BogoliubovMap::squeeze(&[0.45]),
        )
        .unwrap();
        let e = BogoliubovMap::squeeze(&[0.75]);
        assert!(linalg::max_abs(&(m.u - e.u)) < 1e-15);
        assert!(linalg::max_abs(&(m.v - e.v)) < 1e-15);
    }

    #[test]
    fn compose_rejects_mixed_statistics() {
        let a = BogoliubovMap::identity(1, Statistics::Bosonic);
        let b = BogoliubovMap::identity(1, Statistics::Fermionic);
        assert_eq!(compose(&a, &b).unwrap_err(), Error::StatisticsMismatch);
    }

    #[test]
    fn squeeze_applied_to_creation_generator() {
        let xi = 0.6_f64;
        let out = apply_to_generator(
            &BogoliubovMap::squeeze(&[xi]),
            &GeneralizedVector::creation(1, 0),
        )
        .unwrap();
        assert!((out.f1[0] - cr(xi.cosh())).norm() < 1e-15);
        assert!((out.f2[0] - cr(xi.sinh())).norm() < 1e-15);
    }

    #[test]
    fn squeeze_in_direct_sum_representation() {
        let xi = 0.3_f64;
        let m = convert_representation(
            &BogoliubovMap::squeeze(&[xi]),
            RepresentationTag::L2DirectSum,
        )
        .unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[cr(xi.cosh()), cr(xi.sinh()), cr(xi.sinh()), cr(xi.cosh())],
        );
        assert_eq!(m, expected);
    }

    #[test]
    fn nonlinear_representation_is_unsupported() {
        let e = convert_representation(
            &BogoliubovMap::identity(2, Statistics::Bosonic),
            RepresentationTag::HplusH,
        )
        .unwrap_err();
        assert_eq!(e.reason(), "UnsupportedTarget");
    }

    #[test]
    fn identity_is_identity_in_both_linear_representations() {
        let id = BogoliubovMap::identity(3, Statistics::Fermionic);
        for tag in [
            RepresentationTag::L2DirectSum,
            RepresentationTag::HplusHstar,
        ] {
            assert_eq!(
                convert_representation(&id, tag).unwrap(),
                linalg::identity(6)
            );
        }
    }
}
