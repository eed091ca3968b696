//! Shared generators for integration tests.
#![allow(dead_code)]

use bogokit::algebra::{compose, BogoliubovMap, Statistics};
use bogokit::diagonalize::QuadraticHamiltonian;
use bogokit::linalg::{c, eigh, max_abs, CMatrix};
use rand::Rng;

/// One elementary factor of a random map.
#[derive(Debug, Clone, Copy)]
pub enum Step {
    /// Single-mode squeeze (bosons) or pairing rotation with the next mode
    /// (fermions).
    Squeeze { i: usize, xi: f64 },
    /// Two-mode squeeze (bosons) or pairing rotation (fermions).
    Pair { i: usize, j: usize, xi: f64 },
    /// Passive Givens rotation.
    Givens { i: usize, j: usize, theta: f64, phi: f64 },
    /// Passive phase.
    Phase { i: usize, phi: f64 },
}

fn elementary(n: usize, stats: Statistics, step: Step) -> BogoliubovMap {
    let other = |i: usize, j: usize| if i == j { (i + 1) % n } else { j };
    match (stats, step) {
        (_, Step::Phase { i, phi }) => BogoliubovMap::phase(n, i % n, phi, stats),
        (_, Step::Givens { i, j, theta, phi }) if n > 1 => {
            let (i, j) = (i % n, j % n);
            BogoliubovMap::givens(n, i, other(i, j), theta, phi, stats)
        }
        (Statistics::Bosonic, Step::Squeeze { i, xi }) => BogoliubovMap::single_squeeze(n, i % n, xi),
        (Statistics::Bosonic, Step::Pair { i, j, xi }) if n > 1 => {
            let (i, j) = (i % n, j % n);
            BogoliubovMap::pair_squeeze(n, i, other(i, j), xi)
        }
        (Statistics::Bosonic, Step::Pair { i, xi, .. }) => BogoliubovMap::single_squeeze(n, i % n, xi),
        (Statistics::Fermionic, Step::Squeeze { i, xi }) if n > 1 => {
            let i = i % n;
            BogoliubovMap::pairing_rotation(n, i, other(i, i), xi)
        }
        (Statistics::Fermionic, Step::Pair { i, j, xi }) if n > 1 => {
            let (i, j) = (i % n, j % n);
            BogoliubovMap::pairing_rotation(n, i, other(i, j), xi)
        }
        _ => BogoliubovMap::identity(n, stats),
    }
}

/// Left-to-right composition of elementary factors.
pub fn build_map(n: usize, stats: Statistics, steps: &[Step]) -> BogoliubovMap {
    steps.iter().fold(BogoliubovMap::identity(n, stats), |acc, &s| {
        compose(&acc, &elementary(n, stats, s)).expect("same shape and statistics")
    })
}

/// Random elementary step; squeezes bounded by `max_xi`.
pub fn random_step(rng: &mut impl Rng, n: usize, max_xi: f64) -> Step {
    let i = rng.random_range(0..n);
    let j = rng.random_range(0..n);
    let angle = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    match rng.random_range(0..4) {
        0 => Step::Squeeze { i, xi: rng.random_range(-max_xi..max_xi) },
        1 => Step::Pair { i, j, xi: rng.random_range(-max_xi..max_xi) },
        2 => Step::Givens { i, j, theta: angle, phi: rng.random_range(-3.0..3.0) },
        _ => Step::Phase { i, phi: angle },
    }
}

/// Random map of `n` modes composed of `depth` elementary factors.
pub fn random_map(rng: &mut impl Rng, n: usize, stats: Statistics, depth: usize, max_xi: f64) -> BogoliubovMap {
    let steps: Vec<Step> = (0..depth).map(|_| random_step(rng, n, max_xi)).collect();
    build_map(n, stats, &steps)
}

/// Random complex matrix with entries in the unit square.
pub fn random_matrix(rng: &mut impl Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random admissible quadratic Hamiltonian.
///
/// Bosonic: `h = B*B + I` and `k` symmetric with `‖k‖ ≤ gram · λ_min(h)`, so
/// `‖h^{-1/2} k h^{-1/2}‖ ≤ gram`. Fermionic: Hermitian `h`, antisymmetric `k`.
pub fn random_hamiltonian(rng: &mut impl Rng, n: usize, stats: Statistics, gram: f64) -> QuadraticHamiltonian {
    let b = random_matrix(rng, n);
    let raw = random_matrix(rng, n);
    match stats {
        Statistics::Bosonic => {
            let h = b.adjoint() * &b + CMatrix::identity(n, n);
            let k = &raw + raw.transpose();
            let lambda_min = eigh(&h).0.into_iter().fold(f64::INFINITY, f64::min);
            let k_norm = k.clone().singular_values().max();
            let k = if k_norm > 0.0 { k * c(gram * lambda_min / k_norm, 0.0) } else { k };
            QuadraticHamiltonian::new(h, k, stats, 1e-12).expect("admissible bosonic input")
        }
        Statistics::Fermionic => {
            let h = (&b + b.adjoint()) * c(0.5, 0.0);
            let k = &raw - raw.transpose();
            QuadraticHamiltonian::new(h, k, stats, 1e-12).expect("admissible fermionic input")
        }
    }
}

/// `max |a − b|` entrywise.
pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}
