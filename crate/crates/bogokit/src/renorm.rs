//! Classified formal sums, infinite-tensor-product sequence classes and
//! form-factor decay classes.
//!
//! A possibly divergent sum `Σ_j t_j` is tracked as a [`RenSequence`]: a
//! term generator together with a *declared* tail class. Verdicts are only
//! issued when the declaration makes them rigorous:
//!
//! * `Exact(value)`: the full sum is known analytically.
//! * `PowerDecay { exponent: p, coefficient }`: the terms behave like
//!   `c·j^{−p}`. For `p > 1` the sum is reported as `Summable(value ± bound)`
//!   where the bound comes from the integral test `c·J^{1−p}/(p−1)` beyond the
//!   evaluation horizon `J`. For `p ≤ 1` the sum diverges with the eventual
//!   sign of the terms.
//! * `Unknown`: nothing is decided for infinite sequences.
//!
//! Finite sequences are always summed exactly (up to compensated round-off).

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cr, CVector, C64};

/// Default number of terms evaluated before the tail bound takes over.
pub const DEFAULT_HORIZON: u64 = 1_000_000;

/// Number of terms per block in parallel partial sums. Blocks are combined in
/// index order, so results do not depend on the thread count.
const BLOCK: u64 = 1 << 16;

/// Term generator of a sequence.
pub type TermFn = Arc<dyn Fn(u64) -> C64 + Send + Sync>;

/// Declared asymptotic class of the terms of an infinite sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Tail {
    /// The full sum is known in closed form.
    Exact { value: f64 },
    /// Terms behave like `coefficient · j^{−exponent}`. When `coefficient` is
    /// absent it is estimated from the last evaluated block (documented as an
    /// estimate; the declaration of the exponent is still what decides).
    PowerDecay {
        exponent: f64,
        coefficient: Option<f64>,
    },
    /// No information.
    Unknown,
}

impl Tail {
    /// Power decay without a declared coefficient.
    pub fn power(exponent: f64) -> Self {
        Tail::PowerDecay {
            exponent,
            coefficient: None,
        }
    }
}

/// Verdict on a formal sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Classification {
    /// Converges to `value` with `|sum − value| ≤ bound`.
    Summable { value: C64, bound: f64 },
    /// Diverges to `+∞`.
    DivergentPlus,
    /// Diverges to `−∞`.
    DivergentMinus,
    /// Not decidable from the declaration.
    Indeterminate,
}

impl Classification {
    /// `true` for [`Classification::Summable`].
    pub fn is_summable(&self) -> bool {
        matches!(self, Classification::Summable { .. })
    }

    /// `true` for both divergent variants.
    pub fn is_divergent(&self) -> bool {
        matches!(
            self,
            Classification::DivergentPlus | Classification::DivergentMinus
        )
    }

    /// The summed value, if summable.
    pub fn value(&self) -> Option<C64> {
        match self {
            Classification::Summable { value, .. } => Some(*value),
            _ => None,
        }
    }

    /// Short name, e.g. `"DivergentMinus"`.
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Summable { .. } => "Summable",
            Classification::DivergentPlus => "DivergentPlus",
            Classification::DivergentMinus => "DivergentMinus",
            Classification::Indeterminate => "Indeterminate",
        }
    }
}

/// Three-valued answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ternary {
    Yes,
    No,
    Unknown,
}

/// A formal sum `Σ_{j ≥ start} t_j`, finite or infinite, with declared tail.
#[derive(Clone)]
pub struct RenSequence {
    terms: TermFn,
    /// First index.
    pub start: u64,
    /// Number of terms; `None` for an infinite sequence.
    pub len: Option<u64>,
    /// Declared tail class (ignored for finite sequences).
    pub tail: Tail,
    /// Number of terms evaluated for infinite sequences.
    pub horizon: u64,
}

impl fmt::Debug for RenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RenSequence")
            .field("start", &self.start)
            .field("len", &self.len)
            .field("tail", &self.tail)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

impl RenSequence {
    /// Infinite sequence `j ↦ terms(j)` for `j ≥ start`.
    pub fn infinite(
        start: u64,
        tail: Tail,
        terms: impl Fn(u64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            terms: Arc::new(terms),
            start,
            len: None,
            tail,
            horizon: DEFAULT_HORIZON,
        }
    }

    /// Infinite real-valued sequence.
    pub fn infinite_real(
        start: u64,
        tail: Tail,
        terms: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::infinite(start, tail, move |j| cr(terms(j)))
    }

    /// Finite sequence with the given values, indexed from 1.
    pub fn finite(values: Vec<C64>) -> Self {
        let len = values.len() as u64;
        let values = Arc::new(values);
        Self {
            terms: Arc::new(move |j| values[(j - 1) as usize]),
            start: 1,
            len: Some(len),
            tail: Tail::Exact { value: 0.0 },
            horizon: len,
        }
    }

    /// Finite real-valued sequence, indexed from 1.
    pub fn finite_real(values: Vec<f64>) -> Self {
        Self::finite(values.into_iter().map(cr).collect())
    }

    /// Replaces the evaluation horizon for infinite sequences.
    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon.max(2);
        self
    }

    /// Replaces the declared tail.
    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    /// Evaluates term `j`.
    pub fn term(&self, j: u64) -> C64 {
        (self.terms)(j)
    }

    /// Term generator, for composing derived sequences.
    pub fn term_fn(&self) -> TermFn {
        self.terms.clone()
    }

    /// Partial sum over `start..start+count` (compensated, block-parallel,
    /// deterministic).
    pub fn partial_sum(&self, count: u64) -> C64 {
        let (sum, _) = block_sum(&self.terms, self.start, count);
        sum
    }

    /// Classifies the sum according to the declared tail.
    pub fn classify(&self) -> Classification {
        classify_ren1(self)
    }

    /// Termwise difference `other − self` with the given declared tail.
    pub fn difference(&self, other: &RenSequence, tail: Tail) -> RenSequence {
        let (a, b) = (self.terms.clone(), other.terms.clone());
        RenSequence {
            terms: Arc::new(move |j| b(j) - a(j)),
            start: self.start,
            len: self.len,
            tail,
            horizon: self.horizon.max(other.horizon),
        }
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    re: (f64, f64),
    im: (f64, f64),
    abs: f64,
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let t = acc.0 + x;
    if acc.0.abs() >= x.abs() {
        acc.1 += (acc.0 - t) + x;
    } else {
        acc.1 += (x - t) + acc.0;
    }
    acc.0 = t;
}

impl KahanSum {
    /// Adds one term.
    pub fn add(&mut self, z: C64) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
        self.abs += z.norm();
    }

    /// Merges another accumulator (used when combining blocks in order).
    pub fn merge(&mut self, other: &KahanSum) {
        neumaier(&mut self.re, other.re.0);
        neumaier(&mut self.re, other.re.1);
        neumaier(&mut self.im, other.im.0);
        neumaier(&mut self.im, other.im.1);
        self.abs += other.abs;
    }

    /// Current compensated total.
    pub fn total(&self) -> C64 {
        C64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }

    /// Sum of absolute values of all terms (for round-off bounds).
    pub fn abs_total(&self) -> f64 {
        self.abs
    }
}

/// Compensated sum of `count` terms from `start`; returns the sum and a
/// round-off bound.
fn block_sum(terms: &TermFn, start: u64, count: u64) -> (C64, f64) {
    let nblocks = count.div_ceil(BLOCK);
    let partials: Vec<KahanSum> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let lo = start + b * BLOCK;
            let hi = (lo + BLOCK).min(start + count);
            let mut k = KahanSum::default();
            for j in lo..hi {
                k.add(terms(j));
            }
            k
        })
        .collect();
    let mut total = KahanSum::default();
    for p in &partials {
        total.merge(p);
    }
    (total.total(), 4.0 * f64::EPSILON * total.abs_total())
}

/// Classifies a formal sum by its declared tail.
pub fn classify_ren1(seq: &RenSequence) -> Classification {
    if let Some(len) = seq.len {
        let (value, bound) = block_sum(&seq.terms, seq.start, len);
        return Classification::Summable { value, bound };
    }
    match seq.tail {
        Tail::Exact { value } => Classification::Summable {
            value: cr(value),
            bound: 0.0,
        },
        Tail::Unknown => Classification::Indeterminate,
        Tail::PowerDecay {
            exponent,
            coefficient,
        } => {
            let n = seq.horizon.max(2);
            if exponent > 1.0 {
                let (value, roundoff) = block_sum(&seq.terms, seq.start, n);
                let last = (seq.start + n - 1).max(1) as f64;
                let c = coefficient.unwrap_or_else(|| estimate_coefficient(seq, n, exponent));
                let tail_bound = c * last.powf(1.0 - exponent) / (exponent - 1.0);
                Classification::Summable {
                    value,
                    bound: tail_bound + roundoff,
                }
            } else {
                eventual_sign(seq, n)
            }
        }
    }
}

/// `max |t_j|·j^p` over the last half of the evaluated range.
fn estimate_coefficient(seq: &RenSequence, n: u64, exponent: f64) -> f64 {
    let hi = seq.start + n;
    let lo = seq.start + n / 2;
    let step = ((hi - lo) / 1024).max(1);
    (lo..hi)
        .step_by(step as usize)
        .map(|j| seq.term(j).norm() * (j.max(1) as f64).powf(exponent))
        .fold(0.0, f64::max)
}

/// Sign of the terms over the last half of the evaluated range: all positive
/// gives `DivergentPlus`, all negative `DivergentMinus`, else `Indeterminate`.
fn eventual_sign(seq: &RenSequence, n: u64) -> Classification {
    let hi = seq.start + n;
    let lo = seq.start + n / 2;
    let step = ((hi - lo) / 4096).max(1);
    let (mut pos, mut neg) = (true, true);
    for j in (lo..hi).step_by(step as usize) {
        let t = seq.term(j);
        if t.im.abs() > 1e-12 * t.re.abs().max(f64::MIN_POSITIVE) {
            return Classification::Indeterminate;
        }
        pos &= t.re > 0.0;
        neg &= t.re < 0.0;
    }
    match (pos, neg) {
        (true, false) => Classification::DivergentPlus,
        (false, true) => Classification::DivergentMinus,
        _ => Classification::Indeterminate,
    }
}

/// Ren₁ equivalence: `s1 ∼ s2` iff `s2 − s1` is summable with sum 0.
///
/// `diff_tail` declares the tail of the difference sequence. The answer is
/// `Yes` when the difference is summable with `|value| + bound ≤ tol`, `No`
/// when it diverges or provably sums to something nonzero, else `Unknown`.
pub fn ren1_equivalent(s1: &RenSequence, s2: &RenSequence, diff_tail: Tail, tol: f64) -> Ternary {
    match s1.difference(s2, diff_tail).classify() {
        Classification::Summable { value, bound } => {
            if value.norm() + bound <= tol {
                Ternary::Yes
            } else if value.norm() - bound > tol {
                Ternary::No
            } else {
                Ternary::Unknown
            }
        }
        Classification::DivergentPlus | Classification::DivergentMinus => Ternary::No,
        Classification::Indeterminate => Ternary::Unknown,
    }
}

/// Value of an infinite product of norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ProductNorm {
    /// Converges to a positive value, `|log product − log value| ≤ log_bound`.
    Value { value: f64, log_bound: f64 },
    /// Converges to zero.
    Zero,
    /// Diverges to infinity.
    Divergent,
    /// Not decidable from the declaration.
    Unknown,
}

/// Classification of a family of per-mode vector norms `‖Ψ_k‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItpFamilyReport {
    /// `Π ‖Ψ_k‖ < ∞` (convergence to 0 included).
    pub is_c: Ternary,
    /// `Σ |‖Ψ_k‖ − 1| < ∞`.
    pub is_c0: Ternary,
    pub product_norm: ProductNorm,
}

/// Classifies a family of norms `k ↦ ‖Ψ_k‖` (`k ≥ 1`).
///
/// `tail` declares the decay of `|‖Ψ_k‖ − 1|`; the same exponent governs
/// `log ‖Ψ_k‖`, whose sum decides the product.
pub fn classify_itp_family(
    norms: impl Fn(u64) -> f64 + Send + Sync + 'static,
    tail: Tail,
    horizon: u64,
) -> ItpFamilyReport {
    let norms: Arc<dyn Fn(u64) -> f64 + Send + Sync> = Arc::new(norms);
    let n0 = norms.clone();
    let dev =
        RenSequence::infinite_real(1, tail, move |k| (n0(k) - 1.0).abs()).with_horizon(horizon);
    let is_c0 = match dev.classify() {
        Classification::Summable { .. } => Ternary::Yes,
        Classification::DivergentPlus | Classification::DivergentMinus => Ternary::No,
        Classification::Indeterminate => Ternary::Unknown,
    };
    if (1..=horizon).any(|k| norms(k) == 0.0) {
        return ItpFamilyReport {
            is_c: Ternary::Yes,
            is_c0,
            product_norm: ProductNorm::Zero,
        };
    }
    let log_tail = match tail {
        // |log x| ≤ 2|x − 1| for x ≥ 1/2, so a declared coefficient doubles.
        Tail::PowerDecay {
            exponent,
            coefficient,
        } => Tail::PowerDecay {
            exponent,
            coefficient: coefficient.map(|c| 2.0 * c),
        },
        Tail::Exact { value } if value == 0.0 => Tail::Exact { value: 0.0 },
        _ => Tail::Unknown,
    };
    let n1 = norms.clone();
    let logs = RenSequence::infinite_real(1, log_tail, move |k| n1(k).ln()).with_horizon(horizon);
    let (is_c, product_norm) = match logs.classify() {
        Classification::Summable { value, bound } => (
            Ternary::Yes,
            ProductNorm::Value {
                value: value.re.exp(),
                log_bound: bound,
            },
        ),
        Classification::DivergentMinus => (Ternary::Yes, ProductNorm::Zero),
        Classification::DivergentPlus => (Ternary::No, ProductNorm::Divergent),
        Classification::Indeterminate => {
            // C₀ implies C even when the product value cannot be certified.
            (
                if is_c0 == Ternary::Yes {
                    Ternary::Yes
                } else {
                    Ternary::Unknown
                },
                ProductNorm::Unknown,
            )
        }
    };
    ItpFamilyReport {
        is_c,
        is_c0,
        product_norm,
    }
}

/// Strong or weak equivalence of two product vectors via their overlaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquivalenceMode {
    /// `Σ |⟨Φ_k, Ψ_k⟩ − 1| < ∞`.
    Strong,
    /// `Σ | |⟨Φ_k, Ψ_k⟩| − 1 | < ∞`.
    Weak,
}

/// Overall equivalence verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equivalence {
    Equivalent,
    WeaklyEquivalent,
    Inequivalent,
    Unknown,
}

fn ternary_of(c: Classification) -> Ternary {
    match c {
        Classification::Summable { .. } => Ternary::Yes,
        Classification::DivergentPlus | Classification::DivergentMinus => Ternary::No,
        Classification::Indeterminate => Ternary::Unknown,
    }
}

/// Tests one equivalence notion for overlaps `k ↦ ⟨Φ_k, Ψ_k⟩` (`k ≥ 1`);
/// `tail` declares the decay of the corresponding deviation sequence.
pub fn itp_equivalence(
    overlaps: impl Fn(u64) -> C64 + Send + Sync + 'static,
    mode: EquivalenceMode,
    tail: Tail,
    horizon: u64,
) -> Ternary {
    let seq = match mode {
        EquivalenceMode::Strong => {
            RenSequence::infinite_real(1, tail, move |k| (overlaps(k) - cr(1.0)).norm())
        }
        EquivalenceMode::Weak => {
            RenSequence::infinite_real(1, tail, move |k| (overlaps(k).norm() - 1.0).abs())
        }
    };
    ternary_of(seq.with_horizon(horizon).classify())
}

/// Combines strong and weak tests into one verdict (strong implies weak).
pub fn compare_itp(
    overlaps: impl Fn(u64) -> C64 + Send + Sync + Clone + 'static,
    strong_tail: Tail,
    weak_tail: Tail,
    horizon: u64,
) -> Equivalence {
    let strong = itp_equivalence(
        overlaps.clone(),
        EquivalenceMode::Strong,
        strong_tail,
        horizon,
    );
    if strong == Ternary::Yes {
        return Equivalence::Equivalent;
    }
    match (
        strong,
        itp_equivalence(overlaps, EquivalenceMode::Weak, weak_tail, horizon),
    ) {
        (Ternary::No, Ternary::Yes) => Equivalence::WeaklyEquivalent,
        (_, Ternary::No) => Equivalence::Inequivalent,
        _ => Equivalence::Unknown,
    }
}

/// Decides whether two product vectors define the same functional, i.e.
/// `fam2_k = c_k·fam1_k` with `Π c_k = 1`.
///
/// The families are given up to a common truncation; `tail_identical`
/// declares that `fam2_k = fam1_k` beyond it. Without that declaration a
/// positive answer is `Unknown`.
pub fn same_functional(
    fam1: &[CVector],
    fam2: &[CVector],
    tail_identical: bool,
    tol: f64,
) -> Result<Ternary> {
    if fam1.len() != fam2.len() {
        return Err(Error::DimensionMismatch(format!(
            "families have {} and {} factors",
            fam1.len(),
            fam2.len()
        )));
    }
    let mut product = cr(1.0);
    for (k, (a, b)) in fam1.iter().zip(fam2).enumerate() {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "factor {k} has lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        let na = a.norm_squared();
        if na == 0.0 {
            if b.norm() > tol {
                return Ok(Ternary::No);
            }
            continue;
        }
        let ck = a.dotc(b) / cr(na);
        let resid = (b - a * ck).norm();
        if resid > tol * b.norm().max(1.0) {
            return Ok(Ternary::No);
        }
        product *= ck;
    }
    if !tail_identical {
        return Ok(Ternary::Unknown);
    }
    Ok(if (product - cr(1.0)).norm() <= tol {
        Ternary::Yes
    } else {
        Ternary::No
    })
}

/// Declared decay of a form factor `φ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FormTail {
    /// `φ_k = 0` beyond the supplied entries.
    FiniteSupport,
    /// `|φ_k| ≍ k^{−exponent} (log k)^{−log_exponent}`.
    PowerDecay { exponent: f64, log_exponent: f64 },
    /// No information.
    Unknown,
}

/// Strongest sequence-space class of a form factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FormFactorClass {
    FiniteSupport,
    L1,
    /// In `ℓ^q` for every `q > p` (and for `q = p` itself when `attained`),
    /// with `1 ≤ p < 2`.
    Lp {
        p: f64,
        attained: bool,
    },
    /// In `ℓ²` but in no `ℓ^q` with `q < 2`.
    L2Only,
    NotL2,
    Unknown,
}

impl FormFactorClass {
    /// Position in the inclusion order `FiniteSupport ⊂ L1 ⊂ Lp ⊂ L2Only`
    /// (smaller is stronger); `None` for `NotL2`/`Unknown`.
    pub fn rank(&self) -> Option<u8> {
        match self {
            FormFactorClass::FiniteSupport => Some(0),
            FormFactorClass::L1 => Some(1),
            FormFactorClass::Lp { .. } => Some(2),
            FormFactorClass::L2Only => Some(3),
            _ => None,
        }
    }
}

/// Membership of `k^{−s}(log k)^{−r}` in `ℓ^q`: `sq > 1`, or `sq = 1` and
/// `rq > 1`.
fn power_in_lq(s: f64, r: f64, q: f64) -> bool {
    let sq = s * q;
    sq > 1.0 + 1e-12 || ((sq - 1.0).abs() <= 1e-12 && r * q > 1.0)
}

/// Strongest class among `FiniteSupport ⊂ ℓ¹ ⊂ ℓᵖ ⊂ ℓ²` for a form factor
/// whose supplied entries `phi` are followed by the declared tail.
pub fn classify_form_factor(phi: &[C64], tail: FormTail) -> FormFactorClass {
    if phi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return FormFactorClass::Unknown;
    }
    match tail {
        FormTail::FiniteSupport => FormFactorClass::FiniteSupport,
        FormTail::Unknown => FormFactorClass::Unknown,
        FormTail::PowerDecay {
            exponent: s,
            log_exponent: r,
        } => {
            if power_in_lq(s, r, 1.0) {
                FormFactorClass::L1
            } else if s > 0.5 + 1e-12 {
                let p = (1.0 / s).max(1.0);
                FormFactorClass::Lp {
                    p,
                    attained: power_in_lq(s, r, p),
                }
            } else if power_in_lq(s, r, 2.0) {
                FormFactorClass::L2Only
            } else {
                FormFactorClass::NotL2
            }
        }
    }
}
