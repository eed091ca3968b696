//! JSON and CSV formats shared by the command-line tool and the bindings.
//!
//! Complex matrices are stored row-major as separate real and imaginary
//! parts:
//!
//! ```json
//! { "rows": 2, "cols": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]] }
//! ```
//!
//! `im` may be omitted for real matrices. Sequences may be given as explicit
//! term lists or as closed-form expressions in the index `k` (evaluated with
//! `evalexpr`; functions such as `math::sin`, `math::ln`, `math::pow` and the
//! constant `pi` are available).

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node,
    Value,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{BogoliubovMap, RelationReport, Statistics};
use crate::diagonalize::{DiagonalizationResult, QuadraticHamiltonian};
use crate::error::{Error, Result};
use crate::fock::StateVector;
use crate::linalg::{c, CMatrix, CVector, C64};
use crate::mode_decomp::{FermionicModeKind, Mode, ModeDecomposition};
use crate::renorm::{Classification, FormTail, RenSequence, Tail, DEFAULT_HORIZON};

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = m.nrows();
        let cols = m.ncols();
        let re = (0..rows)
            .map(|i| (0..cols).map(|j| m[(i, j)].re).collect())
            .collect();
        let im = (0..rows)
            .map(|i| (0..cols).map(|j| m[(i, j)].im).collect())
            .collect();
        Self {
            rows,
            cols,
            re,
            im: Some(im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let shape_ok = |rows: &Vec<Vec<f64>>| {
            rows.len() == self.rows && rows.iter().all(|r| r.len() == self.cols)
        };
        if !shape_ok(&self.re) || self.im.as_ref().is_some_and(|im| !shape_ok(im)) {
            return Err(Error::Parse(format!(
                "matrix entries do not match the declared shape {}x{}",
                self.rows, self.cols
            )));
        }
        let m = CMatrix::from_fn(self.rows, self.cols, |i, j| {
            c(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        });
        Ok(m)
    }
}

/// Complex vector as separate parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl VectorJson {
    pub fn from_vector(v: &CVector) -> Self {
        Self {
            re: v.iter().map(|z| z.re).collect(),
            im: Some(v.iter().map(|z| z.im).collect()),
        }
    }

    pub fn to_vector(&self) -> Result<CVector> {
        if let Some(im) = &self.im {
            if im.len() != self.re.len() {
                return Err(Error::Parse(
                    "real and imaginary parts differ in length".into(),
                ));
            }
        }
        Ok(CVector::from_fn(self.re.len(), |i, _| {
            c(self.re[i], self.im.as_ref().map_or(0.0, |im| im[i]))
        }))
    }
}

/// A Bogoliubov map file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    pub statistics: Statistics,
    pub u: MatrixJson,
    pub v: MatrixJson,
}

impl MapJson {
    pub fn from_map(map: &BogoliubovMap) -> Self {
        Self {
            statistics: map.statistics,
            u: MatrixJson::from_matrix(&map.u),
            v: MatrixJson::from_matrix(&map.v),
        }
    }

    pub fn to_map(&self) -> Result<BogoliubovMap> {
        BogoliubovMap::new(self.u.to_matrix()?, self.v.to_matrix()?, self.statistics)
    }
}

/// A quadratic Hamiltonian file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianJson {
    pub statistics: Statistics,
    pub h: MatrixJson,
    pub k: MatrixJson,
}

impl HamiltonianJson {
    pub fn from_hamiltonian(ham: &QuadraticHamiltonian) -> Self {
        Self {
            statistics: ham.statistics,
            h: MatrixJson::from_matrix(&ham.h),
            k: MatrixJson::from_matrix(&ham.k),
        }
    }

    pub fn to_hamiltonian(&self, tol: f64) -> Result<QuadraticHamiltonian> {
        QuadraticHamiltonian::new(
            self.h.to_matrix()?,
            self.k.to_matrix()?,
            self.statistics,
            tol,
        )
    }
}

/// A truncated Fock state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVectorJson {
    pub cutoff: usize,
    pub modes: usize,
    pub amplitudes: VectorJson,
}

impl StateVectorJson {
    pub fn from_state(s: &StateVector) -> Self {
        Self {
            cutoff: s.cutoff,
            modes: s.modes,
            amplitudes: VectorJson::from_vector(&s.amplitudes),
        }
    }

    pub fn to_state(&self) -> Result<StateVector> {
        Ok(StateVector {
            cutoff: self.cutoff,
            modes: self.modes,
            amplitudes: self.amplitudes.to_vector()?,
        })
    }
}

/// Parameters of one mode of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeJson {
    Bosonic {
        mu: f64,
        nu: f64,
        f: VectorJson,
        g: VectorJson,
    },
    Invariant {
        f: VectorJson,
        g: VectorJson,
    },
    ParticleHole {
        f: VectorJson,
        g: VectorJson,
    },
    CooperPair {
        alpha: f64,
        beta: f64,
        f_even: VectorJson,
        f_odd: VectorJson,
        g_even: VectorJson,
        g_odd: VectorJson,
    },
}

/// A mode decomposition with its reconstruction residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDecompositionJson {
    pub statistics: Statistics,
    pub residual: f64,
    pub modes: Vec<ModeJson>,
}

impl ModeDecompositionJson {
    pub fn from_decomposition(d: &ModeDecomposition) -> Self {
        let v = VectorJson::from_vector;
        let modes = d
            .modes
            .iter()
            .map(|m| match m {
                Mode::Bosonic(b) => ModeJson::Bosonic {
                    mu: b.mu,
                    nu: b.nu,
                    f: v(&b.f),
                    g: v(&b.g),
                },
                Mode::Fermionic(FermionicModeKind::Invariant { f, g }) => {
                    ModeJson::Invariant { f: v(f), g: v(g) }
                }
                Mode::Fermionic(FermionicModeKind::ParticleHole { f, g }) => {
                    ModeJson::ParticleHole { f: v(f), g: v(g) }
                }
                Mode::Fermionic(FermionicModeKind::CooperPair {
                    alpha,
                    beta,
                    f_even,
                    f_odd,
                    g_even,
                    g_odd,
                }) => ModeJson::CooperPair {
                    alpha: *alpha,
                    beta: *beta,
                    f_even: v(f_even),
                    f_odd: v(f_odd),
                    g_even: v(g_even),
                    g_odd: v(g_odd),
                },
            })
            .collect();
        Self {
            statistics: d.statistics,
            residual: d.residual,
            modes,
        }
    }
}

/// Output of a diagonalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizationJson {
    pub statistics: Statistics,
    pub energies: Vec<f64>,
    pub residual: f64,
    pub u: MatrixJson,
    pub v: MatrixJson,
    /// `½(tr E − tr h)`.
    pub normal_ordering_constant: f64,
}

impl DiagonalizationJson {
    pub fn new(res: &DiagonalizationResult, normal_ordering_constant: f64) -> Self {
        Self {
            statistics: res.map.statistics,
            energies: res.energies.clone(),
            residual: res.residual,
            u: MatrixJson::from_matrix(&res.map.u),
            v: MatrixJson::from_matrix(&res.map.v),
            normal_ordering_constant,
        }
    }
}

/// Relation report plus the map size, as printed by `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationJson {
    pub statistics: Statistics,
    pub dimension: usize,
    #[serde(flatten)]
    pub report: RelationReport,
}

/// A closed-form real expression in the index `k`.
#[derive(Clone)]
pub struct TermExpr {
    source: String,
    node: Arc<Node<DefaultNumericTypes>>,
}

impl std::fmt::Debug for TermExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("TermExpr").field(&self.source).finish()
    }
}

impl TermExpr {
    pub fn parse(source: &str) -> Result<Self> {
        let node = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| Error::Parse(format!("expression {source:?}: {e}")))?;
        let expr = Self {
            source: source.to_owned(),
            node: Arc::new(node),
        };
        // Surface unknown identifiers at parse time.
        expr.try_eval(1.0)?;
        Ok(expr)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn try_eval(&self, k: f64) -> Result<f64> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        ctx.set_value("k".into(), Value::Float(k))
            .expect("context accepts floats");
        ctx.set_value("pi".into(), Value::Float(std::f64::consts::PI))
            .expect("context accepts floats");
        self.node
            .eval_number_with_context(&ctx)
            .map_err(|e| Error::Parse(format!("expression {:?} at k = {k}: {e}", self.source)))
    }

    /// Evaluates at `k`; evaluation errors become NaN (the expression was
    /// checked at parse time, so this only happens for domain errors).
    pub fn eval(&self, k: f64) -> f64 {
        self.try_eval(k).unwrap_or(f64::NAN)
    }
}

/// Complex term `re(k) + i·im(k)`.
#[derive(Debug, Clone)]
pub struct ComplexExpr {
    pub re: TermExpr,
    pub im: Option<TermExpr>,
}

impl ComplexExpr {
    pub fn parse(re: &str, im: Option<&str>) -> Result<Self> {
        Ok(Self {
            re: TermExpr::parse(re)?,
            im: im.map(TermExpr::parse).transpose()?,
        })
    }

    pub fn eval(&self, k: f64) -> C64 {
        c(self.re.eval(k), self.im.as_ref().map_or(0.0, |e| e.eval(k)))
    }
}

/// A sequence to classify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SequenceSpec {
    /// Explicit finitely many terms (indexed from 1).
    Finite {
        re: Vec<f64>,
        #[serde(default)]
        im: Option<Vec<f64>>,
    },
    /// Closed-form terms for `k ≥ start` with a declared tail.
    Expression {
        re: String,
        #[serde(default)]
        im: Option<String>,
        #[serde(default = "default_start")]
        start: u64,
        tail: Tail,
        #[serde(default)]
        horizon: Option<u64>,
    },
}

fn default_start() -> u64 {
    1
}

impl SequenceSpec {
    pub fn build(&self) -> Result<RenSequence> {
        match self {
            SequenceSpec::Finite { re, im } => {
                let v = VectorJson {
                    re: re.clone(),
                    im: im.clone(),
                }
                .to_vector()?;
                Ok(RenSequence::finite(v.iter().copied().collect()))
            }
            SequenceSpec::Expression {
                re,
                im,
                start,
                tail,
                horizon,
            } => {
                let expr = ComplexExpr::parse(re, im.as_deref())?;
                Ok(
                    RenSequence::infinite(*start, *tail, move |k| expr.eval(k as f64))
                        .with_horizon(horizon.unwrap_or(DEFAULT_HORIZON)),
                )
            }
        }
    }
}

/// Input of the `classify` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassifyInput {
    /// Implementability of a finite map.
    Map { map: MapJson },
    /// A formal sum.
    Sequence { sequence: SequenceSpec },
    /// A form factor `φ_k`, `k = 1 …`, with declared tail.
    FormFactor { values: VectorJson, tail: FormTail },
}

/// Input of the `itp` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ItpSpec {
    /// Per-factor norms `k ↦ ‖Ψ_k‖`; `tail` declares `|‖Ψ_k‖ − 1|`.
    Family {
        norms: String,
        tail: Tail,
        #[serde(default)]
        horizon: Option<u64>,
    },
    /// Per-factor overlaps `k ↦ ⟨Φ_k, Ψ_k⟩`; tails of the strong and weak
    /// deviation sequences.
    Equivalence {
        re: String,
        #[serde(default)]
        im: Option<String>,
        strong_tail: Tail,
        weak_tail: Tail,
        #[serde(default)]
        horizon: Option<u64>,
    },
}

/// Classification output with its sequence horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationJson {
    #[serde(flatten)]
    pub classification: Classification,
}

/// Reads and parses a JSON file.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_json(&text)
}

/// Parses JSON text.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Formats a float with 17 significant digits (round-trips an `f64`).
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// A table of named numeric columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| (*s).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// CSV with 17-significant-digit floats (integral columns are printed as
    /// integers when exactly representable).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io_err = |e: csv::Error| Error::Parse(format!("writing CSV: {e}"));
        w.write_record(&self.header).map_err(io_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_cell(x)))
                .map_err(io_err)?;
        }
        w.flush()
            .map_err(|e| Error::Parse(format!("writing CSV: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// JSON array of objects keyed by the header.
    pub fn to_json_value(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let obj = self
                    .header
                    .iter()
                    .cloned()
                    .zip(r.iter().map(|&x| serde_json::json!(x)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

fn format_cell(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format_float(x)
    }
}
