//! Command-line front end.
//!
//! Every number printed here comes from a library call; the CLI only parses
//! inputs, dispatches and formats. Exit codes: 0 success, 1 domain failure
//! (failed check or rejected input, with a machine-readable `reason`),
//! 2 usage or parse error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{validate_bogoliubov, Statistics};
use crate::diagonalize::{diagonalize, heisenberg_identity_check, normal_ordering_constant_finite};
use crate::error::{Error, Result};
use crate::fock::{
    build_implementer_bosonic, particle_number_moment, rapid_decay_norm, vacuum_annihilation_check,
    verify_conjugation, ModeTarget,
};
use crate::implementability::{classify_implementability, ModeFamily};
use crate::io::{
    read_json, to_json, ClassifyInput, ComplexExpr, DiagonalizationJson, HamiltonianJson, ItpSpec,
    MapJson, ModeDecompositionJson, Table, TermExpr, ValidationJson,
};
use crate::linalg::c;
use crate::mode_decomp::{decompose, FermionicParams};
use crate::models::{
    bcs_mode, norm, qed_dynamics, wick_divergence_probe, wick_mode, BcsModelParams, Momentum,
    QedModelParams, ShellLattice, WickModelParams,
};
use crate::renorm::{classify_form_factor, classify_itp_family, compare_itp, DEFAULT_HORIZON};

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "bogokit",
    version,
    about = "Bogoliubov transformations: validation, mode decomposition, implementability, diagonalization and model sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format (CSV only for tabular outputs).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the four Bogoliubov relations of a map file.
    Validate { map: PathBuf },
    /// Split a map into independent modes or Cooper pairs.
    Decompose { map: PathBuf },
    /// Classify a map (implementability), a formal sum or a form factor.
    Classify { input: PathBuf },
    /// Diagonalize a quadratic Hamiltonian file.
    Diagonalize { hamiltonian: PathBuf },
    /// Truncated Fock-space checks.
    Simulate {
        #[command(subcommand)]
        check: SimulateCheck,
    },
    /// Model sweeps over the momentum lattice.
    Sweep {
        #[command(subcommand)]
        model: SweepModel,
    },
    /// Infinite-tensor-product sequence classifiers.
    Itp { input: PathBuf },
}

/// Selects a single-mode implementer target.
#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    /// Bosonic squeezing parameter ξ.
    #[arg(long, conflicts_with_all = ["alpha", "beta"])]
    pub xi: Option<f64>,
    /// Cooper-pair amplitude α (fermionic, with --beta).
    #[arg(long, requires = "beta")]
    pub alpha: Option<f64>,
    /// Cooper-pair amplitude β.
    #[arg(long, requires = "alpha")]
    pub beta: Option<f64>,
    /// Full particle–hole transformation (fermionic).
    #[arg(long, conflicts_with_all = ["xi", "alpha", "beta"])]
    pub particle_hole: bool,
}

impl TargetArgs {
    fn target(&self) -> Result<ModeTarget> {
        match (self.xi, self.alpha, self.beta, self.particle_hole) {
            (Some(xi), None, None, false) => Ok(ModeTarget::Bosonic { xi }),
            (None, Some(alpha), Some(beta), false) => {
                Ok(ModeTarget::Fermionic(FermionicParams::CooperPair {
                    alpha,
                    beta,
                }))
            }
            (None, None, None, true) => Ok(ModeTarget::Fermionic(FermionicParams::ParticleHole)),
            _ => Err(Error::Parse(
                "give --xi, --alpha with --beta, or --particle-hole".into(),
            )),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum SimulateCheck {
    /// `U a U* = b` on low-occupation sectors.
    Conjugation {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value_t = 60)]
        cutoff: usize,
        /// Largest occupation of the tested basis states.
        #[arg(long, default_value_t = 10)]
        sectors: usize,
    },
    /// The transformed vacuum is annihilated by the new annihilators.
    Vacuum {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value_t = 60)]
        cutoff: usize,
    },
    /// Moments `E[N^power]` of a squeezed vacuum with parameter `t = tanh(ξ)/2`.
    RapidDecay {
        #[arg(long)]
        t: f64,
        /// Seminorm order: `E[N^{2n}]`.
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        max_terms: usize,
    },
    /// Heisenberg identity `A†(i M F) = i[H, A†(F)]` for every canonical `F`.
    Heisenberg {
        hamiltonian: PathBuf,
        #[arg(long, default_value_t = 30)]
        cutoff: usize,
        #[arg(long, default_value_t = 8)]
        sectors: usize,
    },
}

/// Squeezing-model sweep parameters.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct WickArgs {
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub kappa: f64,
    #[arg(long, default_value_t = 3)]
    pub radius: u32,
    /// Emit partial sums `Σ_{|p|≤R} v_p²` for these radii instead of per-p rows.
    #[arg(long, value_delimiter = ',')]
    pub probe: Vec<u32>,
}

impl Default for WickArgs {
    fn default() -> Self {
        Self {
            m: 1.0,
            kappa: 1.0,
            radius: 3,
            probe: Vec::new(),
        }
    }
}

/// BCS sweep parameters (constant gap).
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct BcsArgs {
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta_im: f64,
    #[arg(long, default_value_t = 2)]
    pub radius: u32,
}

impl Default for BcsArgs {
    fn default() -> Self {
        Self {
            m: 1.0,
            mu: 1.0,
            delta: 1.0,
            delta_im: 0.0,
            radius: 2,
        }
    }
}

/// External-field pair-creation sweep parameters.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct QedArgs {
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub detuning: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub field: f64,
    /// Driving frequency ω; 0 gives time-independent coefficients.
    #[arg(long, default_value_t = 0.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 1)]
    pub radius: u32,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub s: f64,
    /// End of the time grid.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Number of grid times in `(s, t]`.
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
}

impl Default for QedArgs {
    fn default() -> Self {
        Self {
            mass: 1.0,
            detuning: 0.0,
            field: 1.0,
            omega: 0.0,
            radius: 1,
            s: 0.0,
            t: 1.0,
            points: 10,
            steps: 64,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum SweepModel {
    /// Bosonic squeezing model `h_p = √(|p|²+m²) + κ`, `k_p = κ`.
    Wick {
        #[command(flatten)]
        args: WickArgs,
        /// JSON file with the same fields; replaces the flags.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// BCS model with constant gap.
    Bcs {
        #[command(flatten)]
        args: BcsArgs,
        /// JSON file with the same fields; replaces the flags.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Pair creation in an external field.
    Qed {
        #[command(flatten)]
        args: QedArgs,
        /// JSON file with the same fields; replaces the flags.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Result of a command: text to emit and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

enum Output {
    Json(serde_json::Value, bool),
    Table(Table),
}

fn ok_json<T: Serialize>(v: &T) -> Output {
    Output::Json(serde_json::to_value(v).expect("serializable"), true)
}

/// Parses arguments, runs the command and writes the output.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = run(&cli);
    match &cli.out {
        Some(path) if outcome.code != 2 || !outcome.text.is_empty() => {
            if let Err(e) = std::fs::write(path, &outcome.text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        _ => print!("{}", outcome.text),
    }
    outcome.code
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> Outcome {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return failure(&Error::Parse(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    if let Some(n) = cli.threads {
        // A pool may already exist (e.g. in tests); the first one wins.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let result = dispatch(cli).and_then(|out| render(out, cli.format));
    match result {
        Ok(o) => o,
        Err(e) => failure(&e),
    }
}

fn failure(e: &Error) -> Outcome {
    let code = if matches!(e, Error::Parse(_)) { 2 } else { 1 };
    eprintln!("error: {e}");
    Outcome {
        text: to_json(
            &json!({ "status": "error", "reason": e.reason(), "message": e.to_string() }),
        ),
        code,
    }
}

fn render(out: Output, format: Option<Format>) -> Result<Outcome> {
    match out {
        Output::Json(value, passed) => {
            if format == Some(Format::Csv) {
                return Err(Error::Parse(
                    "CSV output is only available for sweeps".into(),
                ));
            }
            Ok(Outcome {
                text: to_json(&value),
                code: if passed { 0 } else { 1 },
            })
        }
        Output::Table(t) => Ok(Outcome {
            text: match format.unwrap_or(Format::Csv) {
                Format::Csv => t.to_csv_string(),
                Format::Json => to_json(&t.to_json_value()),
            },
            code: 0,
        }),
    }
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let tol = cli.tol;
    match &cli.command {
        Command::Validate { map } => {
            let map = read_json::<MapJson>(map)?.to_map()?;
            let report = validate_bogoliubov(&map, tol)?;
            let passed = report.passed;
            let out = ValidationJson {
                statistics: map.statistics,
                dimension: map.dim(),
                report,
            };
            Ok(Output::Json(
                serde_json::to_value(out).expect("serializable"),
                passed,
            ))
        }
        Command::Decompose { map } => {
            let map = read_json::<MapJson>(map)?.to_map()?;
            Ok(ok_json(&ModeDecompositionJson::from_decomposition(
                &decompose(&map, tol)?,
            )))
        }
        Command::Classify { input } => classify(read_json(input)?, tol),
        Command::Diagonalize { hamiltonian } => {
            let ham = read_json::<HamiltonianJson>(hamiltonian)?.to_hamiltonian(tol)?;
            let res = diagonalize(&ham, tol)?;
            let noc = normal_ordering_constant_finite(&ham.h, &res.energies)?;
            let c = noc.classification.value().map_or(f64::NAN, |v| v.re);
            Ok(ok_json(&DiagonalizationJson::new(&res, c)))
        }
        Command::Simulate { check } => simulate(check, tol),
        Command::Sweep { model } => sweep(model),
        Command::Itp { input } => itp(read_json(input)?),
    }
}

fn classify(input: ClassifyInput, tol: f64) -> Result<Output> {
    match input {
        ClassifyInput::Map { map } => {
            let map = map.to_map()?;
            let family = ModeFamily::from_decomposition(&decompose(&map, tol)?);
            Ok(ok_json(&classify_implementability(&family)))
        }
        ClassifyInput::Sequence { sequence } => Ok(ok_json(&sequence.build()?.classify())),
        ClassifyInput::FormFactor { values, tail } => {
            let phi: Vec<_> = values.to_vector()?.iter().copied().collect();
            Ok(ok_json(&classify_form_factor(&phi, tail)))
        }
    }
}

fn simulate(check: &SimulateCheck, tol: f64) -> Result<Output> {
    match check {
        SimulateCheck::Conjugation {
            target,
            cutoff,
            sectors,
        } => {
            let report = verify_conjugation(target.target()?, *cutoff, *sectors, tol)?;
            let passed = report.passed;
            Ok(Output::Json(
                serde_json::to_value(report).expect("serializable"),
                passed,
            ))
        }
        SimulateCheck::Vacuum { target, cutoff } => {
            let target = target.target()?;
            let check = vacuum_annihilation_check(target, *cutoff)?;
            let mut value = serde_json::to_value(check).expect("serializable");
            if let ModeTarget::Bosonic { xi } = target {
                let u = build_implementer_bosonic(xi, *cutoff)?;
                value["vacuum_overlap"] = json!(u[(0, 0)].re);
                value["expected_overlap"] = json!((1.0 - xi.tanh().powi(2)).powf(0.25));
            }
            Ok(Output::Json(value, check.residual <= tol))
        }
        SimulateCheck::RapidDecay { t, n, max_terms } => {
            let norm = rapid_decay_norm(*t, *n, *max_terms)?;
            let mean = particle_number_moment(*t, 1, *max_terms)?;
            Ok(ok_json(
                &json!({ "t": t, "n": n, "seminorm": norm, "mean_particle_number": mean }),
            ))
        }
        SimulateCheck::Heisenberg {
            hamiltonian,
            cutoff,
            sectors,
        } => {
            let ham = read_json::<HamiltonianJson>(hamiltonian)?.to_hamiltonian(tol)?;
            let residuals = (0..2 * ham.dim())
                .map(|i| heisenberg_identity_check(&ham, i, *cutoff, *sectors))
                .collect::<Result<Vec<_>>>()?;
            let max = residuals.iter().copied().fold(0.0, f64::max);
            let passed = max <= tol;
            Ok(Output::Json(
                json!({ "residuals": residuals, "max_residual": max, "passed": passed }),
                passed,
            ))
        }
    }
}

fn load_config<T: for<'de> Deserialize<'de> + Clone>(
    config: &Option<PathBuf>,
    args: &T,
) -> Result<T> {
    match config {
        Some(path) => read_json(path),
        None => Ok(args.clone()),
    }
}

fn sweep(model: &SweepModel) -> Result<Output> {
    match model {
        SweepModel::Wick { args, config } => {
            let a = load_config(config, args)?;
            let params = WickModelParams::new(a.m, a.kappa)?;
            if !a.probe.is_empty() {
                let mut t = Table::new(&["R", "sum_v2"]);
                for (r, s) in wick_divergence_probe(&params, &a.probe)? {
                    t.push(vec![f64::from(r), s]);
                }
                return Ok(Output::Table(t));
            }
            let mut t = Table::new(&[
                "shell", "px", "py", "pz", "abs_p", "h", "k", "G", "u", "v", "E",
            ]);
            for (p, j) in lattice_rows(a.radius) {
                let m = wick_mode(&params, &p)?;
                t.push(vec![
                    j,
                    p[0] as f64,
                    p[1] as f64,
                    p[2] as f64,
                    norm(&p),
                    m.h,
                    m.k,
                    m.g,
                    m.u,
                    m.v,
                    m.e,
                ]);
            }
            Ok(Output::Table(t))
        }
        SweepModel::Bcs { args, config } => {
            let a = load_config(config, args)?;
            let params = BcsModelParams::constant_gap(a.m, a.mu, c(a.delta, a.delta_im))?;
            let mut t = Table::new(&[
                "shell", "px", "py", "pz", "eps", "delta_re", "delta_im", "E", "u_re", "u_im", "v",
            ]);
            for (p, j) in lattice_rows(a.radius) {
                let m = bcs_mode(&params, &p)?;
                t.push(vec![
                    j,
                    p[0] as f64,
                    p[1] as f64,
                    p[2] as f64,
                    m.eps,
                    m.delta.re,
                    m.delta.im,
                    m.e,
                    m.u.re,
                    m.u.im,
                    m.v,
                ]);
            }
            Ok(Output::Table(t))
        }
        SweepModel::Qed { args, config } => {
            let a = load_config(config, args)?;
            if a.points == 0 {
                return Err(Error::BadParameter("--points must be at least 1".into()));
            }
            let params = QedModelParams::oscillating(a.mass, a.detuning, a.field, a.omega);
            let mut t = Table::new(&[
                "shell",
                "px",
                "py",
                "pz",
                "t",
                "U1_re",
                "U1_im",
                "V1_re",
                "V1_im",
                "U2_re",
                "U2_im",
                "V2_re",
                "V2_im",
                "norm1",
                "norm2",
                "shale_term",
                "ordering_discrepancy",
            ]);
            for (p, j) in lattice_rows(a.radius) {
                for i in 1..=a.points {
                    let time = a.s + (a.t - a.s) * i as f64 / a.points as f64;
                    let d = qed_dynamics(&params, &p, a.s, time, a.steps)?;
                    let b = d.blocks;
                    t.push(vec![
                        j,
                        p[0] as f64,
                        p[1] as f64,
                        p[2] as f64,
                        time,
                        b.u1.re,
                        b.u1.im,
                        b.v1.re,
                        b.v1.im,
                        b.u2.re,
                        b.u2.im,
                        b.v2.re,
                        b.v2.im,
                        b.u1.norm_sqr() + b.v1.norm_sqr(),
                        b.u2.norm_sqr() + b.v2.norm_sqr(),
                        d.shale_term,
                        d.ordering_discrepancy,
                    ]);
                }
            }
            Ok(Output::Table(t))
        }
    }
}

/// Lattice points with their shell index, in sweep order.
fn lattice_rows(radius: u32) -> Vec<(Momentum, f64)> {
    let lattice = ShellLattice::new(radius);
    let shells = lattice.shells();
    lattice
        .points
        .into_iter()
        .zip(shells.into_iter().map(|j| j as f64))
        .collect()
}

fn itp(spec: ItpSpec) -> Result<Output> {
    match spec {
        ItpSpec::Family {
            norms,
            tail,
            horizon,
        } => {
            let expr = TermExpr::parse(&norms)?;
            let report = classify_itp_family(
                move |k| expr.eval(k as f64),
                tail,
                horizon.unwrap_or(DEFAULT_HORIZON),
            );
            Ok(ok_json(&report))
        }
        ItpSpec::Equivalence {
            re,
            im,
            strong_tail,
            weak_tail,
            horizon,
        } => {
            let expr = ComplexExpr::parse(&re, im.as_deref())?;
            let verdict = compare_itp(
                move |k| expr.eval(k as f64),
                strong_tail,
                weak_tail,
                horizon.unwrap_or(DEFAULT_HORIZON),
            );
            Ok(ok_json(&json!({ "equivalence": verdict })))
        }
    }
}

/// Statistics names accepted on the command line.
pub fn parse_statistics(s: &str) -> Result<Statistics> {
    match s {
        "bosonic" => Ok(Statistics::Bosonic),
        "fermionic" => Ok(Statistics::Fermionic),
        other => Err(Error::Parse(format!("unknown statistics {other:?}"))),
    }
}
