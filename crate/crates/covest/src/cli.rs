//! Configuration loading, report types and the subcommand implementations
//! behind the `covest` binary.
//!
//! All structured reports are JSON with complex numbers serialized as
//! [re, im] pairs. Reports are byte-deterministic for a fixed configuration
//! and RNG seed; wall-clock timing therefore goes to stderr, never into a
//! report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::gpovm::{
    bayes_risk, comb_constraint_check, covariant_as_finite, covariantize, master_constraint_check,
    random_gpovm, random_sequential_comb, seed_from_covariant, worst_risk, CombDims, ErrorFile,
    ErrorFunction, Gpovm, MASTER_TOL,
};
use crate::groups::{make_group, make_rep, rep_power, GroupFile, Mode, RepFile};
use crate::irreps::RepContext;
use crate::matcore::CVec;
use crate::optimal::{
    build_parallel_scheme, default_reference_dim, normalization_operator, optimal_parallel_input,
    parallel_risk, psi_from_seed, random_feasible_seed, risk_operator,
    risk_operator_double_integral, solve_optimal_seed, verify_simulation,
};
use crate::{Error, Result};

/// Hard cap on the squared dimension of the tensored representation unless
/// the caller opts out: keeps accidental 2^n blowups from filling memory.
pub const DIM_SQ_GUARD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Bayes,
    Worst,
}

/// One experiment: a group, a representation, a number of copies, an error
/// function and the evaluation knobs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub group_path: PathBuf,
    pub rep_path: PathBuf,
    pub error_path: Option<PathBuf>,
    pub copies: usize,
    pub criterion: Criterion,
    pub rng_seed: u64,
    pub tolerance: f64,
    pub unsafe_large: bool,
}

/// Echo of the configuration inside every report.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub group: String,
    pub rep: String,
    pub error: Option<String>,
    pub copies: usize,
    pub criterion: Criterion,
    pub rng_seed: u64,
    pub tolerance: f64,
}

/// The loaded experiment: context plus error function.
pub struct Experiment {
    pub ctx: RepContext,
    pub error: Option<ErrorFunction>,
    pub echo: ConfigEcho,
    pub config: ExperimentConfig,
}

fn parse_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn load(&self) -> Result<Experiment> {
        let group_file: GroupFile = parse_file(&self.group_path)?;
        let rep_file: RepFile = parse_file(&self.rep_path)?;
        let group = Arc::new(make_group(&group_file)?);
        let base = make_rep(&group, &rep_file)?;
        if self.copies == 0 {
            return Err(Error::Validation("copies must be at least 1".into()));
        }
        let rep = rep_power(&base, self.copies)?;
        let d = rep.dim();
        if d * d > DIM_SQ_GUARD && !self.unsafe_large {
            return Err(Error::Validation(format!(
                "total dimension {d} gives a pair space of {} > {DIM_SQ_GUARD}; \
                 pass --unsafe-large to proceed",
                d * d
            )));
        }
        let ctx = RepContext::with_seed(rep, self.rng_seed)?;
        let error = match &self.error_path {
            Some(p) => {
                let ef: ErrorFile = parse_file(p)?;
                let v = ErrorFunction::from_file(&ef);
                v.validate(&ctx.rep)?;
                Some(v)
            }
            None => None,
        };
        let echo = ConfigEcho {
            group: self.group_path.display().to_string(),
            rep: self.rep_path.display().to_string(),
            error: self.error_path.as_ref().map(|p| p.display().to_string()),
            copies: self.copies,
            criterion: self.criterion,
            rng_seed: self.rng_seed,
            tolerance: self.tolerance,
        };
        Ok(Experiment {
            ctx,
            error,
            echo,
            config: self.clone(),
        })
    }
}

impl Experiment {
    fn error_fn(&self) -> Result<&ErrorFunction> {
        self.error
            .as_ref()
            .ok_or_else(|| Error::Validation("this command needs --error".into()))
    }
}

pub fn cvec_to_pairs(v: &CVec) -> Vec<[f64; 2]> {
    v.entries().iter().map(|z| [z.re, z.im]).collect()
}

pub fn pairs_to_cvec(pairs: &[[f64; 2]]) -> CVec {
    CVec::from_entries(pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
}

#[derive(Debug, Serialize)]
pub struct DecomposeReport {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub mults: Vec<usize>,
    pub off_block_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_change: Option<Vec<Vec<[f64; 2]>>>,
    pub config: ConfigEcho,
    pub version: String,
}

pub fn cmd_decompose(config: &ExperimentConfig, emit_basis: bool) -> Result<String> {
    let exp = config.load()?;
    let dec = &exp.ctx.dec;
    let basis_change = emit_basis.then(|| {
        let v = dec.basis_change();
        (0..v.rows())
            .map(|r| (0..v.cols()).map(|c| [v.get(r, c).re, v.get(r, c).im]).collect())
            .collect()
    });
    let report = DecomposeReport {
        labels: dec.labels().to_vec(),
        dims: dec.dims().to_vec(),
        mults: dec.mults().to_vec(),
        off_block_residual: dec.off_block_residual(),
        basis_change,
        config: exp.echo,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    to_json(&report)
}

#[derive(Debug, Serialize)]
pub struct DecompositionSummary {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub mults: Vec<usize>,
    pub h0_dim: usize,
    pub parallel_space_dim: usize,
    pub reference_dim: usize,
}

#[derive(Debug, Serialize)]
pub struct VerificationSummary {
    pub simulation_max_deviation: f64,
    pub simulation_passed: bool,
    pub equality_gap: f64,
    pub completeness_residual: f64,
}

#[derive(Debug, Serialize)]
pub struct RiskReport {
    pub risk: f64,
    pub criterion: Criterion,
    /// Optimal rank-one seed vector in ambient pair-space coordinates.
    pub seed_vector: Vec<[f64; 2]>,
    /// Optimal parallel input state on H′.
    pub psi_vector: Vec<[f64; 2]>,
    pub decomposition: DecompositionSummary,
    pub verification: VerificationSummary,
    /// Populated only on request (`--timings`): wall-clock measurements are
    /// the one field that would break report determinism.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
    pub config: ConfigEcho,
    pub version: String,
}

pub fn cmd_optimize(config: &ExperimentConfig, timings: bool) -> Result<String> {
    let exp = config.load()?;
    let v = exp.error_fn()?;
    let ctx = &exp.ctx;
    let started = std::time::Instant::now();

    let (risk, x) = solve_optimal_seed(ctx, v)?;
    let l = default_reference_dim(ctx);
    let scheme = build_parallel_scheme(ctx, l)?;
    let x_ambient = ctx.pair.decompress(&ctx.dec, &x)?;
    let psi = psi_from_seed(ctx, &scheme, &x_ambient)?;
    let (par_risk, _) = optimal_parallel_input(ctx, &scheme, v)?;
    let sim = verify_simulation(ctx, &scheme, v, &x_ambient, exp.config.tolerance)?;

    let vmax = v.max_value(&ctx.rep);
    if !(0.0..=vmax + 1e-9).contains(&risk) {
        return Err(Error::Validation(format!(
            "computed risk {risk} escapes [0, {vmax}]"
        )));
    }

    let elapsed = started.elapsed().as_millis();
    let report = RiskReport {
        risk,
        criterion: exp.config.criterion,
        seed_vector: cvec_to_pairs(&x_ambient),
        psi_vector: cvec_to_pairs(&psi),
        decomposition: DecompositionSummary {
            labels: ctx.dec.labels().to_vec(),
            dims: ctx.dec.dims().to_vec(),
            mults: ctx.dec.mults().to_vec(),
            h0_dim: ctx.pair.h0_dim(),
            parallel_space_dim: scheme.dim,
            reference_dim: l,
        },
        verification: VerificationSummary {
            simulation_max_deviation: sim.max_probability_deviation,
            simulation_passed: sim.passed,
            equality_gap: (risk - par_risk).abs(),
            completeness_residual: scheme.completeness_residual(ctx),
        },
        timing_ms: timings.then_some(elapsed),
        config: exp.echo,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    eprintln!("optimize finished in {elapsed} ms");
    to_json(&report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub status: SuiteStatus,
    pub worst: f64,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteReport>,
    pub all_passed: bool,
    pub config: ConfigEcho,
    pub version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Completeness,
    HuntStein,
    Simulation,
    Comb,
    NoAdvantage,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Suite> {
        Ok(match s {
            "completeness" => Suite::Completeness,
            "huntstein" => Suite::HuntStein,
            "simulation" => Suite::Simulation,
            "comb" => Suite::Comb,
            "noadvantage" => Suite::NoAdvantage,
            "all" => Suite::All,
            other => {
                return Err(Error::Validation(format!(
                    "unknown suite {other:?}; expected completeness|huntstein|simulation|comb|noadvantage|all"
                )))
            }
        })
    }
}

fn suite_completeness(exp: &Experiment) -> Result<SuiteReport> {
    let ctx = &exp.ctx;
    let tol = exp.config.tolerance;
    let mut worst = ctx.dec.off_block_residual();
    let scheme = build_parallel_scheme(ctx, default_reference_dim(ctx))?;
    worst = worst.max(scheme.completeness_residual(ctx));
    // Normalization operator agrees with the compressed average state.
    let n = normalization_operator(ctx);
    let rho = crate::groups::average_state(&ctx.rep);
    let rho_c = ctx.compress_operator(&rho)?;
    worst = worst.max(n.sub(&rho_c).max_abs());
    // Single- vs double-integral risk operator, when an error is supplied.
    if let Some(v) = &exp.error {
        let a = risk_operator(ctx, v)?.w;
        let b = risk_operator_double_integral(ctx, v)?.w;
        worst = worst.max(a.sub(&b).max_abs());
    }
    Ok(SuiteReport {
        name: "completeness".into(),
        status: if worst <= tol { SuiteStatus::Pass } else { SuiteStatus::Fail },
        worst,
        trials: 1,
        witness: (worst > tol).then(|| "structural residual above tolerance".into()),
    })
}

fn suite_huntstein(exp: &Experiment, trials: usize) -> Result<SuiteReport> {
    let ctx = &exp.ctx;
    let tol = exp.config.tolerance;
    if ctx.group().is_u1() {
        return Ok(SuiteReport {
            name: "huntstein".into(),
            status: SuiteStatus::Skipped,
            worst: 0.0,
            trials: 0,
            witness: Some("covariantization of finite-outcome u1 families is out of scope".into()),
        });
    }
    let v = exp.error_fn()?;
    let mut rng = ChaCha20Rng::seed_from_u64(exp.config.rng_seed);
    let mut worst = 0.0f64;
    let mut witness = None;
    for t in 0..trials {
        let m = random_gpovm(ctx, &mut rng)?;
        let before_bayes = bayes_risk(&m, ctx, v)?;
        let before_worst = worst_risk(&m, ctx, v)?;
        let cov = covariantize(&m, ctx)?;
        let after_bayes = bayes_risk(&cov, ctx, v)?;
        let after_worst = worst_risk(&cov, ctx, v)?;
        let bayes_gap = (after_bayes - before_bayes).abs();
        let worst_excess = (after_worst - before_worst).max(0.0);
        // Fixed-point round trip through the finite expansion.
        let finite = covariant_as_finite(ctx, cov.seed().unwrap())?;
        let back = seed_from_covariant(&finite, ctx, tol)?;
        let roundtrip = back.sub(cov.seed().unwrap()).max_abs();
        let local = bayes_gap.max(worst_excess).max(roundtrip);
        if local > worst {
            worst = local;
            witness = Some(format!(
                "trial {t}: bayes gap {bayes_gap:.3e}, worst excess {worst_excess:.3e}, \
                 roundtrip {roundtrip:.3e}"
            ));
        }
    }
    Ok(SuiteReport {
        name: "huntstein".into(),
        status: if worst <= tol { SuiteStatus::Pass } else { SuiteStatus::Fail },
        worst,
        trials,
        witness: if worst <= tol { None } else { witness },
    })
}

fn suite_simulation(exp: &Experiment, trials: usize) -> Result<SuiteReport> {
    let ctx = &exp.ctx;
    let tol = exp.config.tolerance;
    let v = exp.error_fn()?;
    let scheme = build_parallel_scheme(ctx, default_reference_dim(ctx))?;
    let mut rng = ChaCha20Rng::seed_from_u64(exp.config.rng_seed);
    let mut worst = 0.0f64;
    let mut witness = None;
    for t in 0..trials {
        let x = random_feasible_seed(ctx, &mut rng)?;
        let report = verify_simulation(ctx, &scheme, v, &x, tol)?;
        let local = report
            .max_probability_deviation
            .max((report.seed_risk - report.parallel_risk).abs());
        if local > worst {
            worst = local;
            witness = Some(format!(
                "trial {t}: deviation {local:.3e} at pair {:?}",
                report.worst_pair
            ));
        }
    }
    // The optimal seed must simulate too.
    let (risk, x) = solve_optimal_seed(ctx, v)?;
    let amb = ctx.pair.decompress(&ctx.dec, &x)?;
    let report = verify_simulation(ctx, &scheme, v, &amb, tol)?;
    let opt_gap = report
        .max_probability_deviation
        .max((report.seed_risk - risk).abs());
    worst = worst.max(opt_gap);
    Ok(SuiteReport {
        name: "simulation".into(),
        status: if worst <= tol { SuiteStatus::Pass } else { SuiteStatus::Fail },
        worst,
        trials: trials + 1,
        witness: if worst <= tol { None } else { witness },
    })
}

fn suite_comb(exp: &Experiment, trials: usize) -> Result<SuiteReport> {
    let ctx = &exp.ctx;
    let tol = exp.config.tolerance;
    if ctx.group().is_u1() || exp.config.copies != 2 {
        return Ok(SuiteReport {
            name: "comb".into(),
            status: SuiteStatus::Skipped,
            worst: 0.0,
            trials: 0,
            witness: Some("comb suite needs a finite group and exactly 2 copies".into()),
        });
    }
    let d = (ctx.rep.dim() as f64).sqrt().round() as usize;
    let mut rng = ChaCha20Rng::seed_from_u64(exp.config.rng_seed);
    let mut worst = 0.0f64;
    let mut witness = None;
    for t in 0..trials {
        let comb = random_sequential_comb(ctx, d, 2, 2, &mut rng)?;
        let report = comb_constraint_check(&comb.ops, &CombDims::uniform(d, 2))?;
        let master = master_constraint_check(&Gpovm::Finite(comb), ctx)?;
        let local = report.max_residual().max(master);
        if local > worst {
            worst = local;
            witness = Some(format!("trial {t}: residual {local:.3e}"));
        }
    }
    Ok(SuiteReport {
        name: "comb".into(),
        status: if worst <= tol { SuiteStatus::Pass } else { SuiteStatus::Fail },
        worst,
        trials,
        witness: if worst <= tol { None } else { witness },
    })
}

fn suite_noadvantage(exp: &Experiment, trials: usize) -> Result<SuiteReport> {
    let ctx = &exp.ctx;
    let tol = exp.config.tolerance;
    if ctx.group().is_u1() {
        return Ok(SuiteReport {
            name: "noadvantage".into(),
            status: SuiteStatus::Skipped,
            worst: 0.0,
            trials: 0,
            witness: Some("random finite-outcome families on u1 are out of scope".into()),
        });
    }
    let v = exp.error_fn()?;
    let (optimum, _) = solve_optimal_seed(ctx, v)?;
    let mut rng = ChaCha20Rng::seed_from_u64(exp.config.rng_seed);
    let mut worst_shortfall = 0.0f64;
    let mut witness = None;
    let d = (ctx.rep.dim() as f64).sqrt().round() as usize;
    let combs_possible = exp.config.copies == 2 && d * d == ctx.rep.dim();
    let comb_trials = if combs_possible { trials / 5 } else { 0 };
    for t in 0..trials {
        let m = if t < comb_trials {
            let comb = random_sequential_comb(ctx, d, 2, 2, &mut rng)?;
            let report = comb_constraint_check(&comb.ops, &CombDims::uniform(d, 2))?;
            if report.max_residual() > tol {
                return Err(Error::Validation(format!(
                    "constructed comb violates its own conditions: {:.3e}",
                    report.max_residual()
                )));
            }
            Gpovm::Finite(comb)
        } else {
            random_gpovm(ctx, &mut rng)?
        };
        let b = bayes_risk(&m, ctx, v)?;
        let w = worst_risk(&m, ctx, v)?;
        let shortfall = (optimum - b).max(optimum - w).max(0.0);
        if shortfall > worst_shortfall {
            worst_shortfall = shortfall;
            witness = Some(format!(
                "trial {t}: bayes {b:.6}, worst {w:.6} vs optimum {optimum:.6}"
            ));
        }
    }
    Ok(SuiteReport {
        name: "noadvantage".into(),
        status: if worst_shortfall <= tol { SuiteStatus::Pass } else { SuiteStatus::Fail },
        worst: worst_shortfall,
        trials,
        witness: if worst_shortfall <= tol { None } else { witness },
    })
}

/// Runs the requested verification suite(s); the report is deterministic
/// for a fixed configuration and seed.
pub fn cmd_verify(config: &ExperimentConfig, suite: Suite, trials: usize) -> Result<(String, bool)> {
    let exp = config.load()?;
    let mut suites = Vec::new();
    let wanted = |s: Suite| suite == Suite::All || suite == s;
    if wanted(Suite::Completeness) {
        suites.push(suite_completeness(&exp)?);
    }
    if wanted(Suite::HuntStein) {
        suites.push(suite_huntstein(&exp, trials)?);
    }
    if wanted(Suite::Simulation) {
        suites.push(suite_simulation(&exp, trials)?);
    }
    if wanted(Suite::Comb) {
        suites.push(suite_comb(&exp, trials)?);
    }
    if wanted(Suite::NoAdvantage) {
        suites.push(suite_noadvantage(&exp, trials)?);
    }
    let all_passed = suites.iter().all(|s| s.status != SuiteStatus::Fail);
    let report = VerifyReport {
        suites,
        all_passed,
        config: exp.echo,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok((to_json(&report)?, all_passed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Validation(format!(
                "unknown format {other:?}; expected json|csv"
            ))),
        }
    }
}

#[derive(Debug, Serialize)]
struct ScalingRow {
    n: usize,
    risk: f64,
    risk_times_nplus2_sq: f64,
}

/// Heisenberg-scaling experiment over the U(1) sine-squared family:
/// rows (n, risk, risk·(n+2)²), CSV by default. Sizes are chosen
/// internally, so the pair-space guard does not apply.
pub fn cmd_scaling(max_copies: usize, format: OutputFormat) -> Result<String> {
    if max_copies > 64 {
        return Err(Error::Validation("scaling supports at most 64 copies".into()));
    }
    if max_copies == 0 {
        return Err(Error::Validation("scaling needs at least 1 copy".into()));
    }
    let mut rows = Vec::with_capacity(max_copies);
    for n in 1..=max_copies {
        let q = 4 * n + 5;
        let group = Arc::new(make_group(&GroupFile::U1 { q })?);
        let modes: Vec<Mode> = (0..=n as i64).map(|k| Mode { k, mult: 1 }).collect();
        let rep = make_rep(&group, &RepFile::U1modes { modes })?;
        let ctx = RepContext::new(rep)?;
        let (risk, _) = solve_optimal_seed(&ctx, &ErrorFunction::sine_squared())?;
        rows.push(ScalingRow {
            n,
            risk,
            risk_times_nplus2_sq: risk * ((n + 2) as f64).powi(2),
        });
    }
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("n,risk,risk_times_nplus2_sq\n");
            for r in rows {
                writeln!(out, "{},{},{}", r.n, r.risk, r.risk_times_nplus2_sq)
                    .expect("string write");
            }
            Ok(out)
        }
        OutputFormat::Json => to_json(&rows),
    }
}

/// User-supplied object for `simulate`: an ambient seed vector or a
/// parallel input state.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimulateInput {
    SeedVector { entries: Vec<[f64; 2]> },
    Psi { entries: Vec<[f64; 2]> },
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub kind: String,
    pub bayes: f64,
    pub worst: f64,
    /// Per-element risks, emitted for finite groups.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_element: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation_max_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation_passed: Option<bool>,
    pub config: ConfigEcho,
    pub version: String,
}

pub fn cmd_simulate(config: &ExperimentConfig, input_path: &Path) -> Result<String> {
    let exp = config.load()?;
    let v = exp.error_fn()?;
    let ctx = &exp.ctx;
    let input: SimulateInput = parse_file(input_path)?;
    let report = match input {
        SimulateInput::SeedVector { entries } => {
            let x = pairs_to_cvec(&entries);
            if x.dim() != ctx.pair.ambient_dim() {
                return Err(Error::Dim(format!(
                    "seed vector has dim {}, pair space needs {}",
                    x.dim(),
                    ctx.pair.ambient_dim()
                )));
            }
            let feas = ctx.pair.rho_mu_expectation(&ctx.dec, &x)?;
            if (feas - 1.0).abs() > MASTER_TOL {
                return Err(Error::Validation(format!(
                    "seed vector is not feasible: Tr T ρ_μ = {feas}"
                )));
            }
            let xc = ctx.pair.compress(&ctx.dec, &x)?;
            let m = Gpovm::covariant_rank_one(ctx, &xc)?;
            let scheme = build_parallel_scheme(ctx, default_reference_dim(ctx))?;
            let sim = verify_simulation(ctx, &scheme, v, &x, exp.config.tolerance)?;
            let per_element = (!ctx.group().is_u1())
                .then(|| {
                    ctx.group()
                        .elements()
                        .map(|g| crate::gpovm::risk_at(&m, ctx, v, g))
                        .collect::<Result<Vec<f64>>>()
                })
                .transpose()?;
            SimulateReport {
                kind: "seed_vector".into(),
                bayes: bayes_risk(&m, ctx, v)?,
                worst: worst_risk(&m, ctx, v)?,
                per_element,
                simulation_max_deviation: Some(sim.max_probability_deviation),
                simulation_passed: Some(sim.passed),
                config: exp.echo,
                version: env!("CARGO_PKG_VERSION").to_string(),
            }
        }
        SimulateInput::Psi { entries } => {
            let psi = pairs_to_cvec(&entries);
            let scheme = build_parallel_scheme(ctx, default_reference_dim(ctx))?;
            let risk = parallel_risk(ctx, &scheme, v, &psi)?;
            SimulateReport {
                kind: "psi".into(),
                bayes: risk,
                worst: risk,
                per_element: None,
                simulation_max_deviation: None,
                simulation_passed: None,
                config: exp.echo,
                version: env!("CARGO_PKG_VERSION").to_string(),
            }
        }
    };
    to_json(&report)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(format!("serialization: {e}")))
}

/// Writes a report to the requested sink.
pub fn emit(report: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, report)?,
        None => println!("{report}"),
    }
    Ok(())
}
