//! Generalized measurements over a group, normalized against the average
//! state instead of the identity, together with their covariance structure,
//! comb (sequential-strategy) constraints and risk functionals.
//!
//! Convention fixed across the crate: a covariant measurement with seed T
//! has outcome density m(ĝ) = f(ĝ) T f(ĝ)† (Haar-weighted), so that the
//! outcome distribution at true action g is q_T(ĝ⁻¹g) with
//! q_T(h) = ⟨⟨f(h)| T |f(h)⟩⟩. With the left-invariant error
//! w(g, ĝ) = v(g⁻¹ĝ) this makes the per-point risk of a covariant seed
//! constant in g. The adjoint-side density convention differs from this one
//! by the estimate relabeling ĝ ↦ ĝ⁻¹ and produces identical optimal
//! values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::groups::{ElementId, ProjectiveRep};
use crate::irreps::RepContext;
use crate::matcore::{
    hermitian_eig, partial_trace, permute_subsystems, random_cvec, random_unitary, CMat, CVec,
};
use crate::{Error, Result};

const IMAG_RESIDUE_TOL: f64 = 1e-10;
pub const MASTER_TOL: f64 = 1e-9;

/// Covariant error function, stored through its single-variable profile
/// v with w(g, ĝ) = v(g⁻¹ĝ); v(e) must be the minimum and v ≥ 0.
#[derive(Debug, Clone)]
pub struct ErrorFunction {
    kind: ErrorKind,
}

#[derive(Debug, Clone)]
pub enum ErrorKind {
    /// 0 on the identity, 1 elsewhere (finite groups).
    Delta,
    /// v(h) = 1 − |Tr f(h)|²/d².
    GateInfidelity,
    /// Explicit per-element table (finite groups).
    ClassTable(Vec<f64>),
    /// v(θ) = Σ_k c_k e^{ikθ} with real coefficients (U(1)).
    Fourier(Vec<(i64, f64)>),
}

/// Structured error-function description as parsed from an error file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorFile {
    Delta,
    GateInfidelity,
    ClassTable { values: Vec<f64> },
    Fourier { coeffs: Vec<(i64, f64)> },
}

fn merge_fourier(coeffs: &[(i64, f64)]) -> Vec<(i64, f64)> {
    let mut merged: Vec<(i64, f64)> = Vec::new();
    for &(k, c) in coeffs {
        match merged.iter_mut().find(|(k2, _)| *k2 == k) {
            Some((_, c2)) => *c2 += c,
            None => merged.push((k, c)),
        }
    }
    merged.sort_by_key(|&(k, _)| k);
    merged
}

impl ErrorFunction {
    pub fn from_file(file: &ErrorFile) -> Self {
        let kind = match file {
            ErrorFile::Delta => ErrorKind::Delta,
            ErrorFile::GateInfidelity => ErrorKind::GateInfidelity,
            ErrorFile::ClassTable { values } => ErrorKind::ClassTable(values.clone()),
            ErrorFile::Fourier { coeffs } => ErrorKind::Fourier(merge_fourier(coeffs)),
        };
        ErrorFunction { kind }
    }

    pub fn delta() -> Self {
        ErrorFunction { kind: ErrorKind::Delta }
    }

    pub fn gate_infidelity() -> Self {
        ErrorFunction {
            kind: ErrorKind::GateInfidelity,
        }
    }

    pub fn class_table(values: Vec<f64>) -> Self {
        ErrorFunction {
            kind: ErrorKind::ClassTable(values),
        }
    }

    /// 4 sin²(θ/2) = 2 − e^{iθ} − e^{−iθ}.
    pub fn sine_squared() -> Self {
        ErrorFunction {
            kind: ErrorKind::Fourier(vec![(0, 2.0), (1, -1.0), (-1, -1.0)]),
        }
    }

    pub fn fourier(coeffs: Vec<(i64, f64)>) -> Self {
        ErrorFunction {
            kind: ErrorKind::Fourier(merge_fourier(&coeffs)),
        }
    }

    pub fn kind(&self) -> &ErrorKind {
        &self.kind
    }

    pub fn max_fourier_degree(&self) -> i64 {
        match &self.kind {
            ErrorKind::Fourier(cs) => cs.iter().map(|(k, _)| k.abs()).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// v(h).
    pub fn eval(&self, rep: &ProjectiveRep, h: ElementId) -> f64 {
        match &self.kind {
            ErrorKind::Delta => {
                if h == rep.group().identity() {
                    0.0
                } else {
                    1.0
                }
            }
            ErrorKind::GateInfidelity => {
                let d = rep.dim() as f64;
                let tr = rep.unitary(h).trace();
                1.0 - tr.norm_sqr() / (d * d)
            }
            ErrorKind::ClassTable(values) => values[h],
            ErrorKind::Fourier(coeffs) => {
                let theta = rep.group().theta(h);
                coeffs
                    .iter()
                    .map(|&(k, c)| c * (k as f64 * theta).cos())
                    .sum()
            }
        }
    }

    /// ṽ(h) = v(h⁻¹), the profile entering single-integral risk operators.
    pub fn eval_inv(&self, rep: &ProjectiveRep, h: ElementId) -> f64 {
        self.eval(rep, rep.group().inv(h))
    }

    /// Checks non-negativity, the minimizer-at-identity normalization, and
    /// U(1) compatibility (trigonometric-polynomial errors only, with the
    /// degree bound that keeps quadrature exact).
    pub fn validate(&self, rep: &ProjectiveRep) -> Result<()> {
        let group = rep.group();
        if group.is_u1() {
            match &self.kind {
                ErrorKind::Fourier(coeffs) => {
                    // Real-valuedness needs c_{-k} = c_k for real tables.
                    for &(k, c) in coeffs {
                        let mirror: f64 = coeffs
                            .iter()
                            .filter(|&&(k2, _)| k2 == -k)
                            .map(|&(_, c2)| c2)
                            .sum();
                        if (mirror - c).abs() > 1e-12 {
                            return Err(Error::Validation(
                                "fourier error must have symmetric coefficients (real v)".into(),
                            ));
                        }
                    }
                    let deg = self.max_fourier_degree();
                    let q = group.element_count() as i64;
                    if deg + 2 * rep.max_abs_mode() >= q {
                        return Err(Error::Validation(format!(
                            "fourier degree {deg} too high for Q = {q} with modes up to {}",
                            rep.max_abs_mode()
                        )));
                    }
                }
                ErrorKind::GateInfidelity => {}
                _ => {
                    return Err(Error::Unsupported(
                        "u1 error functions must be trigonometric polynomials \
                         (fourier or gate_infidelity)"
                            .into(),
                    ))
                }
            }
        }
        if let ErrorKind::ClassTable(values) = &self.kind {
            if values.len() != group.element_count() {
                return Err(Error::Validation(format!(
                    "class table has {} entries for a group of order {}",
                    values.len(),
                    group.element_count()
                )));
            }
        }
        let e = group.identity();
        let ve = self.eval(rep, e);
        let mut min = f64::INFINITY;
        for g in group.elements() {
            let v = self.eval(rep, g);
            if v < -1e-9 {
                return Err(Error::Validation(format!(
                    "error function is negative at element {g}: {v}"
                )));
            }
            min = min.min(v);
        }
        if ve > min + 1e-9 {
            return Err(Error::Validation(
                "error function must attain its minimum at the identity".into(),
            ));
        }
        Ok(())
    }

    pub fn max_value(&self, rep: &ProjectiveRep) -> f64 {
        rep.group()
            .elements()
            .map(|g| self.eval(rep, g))
            .fold(0.0, f64::max)
    }
}

/// Positive semi-definite operator, dense or as rank-one factors Σ|c⟩⟨c|.
#[derive(Debug, Clone)]
pub enum PsdOp {
    Dense(CMat),
    Factors(Vec<CVec>),
}

impl PsdOp {
    pub fn dim(&self) -> usize {
        match self {
            PsdOp::Dense(m) => m.rows(),
            PsdOp::Factors(f) => f.first().map(|v| v.dim()).unwrap_or(0),
        }
    }

    /// ⟨x|M|x⟩ with the imaginary residue asserted small.
    pub fn expectation(&self, x: &CVec) -> f64 {
        let val = match self {
            PsdOp::Dense(m) => m.sandwich(x, x),
            PsdOp::Factors(fs) => fs
                .iter()
                .map(|c| {
                    let a = c.dot(x);
                    Complex64::new(a.norm_sqr(), 0.0)
                })
                .sum(),
        };
        debug_assert!(
            val.im.abs() <= IMAG_RESIDUE_TOL * (1.0 + val.re.abs()),
            "expectation has imaginary residue {}",
            val.im
        );
        val.re
    }

    pub fn to_dense(&self, dim: usize) -> CMat {
        match self {
            PsdOp::Dense(m) => m.clone(),
            PsdOp::Factors(fs) => {
                let mut out = CMat::zeros(dim, dim);
                for c in fs {
                    out = out.add(&c.outer(c));
                }
                out
            }
        }
    }

    pub fn scale(&self, s: f64) -> PsdOp {
        match self {
            PsdOp::Dense(m) => PsdOp::Dense(m.scale_re(s)),
            PsdOp::Factors(fs) => {
                let r = s.sqrt();
                PsdOp::Factors(fs.iter().map(|c| c.scale(Complex64::new(r, 0.0))).collect())
            }
        }
    }

    fn validate_psd(&self) -> Result<()> {
        match self {
            // Factor form is positive semi-definite by construction.
            PsdOp::Factors(_) => Ok(()),
            PsdOp::Dense(m) => {
                if !m.is_hermitian(1e-10) {
                    return Err(Error::Validation(
                        "measurement operator is not Hermitian".into(),
                    ));
                }
                let (vals, _) = hermitian_eig(m)?;
                let scale = m.max_abs().max(1.0);
                if vals.first().copied().unwrap_or(0.0) < -1e-10 * scale {
                    return Err(Error::Validation(format!(
                        "measurement operator has negative eigenvalue {:.3e}",
                        vals[0]
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Finite-outcome generalized measurement: outcome labels are group
/// elements (repetitions allowed), operators live on the pair space.
#[derive(Debug, Clone)]
pub struct FiniteGpovm {
    pub outcomes: Vec<ElementId>,
    pub ops: Vec<PsdOp>,
}

/// A generalized measurement: an explicit finite-outcome family, or a
/// covariant one stored through its seed in compressed H₀ coordinates.
#[derive(Debug, Clone)]
pub enum Gpovm {
    Finite(FiniteGpovm),
    Covariant { seed: CMat },
}

impl Gpovm {
    /// Validates the positivity of all operators and the master constraint,
    /// then wraps the finite-outcome family.
    pub fn finite(ctx: &RepContext, outcomes: Vec<ElementId>, ops: Vec<PsdOp>) -> Result<Self> {
        if outcomes.len() != ops.len() {
            return Err(Error::Dim("one outcome label per operator required".into()));
        }
        let d2 = ctx.pair.ambient_dim();
        for (k, op) in ops.iter().enumerate() {
            if op.dim() != d2 {
                return Err(Error::Dim(format!(
                    "operator {k} has dimension {} on a pair space of dimension {d2}",
                    op.dim()
                )));
            }
            op.validate_psd()?;
        }
        for &o in &outcomes {
            ctx.group().check_element(o)?;
        }
        let m = Gpovm::Finite(FiniteGpovm { outcomes, ops });
        let resid = master_constraint_check(&m, ctx)?;
        if resid > MASTER_TOL {
            return Err(Error::Validation(format!(
                "master constraint violated: residual {resid:.3e}"
            )));
        }
        Ok(m)
    }

    /// Validates PSD and the seed normalization Tr T ρ_μ = 1, then wraps a
    /// covariant measurement given by its compressed seed.
    pub fn covariant(ctx: &RepContext, seed: CMat) -> Result<Self> {
        if seed.rows() != ctx.pair.h0_dim() || seed.cols() != ctx.pair.h0_dim() {
            return Err(Error::Dim(format!(
                "seed must live on the {}-dimensional compressed space",
                ctx.pair.h0_dim()
            )));
        }
        PsdOp::Dense(seed.clone()).validate_psd()?;
        let m = Gpovm::Covariant { seed };
        let resid = master_constraint_check(&m, ctx)?;
        if resid > MASTER_TOL {
            return Err(Error::Validation(format!(
                "seed normalization violated: |Tr T ρ_μ − 1| = {resid:.3e}"
            )));
        }
        Ok(m)
    }

    /// Covariant measurement from a rank-one seed |x⟩⟨x| in compressed
    /// coordinates.
    pub fn covariant_rank_one(ctx: &RepContext, x: &CVec) -> Result<Self> {
        Gpovm::covariant(ctx, x.outer(x))
    }

    pub fn seed(&self) -> Option<&CMat> {
        match self {
            Gpovm::Covariant { seed } => Some(seed),
            Gpovm::Finite(_) => None,
        }
    }
}

/// |Tr (Σ_k M_k) ρ_μ − 1|, the normalization against the average state.
pub fn master_constraint_check(m: &Gpovm, ctx: &RepContext) -> Result<f64> {
    let total = match m {
        Gpovm::Covariant { seed } => {
            let n = ctx.pair.n_tilde(&ctx.dec);
            n.mul(seed).trace().re
        }
        Gpovm::Finite(f) => {
            let count = ctx.element_count() as f64;
            let mut acc = 0.0;
            for g in ctx.group().elements() {
                let choi = ctx.choi(g);
                for op in &f.ops {
                    acc += op.expectation(&choi);
                }
            }
            acc / count
        }
    };
    Ok((total - 1.0).abs())
}

/// q_T(h) = ⟨⟨f(h)| T |f(h)⟩⟩ for a compressed seed.
pub fn seed_q_value(ctx: &RepContext, seed: &CMat, h: ElementId) -> f64 {
    let phi = ctx.phi(h);
    let val = seed.sandwich(&phi, &phi);
    debug_assert!(val.im.abs() <= IMAG_RESIDUE_TOL * (1.0 + val.re.abs()));
    val.re
}

/// Average error at true action g.
pub fn risk_at(m: &Gpovm, ctx: &RepContext, v: &ErrorFunction, g: ElementId) -> Result<f64> {
    ctx.group().check_element(g)?;
    let group = ctx.group();
    match m {
        Gpovm::Finite(f) => {
            let mut acc = 0.0;
            let choi = ctx.choi(g);
            let ginv = group.inv(g);
            for (k, op) in f.ops.iter().enumerate() {
                let h = group.mul(ginv, f.outcomes[k]);
                acc += v.eval(&ctx.rep, h) * op.expectation(&choi);
            }
            Ok(acc)
        }
        Gpovm::Covariant { seed } => {
            let count = group.element_count();
            let ginv = group.inv(g);
            let mut acc = 0.0;
            for ghat in group.elements() {
                let h = group.mul(ginv, ghat);
                let q = seed_q_value(ctx, seed, group.mul(group.inv(ghat), g));
                acc += v.eval(&ctx.rep, h) * q;
            }
            Ok(acc / count as f64)
        }
    }
}

/// Bayes risk: the Haar average of the per-point risk.
pub fn bayes_risk(m: &Gpovm, ctx: &RepContext, v: &ErrorFunction) -> Result<f64> {
    // Covariant measurements have constant per-point risk; one evaluation
    // is exact and the average is kept for finite families.
    match m {
        Gpovm::Covariant { .. } => risk_at(m, ctx, v, ctx.group().identity()),
        Gpovm::Finite(_) => {
            let count = ctx.element_count() as f64;
            let mut acc = 0.0;
            for g in ctx.group().elements() {
                acc += risk_at(m, ctx, v, g)?;
            }
            Ok(acc / count)
        }
    }
}

/// Worst-case risk over the group (the quadrature grid for covariant U(1)
/// measurements, where the per-point risk is constant anyway).
pub fn worst_risk(m: &Gpovm, ctx: &RepContext, v: &ErrorFunction) -> Result<f64> {
    if ctx.group().is_u1() && matches!(m, Gpovm::Finite(_)) {
        return Err(Error::Unsupported(
            "worst-case risk of non-covariant u1 measurements is out of scope".into(),
        ));
    }
    let mut worst = f64::NEG_INFINITY;
    for g in ctx.group().elements() {
        worst = worst.max(risk_at(m, ctx, v, g)?);
    }
    Ok(worst)
}

/// The translated measurement M_g with outcomes relabeled by g⁻¹ and
/// operators conjugated so that risks shift: D_{w,g'}(M_g) = D_{w,gg'}(M).
pub fn translate_gpovm(m: &FiniteGpovm, ctx: &RepContext, g: ElementId) -> Result<FiniteGpovm> {
    let group = ctx.group();
    let ginv = group.inv(g);
    let mut outcomes = Vec::with_capacity(m.outcomes.len());
    let mut ops = Vec::with_capacity(m.ops.len());
    for (k, op) in m.ops.iter().enumerate() {
        outcomes.push(group.mul(ginv, m.outcomes[k]));
        let conj = match op {
            PsdOp::Factors(fs) => PsdOp::Factors(
                fs.iter()
                    .map(|c| ctx.pair_action(g, true, c))
                    .collect::<Result<_>>()?,
            ),
            PsdOp::Dense(mat) => {
                let d = ctx.rep.dim();
                let u = crate::matcore::kron(&ctx.rep.unitary(g), &CMat::identity(d));
                PsdOp::Dense(u.dagger().mul(mat).mul(&u))
            }
        };
        ops.push(conj);
    }
    Ok(FiniteGpovm { outcomes, ops })
}

/// Hunt–Stein covariantization: group-averages a finite-outcome family into
/// the covariant measurement with seed T̄ = Σ_k compress(f(ĝ_k)† M_k f(ĝ_k)).
/// Bayes risk is preserved exactly; worst-case risk cannot increase.
pub fn covariantize(m: &Gpovm, ctx: &RepContext) -> Result<Gpovm> {
    let finite = match m {
        Gpovm::Covariant { seed } => {
            // Covariant measurements are fixed points.
            return Gpovm::covariant(ctx, seed.clone());
        }
        Gpovm::Finite(f) => f,
    };
    if ctx.group().is_u1() {
        return Err(Error::Unsupported(
            "covariantize of finite-outcome u1 measurements is out of scope".into(),
        ));
    }
    let h0 = ctx.pair.h0_dim();
    let mut seed = CMat::zeros(h0, h0);
    for (k, op) in finite.ops.iter().enumerate() {
        let ghat = finite.outcomes[k];
        let compressed = match op {
            PsdOp::Factors(fs) => {
                let moved: Vec<CVec> = fs
                    .iter()
                    .map(|c| ctx.pair_action(ghat, true, c))
                    .collect::<Result<_>>()?;
                ctx.compress_factors(&moved)?
            }
            PsdOp::Dense(mat) => {
                let d = ctx.rep.dim();
                let u = crate::matcore::kron(&ctx.rep.unitary(ghat), &CMat::identity(d));
                ctx.compress_operator(&u.dagger().mul(mat).mul(&u))?
            }
        };
        seed = seed.add(&compressed);
    }
    Gpovm::covariant(ctx, seed)
}

/// Recovers the compressed seed T = |G| P₀ M({e}) P₀ from a covariant
/// finite-outcome family and verifies the reconstruction
/// M({ĝ}) = (1/|G|) f(ĝ) T f(ĝ)† on H₀, reporting the worst element.
pub fn seed_from_covariant(m: &FiniteGpovm, ctx: &RepContext, tol: f64) -> Result<CMat> {
    if ctx.group().is_u1() {
        return Err(Error::Unsupported(
            "seed extraction needs a finite outcome-per-element family".into(),
        ));
    }
    let group = ctx.group();
    let count = group.element_count();
    let h0 = ctx.pair.h0_dim();
    // Compressed outcome mass per element.
    let mut mass: Vec<CMat> = vec![CMat::zeros(h0, h0); count];
    for (k, op) in m.ops.iter().enumerate() {
        let compressed = match op {
            PsdOp::Factors(fs) => ctx.compress_factors(fs)?,
            PsdOp::Dense(mat) => ctx.compress_operator(mat)?,
        };
        mass[m.outcomes[k]] = mass[m.outcomes[k]].add(&compressed);
    }
    let seed = mass[group.identity()].scale_re(count as f64);
    let mut worst = (0usize, 0.0f64);
    for ghat in group.elements() {
        let u = ctx
            .pair
            .compressed_action(&ctx.dec, group, ghat);
        let rec = u.mul(&seed).mul(&u.dagger()).scale_re(1.0 / count as f64);
        let resid = rec.sub(&mass[ghat]).max_abs();
        if resid > worst.1 {
            worst = (ghat, resid);
        }
    }
    if worst.1 > tol {
        return Err(Error::Validation(format!(
            "measurement is not covariant within {tol:.1e}: worst element {} deviates by {:.3e}",
            worst.0, worst.1
        )));
    }
    let norm = ctx.pair.n_tilde(&ctx.dec).mul(&seed).trace().re;
    if (norm - 1.0).abs() > MASTER_TOL {
        return Err(Error::Validation(format!(
            "extracted seed has Tr T ρ_μ = {norm}, expected 1"
        )));
    }
    Ok(seed)
}

/// Expands a covariant seed into the equivalent finite-outcome family
/// M_ĝ = (1/|G|) f(ĝ) T f(ĝ)† with one (factored) operator per element.
pub fn covariant_as_finite(ctx: &RepContext, seed: &CMat) -> Result<FiniteGpovm> {
    if ctx.group().is_u1() {
        return Err(Error::Unsupported(
            "finite expansion of u1 covariant measurements is not defined".into(),
        ));
    }
    let count = ctx.element_count();
    // Factor the seed through its spectral decomposition, in ambient
    // coordinates scaled by the Haar weight.
    let (vals, vecs) = hermitian_eig(seed)?;
    let scale = vals.last().copied().unwrap_or(0.0).max(1.0);
    let mut base: Vec<CVec> = Vec::new();
    for (val, vec) in vals.iter().zip(&vecs) {
        if *val > 1e-12 * scale {
            let amb = ctx.pair.decompress(&ctx.dec, vec)?;
            base.push(amb.scale(Complex64::new((val / count as f64).sqrt(), 0.0)));
        }
    }
    let mut outcomes = Vec::with_capacity(count);
    let mut ops = Vec::with_capacity(count);
    for ghat in ctx.group().elements() {
        let fs: Vec<CVec> = base
            .iter()
            .map(|c| ctx.pair_action(ghat, false, c))
            .collect::<Result<_>>()?;
        outcomes.push(ghat);
        ops.push(PsdOp::Factors(fs));
    }
    Ok(FiniteGpovm { outcomes, ops })
}

/// Subsystem dimensions of a sequential (comb) strategy: one (input,
/// output) pair per channel use, in use order.
#[derive(Debug, Clone)]
pub struct CombDims {
    pub steps: Vec<(usize, usize)>, // (dim A_k, dim B_k)
}

impl CombDims {
    pub fn uniform(d: usize, n: usize) -> Self {
        CombDims {
            steps: vec![(d, d); n],
        }
    }

    fn pair_dim(&self) -> usize {
        self.steps.iter().map(|&(a, b)| a * b).product()
    }
}

/// Residual report for the sequential-strategy normalization conditions.
#[derive(Debug, Clone, Serialize)]
pub struct CombReport {
    /// |Tr Σ M_x − Π dim B_k|.
    pub trace_residual: f64,
    /// Per step k (1-based from the first use), the deviation of the traced
    /// total from I_{B_k} ⊗ (remainder); partial traces are divided by the
    /// removed dimension. The unnormalized reading of the recursion is the
    /// same condition scaled by dim B_k.
    pub step_residuals: Vec<f64>,
}

impl CombReport {
    pub fn max_residual(&self) -> f64 {
        self.step_residuals
            .iter()
            .copied()
            .fold(self.trace_residual, f64::max)
    }
}

/// Checks the sequential-strategy (comb) normalization of Σ_x M_x.
pub fn comb_constraint_check(ops: &[PsdOp], dims: &CombDims) -> Result<CombReport> {
    let total = dims.pair_dim();
    if ops.is_empty() {
        return Err(Error::Dim("comb check needs at least one operator".into()));
    }
    for op in ops {
        if op.dim() != total {
            return Err(Error::Dim(format!(
                "operator dimension {} does not match comb dimensions ({total})",
                op.dim()
            )));
        }
    }
    let mut s = CMat::zeros(total, total);
    for op in ops {
        s = s.add(&op.to_dense(total));
    }
    let n = dims.steps.len();
    let dim_kb: usize = dims.steps.iter().map(|&(_, b)| b).product();
    let trace_residual = (s.trace().re - dim_kb as f64).abs();

    let mut step_residuals = vec![0.0; n];
    // Work down from the last use: at each level S_k lives on
    // [B_1..B_k, A_1..A_k] and must factor as I_{B_k} ⊗ (reduced).
    let mut current = s;
    for k in (0..n).rev() {
        let sys: Vec<usize> = {
            let mut v: Vec<usize> = dims.steps[..=k].iter().map(|&(_, b)| b).collect();
            v.extend(dims.steps[..=k].iter().map(|&(a, _)| a));
            v
        };
        let m = sys.len(); // 2(k+1) subsystems
        let db = dims.steps[k].1;
        // Trace out B_k (index k) and re-tensor the identity.
        let keep: Vec<bool> = (0..m).map(|i| i != k).collect();
        let reduced = partial_trace(&current, &sys, &keep)?;
        let candidate = crate::matcore::kron(&CMat::identity(db), &reduced.scale_re(1.0 / db as f64));
        // candidate systems: [B_k, B_1..B_{k-1}, A_1..A_k] -> reorder.
        let mut cand_dims = vec![db];
        cand_dims.extend(sys.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &d)| d));
        let mut order: Vec<usize> = Vec::with_capacity(m);
        // Output slot j should take input subsystem holding B_j / A_j.
        // candidate layout: slot 0 = B_k, slots 1..k = B_1..B_{k-1},
        // slots k+1..2k+1 = A_1..A_{k+1}.
        for j in 0..m {
            if j < k {
                order.push(j + 1); // B_{j+1} sits at candidate slot j+1
            } else if j == k {
                order.push(0); // B_k sits at candidate slot 0
            } else {
                order.push(j); // A block unchanged
            }
        }
        let candidate = permute_subsystems(&candidate, &cand_dims, &order)?;
        step_residuals[k] = candidate.sub(&current).max_abs();
        // Remove the pair (A_k, B_k) and continue.
        let keep_pair: Vec<bool> = (0..m).map(|i| i != k && i != m - 1).collect();
        current = partial_trace(&current, &sys, &keep_pair)?;
    }
    Ok(CombReport {
        trace_residual,
        step_residuals,
    })
}

/// A physical parallel strategy (input state with ancilla, joint POVM)
/// embedded as a finite-outcome generalized measurement: outcome x carries
/// M_x = (I ⊗ Φ̄) Π_x (I ⊗ Φᵀ) with Φ the input-state amplitude matrix.
pub struct ParallelStrategy {
    /// d × a amplitude matrix of the input pure state on channel ⊗ ancilla.
    pub input: CMat,
    /// Rank-one POVM vectors on output ⊗ ancilla, with outcome labels.
    pub povm: Vec<(ElementId, Vec<CVec>)>,
}

impl ParallelStrategy {
    pub fn to_gpovm(&self, ctx: &RepContext) -> Result<Gpovm> {
        let d = ctx.rep.dim();
        let a = self.input.cols();
        let mut outcomes = Vec::new();
        let mut ops = Vec::new();
        for (label, ws) in &self.povm {
            let mut cs = Vec::with_capacity(ws.len());
            for w in ws {
                if w.dim() != d * a {
                    return Err(Error::Dim("POVM vector dimension mismatch".into()));
                }
                // c_{(h,k)} = Σ_a W_{h,a} conj(Φ_{k,a}).
                let mut c = CVec::zeros(d * d);
                for h in 0..d {
                    for kk in 0..d {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for aa in 0..a {
                            acc += w.get(h * a + aa) * self.input.get(kk, aa).conj();
                        }
                        c.set(h * d + kk, acc);
                    }
                }
                cs.push(c);
            }
            outcomes.push(*label);
            ops.push(PsdOp::Factors(cs));
        }
        Gpovm::finite(ctx, outcomes, ops)
    }
}

/// Builds a random two-step sequential strategy (Stinespring form) over a
/// two-copy representation with per-use dimension `d`: random entangled
/// input on K_1 ⊗ A_1, a random isometry from B_1 ⊗ A_1 into K_2 ⊗ A_2,
/// then a random rank-one POVM on B_2 ⊗ A_2 whose outcomes are assigned
/// random group-element guesses.
pub fn random_sequential_comb(
    ctx: &RepContext,
    d: usize,
    anc1: usize,
    anc2: usize,
    rng: &mut impl rand::Rng,
) -> Result<FiniteGpovm> {
    if ctx.rep.dim() != d * d {
        return Err(Error::Dim(format!(
            "two-step combs need a two-copy representation: dim {} is not {d}²",
            ctx.rep.dim()
        )));
    }
    if anc2 < anc1 {
        return Err(Error::Dim("isometry needs anc2 >= anc1".into()));
    }
    // Normalized input amplitudes Φ1 on K_1 ⊗ A_1.
    let phi_vec = {
        let v = random_cvec(rng, d * anc1);
        let n = v.norm();
        v.scale(Complex64::new(1.0 / n, 0.0))
    };
    let phi1 = CMat::from_fn(d, anc1, |k, a| phi_vec.get(k * anc1 + a));
    // Isometry V1: B_1 ⊗ A_1 -> K_2 ⊗ A_2 (first d*anc1 columns of a
    // random unitary on the larger space).
    let big = random_unitary(rng, d * anc2);
    let v1 = CMat::from_fn(d * anc2, d * anc1, |r, c| big.get(r, c));
    // Rank-one POVM from a random unitary basis of B_2 ⊗ A_2.
    let meas = random_unitary(rng, d * anc2);

    let count = ctx.element_count();
    let mut outcomes = Vec::new();
    let mut ops = Vec::new();
    let pair_dim = ctx.pair.ambient_dim();
    for x in 0..d * anc2 {
        let w = meas.column(x);
        // ⟨c|_(h1 h2 k1 k2) = Σ_{a1 a2} conj(w_{h2 a2}) V1[(k2 a2),(h1 a1)] Φ1[k1 a1]
        let mut c = CVec::zeros(pair_dim);
        for h1 in 0..d {
            for h2 in 0..d {
                for k1 in 0..d {
                    for k2 in 0..d {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for a1 in 0..anc1 {
                            for a2 in 0..anc2 {
                                acc += w.get(h2 * anc2 + a2).conj()
                                    * v1.get(k2 * anc2 + a2, h1 * anc1 + a1)
                                    * phi1.get(k1, a1);
                            }
                        }
                        // Pair-space flat index ((h1 h2), (k1 k2)).
                        let idx = ((h1 * d + h2) * d + k1) * d + k2;
                        c.set(idx, acc.conj());
                    }
                }
            }
        }
        outcomes.push(rng.random_range(0..count));
        ops.push(PsdOp::Factors(vec![c]));
    }
    Ok(FiniteGpovm { outcomes, ops })
}

/// Random finite-outcome measurement: one rank-1..4 positive operator per
/// group element, rescaled as a family to satisfy the master constraint.
pub fn random_gpovm(ctx: &RepContext, rng: &mut impl rand::Rng) -> Result<Gpovm> {
    let d2 = ctx.pair.ambient_dim();
    let count = ctx.element_count();
    let mut outcomes = Vec::with_capacity(count);
    let mut ops = Vec::with_capacity(count);
    for g in ctx.group().elements() {
        let rank = rng.random_range(1..=4usize);
        let fs: Vec<CVec> = (0..rank).map(|_| random_cvec(rng, d2)).collect();
        outcomes.push(g);
        ops.push(PsdOp::Factors(fs));
    }
    // One scalar constraint; rescale the whole family onto it.
    let raw = Gpovm::Finite(FiniteGpovm {
        outcomes: outcomes.clone(),
        ops: ops.clone(),
    });
    let total = 1.0 + master_constraint_check(&raw, ctx)?; // Tr(ΣM)ρ_μ ≥ 0
    // master_constraint_check returns |total − 1|; recompute the signed value.
    let signed = {
        let mut acc = 0.0;
        for g in ctx.group().elements() {
            let choi = ctx.choi(g);
            for op in &ops {
                acc += op.expectation(&choi);
            }
        }
        acc / count as f64
    };
    let _ = total;
    let scale = 1.0 / signed;
    let ops: Vec<PsdOp> = ops.iter().map(|op| op.scale(scale)).collect();
    Gpovm::finite(ctx, outcomes, ops)
}
