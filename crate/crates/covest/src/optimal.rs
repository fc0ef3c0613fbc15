//! Optimal covariant seeds and the equivalent parallel strategy.
//!
//! The Bayes risk of a covariant seed T collapses to the single Haar
//! integral Tr T W with W = ∫ v(h⁻¹) |f(h)⟩⟩⟨⟨f(h)| μ(dh), assembled here
//! in the compressed H₀ coordinates. Minimizing over feasible rank-one
//! seeds is then a generalized eigenproblem against the normalization
//! operator N (which equals the average state), and the optimum is carried
//! over to a parallel strategy on H′ = ⊕ U_λ ⊗ C^{d_λ} through the input
//! state ψ[T] that reproduces the seed's outcome statistics exactly.

use num_complex::Complex64;

use crate::gpovm::{seed_q_value, ErrorFunction};
use crate::groups::ElementId;
use crate::irreps::RepContext;
use crate::matcore::{
    hermitian_eig, min_generalized_eig, pairwise_sum_mats, CMat, CVec, C_ZERO,
};
use crate::{Error, Result};

/// Risk operator on the compressed pair space, with its construction route.
#[derive(Debug, Clone)]
pub struct RiskOperator {
    pub w: CMat,
    pub provenance: RiskProvenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskProvenance {
    SingleIntegral,
    DoubleIntegral,
}

/// W = ∫ ṽ(h) φ(h) φ(h)† μ(dh) with ṽ(h) = v(h⁻¹), so that
/// Tr T W is the Bayes risk of the covariant measurement with seed T.
pub fn risk_operator(ctx: &RepContext, v: &ErrorFunction) -> Result<RiskOperator> {
    v.validate(&ctx.rep)?;
    let group = ctx.group();
    let count = group.element_count();
    let mut terms: Vec<CMat> = Vec::with_capacity(count);
    for h in group.elements() {
        let phi = ctx.phi(h);
        terms.push(phi.outer(&phi).scale_re(v.eval_inv(&ctx.rep, h)));
    }
    let w = pairwise_sum_mats(&mut terms)
        .expect("group is non-empty")
        .scale_re(1.0 / count as f64);
    Ok(RiskOperator {
        w,
        provenance: RiskProvenance::SingleIntegral,
    })
}

/// Brute-force double integral over (g, ĝ) of w(g, ĝ) weighted by the
/// outcome densities; agrees with [`risk_operator`] and pins the
/// translation convention.
pub fn risk_operator_double_integral(ctx: &RepContext, v: &ErrorFunction) -> Result<RiskOperator> {
    v.validate(&ctx.rep)?;
    let group = ctx.group();
    let count = group.element_count();
    let mut terms: Vec<CMat> = Vec::with_capacity(count * count);
    for g in group.elements() {
        let ginv = group.inv(g);
        for ghat in group.elements() {
            // w(g, ĝ) · |f(ĝ⁻¹ g)⟩⟩⟨⟨f(ĝ⁻¹ g)| in compressed coordinates.
            let weight = v.eval(&ctx.rep, group.mul(ginv, ghat));
            let phi = ctx.phi(group.mul(group.inv(ghat), g));
            terms.push(phi.outer(&phi).scale_re(weight));
        }
    }
    let w = pairwise_sum_mats(&mut terms)
        .expect("group is non-empty")
        .scale_re(1.0 / (count * count) as f64);
    Ok(RiskOperator {
        w,
        provenance: RiskProvenance::DoubleIntegral,
    })
}

/// The normalization operator N = ⊕_λ d_λ⁻¹ I_λ ⊗ I_λ ⊗ |I_{n_λ}⟩⟩⟨⟨I_{n_λ}|
/// in compressed coordinates; numerically identical to the compressed
/// average state.
pub fn normalization_operator(ctx: &RepContext) -> CMat {
    ctx.pair.n_tilde(&ctx.dec)
}

/// Minimizes the Bayes risk over feasible rank-one seeds. Returns the
/// optimal compressed seed vector and its risk.
pub fn solve_optimal_seed(ctx: &RepContext, v: &ErrorFunction) -> Result<(f64, CVec)> {
    let w = risk_operator(ctx, v)?;
    let n = normalization_operator(ctx);
    let (value, x) = min_generalized_eig(&w.w, &n, crate::DEFAULT_RANK_TOL)?;
    // Eigen-roundoff can leave a tiny negative value on exactly achievable
    // problems; clamp at zero since W is positive semi-definite.
    Ok((value.max(0.0), x))
}

/// The canonical parallel scheme on H′ = ⊕ U_λ ⊗ C^{r_λ} with
/// r_λ = min(d_λ, l·n_λ): the reference dimension l, the block layout, and
/// the covariant-measurement seed vector F = ⊕ √d_λ |I_{r_λ}⟩⟩.
#[derive(Debug, Clone)]
pub struct ParallelScheme {
    pub reference_dim: usize,
    /// Per label: (offset into H′, d_λ, r_λ).
    pub blocks: Vec<(usize, usize, usize)>,
    pub dim: usize,
    pub f_vector: CVec,
}

/// Smallest reference dimension attaining r_λ = d_λ for every λ.
pub fn default_reference_dim(ctx: &RepContext) -> usize {
    ctx.dec
        .dims()
        .iter()
        .zip(ctx.dec.mults())
        .map(|(&d, &n)| d.div_ceil(n))
        .max()
        .unwrap_or(1)
}

/// Builds the parallel scheme for reference dimension `l ≥ 1`.
pub fn build_parallel_scheme(ctx: &RepContext, l: usize) -> Result<ParallelScheme> {
    if l == 0 {
        return Err(Error::Validation("reference dimension must be positive".into()));
    }
    let mut blocks = Vec::with_capacity(ctx.dec.len());
    let mut dim = 0usize;
    for (&dl, &nl) in ctx.dec.dims().iter().zip(ctx.dec.mults()) {
        let r = dl.min(l * nl);
        blocks.push((dim, dl, r));
        dim += dl * r;
    }
    let mut f = CVec::zeros(dim);
    for &(off, dl, r) in &blocks {
        let w = Complex64::new((dl as f64).sqrt(), 0.0);
        for u in 0..r {
            f.set(off + u * r + u, w);
        }
    }
    Ok(ParallelScheme {
        reference_dim: l,
        blocks,
        dim,
        f_vector: f,
    })
}

impl ParallelScheme {
    /// Applies f′(g) = ⊕ f_λ(g) ⊗ I_{r_λ} to a vector on H′.
    pub fn apply_action(&self, ctx: &RepContext, g: ElementId, psi: &CVec) -> CVec {
        let mut out = CVec::zeros(self.dim);
        for (lam, &(off, dl, r)) in self.blocks.iter().enumerate() {
            let b = ctx.dec.block(ctx.group(), lam, g);
            for u in 0..dl {
                for c in 0..r {
                    let mut acc = C_ZERO;
                    for w in 0..dl {
                        acc += b.get(u, w) * psi.get(off + w * r + c);
                    }
                    out.set(off + u * r + c, acc);
                }
            }
        }
        out
    }

    /// Outcome amplitude ⟨F| f′(h) |ψ⟩.
    pub fn amplitude(&self, ctx: &RepContext, h: ElementId, psi: &CVec) -> Complex64 {
        // ⟨F|f′(h)|ψ⟩ = Σ_λ √d_λ Σ_{u,c,w} δ_{uc} f_λ(h)_{uw} ψ_{wc}
        let mut acc = C_ZERO;
        for (lam, &(off, dl, r)) in self.blocks.iter().enumerate() {
            let b = ctx.dec.block(ctx.group(), lam, h);
            let wgt = (dl as f64).sqrt();
            for u in 0..r {
                for w in 0..dl {
                    acc += b.get(u, w).scale(wgt) * psi.get(off + w * r + u);
                }
            }
        }
        acc
    }

    /// Outcome probability density value r(h) = |⟨F| f′(h) |ψ⟩|².
    pub fn q_value(&self, ctx: &RepContext, h: ElementId, psi: &CVec) -> f64 {
        self.amplitude(ctx, h, psi).norm_sqr()
    }

    /// Completeness residual ‖∫ f′(g) |F⟩⟨F| f′(g)† μ(dg) − I‖_max.
    pub fn completeness_residual(&self, ctx: &RepContext) -> f64 {
        let group = ctx.group();
        let count = group.element_count();
        let mut terms: Vec<CMat> = Vec::with_capacity(count);
        for g in group.elements() {
            let fg = self.apply_action(ctx, g, &self.f_vector);
            terms.push(fg.outer(&fg));
        }
        let total = pairwise_sum_mats(&mut terms)
            .expect("group is non-empty")
            .scale_re(1.0 / count as f64);
        total.sub(&CMat::identity(self.dim)).max_abs()
    }

    /// The isometric embedding of H′ into H ⊗ C^l, mapping block λ's
    /// reference slot c onto multiplicity-and-reference slot (m, j) with
    /// c = m·l + j. Columns are indexed by the H′ layout.
    pub fn embedding_isometry(&self, ctx: &RepContext) -> Result<CMat> {
        let d = ctx.rep.dim();
        let l = self.reference_dim;
        let v = ctx.dec.basis_change();
        let mut iso = CMat::zeros(d * l, self.dim);
        for (lam, &(off, dl, r)) in self.blocks.iter().enumerate() {
            let nl = ctx.dec.mults()[lam];
            let voff = ctx.dec.block_offset(lam);
            for u in 0..dl {
                for c in 0..r {
                    let (m, j) = (c / l, c % l);
                    // H-column of the (λ, u, m) basis vector, tensored with
                    // reference basis state j.
                    for i in 0..d {
                        let amp = v.get(i, voff + u * nl + m);
                        iso.set(i * l + j, off + u * r + c, amp);
                    }
                }
            }
        }
        Ok(iso)
    }
}

/// The parallel-strategy input state ψ[T] reproducing the covariant seed
/// T = |X⟩⟨X|: block λ of ψ[T] is d_λ^{-1/2} |G_λᵀ⟩⟩ where G_λ is the
/// multiplicity-contracted diagonal block of the conjugate of X. Requires
/// the feasibility Tr T ρ_μ = 1, which makes ψ[T] a unit vector.
pub fn psi_from_seed(ctx: &RepContext, scheme: &ParallelScheme, x_ambient: &CVec) -> Result<CVec> {
    let gs = ctx.pair.g_blocks(&ctx.dec, x_ambient)?;
    let feas = ctx.pair.rho_mu_expectation(&ctx.dec, x_ambient)?;
    if feas <= 1e-12 {
        return Err(Error::Infeasible(
            "seed vector has no diagonal-block content in any isotypic component".into(),
        ));
    }
    if (feas - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "seed is not normalized: Tr T ρ_μ = {feas}"
        )));
    }
    let mut psi = CVec::zeros(scheme.dim);
    for (lam, &(off, dl, r)) in scheme.blocks.iter().enumerate() {
        if r < dl {
            return Err(Error::Validation(
                "parallel scheme reference dimension is too small to host ψ[T]".into(),
            ));
        }
        let g = &gs[lam];
        let w = 1.0 / (dl as f64).sqrt();
        for u in 0..dl {
            for u2 in 0..dl {
                // vec(G_λᵀ) entry at (u, u2) is G_λ(u2, u).
                psi.set(off + u * r + u2, g.get(u2, u).scale(w));
            }
        }
    }
    Ok(psi)
}

/// Average error of the parallel strategy with input ψ and the canonical
/// covariant measurement: ⟨ψ| W′ |ψ⟩ with
/// W′ = ∫ ṽ(h) f′(h)† |F⟩⟨F| f′(h) μ(dh).
pub fn parallel_risk(
    ctx: &RepContext,
    scheme: &ParallelScheme,
    v: &ErrorFunction,
    psi: &CVec,
) -> Result<f64> {
    if psi.dim() != scheme.dim {
        return Err(Error::Dim("input state does not live on H′".into()));
    }
    if (psi.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "input state must be normalized, got norm {}",
            psi.norm()
        )));
    }
    let wp = parallel_risk_operator(ctx, scheme, v)?;
    let val = wp.sandwich(psi, psi);
    debug_assert!(val.im.abs() <= 1e-10 * (1.0 + val.re.abs()));
    Ok(val.re)
}

/// W′ = ∫ ṽ(h) f′(h)† |F⟩⟨F| f′(h) μ(dh) on H′.
pub fn parallel_risk_operator(
    ctx: &RepContext,
    scheme: &ParallelScheme,
    v: &ErrorFunction,
) -> Result<CMat> {
    v.validate(&ctx.rep)?;
    let group = ctx.group();
    let count = group.element_count();
    let mut terms: Vec<CMat> = Vec::with_capacity(count);
    for h in group.elements() {
        // f′(h)† |F⟩ = f′(h⁻¹) |F⟩ up to a cocycle phase that cancels in
        // the outer product.
        let u = scheme.apply_action(ctx, group.inv(h), &scheme.f_vector);
        terms.push(u.outer(&u).scale_re(v.eval_inv(&ctx.rep, h)));
    }
    Ok(pairwise_sum_mats(&mut terms)
        .expect("group is non-empty")
        .scale_re(1.0 / count as f64))
}

/// Minimizes the parallel risk over unit input states: the bottom
/// eigenpair of W′.
pub fn optimal_parallel_input(
    ctx: &RepContext,
    scheme: &ParallelScheme,
    v: &ErrorFunction,
) -> Result<(f64, CVec)> {
    let wp = parallel_risk_operator(ctx, scheme, v)?;
    let (vals, vecs) = hermitian_eig(&wp)?;
    Ok((vals[0].max(0.0), vecs[0].clone()))
}

/// Verdict of the seed-vs-parallel simulation comparison.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    /// Largest pointwise deviation |p_T(ĝ|g) − p_parallel(ĝ|g)| over all
    /// element pairs.
    pub max_probability_deviation: f64,
    /// Worst pair (g, ĝ).
    pub worst_pair: (ElementId, ElementId),
    /// Largest deviation of the amplitude moduli |⟨X|f(h)|f(e)⟩⟩| vs
    /// |⟨F|f′(h)|ψ[T]⟩|.
    pub max_amplitude_deviation: f64,
    pub seed_risk: f64,
    pub parallel_risk: f64,
    pub passed: bool,
    pub tolerance: f64,
}

/// Verifies that the parallel strategy with input ψ[T] reproduces the
/// outcome statistics of the covariant seed T = |X⟩⟨X| pointwise, and that
/// the two risks coincide.
pub fn verify_simulation(
    ctx: &RepContext,
    scheme: &ParallelScheme,
    v: &ErrorFunction,
    x_ambient: &CVec,
    tol: f64,
) -> Result<SimulationReport> {
    let group = ctx.group();
    let count = group.element_count();
    let x_compressed = ctx.pair.compress(&ctx.dec, x_ambient)?;
    let seed = Gpovmish::seed(&x_compressed);
    let psi = psi_from_seed(ctx, scheme, x_ambient)?;

    // Both conditional distributions are functions of h = ĝ⁻¹g through the
    // density values; precompute them per element.
    let q_seed: Vec<f64> = group
        .elements()
        .map(|h| seed_q_value(ctx, &seed, h))
        .collect();
    let q_par: Vec<f64> = group
        .elements()
        .map(|h| scheme.q_value(ctx, h, &psi))
        .collect();

    let weight = 1.0 / count as f64;
    let mut max_dev = 0.0f64;
    let mut worst = (0usize, 0usize);
    for g in group.elements() {
        for ghat in group.elements() {
            let h = group.mul(group.inv(ghat), g);
            let dev = (q_seed[h] - q_par[h]).abs() * weight;
            if dev > max_dev {
                max_dev = dev;
                worst = (g, ghat);
            }
        }
    }
    let max_amp = q_seed
        .iter()
        .zip(&q_par)
        .map(|(a, b)| (a.sqrt() - b.sqrt()).abs())
        .fold(0.0, f64::max);

    let m = crate::gpovm::Gpovm::Covariant { seed };
    let seed_risk = crate::gpovm::bayes_risk(&m, ctx, v)?;
    let par_risk = parallel_risk(ctx, scheme, v, &psi)?;
    let passed =
        max_dev <= tol && max_amp <= tol && (seed_risk - par_risk).abs() <= tol;
    Ok(SimulationReport {
        max_probability_deviation: max_dev,
        worst_pair: worst,
        max_amplitude_deviation: max_amp,
        seed_risk,
        parallel_risk: par_risk,
        passed,
        tolerance: tol,
    })
}

// Small helper so the seed construction reads as one expression above.
struct Gpovmish;
impl Gpovmish {
    fn seed(x: &CVec) -> CMat {
        x.outer(x)
    }
}

/// Draws a random feasible rank-one seed in ambient coordinates: a complex
/// Gaussian pair vector rescaled to Tr T ρ_μ = 1.
pub fn random_feasible_seed(
    ctx: &RepContext,
    rng: &mut impl rand::Rng,
) -> Result<CVec> {
    loop {
        let x = crate::matcore::random_cvec(rng, ctx.pair.ambient_dim());
        let feas = ctx.pair.rho_mu_expectation(&ctx.dec, &x)?;
        if feas > 1e-9 {
            return Ok(x.scale(Complex64::new(1.0 / feas.sqrt(), 0.0)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::test_fixtures::*;
    use crate::groups::rep_power;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn ctx_of(rep: crate::groups::ProjectiveRep) -> RepContext {
        RepContext::new(rep).unwrap()
    }

    #[test]
    fn risk_operator_examples() {
        // v ≡ 0 gives W = 0.
        let ctx = ctx_of(z2_sign_rep());
        let v = ErrorFunction::class_table(vec![0.0, 0.0]);
        assert_eq!(risk_operator(&ctx, &v).unwrap().w.max_abs(), 0.0);

        // Z_N with delta error: W = (1/N) Σ_{h≠e} φ(h) φ(h)†.
        let g = cyclic_group(4);
        let ctx = ctx_of(chars_rep(&g, &[0, 1, 2, 3]));
        let w = risk_operator(&ctx, &ErrorFunction::delta()).unwrap().w;
        let mut expect = CMat::zeros(4, 4);
        for h in 1..4 {
            let phi = ctx.phi(h);
            expect = expect.add(&phi.outer(&phi));
        }
        let expect = expect.scale_re(0.25);
        assert!(w.sub(&expect).max_abs() <= 1e-12);
    }

    #[test]
    fn u1_sine_squared_risk_operator_is_tridiagonal() {
        let ctx = ctx_of(u1_range_rep(4, 21));
        let w = risk_operator(&ctx, &ErrorFunction::sine_squared()).unwrap().w;
        for a in 0..5 {
            for b in 0..5 {
                let expect = if a == b {
                    2.0
                } else if (a as i64 - b as i64).abs() == 1 {
                    -1.0
                } else {
                    0.0
                };
                assert!(
                    (w.get(a, b) - Complex64::new(expect, 0.0)).norm() <= 1e-10,
                    "W[{a}][{b}] = {:?}",
                    w.get(a, b)
                );
            }
        }
    }

    #[test]
    fn single_and_double_integral_agree() {
        for (rep, v) in [
            (dihedral3_defining(), ErrorFunction::gate_infidelity()),
            (dihedral3_defining(), ErrorFunction::delta()),
            (hw_rep(2), ErrorFunction::delta()),
            (u1_range_rep(2, 16), ErrorFunction::sine_squared()),
        ] {
            let ctx = ctx_of(rep);
            let a = risk_operator(&ctx, &v).unwrap().w;
            let b = risk_operator_double_integral(&ctx, &v).unwrap().w;
            assert!(a.sub(&b).max_abs() <= 1e-10);
        }
        // An asymmetric per-element table exercises the ṽ relabeling.
        let g = cyclic_group(3);
        let ctx = ctx_of(chars_rep(&g, &[0, 1, 2]));
        let v = ErrorFunction::class_table(vec![0.0, 0.2, 0.9]);
        let a = risk_operator(&ctx, &v).unwrap().w;
        let b = risk_operator_double_integral(&ctx, &v).unwrap().w;
        assert!(a.sub(&b).max_abs() <= 1e-10);
    }

    #[test]
    fn risk_operator_traces_match_bayes_risk() {
        // Tr(T W) must reproduce the measurement-side Bayes risk for
        // random feasible seeds, and W must be positive semi-definite.
        let mut rng = ChaCha20Rng::seed_from_u64(71);
        for (rep, v) in [
            (dihedral3_defining(), ErrorFunction::gate_infidelity()),
            (hw_rep(2), ErrorFunction::delta()),
            (u1_range_rep(2, 16), ErrorFunction::sine_squared()),
        ] {
            let ctx = ctx_of(rep);
            let w = risk_operator(&ctx, &v).unwrap().w;
            let (vals, _) = hermitian_eig(&w).unwrap();
            assert!(vals[0] >= -1e-10 * w.max_abs().max(1.0));
            for _ in 0..20 {
                let x = random_feasible_seed(&ctx, &mut rng).unwrap();
                let xc = ctx.pair.compress(&ctx.dec, &x).unwrap();
                let from_operator = w.sandwich(&xc, &xc).re;
                let m = crate::gpovm::Gpovm::covariant_rank_one(&ctx, &xc).unwrap();
                let from_measurement = crate::gpovm::bayes_risk(&m, &ctx, &v).unwrap();
                assert!((from_operator - from_measurement).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn normalization_matches_average_state_on_builtins() {
        for rep in [
            z2_sign_rep(),
            dihedral3_defining(),
            hw_rep(2),
            rep_power(&z2_sign_rep(), 2).unwrap(),
            u1_range_rep(2, 16),
        ] {
            let ctx = ctx_of(rep);
            let n = normalization_operator(&ctx);
            let rho = crate::groups::average_state(&ctx.rep);
            let rho_c = ctx.compress_operator(&rho).unwrap();
            assert!(n.sub(&rho_c).max_abs() <= 1e-9);
        }
    }

    #[test]
    fn optimal_seed_closed_forms() {
        // Z_N with m of N characters and delta error: risk 1 − m/N.
        for (n, ks) in [(2usize, vec![0i64, 1]), (4, vec![0, 1]), (8, (0..8).collect())] {
            let g = cyclic_group(n);
            let ctx = ctx_of(chars_rep(&g, &ks));
            let (risk, x) = solve_optimal_seed(&ctx, &ErrorFunction::delta()).unwrap();
            let expect = 1.0 - ks.len() as f64 / n as f64;
            assert!((risk - expect).abs() <= 1e-9, "N={n}: {risk} vs {expect}");
            // Feasibility.
            let ntilde = normalization_operator(&ctx);
            assert!((ntilde.sandwich(&x, &x).re - 1.0).abs() <= 1e-10);
        }

        // Z_2 qubit rep, delta: perfect discrimination with the
        // maximally-entangled probe (1,0,0,1)/√2.
        let ctx = ctx_of(z2_sign_rep());
        let (risk, x) = solve_optimal_seed(&ctx, &ErrorFunction::delta()).unwrap();
        assert!(risk.abs() <= 1e-10);
        let amb = ctx.pair.decompress(&ctx.dec, &x).unwrap();
        // Up to phase: entries (1,0,0,±... the optimum is the uniform
        // character combination.
        let a0 = amb.get(0);
        assert!((a0.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-9);
        assert!((amb.get(3) / a0 - Complex64::new(1.0, 0.0)).norm() <= 1e-9);
        assert!(amb.get(1).norm() <= 1e-9 && amb.get(2).norm() <= 1e-9);

        // u1 modes {0,1} with 4sin²(θ/2): risk 1.
        let ctx = ctx_of(u1_range_rep(1, 8));
        let (risk, _) = solve_optimal_seed(&ctx, &ErrorFunction::sine_squared()).unwrap();
        assert!((risk - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn random_feasible_seeds_never_beat_the_optimum() {
        let ctx = ctx_of(dihedral3_defining());
        let v = ErrorFunction::gate_infidelity();
        let (risk, _) = solve_optimal_seed(&ctx, &v).unwrap();
        let w = risk_operator(&ctx, &v).unwrap().w;
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        for _ in 0..100 {
            let x = random_feasible_seed(&ctx, &mut rng).unwrap();
            let xc = ctx.pair.compress(&ctx.dec, &x).unwrap();
            let val = w.sandwich(&xc, &xc).re;
            assert!(val >= risk - 1e-9);
        }
    }

    #[test]
    fn parallel_scheme_layout_and_completeness() {
        // Z_2 qubit rep at l = 1: H′ = C², F = (1, 1).
        let ctx = ctx_of(z2_sign_rep());
        let scheme = build_parallel_scheme(&ctx, 1).unwrap();
        assert_eq!(scheme.dim, 2);
        for i in 0..2 {
            assert!((scheme.f_vector.get(i) - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
        }
        assert!(scheme.completeness_residual(&ctx) <= 1e-9);

        // Dihedral(3) defining rep at l = 2: one block U ⊗ C², F = √2|I₂⟩⟩.
        let ctx = ctx_of(dihedral3_defining());
        assert_eq!(default_reference_dim(&ctx), 2);
        let scheme = build_parallel_scheme(&ctx, 2).unwrap();
        assert_eq!(scheme.blocks, vec![(0, 2, 2)]);
        let s2 = 2f64.sqrt();
        for (i, expect) in [(0usize, s2), (3usize, s2)] {
            assert!((scheme.f_vector.get(i) - Complex64::new(expect, 0.0)).norm() <= 1e-12);
        }
        assert!(scheme.f_vector.get(1).norm() <= 1e-12);
        assert!(scheme.completeness_residual(&ctx) <= 1e-9);
    }

    #[test]
    fn completeness_holds_for_all_builtins_and_small_l() {
        for rep in [
            z2_sign_rep(),
            dihedral3_defining(),
            hw_rep(2),
            rep_power(&dihedral3_defining(), 2).unwrap(),
            u1_range_rep(3, 16),
        ] {
            let ctx = ctx_of(rep);
            for l in 1..=default_reference_dim(&ctx) {
                let scheme = build_parallel_scheme(&ctx, l).unwrap();
                assert!(
                    scheme.completeness_residual(&ctx) <= 1e-9,
                    "completeness failed at l = {l}"
                );
            }
        }
    }

    #[test]
    fn embedding_isometry_is_equivariant() {
        let ctx = ctx_of(rep_power(&dihedral3_defining(), 2).unwrap());
        let l = default_reference_dim(&ctx);
        let scheme = build_parallel_scheme(&ctx, l).unwrap();
        let iso = scheme.embedding_isometry(&ctx).unwrap();
        // Isometry.
        assert!(iso
            .dagger()
            .mul(&iso)
            .sub(&CMat::identity(scheme.dim))
            .max_abs()
            <= 1e-9);
        // Equivariance: (f(g) ⊗ I_l) E = E f′(g).
        let eye = CMat::identity(l);
        for g in ctx.group().elements() {
            let big = crate::matcore::kron(&ctx.rep.unitary(g), &eye);
            let lhs = big.mul(&iso);
            // Columns of E f′(g): apply f′ to each basis vector.
            let mut rhs = CMat::zeros(iso.rows(), iso.cols());
            for c in 0..scheme.dim {
                let e = CVec::basis(scheme.dim, c);
                let fe = scheme.apply_action(&ctx, g, &e);
                let col = iso.matvec(&fe);
                for r in 0..iso.rows() {
                    rhs.set(r, c, col.get(r));
                }
            }
            assert!(lhs.sub(&rhs).max_abs() <= 1e-9);
        }
    }

    #[test]
    fn psi_examples() {
        // Z_2 with X = (1,0,0,1)/√2 maps to ψ = (1,1)/√2.
        let ctx = ctx_of(z2_sign_rep());
        let scheme = build_parallel_scheme(&ctx, 1).unwrap();
        let x = CVec::from_entries(vec![
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            C_ZERO,
            C_ZERO,
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let psi = psi_from_seed(&ctx, &scheme, &x).unwrap();
        for i in 0..2 {
            assert!(
                (psi.get(i) - Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() <= 1e-12
            );
        }

        // Normalization for random feasible seeds on the two-copy rep.
        let ctx = ctx_of(rep_power(&z2_sign_rep(), 2).unwrap());
        let scheme = build_parallel_scheme(&ctx, default_reference_dim(&ctx)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        for _ in 0..100 {
            let x = random_feasible_seed(&ctx, &mut rng).unwrap();
            let psi = psi_from_seed(&ctx, &scheme, &x).unwrap();
            assert!((psi.norm() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn psi_identity_block_case() {
        // Seed supported on a single irrep with the identity matrix block:
        // ψ[T] is |I_λ⟩⟩/√d_λ on that block. On dihedral(3)'s defining
        // irrep the feasible such seed has compressed coordinates vec(I₂).
        let ctx = ctx_of(dihedral3_defining());
        let scheme = build_parallel_scheme(&ctx, default_reference_dim(&ctx)).unwrap();
        let x = CVec::from_entries(vec![
            Complex64::new(1.0, 0.0),
            C_ZERO,
            C_ZERO,
            Complex64::new(1.0, 0.0),
        ]);
        let n = normalization_operator(&ctx);
        assert!((n.sandwich(&x, &x).re - 1.0).abs() <= 1e-12);
        let amb = ctx.pair.decompress(&ctx.dec, &x).unwrap();
        let psi = psi_from_seed(&ctx, &scheme, &amb).unwrap();
        let s = 1.0 / 2f64.sqrt();
        for (i, expect) in [(0usize, s), (1, 0.0), (2, 0.0), (3, s)] {
            assert!((psi.get(i) - Complex64::new(expect, 0.0)).norm() <= 1e-9);
        }
    }

    /// Components of a seed vector outside the span of the Choi vectors
    /// contribute nothing to any outcome probability: they add positive
    /// cost in the ambient objective but never help, which is why the
    /// optimizer can live on H₀.
    #[test]
    fn off_support_components_do_not_move_risks() {
        let ctx = ctx_of(rep_power(&z2_sign_rep(), 2).unwrap());
        let scheme = build_parallel_scheme(&ctx, default_reference_dim(&ctx)).unwrap();
        let v = ErrorFunction::delta();
        let mut rng = ChaCha20Rng::seed_from_u64(61);
        let p0 = ctx.pair.p0_projector(&ctx.dec).unwrap();
        for _ in 0..10 {
            let x = random_feasible_seed(&ctx, &mut rng).unwrap();
            // Strip everything outside H₀; feasibility is unchanged.
            let x_in = p0.matvec(&x);
            let ra = verify_simulation(&ctx, &scheme, &v, &x, 1e-9).unwrap();
            let rb = verify_simulation(&ctx, &scheme, &v, &x_in, 1e-9).unwrap();
            assert!((ra.seed_risk - rb.seed_risk).abs() <= 1e-10);
            assert!((ra.parallel_risk - rb.parallel_risk).abs() <= 1e-10);
        }
    }

    #[test]
    fn psi_rejects_degenerate_seeds() {
        // A pair vector orthogonal to every diagonal block: on Z_2's
        // sign rep the off-diagonal slots (0,1) and (1,0) do the job.
        let ctx = ctx_of(z2_sign_rep());
        let scheme = build_parallel_scheme(&ctx, 1).unwrap();
        let x = CVec::from_entries(vec![
            C_ZERO,
            Complex64::new(1.0, 0.0),
            C_ZERO,
            C_ZERO,
        ]);
        assert!(matches!(
            psi_from_seed(&ctx, &scheme, &x),
            Err(Error::Infeasible(_)) | Err(Error::Validation(_))
        ));
    }

    #[test]
    fn parallel_risk_examples() {
        // Z_2, ψ = (1,1)/√2, delta error: perfect discrimination.
        let ctx = ctx_of(z2_sign_rep());
        let scheme = build_parallel_scheme(&ctx, 1).unwrap();
        let psi = CVec::from_entries(vec![
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        assert!(parallel_risk(&ctx, &scheme, &ErrorFunction::delta(), &psi)
            .unwrap()
            .abs()
            <= 1e-12);

        // Z_4 with characters {0,1}: optimal parallel risk 1/2.
        let g = cyclic_group(4);
        let ctx = ctx_of(chars_rep(&g, &[0, 1]));
        let scheme = build_parallel_scheme(&ctx, default_reference_dim(&ctx)).unwrap();
        let (risk, _) = optimal_parallel_input(&ctx, &scheme, &ErrorFunction::delta()).unwrap();
        assert!((risk - 0.5).abs() <= 1e-9);

        // Sine states: u1 modes {0..n} with 4sin²(θ/2) gives
        // 2(1 − cos(π/(n+2))).
        for n in [1i64, 2, 4] {
            let ctx = ctx_of(u1_range_rep(n, (4 * n + 5) as usize));
            let scheme = build_parallel_scheme(&ctx, 1).unwrap();
            let (risk, _) =
                optimal_parallel_input(&ctx, &scheme, &ErrorFunction::sine_squared()).unwrap();
            let expect = 2.0 * (1.0 - (std::f64::consts::PI / (n as f64 + 2.0)).cos());
            assert!((risk - expect).abs() <= 1e-9, "n={n}: {risk} vs {expect}");
        }
    }

    #[test]
    fn parallel_risk_rejects_unnormalized_input() {
        let ctx = ctx_of(z2_sign_rep());
        let scheme = build_parallel_scheme(&ctx, 1).unwrap();
        let psi = CVec::from_entries(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!(parallel_risk(&ctx, &scheme, &ErrorFunction::delta(), &psi).is_err());
    }

    #[test]
    fn optimal_risks_agree_on_builtin_pairs() {
        let pairs: Vec<(RepContext, ErrorFunction)> = vec![
            (ctx_of(z2_sign_rep()), ErrorFunction::delta()),
            (ctx_of(dihedral3_defining()), ErrorFunction::delta()),
            (ctx_of(dihedral3_defining()), ErrorFunction::gate_infidelity()),
            (ctx_of(hw_rep(2)), ErrorFunction::delta()),
            (ctx_of(u1_range_rep(4, 21)), ErrorFunction::sine_squared()),
        ];
        for (ctx, v) in pairs {
            let (seed_risk, _) = solve_optimal_seed(&ctx, &v).unwrap();
            let scheme = build_parallel_scheme(&ctx, default_reference_dim(&ctx)).unwrap();
            let (par_risk, _) = optimal_parallel_input(&ctx, &scheme, &v).unwrap();
            assert!(
                (seed_risk - par_risk).abs() <= 1e-9,
                "{}: {seed_risk} vs {par_risk}",
                ctx.group().name()
            );
        }
    }

    #[test]
    fn simulation_matches_pointwise_on_random_seeds() {
        let mut rng = ChaCha20Rng::seed_from_u64(51);
        for (rep, v) in [
            (rep_power(&dihedral3_defining(), 2).unwrap(), ErrorFunction::delta()),
            (hw_rep(2), ErrorFunction::delta()),
            (u1_range_rep(3, 16), ErrorFunction::sine_squared()),
        ] {
            let ctx = ctx_of(rep);
            let scheme = build_parallel_scheme(&ctx, default_reference_dim(&ctx)).unwrap();
            for _ in 0..20 {
                let x = random_feasible_seed(&ctx, &mut rng).unwrap();
                let report = verify_simulation(&ctx, &scheme, &v, &x, 1e-9).unwrap();
                assert!(
                    report.passed,
                    "simulation deviated by {} at {:?}",
                    report.max_probability_deviation, report.worst_pair
                );
            }
        }
    }

    #[test]
    fn optimal_seed_simulates_to_optimal_parallel() {
        let ctx = ctx_of(dihedral3_defining());
        let v = ErrorFunction::gate_infidelity();
        let (risk, x) = solve_optimal_seed(&ctx, &v).unwrap();
        let scheme = build_parallel_scheme(&ctx, default_reference_dim(&ctx)).unwrap();
        let amb = ctx.pair.decompress(&ctx.dec, &x).unwrap();
        let report = verify_simulation(&ctx, &scheme, &v, &amb, 1e-9).unwrap();
        assert!(report.passed);
        assert!((report.seed_risk - risk).abs() <= 1e-9);
    }

    #[test]
    fn heisenberg_scaling_toward_pi_squared() {
        let mut last = 0.0;
        for n in [4i64, 8, 16, 32] {
            let ctx = ctx_of(u1_range_rep(n, (4 * n + 5) as usize));
            let (risk, _) = solve_optimal_seed(&ctx, &ErrorFunction::sine_squared()).unwrap();
            let scaled = risk * ((n + 2) as f64).powi(2);
            assert!(scaled > last, "scaled risk must increase toward π²");
            last = scaled;
        }
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((last - pi2).abs() / pi2 <= 0.01);
    }
}
