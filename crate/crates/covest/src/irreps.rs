//! Isotypic decomposition of projective representations, and the compressed
//! pair-space machinery derived from it.
//!
//! The decomposition algorithm is cocycle-agnostic: the Haar average
//! R = ∫ f(g) X f(g)† μ(dg) of a random Hermitian X lands in the commutant
//! ⊕ I_λ ⊗ M_{n_λ}, so for a generic draw every eigenspace of R is a single
//! irreducible copy. Copies are classified into isotypic components by their
//! character vectors (characters of inequivalent same-cocycle irreps are
//! orthogonal, so the test has an O(1) margin), and the basis inside each
//! component is aligned through a polar-decomposed intertwiner so that all
//! multiplicity copies carry literally identical irrep matrices. That
//! alignment is what downstream consumers of |I_{n_λ}⟩⟩ rely on.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::groups::{ElementId, Group, ProjectiveRep, RepForm};
use crate::matcore::{
    hermitian_eig, random_cmat, random_hermitian, unvectorize, CMat, CVec, C_ONE, C_ZERO,
};
use crate::{Error, Result};

/// Seed used by [`decompose`] when the caller does not supply one.
pub const DEFAULT_DECOMPOSE_SEED: u64 = 0x1d5;

const MAX_ATTEMPTS: usize = 5;
const CLUSTER_GAP: f64 = 1e-6;
const BLOCK_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
enum DecDetail {
    /// Cached irrep blocks, indexed [label][element].
    Finite { blocks: Vec<Vec<CMat>> },
    /// One integer mode per label.
    U1 { modes: Vec<i64> },
}

/// The isotypic decomposition H = ⊕_λ U_λ ⊗ C^{n_λ}.
///
/// `basis_change` is the unitary V whose column `offset_λ + u·n_λ + m`
/// carries irrep row u of multiplicity copy m, so that V† f(g) V equals
/// ⊕_λ (f_λ(g) ⊗ I_{n_λ}) with the same matrix f_λ(g) in every copy.
#[derive(Debug, Clone)]
pub struct IrrepDecomposition {
    labels: Vec<String>,
    dims: Vec<usize>,
    mults: Vec<usize>,
    basis_change: CMat,
    col_offsets: Vec<usize>,
    off_block_residual: f64,
    detail: DecDetail,
}

impl IrrepDecomposition {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn mults(&self) -> &[usize] {
        &self.mults
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn basis_change(&self) -> &CMat {
        &self.basis_change
    }

    pub fn off_block_residual(&self) -> f64 {
        self.off_block_residual
    }

    /// Column offset of block λ inside the basis change.
    pub fn block_offset(&self, lam: usize) -> usize {
        self.col_offsets[lam]
    }

    pub fn total_dim(&self) -> usize {
        self.basis_change.rows()
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Validation(format!("unknown irrep label {label:?}")))
    }

    /// The irrep matrix f_λ(g).
    pub fn block(&self, group: &Group, lam: usize, g: ElementId) -> CMat {
        match &self.detail {
            DecDetail::Finite { blocks } => blocks[lam][g].clone(),
            DecDetail::U1 { modes } => {
                let z = Complex64::from_polar(1.0, modes[lam] as f64 * group.theta(g));
                CMat::diag(&[z])
            }
        }
    }

    /// Character χ_λ(g) = Tr f_λ(g).
    pub fn character(&self, group: &Group, lam: usize, g: ElementId) -> Complex64 {
        self.block(group, lam, g).trace()
    }
}

fn polar_unitary(t: &CMat) -> Result<CMat> {
    // U = T (T†T)^{-1/2}.
    let tt = t.dagger().mul(t);
    let (vals, vecs) = hermitian_eig(&tt)?;
    let max = vals.last().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return Err(Error::Degeneracy("polar decomposition of zero matrix".into()));
    }
    let mut inv_sqrt = CMat::zeros(t.cols(), t.cols());
    for (val, vec) in vals.iter().zip(&vecs) {
        if *val < 1e-12 * max {
            return Err(Error::Degeneracy(
                "intertwiner is numerically singular".into(),
            ));
        }
        inv_sqrt = inv_sqrt.add(&vec.outer(vec).scale_re(1.0 / val.sqrt()));
    }
    Ok(t.mul(&inv_sqrt))
}

struct IrrepCopy {
    basis: CMat, // d × d_λ isometry onto the copy
    character: Vec<Complex64>,
}

fn copy_block(rep: &ProjectiveRep, basis: &CMat, g: ElementId) -> CMat {
    basis.dagger().mul(&rep.unitary(g)).mul(basis)
}

fn try_decompose(rep: &ProjectiveRep, rng: &mut ChaCha20Rng) -> Result<IrrepDecomposition> {
    let d = rep.dim();
    let group = rep.group().clone();
    let count = group.element_count();

    let x = random_hermitian(rng, d);
    let r = crate::groups::haar_average(&group, |g| {
        let u = rep.unitary(g);
        u.mul(&x).mul(&u.dagger())
    });
    let (vals, vecs) = hermitian_eig(&r)?;

    // Cluster eigenvalues. Inside one irrep copy they agree to roundoff;
    // distinct commutant eigenvalues are generically far apart.
    let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut copies: Vec<IrrepCopy> = Vec::new();
    let mut start = 0usize;
    while start < d {
        let mut end = start + 1;
        while end < d && (vals[end] - vals[end - 1]).abs() <= CLUSTER_GAP * scale {
            end += 1;
        }
        let dim = end - start;
        let mut basis = CMat::zeros(d, dim);
        for (j, vec) in vecs[start..end].iter().enumerate() {
            for i in 0..d {
                basis.set(i, j, vec.get(i));
            }
        }
        // Irreducibility check: the averaged conjugation of a random matrix
        // must be scalar on an irreducible copy.
        let a0 = random_cmat(rng, dim, dim);
        let avg = crate::groups::haar_average(&group, |g| {
            let b = copy_block(rep, &basis, g);
            b.mul(&a0).mul(&b.dagger())
        });
        let mean = avg.trace().scale(1.0 / dim as f64);
        let resid = avg.sub(&CMat::identity(dim).scale(mean)).max_abs();
        if resid > 1e-6 * a0.max_abs().max(1.0) {
            return Err(Error::Degeneracy(format!(
                "eigenspace of dimension {dim} is not irreducible (residual {resid:.3e}); \
                 coincident commutant eigenvalues"
            )));
        }
        let character: Vec<Complex64> = (0..count)
            .map(|g| copy_block(rep, &basis, g).trace())
            .collect();
        copies.push(IrrepCopy { basis, character });
        start = end;
    }

    // Group copies into isotypic classes by character vector. Characters of
    // inequivalent irreps with one cocycle are orthogonal, so agreement
    // within 1e-6 everywhere is decisive.
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'outer: for (i, copy) in copies.iter().enumerate() {
        for class in classes.iter_mut() {
            let rep_char = &copies[class[0]].character;
            let close = copy
                .character
                .iter()
                .zip(rep_char)
                .all(|(a, b)| (a - b).norm() <= 1e-6);
            if close && copies[class[0]].basis.cols() == copy.basis.cols() {
                class.push(i);
                continue 'outer;
            }
        }
        classes.push(vec![i]);
    }

    // Deterministic label order: by (d_λ, quantized character fingerprint).
    let fingerprint = |class: &Vec<usize>| -> Vec<(i64, i64)> {
        copies[class[0]]
            .character
            .iter()
            .map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64))
            .collect()
    };
    classes.sort_by(|a, b| {
        let da = copies[a[0]].basis.cols();
        let db = copies[b[0]].basis.cols();
        da.cmp(&db).then_with(|| fingerprint(a).cmp(&fingerprint(b)))
    });

    // Align multiplicity copies to the first copy of each class and build
    // the basis change column by column.
    let mut v = CMat::zeros(d, d);
    let mut dims = Vec::new();
    let mut mults = Vec::new();
    let mut col_offsets = Vec::new();
    let mut col = 0usize;
    for class in &classes {
        let d_lam = copies[class[0]].basis.cols();
        let n_lam = class.len();
        col_offsets.push(col);
        dims.push(d_lam);
        mults.push(n_lam);

        let ref_basis = &copies[class[0]].basis;
        let mut aligned: Vec<CMat> = vec![ref_basis.clone()];
        for &j in &class[1..] {
            // Intertwiner T with f_ref(g) T = T f_j(g); its polar part is
            // the unitary change of basis mapping copy j onto the reference.
            let mut u = None;
            for _ in 0..2 {
                let c0 = random_cmat(rng, d_lam, d_lam);
                let t = crate::groups::haar_average(&group, |g| {
                    copy_block(rep, ref_basis, g)
                        .mul(&c0)
                        .mul(&copy_block(rep, &copies[j].basis, g).dagger())
                });
                if t.max_abs() > 1e-6 {
                    u = Some(polar_unitary(&t)?);
                    break;
                }
            }
            let u = u.ok_or_else(|| {
                Error::Degeneracy("intertwiner vanished for two random probes".into())
            })?;
            aligned.push(copies[j].basis.mul(&u.dagger()));
        }

        for u_row in 0..d_lam {
            for (m, basis) in aligned.iter().enumerate() {
                for i in 0..d {
                    v.set(i, col + u_row * n_lam + m, basis.get(i, u_row));
                }
            }
        }
        col += d_lam * n_lam;
    }

    if !v.is_unitary(1e-8) {
        return Err(Error::Degeneracy(
            "assembled basis change failed the unitarity check".into(),
        ));
    }

    // Extract reference blocks from V itself and validate block-diagonality.
    let mut worst = 0.0f64;
    let mut cached: Vec<Vec<CMat>> = vec![Vec::new(); classes.len()];
    for g in 0..count {
        let e = v.dagger().mul(&rep.unitary(g)).mul(&v);
        for lam in 0..classes.len() {
            let (off, dl, nl) = (col_offsets[lam], dims[lam], mults[lam]);
            let block = CMat::from_fn(dl, dl, |a, b| e.get(off + a * nl, off + b * nl));
            cached[lam].push(block);
        }
        // Residual against the assembled block-diagonal form.
        let mut assembled = CMat::zeros(d, d);
        for lam in 0..classes.len() {
            let (off, dl, nl) = (col_offsets[lam], dims[lam], mults[lam]);
            let block = &cached[lam][g];
            for a in 0..dl {
                for b in 0..dl {
                    for m in 0..nl {
                        assembled.set(off + a * nl + m, off + b * nl + m, block.get(a, b));
                    }
                }
            }
        }
        worst = worst.max(e.sub(&assembled).max_abs());
    }
    if worst > BLOCK_RESIDUAL_TOL {
        return Err(Error::Degeneracy(format!(
            "failed to block-diagonalize within tolerance: worst off-block norm {worst:.3e}"
        )));
    }

    let labels = (0..classes.len()).map(|i| format!("irr{i}")).collect();
    Ok(IrrepDecomposition {
        labels,
        dims,
        mults,
        basis_change: v,
        col_offsets,
        off_block_residual: worst,
        detail: DecDetail::Finite { blocks: cached },
    })
}

fn decompose_u1(rep: &ProjectiveRep) -> IrrepDecomposition {
    let modes = rep.modes().expect("u1 rep stores modes");
    let labels = modes.iter().map(|m| format!("k{}", m.k)).collect();
    let dims = vec![1usize; modes.len()];
    let mults: Vec<usize> = modes.iter().map(|m| m.mult).collect();
    let mut col_offsets = Vec::with_capacity(modes.len());
    let mut acc = 0usize;
    for m in modes {
        col_offsets.push(acc);
        acc += m.mult;
    }
    IrrepDecomposition {
        labels,
        dims,
        mults,
        basis_change: CMat::identity(rep.dim()),
        col_offsets,
        off_block_residual: 0.0,
        detail: DecDetail::U1 {
            modes: modes.iter().map(|m| m.k).collect(),
        },
    }
}

/// Decomposes a projective representation into isotypic components with the
/// default RNG seed.
pub fn decompose(rep: &ProjectiveRep) -> Result<IrrepDecomposition> {
    decompose_with_seed(rep, DEFAULT_DECOMPOSE_SEED)
}

/// Deterministic given `seed`; retries with fresh randomness when a draw is
/// spectrally degenerate, and reports the worst off-block residual if every
/// attempt fails.
pub fn decompose_with_seed(rep: &ProjectiveRep, seed: u64) -> Result<IrrepDecomposition> {
    if matches!(rep.form(), RepForm::U1Modes(_)) {
        return Ok(decompose_u1(rep));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..MAX_ATTEMPTS {
        match try_decompose(rep, &mut rng) {
            Ok(dec) => return Ok(dec),
            Err(Error::Degeneracy(msg)) => last = Some(msg),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Degeneracy(format!(
        "decomposition failed after {MAX_ATTEMPTS} random probes: {}",
        last.unwrap_or_default()
    )))
}

/// Multiplicity of the irrep labelled in `dec` inside `f`, by the character
/// inner product n_λ = (1/|G|) Σ_g conj(χ_λ(g)) Tr f(g). Only defined for
/// trivial cocycles; `dec` may come from any representation of one group.
pub fn multiplicity(f: &ProjectiveRep, dec: &IrrepDecomposition, lam: usize) -> Result<usize> {
    if lam >= dec.len() {
        return Err(Error::Validation(format!("label index {lam} out of range")));
    }
    if !f.has_trivial_cocycle(1e-9) {
        return Err(Error::Unsupported(
            "character multiplicities need a trivial cocycle; use decompose instead".into(),
        ));
    }
    let group = f.group();
    let count = group.element_count();
    let mut acc = C_ZERO;
    for g in group.elements() {
        acc += dec.character(group, lam, g).conj() * f.unitary(g).trace();
    }
    let n = acc / count as f64;
    let rounded = n.re.round();
    if (n.re - rounded).abs() > 1e-6 || n.im.abs() > 1e-6 || rounded < 0.0 {
        return Err(Error::Validation(format!(
            "character inner product {n} is not a non-negative integer within 1e-6"
        )));
    }
    Ok(rounded as usize)
}

/// Orthogonal projector onto the isotypic component λ inside H.
pub fn isotypic_projector(
    f: &ProjectiveRep,
    dec: &IrrepDecomposition,
    lam: usize,
) -> Result<CMat> {
    if lam >= dec.len() {
        return Err(Error::Validation(format!("label index {lam} out of range")));
    }
    let d = f.dim();
    if dec.total_dim() != d {
        return Err(Error::Dim(
            "decomposition does not match the representation".into(),
        ));
    }
    let v = dec.basis_change();
    let (off, len) = (dec.block_offset(lam), dec.dims()[lam] * dec.mults()[lam]);
    let mut p = CMat::zeros(d, d);
    for c in off..off + len {
        let col = v.column(c);
        p = p.add(&col.outer(&col));
    }
    Ok(p)
}

/// Compressed coordinates for the subspace H₀ = span{|f(g)⟩⟩} of the pair
/// space H ⊗ K.
///
/// In the decomposition basis (applied to H, and conjugated on K) the span
/// is ⊕_λ (U_λ ⊗ U_λ) ⊗ |I_{n_λ}⟩⟩, so an orthonormal basis is indexed by
/// (λ, u, u′) with ambient vector Σ_m V[:, (λ,u,m)] ⊗ conj(V[:, (λ,u′,m)])
/// / √n_λ. All optimization runs in these Σ_λ d_λ² coordinates.
#[derive(Debug, Clone)]
pub struct PairSpace {
    dim: usize,
    h0_dim: usize,
    h0_offsets: Vec<usize>,
}

impl PairSpace {
    pub fn new(dec: &IrrepDecomposition) -> Self {
        let mut h0_offsets = Vec::with_capacity(dec.len());
        let mut acc = 0usize;
        for &dl in dec.dims() {
            h0_offsets.push(acc);
            acc += dl * dl;
        }
        PairSpace {
            dim: dec.total_dim(),
            h0_dim: acc,
            h0_offsets,
        }
    }

    pub fn h0_dim(&self) -> usize {
        self.h0_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim * self.dim
    }

    pub fn block_offset(&self, lam: usize) -> usize {
        self.h0_offsets[lam]
    }

    /// Compressed Choi vector φ(g): block λ is √n_λ · vec(f_λ(g)).
    pub fn phi(&self, dec: &IrrepDecomposition, group: &Group, g: ElementId) -> CVec {
        let mut out = CVec::zeros(self.h0_dim);
        for lam in 0..dec.len() {
            let dl = dec.dims()[lam];
            let w = (dec.mults()[lam] as f64).sqrt();
            let b = dec.block(group, lam, g);
            let off = self.h0_offsets[lam];
            for u in 0..dl {
                for u2 in 0..dl {
                    out.set(off + u * dl + u2, b.get(u, u2).scale(w));
                }
            }
        }
        out
    }

    /// The normalization operator in compressed coordinates: the diagonal
    /// matrix with n_λ/d_λ on every (λ, u, u′) slot. Coincides with the
    /// compressed average state.
    pub fn n_tilde(&self, dec: &IrrepDecomposition) -> CMat {
        let mut diag = Vec::with_capacity(self.h0_dim);
        for lam in 0..dec.len() {
            let w = dec.mults()[lam] as f64 / dec.dims()[lam] as f64;
            for _ in 0..dec.dims()[lam] * dec.dims()[lam] {
                diag.push(Complex64::new(w, 0.0));
            }
        }
        CMat::diag(&diag)
    }

    /// Coordinates of an ambient pair-space vector in the decomposition
    /// basis, as the d×d matrix z = V† mat(x) V.
    fn z_matrix(&self, dec: &IrrepDecomposition, x: &CVec) -> Result<CMat> {
        let m = unvectorize(x, self.dim)?;
        let v = dec.basis_change();
        Ok(v.dagger().mul(&m).mul(v))
    }

    /// Orthogonal projection of an ambient pair vector onto H₀ coordinates.
    pub fn compress(&self, dec: &IrrepDecomposition, x: &CVec) -> Result<CVec> {
        let z = self.z_matrix(dec, x)?;
        let mut out = CVec::zeros(self.h0_dim);
        for lam in 0..dec.len() {
            let (off_c, dl, nl) = (dec.block_offset(lam), dec.dims()[lam], dec.mults()[lam]);
            let w = 1.0 / (nl as f64).sqrt();
            let off = self.h0_offsets[lam];
            for u in 0..dl {
                for u2 in 0..dl {
                    let mut acc = C_ZERO;
                    for m in 0..nl {
                        acc += z.get(off_c + u * nl + m, off_c + u2 * nl + m);
                    }
                    out.set(off + u * dl + u2, acc.scale(w));
                }
            }
        }
        Ok(out)
    }

    /// Ambient pair vector of compressed coordinates.
    pub fn decompress(&self, dec: &IrrepDecomposition, x: &CVec) -> Result<CVec> {
        if x.dim() != self.h0_dim {
            return Err(Error::Dim("decompress: compressed dimension mismatch".into()));
        }
        let d = self.dim;
        let mut z = CMat::zeros(d, d);
        for lam in 0..dec.len() {
            let (off_c, dl, nl) = (dec.block_offset(lam), dec.dims()[lam], dec.mults()[lam]);
            let w = 1.0 / (nl as f64).sqrt();
            let off = self.h0_offsets[lam];
            for u in 0..dl {
                for u2 in 0..dl {
                    let val = x.get(off + u * dl + u2).scale(w);
                    for m in 0..nl {
                        z.set(off_c + u * nl + m, off_c + u2 * nl + m, val);
                    }
                }
            }
        }
        let v = dec.basis_change();
        let amb = v.mul(&z).mul(&v.dagger());
        crate::matcore::vectorize(&amb)
    }

    /// Ambient basis vector e^λ_{u,u′} of H₀.
    pub fn e_ambient(&self, dec: &IrrepDecomposition, lam: usize, u: usize, u2: usize) -> CVec {
        let dl = dec.dims()[lam];
        let mut x = CVec::zeros(self.h0_dim);
        x.set(self.h0_offsets[lam] + u * dl + u2, C_ONE);
        self.decompress(dec, &x)
            .expect("dimensions fixed by construction")
    }

    /// The diagonal-block contractions G_λ of an ambient pair vector:
    /// (G_λ)_{u,u′} = Σ_m conj(z[(λ,u,m), (λ,u′,m)]). These determine both
    /// the outcome amplitudes of the seed and its parallel input state.
    pub fn g_blocks(&self, dec: &IrrepDecomposition, x: &CVec) -> Result<Vec<CMat>> {
        let z = self.z_matrix(dec, x)?;
        let mut out = Vec::with_capacity(dec.len());
        for lam in 0..dec.len() {
            let (off_c, dl, nl) = (dec.block_offset(lam), dec.dims()[lam], dec.mults()[lam]);
            out.push(CMat::from_fn(dl, dl, |u, u2| {
                let mut acc = C_ZERO;
                for m in 0..nl {
                    acc += z.get(off_c + u * nl + m, off_c + u2 * nl + m).conj();
                }
                acc
            }));
        }
        Ok(out)
    }

    /// ⟨x|ρ_μ|x⟩ for an ambient pair vector, via the block form of the
    /// average state: Σ_λ ‖G_λ‖² / d_λ.
    pub fn rho_mu_expectation(&self, dec: &IrrepDecomposition, x: &CVec) -> Result<f64> {
        let gs = self.g_blocks(dec, x)?;
        Ok(gs
            .iter()
            .zip(dec.dims())
            .map(|(g, &dl)| g.fro_norm().powi(2) / dl as f64)
            .sum())
    }

    /// Ambient normalization operator (decompressed n_tilde); intended for
    /// small dimensions and cross-checks.
    pub fn ambient_normalization(&self, dec: &IrrepDecomposition) -> Result<CMat> {
        let d2 = self.ambient_dim();
        let mut out = CMat::zeros(d2, d2);
        for lam in 0..dec.len() {
            let dl = dec.dims()[lam];
            let w = dec.mults()[lam] as f64 / dl as f64;
            for u in 0..dl {
                for u2 in 0..dl {
                    let e = self.e_ambient(dec, lam, u, u2);
                    out = out.add(&e.outer(&e).scale_re(w));
                }
            }
        }
        Ok(out)
    }

    /// Orthogonal projector onto H₀ in ambient coordinates; for
    /// cross-checks on small representations.
    pub fn p0_projector(&self, dec: &IrrepDecomposition) -> Result<CMat> {
        let d2 = self.ambient_dim();
        let mut out = CMat::zeros(d2, d2);
        for lam in 0..dec.len() {
            let dl = dec.dims()[lam];
            for u in 0..dl {
                for u2 in 0..dl {
                    let e = self.e_ambient(dec, lam, u, u2);
                    out = out.add(&e.outer(&e));
                }
            }
        }
        Ok(out)
    }

    /// The action of f(g) ⊗ I restricted to H₀: block λ acts on the vec
    /// index pair (u, u′) as f_λ(g) ⊗ I_{d_λ}.
    pub fn compressed_action(&self, dec: &IrrepDecomposition, group: &Group, g: ElementId) -> CMat {
        let mut out = CMat::zeros(self.h0_dim, self.h0_dim);
        for lam in 0..dec.len() {
            let dl = dec.dims()[lam];
            let b = dec.block(group, lam, g);
            let off = self.h0_offsets[lam];
            for u in 0..dl {
                for w in 0..dl {
                    let val = b.get(u, w);
                    if val == C_ZERO {
                        continue;
                    }
                    for u2 in 0..dl {
                        out.set(off + u * dl + u2, off + w * dl + u2, val);
                    }
                }
            }
        }
        out
    }
}

/// Working bundle for one estimation problem: a representation together
/// with its decomposition and the compressed pair space.
#[derive(Debug, Clone)]
pub struct RepContext {
    pub rep: ProjectiveRep,
    pub dec: IrrepDecomposition,
    pub pair: PairSpace,
}

impl RepContext {
    pub fn new(rep: ProjectiveRep) -> Result<Self> {
        Self::with_seed(rep, DEFAULT_DECOMPOSE_SEED)
    }

    pub fn with_seed(rep: ProjectiveRep, seed: u64) -> Result<Self> {
        let dec = decompose_with_seed(&rep, seed)?;
        let pair = PairSpace::new(&dec);
        Ok(RepContext { rep, dec, pair })
    }

    pub fn group(&self) -> &Group {
        self.rep.group()
    }

    pub fn element_count(&self) -> usize {
        self.group().element_count()
    }

    /// Ambient Choi vector |f(g)⟩⟩.
    pub fn choi(&self, g: ElementId) -> CVec {
        crate::matcore::vectorize(&self.rep.unitary(g)).expect("unitaries are square")
    }

    /// Compressed Choi vector φ(g).
    pub fn phi(&self, g: ElementId) -> CVec {
        self.pair.phi(&self.dec, self.group(), g)
    }

    /// Applies f(g) ⊗ I (or its adjoint) to an ambient pair vector, using
    /// (A ⊗ I) vec(M) = vec(A M).
    pub fn pair_action(&self, g: ElementId, dagger: bool, x: &CVec) -> Result<CVec> {
        let m = unvectorize(x, self.rep.dim())?;
        let u = self.rep.unitary(g);
        let a = if dagger { u.dagger() } else { u };
        crate::matcore::vectorize(&a.mul(&m))
    }

    /// Compresses a positive operator given by rank-one factors Σ|c⟩⟨c|
    /// into H₀ coordinates.
    pub fn compress_factors(&self, factors: &[CVec]) -> Result<CMat> {
        let mut out = CMat::zeros(self.pair.h0_dim(), self.pair.h0_dim());
        for c in factors {
            let cc = self.pair.compress(&self.dec, c)?;
            out = out.add(&cc.outer(&cc));
        }
        Ok(out)
    }

    /// Compresses a dense operator on the ambient pair space into H₀
    /// coordinates: T̃ = E† M E over the structured basis.
    pub fn compress_operator(&self, m: &CMat) -> Result<CMat> {
        let h0 = self.pair.h0_dim();
        if m.rows() != self.pair.ambient_dim() || m.cols() != self.pair.ambient_dim() {
            return Err(Error::Dim("compress_operator: ambient dimension mismatch".into()));
        }
        let basis: Vec<CVec> = (0..self.dec.len())
            .flat_map(|lam| {
                let dl = self.dec.dims()[lam];
                (0..dl * dl).map(move |i| (lam, i / dl, i % dl))
            })
            .map(|(lam, u, u2)| self.pair.e_ambient(&self.dec, lam, u, u2))
            .collect();
        let applied: Vec<CVec> = basis.iter().map(|e| m.matvec(e)).collect();
        let mut out = CMat::zeros(h0, h0);
        for a in 0..h0 {
            for b in 0..h0 {
                out.set(a, b, basis[a].dot(&applied[b]));
            }
        }
        Ok(out)
    }
}
