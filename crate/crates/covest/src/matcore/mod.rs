//! Dense complex matrices and vectors, plus the handful of structural
//! operations (Kronecker products, direct sums, vectorization, partial
//! traces, subsystem permutations) and spectral solvers everything else is
//! built on.
//!
//! All values are immutable after construction in practice; nothing here
//! holds interior mutability, so values are freely shareable across threads.

mod eig;

pub use eig::{hermitian_eig, min_generalized_eig};

use num_complex::Complex64;

use crate::{Error, Result};

pub const C_ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const C_ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec {
    entries: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            entries: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C_ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        CMat { rows, cols, entries }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Dim("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dim("ragged rows in matrix literal".into()));
        }
        Ok(CMat {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let n = values.len();
        let mut m = CMat::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(
            self.cols, other.rows,
            "matrix product dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == C_ZERO {
                    continue;
                }
                let orow = i * out.cols;
                let brow = k * other.cols;
                for j in 0..other.cols {
                    out.entries[orow + j] += a * other.entries[brow + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &CVec) -> CVec {
        assert_eq!(self.cols, v.dim(), "matvec dimension mismatch");
        let mut out = vec![C_ZERO; self.rows];
        for i in 0..self.rows {
            let row = i * self.cols;
            let mut acc = C_ZERO;
            for j in 0..self.cols {
                acc += self.entries[row + j] * v.entries[j];
            }
            out[i] = acc;
        }
        CVec { entries: out }
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn fro_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for r in 0..self.rows {
            for c in r..self.cols {
                if (self.get(r, c) - self.get(c, r).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.dagger().mul(self).sub(&CMat::identity(self.rows)).max_abs() <= tol
    }

    pub fn column(&self, c: usize) -> CVec {
        CVec {
            entries: (0..self.rows).map(|r| self.get(r, c)).collect(),
        }
    }

    /// ⟨u|A|v⟩ without forming intermediates.
    pub fn sandwich(&self, u: &CVec, v: &CVec) -> Complex64 {
        assert_eq!(self.rows, u.dim());
        assert_eq!(self.cols, v.dim());
        let mut acc = C_ZERO;
        for r in 0..self.rows {
            let mut row_acc = C_ZERO;
            let row = r * self.cols;
            for c in 0..self.cols {
                row_acc += self.entries[row + c] * v.entries[c];
            }
            acc += u.entries[r].conj() * row_acc;
        }
        acc
    }
}

impl CVec {
    pub fn zeros(dim: usize) -> Self {
        CVec {
            entries: vec![C_ZERO; dim],
        }
    }

    pub fn from_entries(entries: Vec<Complex64>) -> Self {
        CVec { entries }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v.entries[index] = C_ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn get(&self, i: usize) -> Complex64 {
        self.entries[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: Complex64) {
        self.entries[i] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Sesquilinear inner product ⟨self|other⟩, conjugate-linear in `self`.
    pub fn dot(&self, other: &CVec) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, other: &CVec) -> CVec {
        assert_eq!(self.dim(), other.dim());
        CVec {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CVec) -> CVec {
        assert_eq!(self.dim(), other.dim());
        CVec {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> CVec {
        CVec {
            entries: self.entries.iter().map(|a| a * s).collect(),
        }
    }

    pub fn conj(&self) -> CVec {
        CVec {
            entries: self.entries.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn kron(&self, other: &CVec) -> CVec {
        let mut entries = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a * b);
            }
        }
        CVec { entries }
    }

    /// Rank-one matrix |self⟩⟨other|.
    pub fn outer(&self, other: &CVec) -> CMat {
        CMat::from_fn(self.dim(), other.dim(), |r, c| {
            self.entries[r] * other.entries[c].conj()
        })
    }
}

/// Column-stacks a square matrix: component (k·d + k′) is entry (k, k′).
/// The squared norm equals Tr A†A.
pub fn vectorize(a: &CMat) -> Result<CVec> {
    if !a.is_square() {
        return Err(Error::Dim(format!(
            "vectorize needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(CVec {
        entries: a.entries.clone(),
    })
}

/// Inverse of [`vectorize`]: reshapes a d²-dimensional vector into d×d.
pub fn unvectorize(v: &CVec, d: usize) -> Result<CMat> {
    if v.dim() != d * d {
        return Err(Error::Dim(format!(
            "unvectorize: vector of dim {} is not {}²",
            v.dim(),
            d
        )));
    }
    Ok(CMat {
        rows: d,
        cols: d,
        entries: v.entries.clone(),
    })
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let av = a.get(i, j);
            if av == C_ZERO {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, av * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Block-diagonal direct sum diag(A, B).
pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.rows() + b.rows(), a.cols() + b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out.set(i, j, a.get(i, j));
        }
    }
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            out.set(a.rows() + i, a.cols() + j, b.get(i, j));
        }
    }
    out
}

fn decode_index(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0usize; dims.len()];
    for k in (0..dims.len()).rev() {
        idx[k] = flat % dims[k];
        flat /= dims[k];
    }
    idx
}

fn encode_index(idx: &[usize], dims: &[usize]) -> usize {
    let mut flat = 0usize;
    for (i, d) in idx.iter().zip(dims) {
        flat = flat * d + i;
    }
    flat
}

/// Partial trace of an operator on a tensor product of subsystems.
/// `keep[k]` selects whether subsystem `k` survives.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[bool]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    if m.rows() != total || m.cols() != total {
        return Err(Error::Dim(format!(
            "partial_trace: operator is {}x{}, subsystem dims multiply to {}",
            m.rows(),
            m.cols(),
            total
        )));
    }
    if keep.len() != dims.len() {
        return Err(Error::Dim("partial_trace: keep mask length mismatch".into()));
    }
    let kept_dims: Vec<usize> = dims
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(&d, _)| d)
        .collect();
    let out_dim: usize = kept_dims.iter().product();
    let mut out = CMat::zeros(out_dim, out_dim);
    for r in 0..total {
        let ridx = decode_index(r, dims);
        for c in 0..total {
            let cidx = decode_index(c, dims);
            // Off-diagonal in any traced subsystem contributes nothing.
            if ridx
                .iter()
                .zip(&cidx)
                .zip(keep)
                .any(|((a, b), &k)| !k && a != b)
            {
                continue;
            }
            let rk: Vec<usize> = ridx
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(&i, _)| i)
                .collect();
            let ck: Vec<usize> = cidx
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(&i, _)| i)
                .collect();
            let ro = encode_index(&rk, &kept_dims);
            let co = encode_index(&ck, &kept_dims);
            let cur = out.get(ro, co);
            out.set(ro, co, cur + m.get(r, c));
        }
    }
    Ok(out)
}

/// Reorders tensor factors of an operator. `order[j]` names the input
/// subsystem that lands in output slot `j`.
pub fn permute_subsystems(m: &CMat, dims: &[usize], order: &[usize]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    if m.rows() != total || m.cols() != total {
        return Err(Error::Dim("permute_subsystems: dimension mismatch".into()));
    }
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let mut out = CMat::zeros(total, total);
    for r in 0..total {
        let ridx = decode_index(r, dims);
        let rnew: Vec<usize> = order.iter().map(|&k| ridx[k]).collect();
        let ro = encode_index(&rnew, &new_dims);
        for c in 0..total {
            let cidx = decode_index(c, dims);
            let cnew: Vec<usize> = order.iter().map(|&k| cidx[k]).collect();
            let co = encode_index(&cnew, &new_dims);
            out.set(ro, co, m.get(r, c));
        }
    }
    Ok(out)
}

/// Vector version of [`permute_subsystems`].
pub fn permute_vector_subsystems(v: &CVec, dims: &[usize], order: &[usize]) -> Result<CVec> {
    let total: usize = dims.iter().product();
    if v.dim() != total {
        return Err(Error::Dim("permute_vector_subsystems: dimension mismatch".into()));
    }
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let mut out = CVec::zeros(total);
    for i in 0..total {
        let idx = decode_index(i, dims);
        let inew: Vec<usize> = order.iter().map(|&k| idx[k]).collect();
        out.set(encode_index(&inew, &new_dims), v.get(i));
    }
    Ok(out)
}

/// Modified Gram–Schmidt with a relative drop tolerance. Returns an
/// orthonormal basis of the span, in input order.
pub fn orthonormalize(vs: &[CVec], rank_tol: f64) -> Vec<CVec> {
    let scale = vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let cutoff = rank_tol.max(1e-14) * scale;
    let mut basis: Vec<CVec> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        // Two passes of MGS for numerical robustness.
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w = w.sub(&b.scale(c));
            }
        }
        let n = w.norm();
        if n > cutoff {
            basis.push(w.scale(Complex64::new(1.0 / n, 0.0)));
        }
    }
    basis
}

/// Orthogonal projector onto the span of the given vectors. An empty list
/// produces the zero projector of the declared dimension.
pub fn projector_onto_span(vs: &[CVec], dim: usize, rank_tol: f64) -> Result<CMat> {
    if vs.iter().any(|v| v.dim() != dim) {
        return Err(Error::Dim(
            "projector_onto_span: vectors must share the declared dimension".into(),
        ));
    }
    let basis = orthonormalize(vs, rank_tol);
    let mut p = CMat::zeros(dim, dim);
    for b in &basis {
        p = p.add(&b.outer(b));
    }
    Ok(p)
}

/// Standard normal sample via Box–Muller; deterministic given the RNG state.
pub fn gaussian(rng: &mut impl rand::Rng) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let v: f64 = rng.random::<f64>();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Complex standard normal entry.
pub fn gaussian_c(rng: &mut impl rand::Rng) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng)).scale(std::f64::consts::FRAC_1_SQRT_2)
}

pub fn random_cvec(rng: &mut impl rand::Rng, dim: usize) -> CVec {
    CVec::from_entries((0..dim).map(|_| gaussian_c(rng)).collect())
}

pub fn random_cmat(rng: &mut impl rand::Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_c(rng))
}

pub fn random_hermitian(rng: &mut impl rand::Rng, n: usize) -> CMat {
    let a = random_cmat(rng, n, n);
    a.add(&a.dagger()).scale_re(0.5)
}

/// Haar-ish random unitary from Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary(rng: &mut impl rand::Rng, n: usize) -> CMat {
    loop {
        let cols: Vec<CVec> = (0..n).map(|_| random_cvec(rng, n)).collect();
        let basis = orthonormalize(&cols, 1e-12);
        if basis.len() == n {
            let mut u = CMat::zeros(n, n);
            for (j, b) in basis.iter().enumerate() {
                for i in 0..n {
                    u.set(i, j, b.get(i));
                }
            }
            return u;
        }
        // Rank-deficient Gaussian draw has probability zero; redraw.
    }
}

/// Random rank-`rank` positive semi-definite matrix.
pub fn random_psd(rng: &mut impl rand::Rng, n: usize, rank: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for _ in 0..rank.max(1) {
        let v = random_cvec(rng, n);
        m = m.add(&v.outer(&v));
    }
    m
}

/// Order-insensitive pairwise summation of matrices.
pub fn pairwise_sum_mats(terms: &mut Vec<CMat>) -> Option<CMat> {
    if terms.is_empty() {
        return None;
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.drain(..);
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.add(&b)),
                None => next.push(a),
            }
        }
        drop(it);
        *terms = next;
    }
    terms.pop()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_cmat(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn vectorize_identity_and_literal() {
        let v = vectorize(&CMat::identity(2)).unwrap();
        assert_eq!(v.entries(), &[C_ONE, C_ZERO, C_ZERO, C_ONE]);

        let m = CMat::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0), c(4.0, 0.0)],
        ])
        .unwrap();
        let v = vectorize(&m).unwrap();
        let expect = [1.0, 2.0, 3.0, 4.0];
        for (a, e) in v.entries().iter().zip(expect) {
            assert!((a - c(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn vectorize_rejects_non_square() {
        assert!(vectorize(&CMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn vectorize_is_norm_preserving() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_cmat(&mut rng, 5, 5);
            let v = vectorize(&a).unwrap();
            let tr = a.dagger().mul(&a).trace();
            assert!((v.norm().powi(2) - tr.re).abs() <= 1e-12);
            assert!(tr.im.abs() <= 1e-12);
        }
    }

    /// Tensor-product compatibility of vectorization: the flat Kronecker of
    /// the factor Choi vectors matches after interchanging the middle factors.
    #[test]
    fn vectorize_tensor_compatibility() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let a = random_cmat(&mut rng, 2, 2);
        let b = random_cmat(&mut rng, 3, 3);
        let lhs = vectorize(&kron(&a, &b)).unwrap();
        let flat = vectorize(&a).unwrap().kron(&vectorize(&b).unwrap());
        // (a_row, a_col, b_row, b_col) -> (a_row, b_row, a_col, b_col)
        let rhs = permute_vector_subsystems(&flat, &[2, 2, 3, 3], &[0, 2, 1, 3]).unwrap();
        assert!(lhs.sub(&rhs).norm() <= 1e-12);

        // Identity case from the tensor identity for |I⟩⟩.
        let lhs = vectorize(&CMat::identity(6)).unwrap();
        let flat = vectorize(&CMat::identity(2))
            .unwrap()
            .kron(&vectorize(&CMat::identity(3)).unwrap());
        let rhs = permute_vector_subsystems(&flat, &[2, 2, 3, 3], &[0, 2, 1, 3]).unwrap();
        assert!(lhs.sub(&rhs).norm() <= 1e-12);
    }

    #[test]
    fn kron_basics() {
        let i2 = CMat::identity(2);
        assert!(kron(&i2, &i2).sub(&CMat::identity(4)).max_abs() < 1e-15);

        let z = CMat::diag(&[C_ONE, c(-1.0, 0.0)]);
        let zz = kron(&z, &z);
        let expect = CMat::diag(&[C_ONE, c(-1.0, 0.0), c(-1.0, 0.0), C_ONE]);
        assert!(zz.sub(&expect).max_abs() < 1e-15);
    }

    #[test]
    fn kron_mixed_product_rule() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for _ in 0..10 {
            let a = random_cmat(&mut rng, 2, 2);
            let b = random_cmat(&mut rng, 2, 2);
            let cm = random_cmat(&mut rng, 2, 2);
            let d = random_cmat(&mut rng, 2, 2);
            let lhs = kron(&a, &b).mul(&kron(&cm, &d));
            let rhs = kron(&a.mul(&cm), &b.mul(&d));
            assert!(lhs.sub(&rhs).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn direct_sum_basics() {
        let s = direct_sum(&CMat::identity(1), &CMat::identity(1));
        assert!(s.sub(&CMat::identity(2)).max_abs() < 1e-15);

        let s = direct_sum(&CMat::diag(&[c(2.0, 0.0)]), &CMat::diag(&[c(3.0, 0.0)]));
        assert!(s.sub(&CMat::diag(&[c(2.0, 0.0), c(3.0, 0.0)])).max_abs() < 1e-15);
    }

    /// |I_{H1⊕H2}⟩⟩ embeds the two summand Choi vectors on the diagonal
    /// index pairs of the direct sum.
    #[test]
    fn direct_sum_vectorize_embedding() {
        let a = CMat::identity(2);
        let b = CMat::identity(3);
        let v = vectorize(&direct_sum(&a, &b)).unwrap();
        let va = vectorize(&a).unwrap();
        let vb = vectorize(&b).unwrap();
        // Index embedding: block (k, k') of the 5x5 matrix.
        for k in 0..2 {
            for k2 in 0..2 {
                assert!((v.get(k * 5 + k2) - va.get(k * 2 + k2)).norm() < 1e-15);
            }
        }
        for k in 0..3 {
            for k2 in 0..3 {
                assert!((v.get((2 + k) * 5 + 2 + k2) - vb.get(k * 3 + k2)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_of_product_factors() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let a = random_cmat(&mut rng, 2, 2);
        let b = random_cmat(&mut rng, 3, 3);
        let ab = kron(&a, &b);
        let ta = partial_trace(&ab, &[2, 3], &[true, false]).unwrap();
        assert!(ta.sub(&a.scale(b.trace())).max_abs() <= 1e-12);
        let tb = partial_trace(&ab, &[2, 3], &[false, true]).unwrap();
        assert!(tb.sub(&b.scale(a.trace())).max_abs() <= 1e-12);
    }

    #[test]
    fn subsystem_permutation_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let m = random_cmat(&mut rng, 12, 12);
        let p = permute_subsystems(&m, &[2, 3, 2], &[2, 0, 1]).unwrap();
        // order [2,0,1] means output dims [2,2,3]; inverse order is [1,2,0].
        let back = permute_subsystems(&p, &[2, 2, 3], &[1, 2, 0]).unwrap();
        assert!(back.sub(&m).max_abs() < 1e-15);
    }

    #[test]
    fn projector_examples() {
        let p = projector_onto_span(&[CVec::basis(2, 0)], 2, 1e-9).unwrap();
        assert!(p.sub(&CMat::diag(&[C_ONE, C_ZERO])).max_abs() < 1e-14);

        let v1 = CVec::basis(2, 0);
        let v2 = CVec::from_entries(vec![C_ONE, C_ONE]);
        let p = projector_onto_span(&[v1, v2], 2, 1e-9).unwrap();
        assert!(p.sub(&CMat::identity(2)).max_abs() < 1e-12);

        let p = projector_onto_span(&[], 3, 1e-9).unwrap();
        assert!(p.max_abs() == 0.0);
    }

    #[test]
    fn projector_is_idempotent_hermitian_and_order_independent() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let vs: Vec<CVec> = (0..3)
            .map(|_| {
                CVec::from_entries(
                    (0..5)
                        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                        .collect(),
                )
            })
            .collect();
        let p = projector_onto_span(&vs, 5, 1e-9).unwrap();
        assert!(p.mul(&p).sub(&p).max_abs() <= 1e-10);
        assert!(p.sub(&p.dagger()).max_abs() <= 1e-10);
        for v in &vs {
            assert!(p.matvec(v).sub(v).norm() <= 1e-9);
        }
        let reordered = vec![vs[2].clone(), vs[0].clone(), vs[1].clone()];
        let p2 = projector_onto_span(&reordered, 5, 1e-9).unwrap();
        assert!(p.sub(&p2).max_abs() <= 1e-10);
    }

    /// Gram-matrix oracle for the span of Z_2 Choi vectors: vectors
    /// (1,0,0,1) and (1,0,0,-1) span exactly the diagonal index pairs.
    #[test]
    fn projector_choi_span_oracle() {
        let v0 = CVec::from_entries(vec![C_ONE, C_ZERO, C_ZERO, C_ONE]);
        let v1 = CVec::from_entries(vec![C_ONE, C_ZERO, C_ZERO, c(-1.0, 0.0)]);
        let p = projector_onto_span(&[v0, v1], 4, 1e-9).unwrap();
        let expect = CMat::diag(&[C_ONE, C_ZERO, C_ZERO, C_ONE]);
        assert!(p.sub(&expect).max_abs() <= 1e-12);
    }
}
