//! Hermitian eigensolver (cyclic complex Jacobi) and the positive
//! semi-definite generalized eigenproblem built on top of it.
//!
//! Jacobi is chosen over iterative methods because every matrix in scope is
//! small and dense, and because its sweep order is deterministic: identical
//! inputs give bit-identical outputs on one platform.

use num_complex::Complex64;

use super::{CMat, CVec};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues (ascending) and matching orthonormal eigenvectors of a
/// Hermitian matrix. Ties in the ascending order are broken by the original
/// diagonal index, so output is reproducible.
pub fn hermitian_eig(h: &CMat) -> Result<(Vec<f64>, Vec<CVec>)> {
    if !h.is_square() {
        return Err(Error::Dim(format!(
            "hermitian_eig needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    if !h.is_hermitian(1e-10) {
        return Err(Error::Validation(
            "hermitian_eig: input is not Hermitian within 1e-10".into(),
        ));
    }
    let n = h.rows();
    if n == 0 {
        return Ok((vec![], vec![]));
    }

    // Work on an explicitly Hermitized copy so roundoff asymmetry in the
    // input cannot accumulate.
    let mut a = CMat::from_fn(n, n, |r, c| (h.get(r, c) + h.get(c, r).conj()).scale(0.5));
    let mut v = CMat::identity(n);

    let scale = a.max_abs().max(1e-300);
    let thresh = 1e-14 * scale;

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= thresh {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let beta = apq.norm();
                if beta <= thresh * 1e-2 {
                    continue;
                }
                // Unitary 2x2 rotation zeroing the (p, q) entry:
                // U = [[c, s e], [-s ē, c]] with e the phase of A[p][q].
                let e = apq / beta;
                let alpha = a.get(p, p).re;
                let gamma = a.get(q, q).re;
                let tau = (gamma - alpha) / (2.0 * beta);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Right-multiply columns p and q of A by U.
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip.scale(c) - aiq * e.conj().scale(s));
                    a.set(i, q, aip * e.scale(s) + aiq.scale(c));
                }
                // Left-multiply rows p and q by U†.
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, apj.scale(c) - aqj * e.scale(s));
                    a.set(q, j, apj * e.conj().scale(s) + aqj.scale(c));
                }
                // Accumulate eigenvectors: V <- V U.
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip.scale(c) - viq * e.conj().scale(s));
                    v.set(i, q, vip * e.scale(s) + viq.scale(c));
                }
            }
        }
    }

    let mut final_off = 0.0f64;
    for p in 0..n {
        for q in (p + 1)..n {
            final_off = final_off.max(a.get(p, q).norm());
        }
    }
    if final_off > 1e-10 * scale {
        return Err(Error::Degeneracy(format!(
            "Jacobi iteration stalled with off-diagonal residual {final_off:.3e}"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .re
            .partial_cmp(&a.get(j, j).re)
            .unwrap()
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let vectors: Vec<CVec> = order.iter().map(|&i| v.column(i)).collect();
    Ok((values, vectors))
}

fn check_psd(name: &str, m: &CMat, values: &[f64], tol: f64) -> Result<()> {
    let scale = m.max_abs().max(1.0);
    if let Some(&min) = values.first() {
        if min < -tol * scale {
            return Err(Error::Validation(format!(
                "{name} is not positive semi-definite: min eigenvalue {min:.3e}"
            )));
        }
    }
    Ok(())
}

/// Minimizes ⟨x|W|x⟩ subject to ⟨x|N|x⟩ = 1 over the support of N, for
/// positive semi-definite W and N. Returns the optimal value together with a
/// minimizer supported on the eigenvectors of N above `rank_tol` (relative
/// to N's largest eigenvalue).
///
/// The pencil is compressed with N^{-1/2} on supp(N) and handed to the
/// Hermitian solver, which avoids indefinite-pencil pitfalls for the exactly
/// rank-deficient N that appears in compressed normalization operators.
pub fn min_generalized_eig(w: &CMat, n_op: &CMat, rank_tol: f64) -> Result<(f64, CVec)> {
    if !w.is_square() || !n_op.is_square() || w.rows() != n_op.rows() {
        return Err(Error::Dim(
            "min_generalized_eig: W and N must be square with equal dimension".into(),
        ));
    }
    if !w.is_hermitian(1e-10) || !n_op.is_hermitian(1e-10) {
        return Err(Error::Validation(
            "min_generalized_eig: W and N must be Hermitian within 1e-10".into(),
        ));
    }
    let (nvals, nvecs) = hermitian_eig(n_op)?;
    check_psd("N", n_op, &nvals, 1e-10)?;
    let nmax = nvals.last().copied().unwrap_or(0.0);
    if nmax <= 0.0 {
        return Err(Error::Infeasible(
            "min_generalized_eig: N is numerically zero".into(),
        ));
    }
    let cutoff = rank_tol.max(1e-14) * nmax;
    let support: Vec<(f64, &CVec)> = nvals
        .iter()
        .zip(&nvecs)
        .filter(|(&val, _)| val > cutoff)
        .map(|(&val, vec)| (val, vec))
        .collect();
    if support.is_empty() {
        return Err(Error::Infeasible(
            "min_generalized_eig: N has empty numerical support".into(),
        ));
    }

    // B = S^{-1/2} U† W U S^{-1/2} restricted to supp(N).
    let r = support.len();
    let dim = w.rows();
    // Columns U S^{-1/2}.
    let mut cols: Vec<CVec> = Vec::with_capacity(r);
    for (val, vec) in &support {
        cols.push(vec.scale(Complex64::new(1.0 / val.sqrt(), 0.0)));
    }
    let mut b = CMat::zeros(r, r);
    // W columns applied once each.
    let wcols: Vec<CVec> = cols.iter().map(|c| w.matvec(c)).collect();
    for i in 0..r {
        for j in 0..r {
            b.set(i, j, cols[i].dot(&wcols[j]));
        }
    }
    let (bvals, bvecs) = hermitian_eig(&b)?;
    check_psd("W (compressed)", &b, &bvals, 1e-8)?;
    let value = bvals[0];
    let y = &bvecs[0];
    let mut x = CVec::zeros(dim);
    for i in 0..r {
        x = x.add(&cols[i].scale(y.get(i)));
    }
    // Renormalize against N exactly; compresses roundoff from the solve.
    let nx = n_op.sandwich(&x, &x).re;
    if nx <= 0.0 {
        return Err(Error::Infeasible(
            "min_generalized_eig: minimizer escaped the support of N".into(),
        ));
    }
    let x = x.scale(Complex64::new(1.0 / nx.sqrt(), 0.0));
    Ok((value, x))
}
