//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Zero;

use super::matrix::{c64, ComplexMatrix, ComplexVector, C64};
use crate::config::Tolerances;
use crate::error::Error;

/// Eigenvalues (descending) with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> ComplexVector {
        self.eigenvectors.column(k)
    }

    /// `V · diag(f(λ)) · V†`.
    pub fn apply_function<F>(&self, f: F) -> ComplexMatrix
    where
        F: Fn(f64) -> C64,
    {
        let n = self.dim();
        let v = &self.eigenvectors;
        let weights: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = C64::zero();
                for k in 0..n {
                    s += v[(i, k)] * weights[k] * v[(j, k)].conj();
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|l| c64(l, 0.0))
    }
}

/// Diagonalises a Hermitian matrix.
///
/// Sweeps over every `(p, q)` pair, removing the phase of `a_pq` with a
/// diagonal unitary and then annihilating it with a real Givens rotation.
/// Stops once the off-diagonal Frobenius norm drops to
/// `tol.convergence · ‖H‖_F`, or fails with [`Error::NoConvergence`] after
/// `tol.max_sweeps` sweeps.
pub fn hermitian_eigendecomposition(h: &ComplexMatrix, tol: &Tolerances) -> Result<EigenSystem, Error> {
    h.ensure_hermitian(tol.validation)?;
    let n = h.dim();
    // Start from the exactly Hermitian part so rounding asymmetry cannot leak.
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = tol.convergence * scale;

    let mut sweeps = 0;
    loop {
        let off = a.off_diagonal_norm();
        if off <= target || scale == 0.0 {
            break;
        }
        if sweeps >= tol.max_sweeps {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let values: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    Ok(sorted_system(values, v, tol))
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Negligible relative to both diagonal entries: zero it outright.
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = C64::zero();
        a[(q, p)] = C64::zero();
        return;
    }
    let phase = apq / r; // e^{iφ}
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G restricted to (p, q) = diag(1, e^{-iφ}) · [[c, s], [-s, c]].
    let g_pp = c64(c, 0.0);
    let g_pq = c64(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = a.rows();
    // A ← A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    // A ← G† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = C64::zero();
    a[(q, p)] = C64::zero();
    a[(p, p)] = c64(a[(p, p)].re, 0.0);
    a[(q, q)] = c64(a[(q, q)].re, 0.0);
    // V ← V G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Multiplies `v` by the phase that makes its first non-negligible component
/// real and positive.
fn canonical_phase(v: &ComplexVector) -> ComplexVector {
    let scale = v.entries().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v.entries().iter().find(|z| z.norm() > 1e-8 * scale.max(f64::MIN_POSITIVE));
    match pivot {
        Some(z) => v.scale(z.conj() / z.norm()),
        None => v.clone(),
    }
}

fn lexicographic(a: &ComplexVector, b: &ComplexVector) -> Ordering {
    for (x, y) in a.entries().iter().zip(b.entries()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Orders eigenpairs by descending eigenvalue; within a run of eigenvalues
/// equal up to the convergence tolerance, by the lexicographic order of the
/// phase-canonicalised eigenvectors (largest first).
fn sorted_system(values: Vec<f64>, v: ComplexMatrix, tol: &Tolerances) -> EigenSystem {
    let n = values.len();
    let vecs: Vec<ComplexVector> = (0..n).map(|k| canonical_phase(&v.column(k))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

    let spread = values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let tie = 1e2 * tol.convergence * spread;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end - 1]] - values[order[end]] <= tie {
            end += 1;
        }
        order[start..end].sort_by(|&i, &j| lexicographic(&vecs[j], &vecs[i]));
        start = end;
    }

    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let columns: Vec<ComplexVector> = order.iter().map(|&k| vecs[k].clone()).collect();
    let eigenvectors = ComplexMatrix::from_columns(&columns).expect("non-empty eigenbasis");
    EigenSystem { eigenvalues, eigenvectors }
}
