//! Random kets, unitaries, Hermitian matrices and decompositions for
//! property tests and sweeps.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::config::Tolerances;
use crate::numeric::{c64, ComplexMatrix, ComplexVector, C64};
use crate::properties::{validate_pdi, Decomposition, Projector};

/// Standard normal sample (Box–Muller).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c64(gaussian(rng), gaussian(rng))
}

/// Haar-random unit ket.
pub fn ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    loop {
        let v = ComplexVector::new((0..dim).map(|_| complex_gaussian(rng)).collect()).expect("dim > 0");
        if let Ok(u) = v.normalized() {
            return u;
        }
    }
}

/// Unit-norm amplitude list.
pub fn amplitudes<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    ket(rng, n).into_entries()
}

/// Random unitary from Gram–Schmidt on a complex Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let cols = orthonormal_basis(rng, dim);
    ComplexMatrix::from_columns(&cols).expect("dim > 0")
}

/// Random orthonormal basis of `C^dim`.
pub fn orthonormal_basis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<ComplexVector> {
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut w = ket(rng, dim);
        for _ in 0..2 {
            for u in &basis {
                w = w.sub(&u.scale(u.inner(&w)));
            }
        }
        if let Ok(u) = w.normalized() {
            if w.norm() > 1e-6 {
                basis.push(u);
            }
        }
    }
    basis
}

/// Random Hermitian matrix with entries of order one.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = c64(gaussian(rng), 0.0);
        for j in (i + 1)..dim {
            let z = complex_gaussian(rng);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Random projector of the given rank.
pub fn projector<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Projector {
    let basis = orthonormal_basis(rng, dim);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for v in &basis[..rank] {
        m = &m + &v.dyad();
    }
    Projector::from_matrix(m, &Tolerances::DEFAULT).expect("sum of orthonormal dyads")
}

/// Random decomposition of the identity: a random orthonormal basis split
/// into `members` consecutive groups of random nonzero sizes, labelled
/// `p1, p2, …`.
pub fn decomposition<R: Rng + ?Sized>(rng: &mut R, dim: usize, members: usize) -> Decomposition {
    assert!((1..=dim).contains(&members));
    let basis = orthonormal_basis(rng, dim);
    // choose members-1 distinct cut points in 1..dim
    let mut cuts: Vec<usize> = (1..dim).collect();
    for i in (1..cuts.len()).rev() {
        let j = rng.gen_range(0..=i);
        cuts.swap(i, j);
    }
    cuts.truncate(members - 1);
    cuts.sort_unstable();
    cuts.push(dim);
    let mut start = 0;
    let mut projectors = Vec::with_capacity(members);
    for &end in &cuts {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for v in &basis[start..end] {
            m = &m + &v.dyad();
        }
        projectors.push(Projector::from_matrix(m, &Tolerances::DEFAULT).expect("sum of orthonormal dyads"));
        start = end;
    }
    let labels: Vec<String> = (1..=members).map(|j| format!("p{j}")).collect();
    validate_pdi(projectors, &labels, &Tolerances::DEFAULT).expect("orthonormal split")
}
