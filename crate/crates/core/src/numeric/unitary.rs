//! Unitary propagators and completion of partial isometries.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::eigen::hermitian_eigendecomposition;
use super::matrix::{orthonormality_residual, ComplexMatrix, ComplexVector};
use crate::config::Tolerances;
use crate::error::Error;

/// `exp(-i·H·dt/ħ)`, evaluated through the eigendecomposition of `H`.
pub fn unitary_from_hamiltonian(
    h: &ComplexMatrix,
    dt: f64,
    hbar: f64,
    tol: &Tolerances,
) -> Result<ComplexMatrix, Error> {
    if !dt.is_finite() {
        return Err(Error::InvalidArgument("time step must be finite"));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidArgument("hbar must be positive and finite"));
    }
    let es = hermitian_eigendecomposition(h, tol)?;
    Ok(es.apply_function(|l| Complex64::from_polar(1.0, -l * dt / hbar)))
}

/// Builds a unitary whose columns at `positions` are exactly `columns`.
///
/// The free columns are filled, in increasing position order, by
/// Gram–Schmidt orthogonalisation of the standard basis vectors taken in
/// index order.
pub fn complete_to_unitary(
    columns: &[ComplexVector],
    positions: &[usize],
    tol: &Tolerances,
) -> Result<ComplexMatrix, Error> {
    let dim = columns.first().map(ComplexVector::dim).ok_or(Error::Empty("column list"))?;
    let order: Vec<usize> = (0..dim).collect();
    complete_to_unitary_seeded(columns, positions, &order, tol)
}

/// As [`complete_to_unitary`], but the standard basis vectors used to seed
/// the free columns are tried in `seed_order`. Every index in `0..dim` must
/// appear exactly once.
pub fn complete_to_unitary_seeded(
    columns: &[ComplexVector],
    positions: &[usize],
    seed_order: &[usize],
    tol: &Tolerances,
) -> Result<ComplexMatrix, Error> {
    let dim = columns.first().map(ComplexVector::dim).ok_or(Error::Empty("column list"))?;
    if let Some(c) = columns.iter().find(|c| c.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: c.dim() });
    }
    if positions.len() != columns.len() {
        return Err(Error::DimensionMismatch { expected: columns.len(), found: positions.len() });
    }
    if columns.len() > dim {
        return Err(Error::InvalidArgument("more columns than the dimension"));
    }
    let mut taken = alloc::vec![false; dim];
    for &p in positions {
        if p >= dim || taken[p] {
            return Err(Error::InvalidPosition { position: p, dim });
        }
        taken[p] = true;
    }
    let mut seen = alloc::vec![false; dim];
    if seed_order.len() != dim || seed_order.iter().any(|&i| i >= dim || core::mem::replace(&mut seen[i], true)) {
        return Err(Error::InvalidArgument("seed order must be a permutation of 0..dim"));
    }
    let residual = orthonormality_residual(columns);
    if !(residual <= tol.validation) {
        return Err(Error::NotOrthonormal { residual });
    }

    let mut basis: Vec<ComplexVector> = columns.to_vec();
    let mut extra: Vec<ComplexVector> = Vec::with_capacity(dim - columns.len());
    for &seed in seed_order {
        if basis.len() == dim {
            break;
        }
        let mut w = ComplexVector::basis(dim, seed);
        // Two passes of classical Gram–Schmidt keep the result orthogonal to
        // working precision.
        for _ in 0..2 {
            for u in &basis {
                w = w.sub(&u.scale(u.inner(&w)));
            }
        }
        let n = w.norm();
        if n > 1e-6 {
            let w = w.scale(Complex64::new(1.0 / n, 0.0));
            basis.push(w.clone());
            extra.push(w);
        }
    }
    debug_assert_eq!(basis.len(), dim);

    let mut slots: Vec<Option<ComplexVector>> = alloc::vec![None; dim];
    for (c, &p) in columns.iter().zip(positions) {
        slots[p] = Some(c.clone());
    }
    let mut fill = extra.into_iter();
    let ordered: Vec<ComplexVector> = slots
        .into_iter()
        .map(|s| s.unwrap_or_else(|| fill.next().expect("completion produced enough columns")))
        .collect();
    ComplexMatrix::from_columns(&ordered)
}
