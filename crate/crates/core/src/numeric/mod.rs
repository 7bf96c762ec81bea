//! Dense complex linear algebra: matrices, kets, Kronecker products, the
//! Hermitian eigensolver and unitary propagators.

mod eigen;
mod matrix;
mod unitary;

pub use eigen::{hermitian_eigendecomposition, EigenSystem};
pub use matrix::{c64, orthonormality_residual, tensor_product, tensor_product_all, ComplexMatrix, ComplexVector, C64};
pub use unitary::{complete_to_unitary, complete_to_unitary_seeded, unitary_from_hamiltonian};
