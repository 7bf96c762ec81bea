//! Numerical tolerances shared by every module.

/// All tolerance constants used by validation, convergence and consistency
/// decisions. Operations take a `&Tolerances` so callers (and tests) can
/// tighten or relax them in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity, idempotence, unitarity, orthonormality and completeness
    /// residuals (Frobenius norms).
    pub validation: f64,
    /// Relative off-diagonal norm at which Jacobi sweeps stop.
    pub convergence: f64,
    /// Absolute bound on off-diagonal Gram entries for a consistent family.
    pub consistency: f64,
    /// Absolute bound on `‖PQ - QP‖_F` for two projectors to commute.
    pub commutation: f64,
    /// Relative eigenvalue gap below which eigenvalues are merged.
    pub cluster: f64,
    /// Distance of a projector trace from its integer rank.
    pub rank: f64,
    /// Normalisation slack for probability distributions.
    pub probability: f64,
    /// Probabilities at or below this are treated as exactly zero.
    pub zero_probability: f64,
    /// Maximum number of cyclic Jacobi sweeps.
    pub max_sweeps: usize,
    /// Largest history-space dimension `d^(f+1)` for which the sum rule is
    /// checked by explicit Kronecker construction.
    pub sum_rule_explicit_cap: usize,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        validation: 1e-10,
        convergence: 1e-12,
        consistency: 1e-8,
        commutation: 1e-10,
        cluster: 1e-8,
        rank: 1e-8,
        probability: 1e-9,
        zero_probability: 1e-12,
        max_sweeps: 100,
        sum_rule_explicit_cap: 4096,
    };

    /// A tighter profile: validation and commutation at 1e-12, consistency
    /// at 1e-10.
    pub const STRICT: Tolerances = Tolerances {
        validation: 1e-12,
        convergence: 1e-14,
        consistency: 1e-10,
        commutation: 1e-12,
        cluster: 1e-10,
        rank: 1e-10,
        probability: 1e-11,
        zero_probability: 1e-14,
        max_sweeps: 100,
        sum_rule_explicit_cap: 4096,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
