use alloc::boxed::Box;
use alloc::string::String;

use thiserror::Error;

use crate::histories::ConsistencyReport;
use crate::properties::{IncompatibleError, MeaninglessError, ProjectorCheck};

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("vectors are not orthonormal (Gram residual {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("column position {position} is out of range or repeated (dimension {dim})")]
    InvalidPosition { position: usize, dim: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("not a projector: {check} check failed (residual {residual:e})")]
    NotAProjector { check: ProjectorCheck, residual: f64 },
    #[error("zero vector has no ray")]
    ZeroVector,
    #[error("decomposition member {0:?} is the zero projector")]
    ZeroMember(String),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("projectors {j} and {k} are not orthogonal (‖P_j P_k‖ = {norm:e})")]
    NotOrthogonal { j: usize, k: usize, norm: f64 },
    #[error("projectors do not sum to the identity (residual {residual:e})")]
    IncompletePdi { residual: f64 },
    #[error("{0}")]
    Meaningless(Box<MeaninglessError>),
    #[error("{0}")]
    Incompatible(IncompatibleError),
    #[error("event algebra of {members} members exceeds the limit of {max}")]
    TooManyMembers { members: usize, max: usize },

    #[error("bad time grid: {0}")]
    BadTimeGrid(&'static str),
    #[error("propagator {index} is not unitary (residual {residual:e})")]
    NonUnitaryPropagator { index: usize, residual: f64 },
    #[error("history projectors do not sum to the history-space identity (residual {residual:e})")]
    SumRuleViolation { residual: f64 },
    #[error("branch-dependent family too large for the explicit sum-rule check (history space {size})")]
    SumRuleUncheckable { size: usize },
    #[error("chain kets need a pure initial state; use chain operators")]
    NotPureInitial,
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(&'static str),
    #[error("family is inconsistent (worst off-diagonal {:e})", .0.worst_offdiag)]
    InconsistentFamily(Box<ConsistencyReport>),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("family events are not drawn from a decomposition at each time")]
    NotPdiStructured,
    #[error("time index {index} out of range 1..={max}")]
    BadTimeIndex { index: usize, max: usize },
    #[error("conditioning event has probability {probability:e}")]
    ZeroConditioningEvent { probability: f64 },

    #[error("pointer ket {index} overlaps the ready state (|⟨M|M0⟩| = {overlap:e})")]
    PointerOverlapsReady { index: usize, overlap: f64 },
    #[error("probabilities or amplitudes are not normalised (total {total})")]
    NotNormalized { total: f64 },
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("information bound violated: I = {mutual}, χ = {holevo}, log2 d = {bound}")]
    BoundViolation { mutual: f64, holevo: f64, bound: f64 },
}
