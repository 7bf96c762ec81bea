//! Quantum properties as projectors, decompositions of the identity
//! (frameworks), and the commuting-only property algebra.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::config::Tolerances;
use crate::error::Error;
use crate::numeric::{c64, hermitian_eigendecomposition, ComplexMatrix, ComplexVector};

/// Which projector invariant failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorCheck {
    Square,
    Hermitian,
    Idempotent,
    IntegerTrace,
}

impl fmt::Display for ProjectorCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjectorCheck::Square => "square",
            ProjectorCheck::Hermitian => "hermitian",
            ProjectorCheck::Idempotent => "idempotent",
            ProjectorCheck::IntegerTrace => "integer trace",
        })
    }
}

/// A Hermitian idempotent operator: a quantum property.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    /// Validates `matrix` and wraps it unchanged.
    pub fn from_matrix(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self, Error> {
        if !matrix.is_square() {
            return Err(Error::NotAProjector { check: ProjectorCheck::Square, residual: f64::INFINITY });
        }
        let scale = matrix.frobenius_norm().max(1.0);
        let herm = matrix.hermiticity_residual();
        if !(herm <= tol.validation * scale) {
            return Err(Error::NotAProjector { check: ProjectorCheck::Hermitian, residual: herm });
        }
        let idem = (&matrix * &matrix).distance(&matrix);
        if !(idem <= tol.validation * scale) {
            return Err(Error::NotAProjector { check: ProjectorCheck::Idempotent, residual: idem });
        }
        let tr = matrix.trace().re;
        let rank = tr.round();
        if !((tr - rank).abs() <= tol.rank) || rank < 0.0 {
            return Err(Error::NotAProjector { check: ProjectorCheck::IntegerTrace, residual: (tr - rank).abs() });
        }
        Ok(Self { matrix, rank: rank as usize })
    }

    /// The rank-one projector `[ψ]` onto the ray of a nonzero ket.
    pub fn from_ket(ket: &ComplexVector) -> Result<Self, Error> {
        let unit = ket.normalized()?;
        Ok(Self { matrix: unit.dyad(), rank: 1 })
    }

    /// Sum of `|v⟩⟨v|` over orthonormal vectors; the caller guarantees
    /// orthonormality.
    pub(crate) fn from_orthonormal(dim: usize, vectors: &[ComplexVector]) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for v in vectors {
            m = &m + &v.dyad();
        }
        Self { matrix: m, rank: vectors.len() }
    }

    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, rank: usize) -> Self {
        Self { matrix, rank }
    }

    /// The zero operator: the property that is always false.
    pub fn zero(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim, dim), rank: 0 }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim), rank: dim }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    /// `‖PQ - QP‖_F`.
    pub fn commutator_norm(&self, other: &Projector) -> f64 {
        self.matrix.commutator(&other.matrix).frobenius_norm()
    }

    /// `P ⊗ Q`.
    pub fn tensor(&self, other: &Projector) -> Projector {
        Projector { matrix: crate::numeric::tensor_product(&self.matrix, &other.matrix), rank: self.rank * other.rank }
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, ket: &ComplexVector) -> f64 {
        ket.inner(&self.matrix.mul_vec(ket)).re
    }

    fn same_dim(&self, other: &Projector) -> Result<(), Error> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// A conjunction or disjunction of two properties that do not commute. It
/// has no truth value at all, which is different from being false.
#[derive(Debug, Clone, PartialEq)]
pub struct MeaninglessError {
    pub left: Projector,
    pub right: Projector,
    pub commutator_norm: f64,
}

impl fmt::Display for MeaninglessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "meaningless combination: ‖PQ - QP‖ = {:e}", self.commutator_norm)
    }
}

/// Two frameworks with no common refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompatibleError {
    pub left_label: String,
    pub right_label: String,
    pub commutator_norm: f64,
}

impl fmt::Display for IncompatibleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "incompatible frameworks: {} and {} do not commute (‖[P,Q]‖ = {:e})",
            self.left_label, self.right_label, self.commutator_norm
        )
    }
}

/// `I - P`.
pub fn negation(p: &Projector) -> Projector {
    let d = p.dim();
    Projector { matrix: &ComplexMatrix::identity(d) - &p.matrix, rank: d - p.rank }
}

fn commuting_product(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<ComplexMatrix, Error> {
    p.same_dim(q)?;
    let pq = &p.matrix * &q.matrix;
    let qp = &q.matrix * &p.matrix;
    let norm = pq.distance(&qp);
    if !(norm <= tol.commutation) {
        return Err(Error::Meaningless(alloc::boxed::Box::new(MeaninglessError {
            left: p.clone(),
            right: q.clone(),
            commutator_norm: norm,
        })));
    }
    // Symmetrised so that P∧Q and Q∧P coincide exactly.
    Ok((&pq + &qp).scale_real(0.5))
}

fn rank_of(m: &ComplexMatrix) -> usize {
    let tr = m.trace().re.round();
    if tr < 0.0 {
        0
    } else {
        tr as usize
    }
}

/// `P ∧ Q = PQ`, defined only when the projectors commute.
pub fn conjunction(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<Projector, Error> {
    let m = commuting_product(p, q, tol)?;
    let rank = rank_of(&m);
    Ok(Projector { matrix: m, rank })
}

/// `P ∨ Q = P + Q - PQ`, defined only when the projectors commute.
pub fn disjunction(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<Projector, Error> {
    let pq = commuting_product(p, q, tol)?;
    let m = &(&p.matrix + &q.matrix) - &pq;
    let rank = rank_of(&m);
    Ok(Projector { matrix: m, rank })
}

/// A projective decomposition of the identity: mutually orthogonal,
/// nonzero, labelled projectors summing to `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    projectors: Vec<Projector>,
    labels: Vec<String>,
    dim: usize,
}

impl Decomposition {
    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Projector)> {
        self.labels.iter().map(String::as_str).zip(&self.projectors)
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, label: &str) -> Option<&Projector> {
        self.position(label).map(|i| &self.projectors[i])
    }

    /// The trivial framework `{I}`.
    pub fn trivial(dim: usize, label: &str) -> Self {
        Self { projectors: alloc::vec![Projector::identity(dim)], labels: alloc::vec![label.to_string()], dim }
    }

    /// Rank-one projectors onto an orthonormal basis.
    pub fn from_basis<S: AsRef<str>>(basis: &[ComplexVector], labels: &[S], tol: &Tolerances) -> Result<Self, Error> {
        let projectors = basis.iter().map(Projector::from_ket).collect::<Result<Vec<_>, _>>()?;
        validate_pdi(projectors, labels, tol)
    }

    /// Members with their labels, as owned pairs.
    pub fn members(&self) -> Vec<(String, Projector)> {
        self.labels.iter().cloned().zip(self.projectors.iter().cloned()).collect()
    }
}

/// Checks that `projectors` form a decomposition of the identity.
///
/// Orthogonality is checked before completeness so a non-orthogonal pair
/// is reported as such even when the sum also misses `I`.
pub fn validate_pdi<S: AsRef<str>>(
    projectors: Vec<Projector>,
    labels: &[S],
    tol: &Tolerances,
) -> Result<Decomposition, Error> {
    let first = projectors.first().ok_or(Error::Empty("decomposition"))?;
    let dim = first.dim();
    if labels.len() != projectors.len() {
        return Err(Error::DimensionMismatch { expected: projectors.len(), found: labels.len() });
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l.as_ref()) {
            return Err(Error::DuplicateLabel(l.as_ref().to_string()));
        }
    }
    for (p, l) in projectors.iter().zip(labels) {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        if p.is_zero() {
            return Err(Error::ZeroMember(l.as_ref().to_string()));
        }
    }
    for j in 0..projectors.len() {
        for k in (j + 1)..projectors.len() {
            let norm = (projectors[j].matrix() * projectors[k].matrix()).frobenius_norm();
            if !(norm <= tol.validation) {
                return Err(Error::NotOrthogonal { j, k, norm });
            }
        }
    }
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for p in &projectors {
        sum = &sum + p.matrix();
    }
    let residual = sum.distance(&ComplexMatrix::identity(dim));
    if !(residual <= tol.validation) {
        return Err(Error::IncompletePdi { residual });
    }
    Ok(Decomposition { projectors, labels: labels.iter().map(|l| l.as_ref().to_string()).collect(), dim })
}

/// An observable written as `Σ_j a_j P_j` with distinct eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpectrum {
    pub eigenvalues: Vec<f64>,
    pub pdi: Decomposition,
}

impl ObservableSpectrum {
    /// `Σ_j a_j P_j`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.pdi.dim();
        self.eigenvalues
            .iter()
            .zip(self.pdi.projectors())
            .fold(ComplexMatrix::zeros(d, d), |acc, (a, p)| &acc + &p.matrix().scale_real(*a))
    }
}

/// Spectral decomposition of a Hermitian observable. Eigenvalues closer
/// than `tol.cluster · max(1, spread)` are merged into one projector;
/// members are labelled `a1, a2, …` in descending eigenvalue order.
pub fn observable_to_pdi(a: &ComplexMatrix, tol: &Tolerances) -> Result<ObservableSpectrum, Error> {
    let es = hermitian_eigendecomposition(a, tol)?;
    let n = es.dim();
    let spread = es.eigenvalues[0] - es.eigenvalues[n - 1];
    let gap = tol.cluster * spread.max(1.0);

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k == n || es.eigenvalues[k - 1] - es.eigenvalues[k] > gap {
            clusters.push((start, k));
            start = k;
        }
    }

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    let mut labels = Vec::with_capacity(clusters.len());
    for (j, &(s, e)) in clusters.iter().enumerate() {
        let mean = es.eigenvalues[s..e].iter().sum::<f64>() / (e - s) as f64;
        eigenvalues.push(mean);
        let vecs: Vec<ComplexVector> = (s..e).map(|k| es.eigenvector(k)).collect();
        projectors.push(Projector::from_orthonormal(n, &vecs));
        labels.push(format!("a{}", j + 1));
    }
    let pdi = validate_pdi(projectors, &labels, tol)?;
    Ok(ObservableSpectrum { eigenvalues, pdi })
}

/// True iff every projector of `f` commutes with every projector of `g`.
pub fn compatible(f: &Decomposition, g: &Decomposition, tol: &Tolerances) -> Result<bool, Error> {
    Ok(first_noncommuting(f, g, tol)?.is_none())
}

fn first_noncommuting(
    f: &Decomposition,
    g: &Decomposition,
    tol: &Tolerances,
) -> Result<Option<IncompatibleError>, Error> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, found: g.dim });
    }
    for (lp, p) in f.iter() {
        for (lq, q) in g.iter() {
            let norm = p.commutator_norm(q);
            if !(norm <= tol.commutation) {
                return Ok(Some(IncompatibleError {
                    left_label: lp.to_string(),
                    right_label: lq.to_string(),
                    commutator_norm: norm,
                }));
            }
        }
    }
    Ok(None)
}

/// Joins two labels of a refinement member.
pub fn refinement_label(left: &str, right: &str) -> String {
    format!("{left}∧{right}")
}

/// The coarsest decomposition refining both `f` and `g`: every nonzero
/// product `P_j Q_k`, labelled `"j∧k"`, in lexicographic `(j, k)` order.
pub fn common_refinement(f: &Decomposition, g: &Decomposition, tol: &Tolerances) -> Result<Decomposition, Error> {
    if let Some(err) = first_noncommuting(f, g, tol)? {
        return Err(Error::Incompatible(err));
    }
    let mut projectors = Vec::new();
    let mut labels = Vec::new();
    for (lp, p) in f.iter() {
        for (lq, q) in g.iter() {
            let prod = conjunction(p, q, tol)?;
            if !prod.is_zero() {
                projectors.push(prod);
                labels.push(refinement_label(lp, lq));
            }
        }
    }
    validate_pdi(projectors, &labels, tol)
}

/// Largest decomposition size accepted by [`event_algebra`].
pub const MAX_EVENT_ALGEBRA_MEMBERS: usize = 16;

/// All `2^n` sums of subsets of the decomposition's projectors, indexed by
/// bitmask (bit `j` selects member `j`). Subset labels are `{l1,l2,…}`.
pub fn event_algebra(f: &Decomposition) -> Result<Vec<(String, Projector)>, Error> {
    let n = f.len();
    if n > MAX_EVENT_ALGEBRA_MEMBERS {
        return Err(Error::TooManyMembers { members: n, max: MAX_EVENT_ALGEBRA_MEMBERS });
    }
    let d = f.dim;
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let mut m = ComplexMatrix::zeros(d, d);
        let mut rank = 0;
        let mut names = Vec::new();
        for j in 0..n {
            if mask & (1 << j) != 0 {
                m = &m + f.projectors[j].matrix();
                rank += f.projectors[j].rank();
                names.push(f.labels[j].as_str());
            }
        }
        out.push((format!("{{{}}}", names.join(",")), Projector { matrix: m, rank }));
    }
    Ok(out)
}

/// Standard spin-half kets `|z±⟩`, `|x±⟩`, `|y±⟩` in the `S_z` basis.
pub mod spin_half {
    use super::*;

    fn ket(a: (f64, f64), b: (f64, f64)) -> ComplexVector {
        ComplexVector::new(alloc::vec![c64(a.0, a.1), c64(b.0, b.1)]).expect("two components")
    }

    pub fn z_plus() -> ComplexVector {
        ket((1.0, 0.0), (0.0, 0.0))
    }
    pub fn z_minus() -> ComplexVector {
        ket((0.0, 0.0), (1.0, 0.0))
    }
    pub fn x_plus() -> ComplexVector {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        ket((h, 0.0), (h, 0.0))
    }
    pub fn x_minus() -> ComplexVector {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        ket((h, 0.0), (-h, 0.0))
    }
    pub fn y_plus() -> ComplexVector {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        ket((h, 0.0), (0.0, h))
    }
    pub fn y_minus() -> ComplexVector {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        ket((h, 0.0), (0.0, -h))
    }
    pub fn projector(k: ComplexVector) -> Projector {
        Projector::from_ket(&k).expect("nonzero ket")
    }
}

#[cfg(test)]
mod tests {
    use super::spin_half::*;
    use super::*;
    use alloc::vec;

    const TOL: Tolerances = Tolerances::DEFAULT;

    fn zp() -> Projector {
        projector(z_plus())
    }
    fn zm() -> Projector {
        projector(z_minus())
    }
    fn xp() -> Projector {
        projector(x_plus())
    }
    fn xm() -> Projector {
        projector(x_minus())
    }

    #[test]
    fn basis_ray_projector() {
        assert_eq!(zp().matrix(), &ComplexMatrix::diag_real(&[1.0, 0.0]));
        assert_eq!(zp().rank(), 1);
    }

    #[test]
    fn unnormalised_ket_gives_x_plus() {
        let p = Projector::from_ket(&ComplexVector::from_real(&[1.0, 1.0]).unwrap()).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(p.matrix().distance(&expected) < 1e-15);
    }

    #[test]
    fn y_plus_matrix_is_a_projector() {
        let m = ComplexMatrix::from_rows(&[vec![c64(0.5, 0.0), c64(0.0, 0.5)], vec![c64(0.0, -0.5), c64(0.5, 0.0)]])
            .unwrap();
        // direct check of the invariants
        assert!(m.hermiticity_residual() == 0.0);
        assert!((&m * &m).distance(&m) < 1e-16);
        let p = Projector::from_matrix(m, &TOL).unwrap();
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn projector_validation_failures() {
        let not_herm = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            Projector::from_matrix(not_herm, &TOL),
            Err(Error::NotAProjector { check: ProjectorCheck::Hermitian, .. })
        ));
        let not_idem = ComplexMatrix::diag_real(&[2.0, 0.0]);
        assert!(matches!(
            Projector::from_matrix(not_idem, &TOL),
            Err(Error::NotAProjector { check: ProjectorCheck::Idempotent, .. })
        ));
        assert!(matches!(
            Projector::from_matrix(ComplexMatrix::zeros(2, 3), &TOL),
            Err(Error::NotAProjector { check: ProjectorCheck::Square, .. })
        ));
        assert!(matches!(Projector::from_ket(&ComplexVector::zeros(2)), Err(Error::ZeroVector)));
    }

    #[test]
    fn z_basis_is_a_pdi() {
        let pdi = validate_pdi(vec![zp(), zm()], &["z+", "z-"], &TOL).unwrap();
        assert_eq!(pdi.len(), 2);
        validate_pdi(vec![Projector::identity(2)], &["I"], &TOL).unwrap();
    }

    #[test]
    fn mixed_bases_are_not_orthogonal() {
        assert!(matches!(
            validate_pdi(vec![zp(), xm()], &["z+", "x-"], &TOL),
            Err(Error::NotOrthogonal { j: 0, k: 1, .. })
        ));
    }

    #[test]
    fn pdi_structural_errors() {
        assert!(matches!(validate_pdi(vec![zp()], &["z+"], &TOL), Err(Error::IncompletePdi { .. })));
        assert!(matches!(validate_pdi(vec![zp(), zm()], &["a", "a"], &TOL), Err(Error::DuplicateLabel(_))));
        assert!(matches!(
            validate_pdi(vec![Projector::identity(2), Projector::zero(2)], &["I", "0"], &TOL),
            Err(Error::ZeroMember(_))
        ));
        assert!(matches!(validate_pdi(Vec::new(), &[] as &[&str], &TOL), Err(Error::Empty(_))));
    }

    #[test]
    fn negation_examples() {
        assert_eq!(negation(&zp()), zm());
        assert_eq!(negation(&Projector::zero(2)), Projector::identity(2));
        let p = xp();
        assert!(negation(&negation(&p)).matrix().distance(p.matrix()) < 1e-15);
    }

    #[test]
    fn conjunction_of_orthogonal_properties_is_false() {
        let r = conjunction(&zp(), &zm(), &TOL).unwrap();
        assert!(r.is_zero());
        assert_eq!(r.matrix(), &ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn conjunction_across_frameworks_is_meaningless() {
        match conjunction(&zp(), &xm(), &TOL) {
            Err(Error::Meaningless(m)) => {
                assert!((m.commutator_norm - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
            }
            other => panic!("expected meaningless, got {other:?}"),
        }
    }

    #[test]
    fn disjunction_examples() {
        assert!(disjunction(&zp(), &zm(), &TOL).unwrap().matrix().distance(&ComplexMatrix::identity(2)) < 1e-15);
        let p = xp();
        assert!(disjunction(&p, &Projector::zero(2), &TOL).unwrap().matrix().distance(p.matrix()) < 1e-15);
        match disjunction(&zp(), &xp(), &TOL) {
            // [z+][x+] - [x+][z+] = ½[[0,1],[-1,0]], Frobenius norm √2/2
            Err(Error::Meaningless(m)) => assert!((m.commutator_norm - 0.5 * 2f64.sqrt()).abs() < 1e-15),
            other => panic!("expected meaningless, got {other:?}"),
        }
    }

    #[test]
    fn self_conjunction_is_identity_operation() {
        let p = xp();
        assert!(conjunction(&p, &p, &TOL).unwrap().matrix().distance(p.matrix()) < 1e-15);
    }

    #[test]
    fn degenerate_observable() {
        let spec = observable_to_pdi(&ComplexMatrix::diag_real(&[1.0, 1.0, 2.0]), &TOL).unwrap();
        assert_eq!(spec.eigenvalues, vec![2.0, 1.0]);
        assert_eq!(spec.pdi.projectors()[0].matrix(), &ComplexMatrix::diag_real(&[0.0, 0.0, 1.0]));
        assert_eq!(spec.pdi.projectors()[1].matrix(), &ComplexMatrix::diag_real(&[1.0, 1.0, 0.0]));
        assert_eq!(spec.pdi.projectors()[1].rank(), 2);
    }

    #[test]
    fn sigma_x_spectral_pair() {
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let spec = observable_to_pdi(&sx, &TOL).unwrap();
        assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-14 && (spec.eigenvalues[1] + 1.0).abs() < 1e-14);
        assert!(spec.pdi.projectors()[0].matrix().distance(xp().matrix()) < 1e-14);
        assert!(spec.pdi.projectors()[1].matrix().distance(xm().matrix()) < 1e-14);
        assert!(matches!(
            observable_to_pdi(&ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap(), &TOL),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn compatibility_examples() {
        let z = validate_pdi(vec![zp(), zm()], &["z+", "z-"], &TOL).unwrap();
        let x = validate_pdi(vec![xp(), xm()], &["x+", "x-"], &TOL).unwrap();
        assert!(compatible(&z, &Decomposition::trivial(2, "I"), &TOL).unwrap());
        assert!(!compatible(&z, &x, &TOL).unwrap());
        assert!(matches!(compatible(&z, &Decomposition::trivial(3, "I"), &TOL), Err(Error::DimensionMismatch { .. })));
        match common_refinement(&z, &x, &TOL) {
            Err(Error::Incompatible(e)) => {
                assert_eq!((e.left_label.as_str(), e.right_label.as_str()), ("z+", "x+"));
            }
            other => panic!("expected incompatible, got {other:?}"),
        }
    }

    #[test]
    fn two_qubit_refinement() {
        let z = validate_pdi(vec![zp(), zm()], &["+", "-"], &TOL).unwrap();
        let i2 = Projector::identity(2);
        let zi = validate_pdi(vec![zp().tensor(&i2), zm().tensor(&i2)], &["z+I", "z-I"], &TOL).unwrap();
        let iz = validate_pdi(vec![i2.tensor(&zp()), i2.tensor(&zm())], &["Iz+", "Iz-"], &TOL).unwrap();
        assert!(compatible(&zi, &iz, &TOL).unwrap());
        let r = common_refinement(&zi, &iz, &TOL).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r.labels()[1], "z+I∧Iz-");
        for (j, p) in r.projectors().iter().enumerate() {
            assert_eq!(p.rank(), 1);
            // explicit products are the computational basis dyads
            assert!(p.matrix().distance(&crate::numeric::ComplexVector::basis(4, j).dyad()) < 1e-15);
        }
        let self_ref = common_refinement(&z, &z, &TOL).unwrap();
        assert_eq!(self_ref.projectors(), z.projectors());
    }

    #[test]
    fn event_algebra_sizes() {
        let z = validate_pdi(vec![zp(), zm()], &["z+", "z-"], &TOL).unwrap();
        let alg = event_algebra(&z).unwrap();
        assert_eq!(alg.len(), 4);
        assert_eq!(alg[0].0, "{}");
        assert!(alg[0].1.is_zero());
        assert_eq!(alg[3].0, "{z+,z-}");
        assert!(alg[3].1.matrix().distance(&ComplexMatrix::identity(2)) < 1e-15);

        let a = observable_to_pdi(&ComplexMatrix::diag_real(&[3.0, 2.0, 1.0]), &TOL).unwrap();
        let alg = event_algebra(&a.pdi).unwrap();
        assert_eq!(alg.len(), 8);
        // "A has value a2 or a3" is P2 + P3, bitmask 0b110
        assert_eq!(alg[0b110].0, "{a2,a3}");
        assert!(alg[0b110].1.matrix().distance(&ComplexMatrix::diag_real(&[0.0, 1.0, 1.0])) < 1e-15);
    }

    #[test]
    fn event_algebra_rejects_large_decompositions() {
        let d = 17;
        let basis: Vec<ComplexVector> = (0..d).map(|i| ComplexVector::basis(d, i)).collect();
        let labels: Vec<String> = (0..d).map(|i| format!("e{i}")).collect();
        let f = Decomposition::from_basis(&basis, &labels, &TOL).unwrap();
        assert!(matches!(event_algebra(&f), Err(Error::TooManyMembers { members: 17, .. })));
    }
}
