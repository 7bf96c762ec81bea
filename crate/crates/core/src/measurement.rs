//! A von Neumann-style measurement model.
//!
//! A particle with orthonormal basis `|s^j⟩` meets an apparatus in the
//! ready state `|M0⟩`. Between `t1` and `t2` the interaction maps
//! `|s^j⟩ ⊗ |M0⟩` to `|ŝ^j⟩ ⊗ |M^j⟩`, with orthonormal pointer kets
//! `|M^j⟩` and normalised (not necessarily orthogonal) later particle
//! states `|ŝ^j⟩`. Dynamics is trivial on `[t0, t1]`.
//!
//! Three families describe the same run:
//! * unitary development `[Ψ0] ⊙ {[Ψ1], I-[Ψ1]} ⊙ {[Ψ2], I-[Ψ2]}`,
//! * pointer outcomes `[Ψ0] ⊙ {[Ψ1], I-[Ψ1]} ⊙ {[M^k]}`,
//! * retrodiction `[Ψ0] ⊙ {[s^j]} ⊙ {[M^k]}`.
//!
//! Pointer decompositions carry the remainder `R' = I - Σ_k I ⊗ [M^k]` so
//! the sum rule holds; it has probability zero and is left out of the
//! pointer and joint distributions reported here.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::Error;
use crate::histories::{Dynamics, Events, HistoryFamily, InitialCondition, ProbabilityTable};
use crate::numeric::{complete_to_unitary_seeded, orthonormality_residual, ComplexMatrix, ComplexVector};
use crate::properties::{common_refinement, negation, validate_pdi, Decomposition, Projector};

/// Label of the pointer remainder `R'`.
pub const REMAINDER_LABEL: &str = "R'";

pub fn particle_label(j: usize) -> String {
    format!("s{}", j + 1)
}

pub fn pointer_label(k: usize) -> String {
    format!("M{}", k + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    s_basis: Vec<ComplexVector>,
    ready: ComplexVector,
    pointer_basis: Vec<ComplexVector>,
    post_states: Vec<ComplexVector>,
    t_unitary: ComplexMatrix,
}

impl MeasurementModel {
    /// Builds the model with the default completion of the interaction
    /// unitary. `post_states` defaults to `s_basis`.
    pub fn build(
        s_basis: Vec<ComplexVector>,
        ready: ComplexVector,
        pointer_basis: Vec<ComplexVector>,
        post_states: Option<Vec<ComplexVector>>,
        tol: &Tolerances,
    ) -> Result<Self, Error> {
        Self::build_seeded(s_basis, ready, pointer_basis, post_states, None, tol)
    }

    /// As [`MeasurementModel::build`], with the order in which standard
    /// basis vectors seed the free columns of the interaction unitary.
    pub fn build_seeded(
        s_basis: Vec<ComplexVector>,
        ready: ComplexVector,
        pointer_basis: Vec<ComplexVector>,
        post_states: Option<Vec<ComplexVector>>,
        seed_order: Option<&[usize]>,
        tol: &Tolerances,
    ) -> Result<Self, Error> {
        let ds = s_basis.len();
        if ds == 0 {
            return Err(Error::Empty("particle basis"));
        }
        if let Some(v) = s_basis.iter().find(|v| v.dim() != ds) {
            return Err(Error::DimensionMismatch { expected: ds, found: v.dim() });
        }
        let residual = orthonormality_residual(&s_basis);
        if !(residual <= tol.validation) {
            return Err(Error::NotOrthonormal { residual });
        }

        let dm = ready.dim();
        if !((ready.norm() - 1.0).abs() <= tol.validation) {
            return Err(Error::NotNormalized { total: ready.norm_sqr() });
        }
        if pointer_basis.len() != ds {
            return Err(Error::DimensionMismatch { expected: ds, found: pointer_basis.len() });
        }
        if dm < ds + 1 {
            return Err(Error::InvalidArgument("apparatus dimension must be at least particle dimension + 1"));
        }
        if let Some(v) = pointer_basis.iter().find(|v| v.dim() != dm) {
            return Err(Error::DimensionMismatch { expected: dm, found: v.dim() });
        }
        let residual = orthonormality_residual(&pointer_basis);
        if !(residual <= tol.validation) {
            return Err(Error::NotOrthonormal { residual });
        }
        for (index, m) in pointer_basis.iter().enumerate() {
            let overlap = m.inner(&ready).norm();
            if !(overlap <= tol.validation) {
                return Err(Error::PointerOverlapsReady { index, overlap });
            }
        }

        let post_states = post_states.unwrap_or_else(|| s_basis.clone());
        if post_states.len() != ds {
            return Err(Error::DimensionMismatch { expected: ds, found: post_states.len() });
        }
        for v in &post_states {
            if v.dim() != ds {
                return Err(Error::DimensionMismatch { expected: ds, found: v.dim() });
            }
            if !((v.norm() - 1.0).abs() <= tol.validation) {
                return Err(Error::NotNormalized { total: v.norm_sqr() });
            }
        }

        let domain: Vec<ComplexVector> = s_basis.iter().map(|s| s.kron(&ready)).collect();
        let images: Vec<ComplexVector> = post_states.iter().zip(&pointer_basis).map(|(s, m)| s.kron(m)).collect();
        let d = ds * dm;
        let default_order: Vec<usize> = (0..d).collect();
        let order = seed_order.unwrap_or(&default_order);
        let positions = column_positions(&domain);
        // T = C B† with B e_p = |s^j, M0⟩ and C e_p = |ŝ^j, M^j⟩.
        let b = complete_to_unitary_seeded(&domain, &positions, order, tol)?;
        let c = complete_to_unitary_seeded(&images, &positions, order, tol)?;
        let t_unitary = &c * &b.adjoint();

        Ok(Self { s_basis, ready, pointer_basis, post_states, t_unitary })
    }

    pub fn particle_dim(&self) -> usize {
        self.s_basis.len()
    }

    pub fn apparatus_dim(&self) -> usize {
        self.ready.dim()
    }

    pub fn dim(&self) -> usize {
        self.particle_dim() * self.apparatus_dim()
    }

    pub fn s_basis(&self) -> &[ComplexVector] {
        &self.s_basis
    }

    pub fn ready(&self) -> &ComplexVector {
        &self.ready
    }

    pub fn pointer_basis(&self) -> &[ComplexVector] {
        &self.pointer_basis
    }

    pub fn post_states(&self) -> &[ComplexVector] {
        &self.post_states
    }

    /// `T(t2, t1)` on the particle ⊗ apparatus space.
    pub fn t_unitary(&self) -> &ComplexMatrix {
        &self.t_unitary
    }

    /// `|Ψ0⟩ = (Σ_j c_j |s^j⟩) ⊗ |M0⟩`.
    pub fn initial_state(&self, amplitudes: &[Complex64], tol: &Tolerances) -> Result<ComplexVector, Error> {
        if amplitudes.len() != self.particle_dim() {
            return Err(Error::DimensionMismatch { expected: self.particle_dim(), found: amplitudes.len() });
        }
        let total: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !((total - 1.0).abs() <= tol.validation) {
            return Err(Error::NotNormalized { total });
        }
        let psi = amplitudes
            .iter()
            .zip(&self.s_basis)
            .fold(ComplexVector::zeros(self.particle_dim()), |acc, (c, s)| acc.add(&s.scale(*c)));
        Ok(psi.kron(&self.ready))
    }

    /// `|Ψ2⟩ = T(t2, t0)|Ψ0⟩ = Σ_j c_j |ŝ^j⟩ ⊗ |M^j⟩`.
    pub fn final_state(&self, amplitudes: &[Complex64], tol: &Tolerances) -> Result<ComplexVector, Error> {
        Ok(self.t_unitary.mul_vec(&self.initial_state(amplitudes, tol)?))
    }

    /// `{I_S ⊗ [M^k]} ∪ {R'}` on the full space.
    pub fn pointer_pdi(&self, tol: &Tolerances) -> Result<Decomposition, Error> {
        let ids = Projector::identity(self.particle_dim());
        let mut members: Vec<Projector> = self
            .pointer_basis
            .iter()
            .map(|m| Projector::from_ket(m).map(|p| ids.tensor(&p)))
            .collect::<Result<_, _>>()?;
        let mut sum = ComplexMatrix::zeros(self.dim(), self.dim());
        for p in &members {
            sum = &sum + p.matrix();
        }
        let rest = self.dim() - self.particle_dim();
        members.push(Projector::from_parts_unchecked(&ComplexMatrix::identity(self.dim()) - &sum, rest));
        let mut labels: Vec<String> = (0..self.particle_dim()).map(pointer_label).collect();
        labels.push(REMAINDER_LABEL.into());
        validate_pdi(members, &labels, tol)
    }

    /// `{[s^j] ⊗ I_M}`.
    pub fn particle_pdi(&self, tol: &Tolerances) -> Result<Decomposition, Error> {
        let idm = Projector::identity(self.apparatus_dim());
        let members =
            self.s_basis.iter().map(|s| Projector::from_ket(s).map(|p| p.tensor(&idm))).collect::<Result<_, _>>()?;
        let labels: Vec<String> = (0..self.particle_dim()).map(particle_label).collect();
        validate_pdi(members, &labels, tol)
    }

    fn binary_pdi(&self, ket: &ComplexVector, label: &str, tol: &Tolerances) -> Result<Decomposition, Error> {
        let p = Projector::from_ket(ket)?;
        let q = negation(&p);
        validate_pdi(alloc::vec![p, q], &[String::from(label), format!("not {label}")], tol)
    }

    fn family(
        &self,
        amplitudes: &[Complex64],
        pdis: Vec<Decomposition>,
        tol: &Tolerances,
    ) -> Result<HistoryFamily, Error> {
        let psi0 = self.initial_state(amplitudes, tol)?;
        HistoryFamily::build(
            InitialCondition::pure(psi0, tol)?,
            alloc::vec![0.0, 1.0, 2.0],
            Dynamics::Propagators(alloc::vec![ComplexMatrix::identity(self.dim()), self.t_unitary.clone()]),
            Events::PerTime(pdis),
            tol,
        )
    }

    fn unitary_pdis(
        &self,
        amplitudes: &[Complex64],
        tol: &Tolerances,
    ) -> Result<(Decomposition, Decomposition), Error> {
        let psi1 = self.initial_state(amplitudes, tol)?;
        let psi2 = self.t_unitary.mul_vec(&psi1);
        Ok((self.binary_pdi(&psi1, "Psi1", tol)?, self.binary_pdi(&psi2, "Psi2", tol)?))
    }

    /// Unitary development: every history but `Psi1,Psi2` has probability 0.
    pub fn family_unitary(
        &self,
        amplitudes: &[Complex64],
        tol: &Tolerances,
    ) -> Result<(HistoryFamily, ProbabilityTable), Error> {
        let (p1, p2) = self.unitary_pdis(amplitudes, tol)?;
        let fam = self.family(amplitudes, alloc::vec![p1, p2], tol)?;
        let table = fam.assign_probabilities(tol)?;
        Ok((fam, table))
    }

    /// Tries to refine the final-time framework `{[Ψ2], I-[Ψ2]}` of the
    /// unitary family by the pointer decomposition. Fails with
    /// [`Error::Incompatible`] whenever two or more amplitudes are nonzero.
    pub fn refine_unitary_with_pointer(
        &self,
        amplitudes: &[Complex64],
        tol: &Tolerances,
    ) -> Result<Decomposition, Error> {
        let (_, p2) = self.unitary_pdis(amplitudes, tol)?;
        common_refinement(&p2, &self.pointer_pdi(tol)?, tol)
    }

    /// The pointer family with `Pr([M^k]_2)` evaluated from chain kets and,
    /// independently, as the pre-probability `Tr([Ψ2][M^k]) = ⟨Ψ2|M^k|Ψ2⟩`.
    pub fn family_pointer(
        &self,
        amplitudes: &[Complex64],
        tol: &Tolerances,
    ) -> Result<(HistoryFamily, PointerDistribution), Error> {
        let (p1, _) = self.unitary_pdis(amplitudes, tol)?;
        let pointer = self.pointer_pdi(tol)?;
        let fam = self.family(amplitudes, alloc::vec![p1, pointer.clone()], tol)?;
        let table = fam.assign_probabilities(tol)?;

        let psi2 = self.final_state(amplitudes, tol)?;
        let mut probabilities = Vec::with_capacity(self.particle_dim());
        let mut pre_probability = Vec::with_capacity(self.particle_dim());
        for k in 0..self.particle_dim() {
            let label = pointer_label(k);
            probabilities.push(table.probability(&format!("Psi1,{label}"))?);
            let m = pointer.get(&label).expect("pointer member present");
            pre_probability.push(m.expectation(&psi2));
        }
        Ok((fam, PointerDistribution { probabilities, pre_probability }))
    }

    /// The retrodiction family; its table holds `Pr([s^j]_1, [M^k]_2)`.
    pub fn family_retrodiction(
        &self,
        amplitudes: &[Complex64],
        tol: &Tolerances,
    ) -> Result<(HistoryFamily, ProbabilityTable), Error> {
        let fam = self.family(amplitudes, alloc::vec![self.particle_pdi(tol)?, self.pointer_pdi(tol)?], tol)?;
        let table = fam.assign_probabilities(tol)?;
        Ok((fam, table))
    }

    /// `joint[j][k] = Pr([s^j]_1, [M^k]_2)` from a retrodiction table.
    pub fn joint_distribution(&self, table: &ProbabilityTable) -> Result<Vec<Vec<f64>>, Error> {
        let n = self.particle_dim();
        (0..n)
            .map(|j| {
                (0..n).map(|k| table.probability(&format!("{},{}", particle_label(j), pointer_label(k)))).collect()
            })
            .collect()
    }

    /// `Pr([s^j]_1 | [M^k]_2)` for every `j`, given pointer outcome `k`
    /// (0-based).
    pub fn retrodict(&self, amplitudes: &[Complex64], pointer: usize, tol: &Tolerances) -> Result<Vec<f64>, Error> {
        if pointer >= self.particle_dim() {
            return Err(Error::UnknownLabel(pointer_label(pointer)));
        }
        let (_, table) = self.family_retrodiction(amplitudes, tol)?;
        retrodict_from_table(&table, self.particle_dim(), pointer, tol)
    }
}

/// Conditional distribution over particle properties at `t1` given pointer
/// outcome `pointer` at `t2`, read from a retrodiction table.
pub fn retrodict_from_table(
    table: &ProbabilityTable,
    particle_dim: usize,
    pointer: usize,
    tol: &Tolerances,
) -> Result<Vec<f64>, Error> {
    let given = table.histories_with_event(2, &pointer_label(pointer))?;
    (0..particle_dim)
        .map(|j| {
            let target = table.histories_with_event(1, &particle_label(j))?;
            table.conditional_probability(&given, &target, tol)
        })
        .collect()
}

/// Positions at which the images of the interaction are placed: the
/// coordinate of each domain vector when the domain vectors are distinct
/// standard basis vectors, otherwise `0, 1, …`.
fn column_positions(domain: &[ComplexVector]) -> Vec<usize> {
    let argmax: Vec<usize> = domain
        .iter()
        .map(|v| {
            let mut best = 0;
            for (i, z) in v.entries().iter().enumerate() {
                if z.norm() > v[best].norm() {
                    best = i;
                }
            }
            best
        })
        .collect();
    let mut sorted = argmax.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() == argmax.len() {
        argmax
    } else {
        (0..domain.len()).collect()
    }
}

/// `Pr([M^k]_2)` by two routes.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerDistribution {
    /// From the chain kets of the pointer family.
    pub probabilities: Vec<f64>,
    /// From the pre-probability `⟨Ψ2|M^k|Ψ2⟩`.
    pub pre_probability: Vec<f64>,
}

impl PointerDistribution {
    /// Largest absolute difference between the two routes.
    pub fn max_discrepancy(&self) -> f64 {
        self.probabilities.iter().zip(&self.pre_probability).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}
