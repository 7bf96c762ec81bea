//! Families of histories, chain kets and chain operators, the consistency
//! condition, and extended Born probabilities.
//!
//! A family starts from an initial condition at `t0` and carries one
//! projector per later time `t1 … tf` in each history. With a pure
//! initial ket `|Ψ0⟩` the chain ket of a history is
//!
//! ```text
//! |α⟩ = P_f T(t_f, t_{f-1}) ⋯ P_1 T(t_1, t_0) |Ψ0⟩
//! ```
//!
//! and the family is consistent when chain kets of distinct histories are
//! orthogonal; `⟨α|α⟩` is then the probability of `α`. Density-operator
//! initial conditions use chain operators `K_α = P_f T ⋯ P_1 T √ρ` with the
//! Gram entries `Tr(K_α† K_α')`, which reduce to `⟨α|α'⟩` for `ρ = [Ψ0]`.
//!
//! The zero-probability history `(I - [Ψ0]) ⊙ I ⊙ ⋯ ⊙ I` is implicit: it
//! enters the sum-rule check but never appears in reports or tables.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_traits::Zero;

use crate::config::Tolerances;
use crate::error::Error;
use crate::numeric::{
    hermitian_eigendecomposition, tensor_product, unitary_from_hamiltonian, ComplexMatrix, ComplexVector,
};
use crate::properties::{Decomposition, Projector};

/// The state of the closed system at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Pure(ComplexVector),
    Density(ComplexMatrix),
}

impl InitialCondition {
    /// A normalised pure state.
    pub fn pure(ket: ComplexVector, tol: &Tolerances) -> Result<Self, Error> {
        let n = ket.norm();
        if !((n - 1.0).abs() <= tol.validation) {
            return Err(Error::NotNormalized { total: n * n });
        }
        Ok(InitialCondition::Pure(ket))
    }

    /// A Hermitian, positive semidefinite, unit-trace density operator.
    pub fn density(rho: ComplexMatrix, tol: &Tolerances) -> Result<Self, Error> {
        validate_density(&rho, tol)?;
        Ok(InitialCondition::Density(rho))
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialCondition::Pure(k) => k.dim(),
            InitialCondition::Density(r) => r.rows(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, InitialCondition::Pure(_))
    }

    /// `ρ`, or `[Ψ0]` for a pure state.
    pub fn density_matrix(&self) -> ComplexMatrix {
        match self {
            InitialCondition::Pure(k) => k.dyad(),
            InitialCondition::Density(r) => r.clone(),
        }
    }

    /// The right-most factor of a chain operator: `[Ψ0]` for a pure state,
    /// `√ρ` otherwise, so that `Tr(K† K')` is the chain-ket inner product.
    fn chain_seed(&self, tol: &Tolerances) -> Result<ComplexMatrix, Error> {
        match self {
            InitialCondition::Pure(k) => Ok(k.dyad()),
            InitialCondition::Density(r) => {
                let es = hermitian_eigendecomposition(r, tol)?;
                Ok(es.apply_function(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)))
            }
        }
    }
}

/// Checks the density-operator invariants: Hermitian, PSD and unit trace,
/// each within `tol.validation`.
pub fn validate_density(rho: &ComplexMatrix, tol: &Tolerances) -> Result<(), Error> {
    if !rho.is_square() {
        return Err(Error::NotDensityMatrix("not square"));
    }
    if !(rho.hermiticity_residual() <= tol.validation * rho.frobenius_norm().max(1.0)) {
        return Err(Error::NotDensityMatrix("not Hermitian"));
    }
    if !((rho.trace().re - 1.0).abs() <= tol.validation) {
        return Err(Error::NotDensityMatrix("trace differs from 1"));
    }
    let es = hermitian_eigendecomposition(rho, tol)?;
    if es.eigenvalues.last().is_some_and(|&l| l < -tol.validation) {
        return Err(Error::NotDensityMatrix("negative eigenvalue"));
    }
    Ok(())
}

/// One history: an event projector at each of the times `t1 … tf`.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    label: String,
    events: Vec<Projector>,
    event_labels: Vec<String>,
}

impl History {
    pub fn new(label: impl Into<String>, events: Vec<(String, Projector)>) -> Self {
        let (event_labels, events) = events.into_iter().unzip();
        Self { label: label.into(), events, event_labels }
    }

    /// A history whose label is its event labels joined by commas.
    pub fn from_events(events: Vec<(String, Projector)>) -> Self {
        let label = events.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>().join(",");
        Self::new(label, events)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn events(&self) -> &[Projector] {
        &self.events
    }

    pub fn event_labels(&self) -> &[String] {
        &self.event_labels
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// How the system evolves between consecutive times.
#[derive(Debug, Clone)]
pub enum Dynamics {
    /// `T = I` on every interval.
    Trivial,
    /// `T(t_m, t_{m-1})` for `m = 1 … f`.
    Propagators(Vec<ComplexMatrix>),
    /// A time-independent Hamiltonian; `T = exp(-i (t_m - t_{m-1}) H / ħ)`.
    Hamiltonian { h: ComplexMatrix, hbar: f64 },
}

/// The events of a family.
#[derive(Debug, Clone)]
pub enum Events {
    /// One decomposition per time; the sample space is their Cartesian
    /// product, each history labelled by its event labels joined by commas.
    PerTime(Vec<Decomposition>),
    /// An explicit (possibly branch-dependent) list of histories.
    Explicit(Vec<History>),
}

/// A validated family of histories.
#[derive(Debug, Clone)]
pub struct HistoryFamily {
    initial: InitialCondition,
    times: Vec<f64>,
    propagators: Vec<ComplexMatrix>,
    histories: Vec<History>,
    structure: Option<Vec<Decomposition>>,
}

impl HistoryFamily {
    /// Builds and validates a family: time grid, unitarity of every
    /// propagator, matching dimensions, distinct labels and the sum rule.
    ///
    /// The sum rule is checked by explicit Kronecker construction when the
    /// history space `d^(f+1)` is at most `tol.sum_rule_explicit_cap`.
    /// Above the cap, per-time decompositions are accepted on structural
    /// grounds and explicit histories are rejected.
    pub fn build(
        initial: InitialCondition,
        times: Vec<f64>,
        dynamics: Dynamics,
        events: Events,
        tol: &Tolerances,
    ) -> Result<Self, Error> {
        if times.len() < 2 {
            return Err(Error::BadTimeGrid("need t0 and at least one later time"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::BadTimeGrid("times must be finite"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::BadTimeGrid("times must be strictly increasing"));
        }
        let d = initial.dim();
        let f = times.len() - 1;

        let propagators = match dynamics {
            Dynamics::Trivial => alloc::vec![ComplexMatrix::identity(d); f],
            Dynamics::Propagators(ps) => ps,
            Dynamics::Hamiltonian { h, hbar } => times
                .windows(2)
                .map(|w| unitary_from_hamiltonian(&h, w[1] - w[0], hbar, tol))
                .collect::<Result<Vec<_>, _>>()?,
        };
        if propagators.len() != f {
            return Err(Error::DimensionMismatch { expected: f, found: propagators.len() });
        }
        for (index, u) in propagators.iter().enumerate() {
            if u.rows() != d || u.cols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: u.rows() });
            }
            let residual = u.unitarity_residual();
            if !(residual <= tol.validation) {
                return Err(Error::NonUnitaryPropagator { index, residual });
            }
        }

        let (histories, structure) = match events {
            Events::PerTime(pdis) => {
                if pdis.len() != f {
                    return Err(Error::DimensionMismatch { expected: f, found: pdis.len() });
                }
                if let Some(p) = pdis.iter().find(|p| p.dim() != d) {
                    return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
                }
                (cartesian_histories(&pdis), Some(pdis))
            }
            Events::Explicit(hs) => (hs, None),
        };
        if histories.is_empty() {
            return Err(Error::Empty("history list"));
        }
        let mut seen = BTreeSet::new();
        for h in &histories {
            if h.len() != f {
                return Err(Error::DimensionMismatch { expected: f, found: h.len() });
            }
            if let Some(p) = h.events.iter().find(|p| p.dim() != d) {
                return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
            }
            if !seen.insert(h.label.as_str()) {
                return Err(Error::DuplicateLabel(h.label.clone()));
            }
        }

        let family = Self { initial, times, propagators, histories, structure };
        family.check_sum_rule(tol)?;
        Ok(family)
    }

    fn check_sum_rule(&self, tol: &Tolerances) -> Result<(), Error> {
        let d = self.dim();
        let f = self.steps();
        let size = d.checked_pow(f as u32 + 1);
        match size {
            Some(size) if size <= tol.sum_rule_explicit_cap => {
                let residual = sum_rule_residual(&self.histories, d, f);
                let scale = (d.pow(f as u32) as f64).sqrt();
                if !(residual <= tol.validation * scale.max(1.0)) {
                    return Err(Error::SumRuleViolation { residual });
                }
                Ok(())
            }
            _ if self.structure.is_some() => Ok(()),
            _ => Err(Error::SumRuleUncheckable { size: size.unwrap_or(usize::MAX) }),
        }
    }

    pub fn initial(&self) -> &InitialCondition {
        &self.initial
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn propagators(&self) -> &[ComplexMatrix] {
        &self.propagators
    }

    pub fn histories(&self) -> &[History] {
        &self.histories
    }

    /// The per-time decompositions, when the family was built from them.
    pub fn structure(&self) -> Option<&[Decomposition]> {
        self.structure.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    /// Number of event times `f`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn history(&self, label: &str) -> Option<&History> {
        self.histories.iter().find(|h| h.label == label)
    }

    /// `|α⟩ = P_f T ⋯ P_1 T |Ψ0⟩`, applied right to left.
    pub fn chain_ket(&self, history: &History) -> Result<ComplexVector, Error> {
        let InitialCondition::Pure(psi) = &self.initial else {
            return Err(Error::NotPureInitial);
        };
        let mut ket = psi.clone();
        for (t, p) in self.propagators.iter().zip(&history.events) {
            ket = t.mul_vec(&ket);
            ket = p.matrix().mul_vec(&ket);
        }
        Ok(ket)
    }

    /// `K = P_f T ⋯ P_1 T F0` with `F0 = [Ψ0]` or `√ρ`.
    pub fn chain_operator(&self, history: &History, tol: &Tolerances) -> Result<ComplexMatrix, Error> {
        let seed = self.initial.chain_seed(tol)?;
        Ok(self.apply_history(history, seed))
    }

    fn apply_history(&self, history: &History, mut k: ComplexMatrix) -> ComplexMatrix {
        for (t, p) in self.propagators.iter().zip(&history.events) {
            k = t * &k;
            k = p.matrix() * &k;
        }
        k
    }

    /// Gram matrix of the family: `⟨α_i|α_j⟩`, or `Tr(K_i† K_j)` for a
    /// density-operator initial condition.
    pub fn gram(&self, tol: &Tolerances) -> Result<ComplexMatrix, Error> {
        let n = self.histories.len();
        let mut g = ComplexMatrix::zeros(n, n);
        match &self.initial {
            InitialCondition::Pure(_) => {
                let kets = self.histories.iter().map(|h| self.chain_ket(h)).collect::<Result<Vec<_>, _>>()?;
                for i in 0..n {
                    g[(i, i)] = Complex64::new(kets[i].norm_sqr(), 0.0);
                    for j in (i + 1)..n {
                        let z = kets[i].inner(&kets[j]);
                        g[(i, j)] = z;
                        g[(j, i)] = z.conj();
                    }
                }
            }
            InitialCondition::Density(_) => {
                let seed = self.initial.chain_seed(tol)?;
                let ops: Vec<ComplexMatrix> =
                    self.histories.iter().map(|h| self.apply_history(h, seed.clone())).collect();
                for i in 0..n {
                    g[(i, i)] = Complex64::new(ops[i].frobenius_norm().powi(2), 0.0);
                    for j in (i + 1)..n {
                        let z = hilbert_schmidt(&ops[i], &ops[j]);
                        g[(i, j)] = z;
                        g[(j, i)] = z.conj();
                    }
                }
            }
        }
        Ok(g)
    }

    /// Builds the Gram matrix and tests the off-diagonal entries (their
    /// modulus in strong mode, their real part in weak mode) against
    /// `tol.consistency`.
    pub fn consistency_check(&self, mode: ConsistencyMode, tol: &Tolerances) -> Result<ConsistencyReport, Error> {
        let gram = self.gram(tol)?;
        let n = gram.rows();
        let mut worst = 0.0;
        let mut worst_pair = None;
        for i in 0..n {
            for j in (i + 1)..n {
                let z = gram[(i, j)];
                let v = match mode {
                    ConsistencyMode::Strong => z.norm(),
                    ConsistencyMode::Weak => z.re.abs(),
                };
                if v > worst {
                    worst = v;
                    worst_pair = Some((i, j));
                }
            }
        }
        let consistent = worst <= tol.consistency;
        let offending_pair = if consistent {
            None
        } else {
            worst_pair.map(|(i, j)| (self.histories[i].label.clone(), self.histories[j].label.clone()))
        };
        Ok(ConsistencyReport {
            labels: self.histories.iter().map(|h| h.label.clone()).collect(),
            gram,
            mode,
            consistent,
            worst_offdiag: worst,
            offending_pair,
        })
    }

    /// Extended Born probabilities `μ_α = ⟨α|α⟩`; requires strong
    /// consistency.
    pub fn assign_probabilities(&self, tol: &Tolerances) -> Result<ProbabilityTable, Error> {
        let report = self.consistency_check(ConsistencyMode::Strong, tol)?;
        if !report.consistent {
            return Err(Error::InconsistentFamily(Box::new(report)));
        }
        let mu: Vec<f64> = (0..self.histories.len())
            .map(|i| {
                let m = report.gram[(i, i)].re;
                if m <= tol.zero_probability {
                    0.0
                } else {
                    m
                }
            })
            .collect();
        let normalization: f64 = mu.iter().sum();
        if !(normalization <= 1.0 + tol.probability) {
            return Err(Error::NotNormalized { total: normalization });
        }
        Ok(ProbabilityTable {
            labels: report.labels,
            event_labels: self.histories.iter().map(|h| h.event_labels.clone()).collect(),
            time_labels: self.structure.as_ref().map(|s| s.iter().map(|p| p.labels().to_vec()).collect()),
            mu,
            normalization,
        })
    }

    /// The same family with event time `m` (1-based) deleted; adjacent
    /// propagators are multiplied together. Needs per-time decompositions.
    pub fn without_time(&self, m: usize, tol: &Tolerances) -> Result<HistoryFamily, Error> {
        let structure = self.structure.as_ref().ok_or(Error::NotPdiStructured)?;
        let f = self.steps();
        if m == 0 || m > f {
            return Err(Error::BadTimeIndex { index: m, max: f });
        }
        if f == 1 {
            return Err(Error::BadTimeGrid("cannot delete the only event time"));
        }
        let mut times = self.times.clone();
        times.remove(m);
        let mut props = self.propagators.clone();
        if m < f {
            let merged = &props[m] * &props[m - 1];
            props[m] = merged;
        }
        props.remove(m - 1);
        let mut pdis = structure.clone();
        pdis.remove(m - 1);
        HistoryFamily::build(self.initial.clone(), times, Dynamics::Propagators(props), Events::PerTime(pdis), tol)
    }
}

fn hilbert_schmidt(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    a.data().iter().zip(b.data()).fold(Complex64::zero(), |acc, (x, y)| acc + x.conj() * y)
}

fn cartesian_histories(pdis: &[Decomposition]) -> Vec<History> {
    let mut out: Vec<Vec<(String, Projector)>> = alloc::vec![Vec::new()];
    for pdi in pdis {
        let mut next = Vec::with_capacity(out.len() * pdi.len());
        for prefix in &out {
            for (label, p) in pdi.iter() {
                let mut h = prefix.clone();
                h.push((label.to_string(), p.clone()));
                next.push(h);
            }
        }
        out = next;
    }
    out.into_iter().map(History::from_events).collect()
}

/// `‖Σ_α P_1^α ⊗ ⋯ ⊗ P_f^α - I‖_F` on the space of times `t1 … tf`.
///
/// The full sum rule `Σ_α [Ψ0] ⊙ Y_α + (I - [Ψ0]) ⊙ I ⊙ ⋯ = Ĭ` factors as
/// `[Ψ0] ⊗ (Σ_α Y_α - I) = 0`, so this residual is zero exactly when it
/// holds, and equals the full residual scaled by `‖[Ψ0]‖_F = 1`.
fn sum_rule_residual(histories: &[History], d: usize, f: usize) -> f64 {
    let size = d.pow(f as u32);
    let mut sum = ComplexMatrix::zeros(size, size);
    for h in histories {
        let mut k = h.events[0].matrix().clone();
        for p in &h.events[1..] {
            k = tensor_product(&k, p.matrix());
        }
        sum = &sum + &k;
    }
    sum.distance(&ComplexMatrix::identity(size))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsistencyMode {
    /// `⟨α|α'⟩ = 0` for `α ≠ α'`.
    Strong,
    /// Only `Re⟨α|α'⟩ = 0` is required.
    Weak,
}

impl fmt::Display for ConsistencyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConsistencyMode::Strong => "strong",
            ConsistencyMode::Weak => "weak",
        })
    }
}

/// Outcome of a consistency check. Inconsistency is a result, not an
/// error.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub labels: Vec<String>,
    pub gram: ComplexMatrix,
    pub mode: ConsistencyMode,
    pub consistent: bool,
    pub worst_offdiag: f64,
    /// The worst pair, set only when the family is inconsistent.
    pub offending_pair: Option<(String, String)>,
}

impl ConsistencyReport {
    pub fn entry(&self, a: &str, b: &str) -> Option<Complex64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.gram[(i, j)])
    }
}

/// Probabilities of the histories of a consistent family.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    labels: Vec<String>,
    event_labels: Vec<Vec<String>>,
    time_labels: Option<Vec<Vec<String>>>,
    mu: Vec<f64>,
    normalization: f64,
}

impl ProbabilityTable {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// `Σ_α μ_α`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn steps(&self) -> usize {
        self.event_labels.first().map_or(0, Vec::len)
    }

    /// `(label, μ)` pairs in family order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.labels.iter().map(String::as_str).zip(self.mu.iter().copied())
    }

    pub fn probability(&self, label: &str) -> Result<f64, Error> {
        self.index(label).map(|i| self.mu[i])
    }

    fn index(&self, label: &str) -> Result<usize, Error> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn indices<S: AsRef<str>>(&self, event: &[S]) -> Result<BTreeSet<usize>, Error> {
        event.iter().map(|l| self.index(l.as_ref())).collect()
    }

    /// Probability of a set of histories (duplicates count once).
    pub fn event_probability<S: AsRef<str>>(&self, event: &[S]) -> Result<f64, Error> {
        Ok(self.indices(event)?.into_iter().map(|i| self.mu[i]).sum())
    }

    /// Labels of the histories whose event at time `m` (1-based) is `event`.
    pub fn histories_with_event(&self, m: usize, event: &str) -> Result<Vec<String>, Error> {
        let f = self.steps();
        if m == 0 || m > f {
            return Err(Error::BadTimeIndex { index: m, max: f });
        }
        let out: Vec<String> = self
            .labels
            .iter()
            .zip(&self.event_labels)
            .filter(|(_, ev)| ev[m - 1] == event)
            .map(|(l, _)| l.clone())
            .collect();
        if let Some(times) = &self.time_labels {
            if !times[m - 1].iter().any(|l| l == event) {
                return Err(Error::UnknownLabel(event.to_string()));
            }
        } else if out.is_empty() {
            return Err(Error::UnknownLabel(event.to_string()));
        }
        Ok(out)
    }

    /// Probability of each decomposition member at time `m` (1-based),
    /// summed over everything else.
    pub fn marginal_distribution(&self, m: usize) -> Result<Vec<(String, f64)>, Error> {
        let times = self.time_labels.as_ref().ok_or(Error::NotPdiStructured)?;
        let f = times.len();
        if m == 0 || m > f {
            return Err(Error::BadTimeIndex { index: m, max: f });
        }
        Ok(times[m - 1]
            .iter()
            .map(|label| {
                let p = self
                    .event_labels
                    .iter()
                    .zip(&self.mu)
                    .filter(|(ev, _)| &ev[m - 1] == label)
                    .map(|(_, mu)| mu)
                    .sum();
                (label.clone(), p)
            })
            .collect())
    }

    /// `Pr(target | given) = Pr(target ∩ given) / Pr(given)`.
    pub fn conditional_probability<S: AsRef<str>, T: AsRef<str>>(
        &self,
        given: &[S],
        target: &[T],
        tol: &Tolerances,
    ) -> Result<f64, Error> {
        let g = self.indices(given)?;
        let t = self.indices(target)?;
        let pg: f64 = g.iter().map(|&i| self.mu[i]).sum();
        if !(pg > tol.zero_probability) {
            return Err(Error::ZeroConditioningEvent { probability: pg });
        }
        let joint: f64 = g.intersection(&t).map(|&i| self.mu[i]).sum();
        Ok(joint / pg)
    }
}
