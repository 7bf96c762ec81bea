//! Entropies, mutual information, the Holevo quantity and single-use
//! channel experiments. All quantities are in bits.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::Error;
use crate::histories::validate_density;
use crate::numeric::{c64, hermitian_eigendecomposition, ComplexMatrix, ComplexVector};
use crate::properties::{validate_pdi, Decomposition, Projector};

/// A probability distribution over a finite set.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probabilities: Vec<f64>,
}

impl Distribution {
    pub fn new(probabilities: Vec<f64>, tol: &Tolerances) -> Result<Self, Error> {
        if probabilities.is_empty() {
            return Err(Error::Empty("distribution"));
        }
        if let Some(&p) = probabilities.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::NegativeProbability(p));
        }
        let total: f64 = probabilities.iter().sum();
        if !((total - 1.0).abs() <= tol.probability) {
            return Err(Error::NotNormalized { total });
        }
        Ok(Self { probabilities })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs at least one outcome");
        Self { probabilities: alloc::vec![1.0 / n as f64; n] }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

fn entropy_of(ps: impl IntoIterator<Item = f64>) -> f64 {
    ps.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// `H(p) = -Σ p log2 p`, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &Distribution) -> f64 {
    entropy_of(p.probabilities.iter().copied())
}

/// `H(A) + H(B) - H(A,B)` for a joint distribution `joint[a][b]`.
pub fn mutual_information(joint: &[Vec<f64>], tol: &Tolerances) -> Result<f64, Error> {
    let cols = joint.first().map_or(0, Vec::len);
    if joint.is_empty() || cols == 0 {
        return Err(Error::Empty("joint distribution"));
    }
    if let Some(r) = joint.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
    }
    if let Some(&p) = joint.iter().flatten().find(|p| !(**p >= 0.0)) {
        return Err(Error::NegativeProbability(p));
    }
    let total: f64 = joint.iter().flatten().sum();
    if !((total - 1.0).abs() <= tol.probability) {
        return Err(Error::NotNormalized { total });
    }
    let pa = joint.iter().map(|r| r.iter().sum::<f64>());
    let pb = (0..cols).map(|b| joint.iter().map(|r| r[b]).sum::<f64>());
    let hab = entropy_of(joint.iter().flatten().copied());
    Ok((entropy_of(pa) + entropy_of(pb) - hab).max(0.0))
}

/// `S(ρ) = -Σ λ log2 λ` over the eigenvalues of `ρ`, each clamped to
/// `[0, 1]`.
pub fn von_neumann_entropy(rho: &ComplexMatrix, tol: &Tolerances) -> Result<f64, Error> {
    validate_density(rho, tol)?;
    let es = hermitian_eigendecomposition(rho, tol)?;
    Ok(entropy_of(es.eigenvalues.iter().map(|l| l.clamp(0.0, 1.0))))
}

/// Prepared states with their prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    priors: Distribution,
    states: Vec<ComplexMatrix>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, ComplexMatrix)>, tol: &Tolerances) -> Result<Self, Error> {
        let (priors, states): (Vec<f64>, Vec<ComplexMatrix>) = members.into_iter().unzip();
        let priors = Distribution::new(priors, tol)?;
        let d = states[0].rows();
        for rho in &states {
            if rho.rows() != d {
                return Err(Error::DimensionMismatch { expected: d, found: rho.rows() });
            }
            validate_density(rho, tol)?;
        }
        Ok(Self { priors, states })
    }

    /// An ensemble of pure states; kets are normalised first.
    pub fn from_pure(members: Vec<(f64, ComplexVector)>, tol: &Tolerances) -> Result<Self, Error> {
        let members =
            members.into_iter().map(|(p, k)| k.normalized().map(|u| (p, u.dyad()))).collect::<Result<Vec<_>, _>>()?;
        Self::new(members, tol)
    }

    pub fn dim(&self) -> usize {
        self.states[0].rows()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn priors(&self) -> &Distribution {
        &self.priors
    }

    pub fn states(&self) -> &[ComplexMatrix] {
        &self.states
    }

    /// `Σ_i p_i ρ_i`.
    pub fn average(&self) -> ComplexMatrix {
        let d = self.dim();
        self.priors
            .probabilities()
            .iter()
            .zip(&self.states)
            .fold(ComplexMatrix::zeros(d, d), |acc, (p, rho)| &acc + &rho.scale_real(*p))
    }
}

/// `χ = S(Σ p_i ρ_i) - Σ p_i S(ρ_i)`.
pub fn holevo_chi(e: &Ensemble, tol: &Tolerances) -> Result<f64, Error> {
    let avg = von_neumann_entropy(&e.average(), tol)?;
    let mut each = 0.0;
    for (p, rho) in e.priors.probabilities().iter().zip(&e.states) {
        each += p * von_neumann_entropy(rho, tol)?;
    }
    Ok((avg - each).max(0.0))
}

/// Result of sending one prepared qudit through a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    /// `joint[a][b] = p_a Tr(ρ_a Q_b)`.
    pub joint: Vec<Vec<f64>>,
    pub mutual_information_bits: f64,
    /// `log2 d`.
    pub bound_bits: f64,
    pub holevo_bits: f64,
    /// `I(A:B) = log2 d` within 1e-6.
    pub achieves_bound: bool,
}

/// Slack on the chain `I ≤ χ ≤ log2 d`.
pub const BOUND_SLACK: f64 = 1e-9;

/// Born-rule joint distribution of preparation and outcome, with the
/// mutual information, the Holevo quantity and the `log2 d` bound. Fails
/// with [`Error::BoundViolation`] if the chain `I ≤ χ ≤ log2 d` is broken
/// by more than [`BOUND_SLACK`].
pub fn channel_experiment(
    d: usize,
    ensemble: &Ensemble,
    measurement: &Decomposition,
    tol: &Tolerances,
) -> Result<ChannelReport, Error> {
    if ensemble.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: ensemble.dim() });
    }
    if measurement.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: measurement.dim() });
    }
    let joint: Vec<Vec<f64>> = ensemble
        .priors
        .probabilities()
        .iter()
        .zip(&ensemble.states)
        .map(|(p, rho)| {
            measurement.projectors().iter().map(|q| (p * rho.trace_of_product(q.matrix()).re).max(0.0)).collect()
        })
        .collect();
    let mutual = mutual_information(&joint, tol)?;
    let holevo = holevo_chi(ensemble, tol)?;
    let bound = (d as f64).log2();
    if mutual > holevo + BOUND_SLACK || holevo > bound + BOUND_SLACK {
        return Err(Error::BoundViolation { mutual, holevo, bound });
    }
    Ok(ChannelReport {
        joint,
        mutual_information_bits: mutual,
        bound_bits: bound,
        holevo_bits: holevo,
        achieves_bound: (mutual - bound).abs() <= 1e-6,
    })
}

/// Generalised Bell kets `|Φ_ab⟩ = (I ⊗ X^a Z^b) Σ_k |k,k⟩ / √d` with
/// `X|k⟩ = |k+1 mod d⟩` and `Z|k⟩ = ω^k |k⟩`, `ω = e^{2πi/d}`; ordered by
/// `a` then `b`.
pub fn bell_basis(d: usize) -> Vec<ComplexVector> {
    let norm = 1.0 / (d as f64).sqrt();
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut v = ComplexVector::zeros(d * d);
            for k in 0..d {
                let phase = Complex64::from_polar(norm, 2.0 * core::f64::consts::PI * (b * k) as f64 / d as f64);
                v[k * d + (k + a) % d] = phase;
            }
            out.push(v);
        }
    }
    out
}

/// Labels `Φ(a,b)` matching [`bell_basis`].
pub fn bell_labels(d: usize) -> Vec<String> {
    (0..d).flat_map(|a| (0..d).map(move |b| format!("Φ({a},{b})"))).collect()
}

/// The generalised Bell decomposition of the two-qudit identity.
pub fn bell_pdi(d: usize, tol: &Tolerances) -> Result<Decomposition, Error> {
    let projectors: Vec<Projector> = bell_basis(d).iter().map(Projector::from_ket).collect::<Result<_, _>>()?;
    validate_pdi(projectors, &bell_labels(d), tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseCodingReport {
    pub d: usize,
    /// `d²` distinguishable messages.
    pub messages: usize,
    /// `log2 d² = 2 log2 d`.
    pub bits: f64,
    pub qudits: usize,
    pub per_qudit_bound_bits: f64,
    /// `bits ≤ qudits · log2 d`.
    pub per_qudit_bound_respected: bool,
    /// Smallest entropy of entanglement over the basis; `log2 d` when every
    /// member is fully entangled.
    pub min_entanglement_bits: f64,
    pub channel: ChannelReport,
}

/// Accounting for dense coding with one qudit and a shared entangled
/// partner: `d²` messages carry `2 log2 d` bits, but two qudits are
/// involved, so the `log2 d` per qudit limit holds.
pub fn dense_coding_demo(d: usize, tol: &Tolerances) -> Result<DenseCodingReport, Error> {
    if !(2..=8).contains(&d) {
        return Err(Error::InvalidArgument("dense coding demo needs 2 <= d <= 8"));
    }
    let pdi = bell_pdi(d, tol)?;
    let n = d * d;
    let states: Vec<(f64, ComplexMatrix)> =
        pdi.projectors().iter().map(|p| (1.0 / n as f64, p.matrix().clone())).collect();
    let ensemble = Ensemble::new(states, tol)?;
    let channel = channel_experiment(n, &ensemble, &pdi, tol)?;

    let mut min_ent = f64::INFINITY;
    for p in pdi.projectors() {
        let reduced = p.matrix().partial_trace_second(d, d)?;
        min_ent = min_ent.min(von_neumann_entropy(&reduced, tol)?);
    }

    let per = (d as f64).log2();
    let bits = (n as f64).log2();
    Ok(DenseCodingReport {
        d,
        messages: n,
        bits,
        qudits: 2,
        per_qudit_bound_bits: per,
        per_qudit_bound_respected: channel.mutual_information_bits <= 2.0 * per + BOUND_SLACK,
        min_entanglement_bits: min_ent,
        channel,
    })
}

/// Binary entropy `h(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of([p, 1.0 - p])
}

/// Maximally mixed state `I/d`.
pub fn maximally_mixed(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d).scale(c64(1.0 / d as f64, 0.0))
}
