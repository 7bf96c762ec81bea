//! Scenario files: a JSON document declaring kets, operators,
//! decompositions, families, measurement models and ensembles, followed by
//! an ordered list of commands.
//!
//! Complex numbers are `[re, im]` pairs. Kets are lists of complex
//! entries or `{"kron": [names]}`; operators are lists of rows,
//! `{"kron": [names]}` or `{"projector": ket}`. Names are shared between
//! kets and operators so that a projector reference can name either.
//!
//! Decompositions, families and ensembles live in the scenario's
//! `dimension`. Measurement models carry their own particle and apparatus
//! spaces.

use std::collections::BTreeMap;
use std::path::Path;

use histories_core::{c64, ComplexMatrix, ComplexVector, C64};
use serde::Deserialize;

use crate::error::ScenarioError;

const NORM_WARNING_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema: u32,
    dimension: usize,
    #[serde(default)]
    kets: BTreeMap<String, RawKet>,
    #[serde(default)]
    operators: BTreeMap<String, RawOperator>,
    #[serde(default)]
    pdis: BTreeMap<String, RawPdi>,
    #[serde(default)]
    families: BTreeMap<String, RawFamily>,
    #[serde(default)]
    models: BTreeMap<String, RawModel>,
    #[serde(default)]
    ensembles: BTreeMap<String, RawEnsemble>,
    #[serde(default)]
    commands: Vec<Command>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawKet {
    Entries(Vec<[f64; 2]>),
    Kron(KronSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KronSpec {
    kron: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectorSpec {
    projector: String,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawOperator {
    Rows(Vec<Vec<[f64; 2]>>),
    Kron(KronSpec),
    Projector(ProjectorSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMember {
    label: String,
    ket: Option<String>,
    operator: Option<String>,
    #[serde(default)]
    rest: bool,
    #[serde(default)]
    identity: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MembersSpec {
    members: Vec<RawMember>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RefinementSpec {
    refinement: [String; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableSpec {
    observable: String,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawPdi {
    Members(MembersSpec),
    Refinement(RefinementSpec),
    Observable(ObservableSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KetInitial {
    ket: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityInitial {
    density: String,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawInitial {
    Ket(KetInitial),
    Density(DensityInitial),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PropagatorsSpec {
    propagators: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianSpec {
    hamiltonian: String,
    hbar: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawDynamics {
    Named(String),
    Propagators(PropagatorsSpec),
    Hamiltonian(HamiltonianSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHistory {
    label: Option<String>,
    events: Vec<RawMember>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HistoriesSpec {
    histories: Vec<RawHistory>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawEvents {
    PerTime(Vec<String>),
    Explicit(HistoriesSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    initial: RawInitial,
    times: Vec<f64>,
    dynamics: Option<RawDynamics>,
    events: RawEvents,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    s_basis: Vec<String>,
    ready: String,
    pointers: Vec<String>,
    post_states: Option<Vec<String>>,
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsembleMember {
    prior: f64,
    ket: Option<String>,
    density: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    members: Vec<RawEnsembleMember>,
}

/// `Pr` argument of the `conditional` command: event `event` at time
/// `time` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRef {
    pub time: usize,
    pub event: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strong,
    Weak,
}

/// One analysis request.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    ValidatePdi { pdi: String },
    Conjunction { left: String, right: String },
    Disjunction { left: String, right: String },
    Refinement { left: String, right: String },
    Compatibility { left: String, right: String },
    Consistency { family: String, mode: Option<Mode> },
    Probabilities { family: String },
    Marginal { family: String, time: usize },
    Conditional { family: String, given: EventRef, target: EventRef },
    MeasureModel { model: String },
    Retrodict { model: String, pointer: usize },
    Channel { ensemble: String, measurement: String },
    DenseCoding { d: usize },
}

impl Command {
    pub fn kind(&self) -> &'static str {
        match self {
            Command::ValidatePdi { .. } => "validate-pdi",
            Command::Conjunction { .. } => "conjunction",
            Command::Disjunction { .. } => "disjunction",
            Command::Refinement { .. } => "refinement",
            Command::Compatibility { .. } => "compatibility",
            Command::Consistency { .. } => "consistency",
            Command::Probabilities { .. } => "probabilities",
            Command::Marginal { .. } => "marginal",
            Command::Conditional { .. } => "conditional",
            Command::MeasureModel { .. } => "measure-model",
            Command::Retrodict { .. } => "retrodict",
            Command::Channel { .. } => "channel",
            Command::DenseCoding { .. } => "dense-coding",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Source {
    Ket(String),
    Operator(String),
    Rest,
    Identity,
}

#[derive(Debug, Clone)]
pub(crate) struct Member {
    pub label: String,
    pub source: Source,
}

#[derive(Debug, Clone)]
pub(crate) enum PdiSpec {
    Members(Vec<Member>),
    Refinement(String, String),
    Observable(String),
}

#[derive(Debug, Clone)]
pub(crate) enum InitialSpec {
    Ket(String),
    Density(String),
}

#[derive(Debug, Clone)]
pub(crate) enum DynamicsSpec {
    Trivial,
    Propagators(Vec<String>),
    Hamiltonian { operator: String, hbar: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct HistorySpec {
    pub label: Option<String>,
    pub events: Vec<Member>,
}

#[derive(Debug, Clone)]
pub(crate) enum EventsSpec {
    PerTime(Vec<String>),
    Explicit(Vec<HistorySpec>),
}

#[derive(Debug, Clone)]
pub(crate) struct FamilySpec {
    pub initial: InitialSpec,
    pub times: Vec<f64>,
    pub dynamics: DynamicsSpec,
    pub events: EventsSpec,
}

#[derive(Debug, Clone)]
pub(crate) struct ModelSpec {
    pub s_basis: Vec<String>,
    pub ready: String,
    pub pointers: Vec<String>,
    pub post_states: Option<Vec<String>>,
    pub amplitudes: Vec<C64>,
}

#[derive(Debug, Clone)]
pub(crate) enum EnsembleState {
    Ket(String),
    Density(String),
}

#[derive(Debug, Clone)]
pub(crate) struct EnsembleSpec {
    pub members: Vec<(f64, EnsembleState)>,
}

/// A parsed scenario whose references all resolve and whose dimensions
/// agree.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub(crate) dimension: usize,
    pub(crate) kets: BTreeMap<String, ComplexVector>,
    pub(crate) operators: BTreeMap<String, ComplexMatrix>,
    pub(crate) pdis: BTreeMap<String, PdiSpec>,
    pub(crate) families: BTreeMap<String, FamilySpec>,
    pub(crate) models: BTreeMap<String, ModelSpec>,
    pub(crate) ensembles: BTreeMap<String, EnsembleSpec>,
    pub(crate) commands: Vec<Command>,
    pub(crate) warnings: Vec<String>,
}

impl Scenario {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    /// Notes produced while loading, such as renormalised kets.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn ket(&self, name: &str) -> Option<&ComplexVector> {
        self.kets.get(name)
    }

    pub fn operator(&self, name: &str) -> Option<&ComplexMatrix> {
        self.operators.get(name)
    }
}

pub fn parse_scenario_file(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Resolver::new(raw)?.finish()
}

fn invalid(entity: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { entity: entity.into(), message: message.into() }
}

fn unknown(name: &str, context: impl Into<String>) -> ScenarioError {
    ScenarioError::UnknownReference { name: name.to_string(), context: context.into() }
}

fn check_dim(entity: impl Into<String>, expected: usize, found: usize) -> Result<(), ScenarioError> {
    if expected == found {
        Ok(())
    } else {
        Err(ScenarioError::DimensionMismatch { entity: entity.into(), expected, found })
    }
}

fn complex_list(entries: &[[f64; 2]], entity: &str) -> Result<Vec<C64>, ScenarioError> {
    if entries.iter().flatten().any(|x| !x.is_finite()) {
        return Err(invalid(entity, "entries must be finite"));
    }
    Ok(entries.iter().map(|&[re, im]| c64(re, im)).collect())
}

/// Normalises `v`, recording a warning when its norm is visibly off.
fn normalize(v: Vec<C64>, entity: &str, warnings: &mut Vec<String>) -> Result<Vec<C64>, ScenarioError> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm.is_nan() || norm <= 0.0 {
        return Err(invalid(entity, "zero vector"));
    }
    if (norm - 1.0).abs() > NORM_WARNING_THRESHOLD {
        warnings.push(format!("{entity} had norm {norm:.6}; normalized"));
    }
    Ok(v.into_iter().map(|z| z / norm).collect())
}

struct Resolver {
    raw: RawScenario,
    kets: BTreeMap<String, ComplexVector>,
    operators: BTreeMap<String, ComplexMatrix>,
    warnings: Vec<String>,
}

impl Resolver {
    fn new(raw: RawScenario) -> Result<Self, ScenarioError> {
        if raw.schema != 1 {
            return Err(invalid("schema", format!("unsupported schema version {}", raw.schema)));
        }
        if raw.dimension == 0 {
            return Err(invalid("dimension", "must be positive"));
        }
        if let Some(name) = raw.kets.keys().find(|k| raw.operators.contains_key(*k)) {
            return Err(invalid(format!("name `{name}`"), "declared both as a ket and as an operator"));
        }
        Ok(Self { raw, kets: BTreeMap::new(), operators: BTreeMap::new(), warnings: Vec::new() })
    }

    fn finish(mut self) -> Result<Scenario, ScenarioError> {
        let ket_names: Vec<String> = self.raw.kets.keys().cloned().collect();
        for name in &ket_names {
            self.ket(name, &mut Vec::new())?;
        }
        let op_names: Vec<String> = self.raw.operators.keys().cloned().collect();
        for name in &op_names {
            self.operator(name, &mut Vec::new())?;
        }

        let d = self.raw.dimension;
        let mut pdis = BTreeMap::new();
        for (name, raw) in &self.raw.pdis {
            pdis.insert(name.clone(), self.pdi(name, raw)?);
        }
        for name in pdis.keys() {
            self.refinement_acyclic(name, &mut Vec::new())?;
        }
        let mut families = BTreeMap::new();
        for (name, raw) in &self.raw.families {
            families.insert(name.clone(), self.family(name, raw)?);
        }
        let mut models = BTreeMap::new();
        let mut warnings = Vec::new();
        for (name, raw) in &self.raw.models {
            models.insert(name.clone(), self.model(name, raw, &mut warnings)?);
        }
        self.warnings.extend(warnings);
        let mut ensembles = BTreeMap::new();
        for (name, raw) in &self.raw.ensembles {
            ensembles.insert(name.clone(), self.ensemble(name, raw)?);
        }

        let commands = std::mem::take(&mut self.raw.commands);
        for (i, c) in commands.iter().enumerate() {
            self.command(i + 1, c, &families, &models)?;
        }
        Ok(Scenario {
            dimension: d,
            kets: self.kets,
            operators: self.operators,
            pdis,
            families,
            models,
            ensembles,
            commands,
            warnings: self.warnings,
        })
    }

    fn ket(&mut self, name: &str, visiting: &mut Vec<String>) -> Result<ComplexVector, ScenarioError> {
        if let Some(k) = self.kets.get(name) {
            return Ok(k.clone());
        }
        if visiting.iter().any(|v| v == name) {
            return Err(invalid(format!("ket `{name}`"), "refers to itself through kron"));
        }
        let entity = format!("ket `{name}`");
        let ket = match self.raw.kets.get(name) {
            None => return Err(unknown(name, "kets")),
            Some(RawKet::Entries(entries)) => {
                if entries.is_empty() {
                    return Err(invalid(entity, "no entries"));
                }
                let v = complex_list(entries, &entity)?;
                let v = normalize(v, &entity, &mut self.warnings)?;
                ComplexVector::new(v).map_err(|e| invalid(entity.clone(), e.to_string()))?
            }
            Some(RawKet::Kron(spec)) => {
                if spec.kron.is_empty() {
                    return Err(invalid(entity, "empty kron"));
                }
                let parts = spec.kron.clone();
                visiting.push(name.to_string());
                let mut acc: Option<ComplexVector> = None;
                for p in &parts {
                    if !self.raw.kets.contains_key(p) {
                        return Err(unknown(p, entity));
                    }
                    let k = self.ket(p, visiting)?;
                    acc = Some(match acc {
                        None => k,
                        Some(a) => a.kron(&k),
                    });
                }
                visiting.pop();
                acc.expect("nonempty kron")
            }
        };
        self.kets.insert(name.to_string(), ket.clone());
        Ok(ket)
    }

    fn operator(&mut self, name: &str, visiting: &mut Vec<String>) -> Result<ComplexMatrix, ScenarioError> {
        if let Some(m) = self.operators.get(name) {
            return Ok(m.clone());
        }
        if visiting.iter().any(|v| v == name) {
            return Err(invalid(format!("operator `{name}`"), "refers to itself through kron"));
        }
        let entity = format!("operator `{name}`");
        let op = match self.raw.operators.get(name) {
            None => return Err(unknown(name, "operators")),
            Some(RawOperator::Rows(rows)) => {
                let n = rows.len();
                if n == 0 {
                    return Err(invalid(entity, "no rows"));
                }
                let mut data = Vec::with_capacity(n * n);
                for row in rows {
                    check_dim(format!("{entity} row"), n, row.len())?;
                    data.extend(complex_list(row, &entity)?);
                }
                ComplexMatrix::new(n, n, data).map_err(|e| invalid(entity.clone(), e.to_string()))?
            }
            Some(RawOperator::Kron(spec)) => {
                if spec.kron.is_empty() {
                    return Err(invalid(entity, "empty kron"));
                }
                let parts = spec.kron.clone();
                visiting.push(name.to_string());
                let mut acc: Option<ComplexMatrix> = None;
                for p in &parts {
                    if !self.raw.operators.contains_key(p) {
                        return Err(unknown(p, entity));
                    }
                    let m = self.operator(p, visiting)?;
                    acc = Some(match acc {
                        None => m,
                        Some(a) => histories_core::tensor_product(&a, &m),
                    });
                }
                visiting.pop();
                acc.expect("nonempty kron")
            }
            Some(RawOperator::Projector(spec)) => {
                let k = spec.projector.clone();
                if !self.raw.kets.contains_key(&k) {
                    return Err(unknown(&k, entity));
                }
                self.ket(&k, &mut Vec::new())?.dyad()
            }
        };
        self.operators.insert(name.to_string(), op.clone());
        Ok(op)
    }

    /// Dimension of a ket or operator name usable as a projector.
    fn projector_dim(&self, name: &str, context: &str) -> Result<usize, ScenarioError> {
        if let Some(k) = self.kets.get(name) {
            Ok(k.dim())
        } else if let Some(m) = self.operators.get(name) {
            Ok(m.rows())
        } else {
            Err(unknown(name, context))
        }
    }

    fn member(&self, raw: &RawMember, context: &str, allow_rest: bool) -> Result<Member, ScenarioError> {
        let entity = format!("{context} member `{}`", raw.label);
        let given = [raw.ket.is_some(), raw.operator.is_some(), raw.rest, raw.identity].iter().filter(|b| **b).count();
        if given != 1 {
            return Err(invalid(entity, "give exactly one of ket, operator, rest, identity"));
        }
        let d = self.raw.dimension;
        let source = if let Some(k) = &raw.ket {
            if !self.kets.contains_key(k) {
                return Err(unknown(k, entity));
            }
            check_dim(entity, d, self.kets[k].dim())?;
            Source::Ket(k.clone())
        } else if let Some(o) = &raw.operator {
            if !self.operators.contains_key(o) {
                return Err(unknown(o, entity));
            }
            check_dim(entity, d, self.operators[o].rows())?;
            Source::Operator(o.clone())
        } else if raw.rest {
            if !allow_rest {
                return Err(invalid(entity, "rest is only allowed in decompositions"));
            }
            Source::Rest
        } else {
            Source::Identity
        };
        Ok(Member { label: raw.label.clone(), source })
    }

    fn pdi(&self, name: &str, raw: &RawPdi) -> Result<PdiSpec, ScenarioError> {
        let entity = format!("pdi `{name}`");
        let d = self.raw.dimension;
        Ok(match raw {
            RawPdi::Members(spec) => {
                if spec.members.is_empty() {
                    return Err(invalid(entity, "no members"));
                }
                let members =
                    spec.members.iter().map(|m| self.member(m, &entity, true)).collect::<Result<Vec<_>, _>>()?;
                if members.iter().filter(|m| matches!(m.source, Source::Rest)).count() > 1 {
                    return Err(invalid(entity, "at most one rest member"));
                }
                PdiSpec::Members(members)
            }
            RawPdi::Refinement(spec) => {
                for p in &spec.refinement {
                    if !self.raw.pdis.contains_key(p) {
                        return Err(unknown(p, entity));
                    }
                }
                PdiSpec::Refinement(spec.refinement[0].clone(), spec.refinement[1].clone())
            }
            RawPdi::Observable(spec) => {
                let o = &spec.observable;
                let m = self.operators.get(o).ok_or_else(|| unknown(o, entity.clone()))?;
                check_dim(entity, d, m.rows())?;
                PdiSpec::Observable(o.clone())
            }
        })
    }

    fn refinement_acyclic(&self, name: &str, visiting: &mut Vec<String>) -> Result<(), ScenarioError> {
        if visiting.iter().any(|v| v == name) {
            return Err(invalid(format!("pdi `{name}`"), "refers to itself through refinement"));
        }
        if let Some(RawPdi::Refinement(spec)) = self.raw.pdis.get(name) {
            visiting.push(name.to_string());
            for p in &spec.refinement {
                self.refinement_acyclic(p, visiting)?;
            }
            visiting.pop();
        }
        Ok(())
    }

    fn family(&self, name: &str, raw: &RawFamily) -> Result<FamilySpec, ScenarioError> {
        let entity = format!("family `{name}`");
        let d = self.raw.dimension;
        let initial = match &raw.initial {
            RawInitial::Ket(k) => {
                let v = self.kets.get(&k.ket).ok_or_else(|| unknown(&k.ket, entity.clone()))?;
                check_dim(format!("{entity} initial"), d, v.dim())?;
                InitialSpec::Ket(k.ket.clone())
            }
            RawInitial::Density(r) => {
                let m = self.operators.get(&r.density).ok_or_else(|| unknown(&r.density, entity.clone()))?;
                check_dim(format!("{entity} initial"), d, m.rows())?;
                InitialSpec::Density(r.density.clone())
            }
        };
        if raw.times.len() < 2 {
            return Err(invalid(entity, "times need t0 and at least one later time"));
        }
        let f = raw.times.len() - 1;
        let dynamics = match &raw.dynamics {
            None => DynamicsSpec::Trivial,
            Some(RawDynamics::Named(s)) if s == "trivial" => DynamicsSpec::Trivial,
            Some(RawDynamics::Named(s)) => return Err(invalid(entity, format!("unknown dynamics `{s}`"))),
            Some(RawDynamics::Propagators(p)) => {
                check_dim(format!("{entity} propagators"), f, p.propagators.len())?;
                for u in &p.propagators {
                    let m = self.operators.get(u).ok_or_else(|| unknown(u, entity.clone()))?;
                    check_dim(format!("{entity} propagator `{u}`"), d, m.rows())?;
                }
                DynamicsSpec::Propagators(p.propagators.clone())
            }
            Some(RawDynamics::Hamiltonian(h)) => {
                let m = self.operators.get(&h.hamiltonian).ok_or_else(|| unknown(&h.hamiltonian, entity.clone()))?;
                check_dim(format!("{entity} hamiltonian"), d, m.rows())?;
                DynamicsSpec::Hamiltonian { operator: h.hamiltonian.clone(), hbar: h.hbar.unwrap_or(1.0) }
            }
        };
        let events = match &raw.events {
            RawEvents::PerTime(names) => {
                check_dim(format!("{entity} events"), f, names.len())?;
                for p in names {
                    if !self.raw.pdis.contains_key(p) {
                        return Err(unknown(p, entity));
                    }
                }
                EventsSpec::PerTime(names.clone())
            }
            RawEvents::Explicit(spec) => {
                let mut out = Vec::with_capacity(spec.histories.len());
                for (i, h) in spec.histories.iter().enumerate() {
                    let context = format!("{entity} history {}", i + 1);
                    check_dim(context.clone(), f, h.events.len())?;
                    let events =
                        h.events.iter().map(|m| self.member(m, &context, false)).collect::<Result<Vec<_>, _>>()?;
                    out.push(HistorySpec { label: h.label.clone(), events });
                }
                EventsSpec::Explicit(out)
            }
        };
        Ok(FamilySpec { initial, times: raw.times.clone(), dynamics, events })
    }

    fn model(&self, name: &str, raw: &RawModel, warnings: &mut Vec<String>) -> Result<ModelSpec, ScenarioError> {
        let entity = format!("model `{name}`");
        let dim_of = |k: &String| self.kets.get(k).map(ComplexVector::dim).ok_or_else(|| unknown(k, entity.clone()));
        let ds = raw.s_basis.len();
        if ds == 0 {
            return Err(invalid(entity, "empty s_basis"));
        }
        for k in &raw.s_basis {
            check_dim(format!("{entity} s_basis `{k}`"), ds, dim_of(k)?)?;
        }
        let dm = dim_of(&raw.ready)?;
        check_dim(format!("{entity} pointers"), ds, raw.pointers.len())?;
        for k in &raw.pointers {
            check_dim(format!("{entity} pointer `{k}`"), dm, dim_of(k)?)?;
        }
        if let Some(post) = &raw.post_states {
            check_dim(format!("{entity} post_states"), ds, post.len())?;
            for k in post {
                check_dim(format!("{entity} post state `{k}`"), ds, dim_of(k)?)?;
            }
        }
        check_dim(format!("{entity} amplitudes"), ds, raw.amplitudes.len())?;
        let amps = complex_list(&raw.amplitudes, &entity)?;
        let amplitudes = normalize(amps, &format!("{entity} amplitudes"), warnings)?;
        Ok(ModelSpec {
            s_basis: raw.s_basis.clone(),
            ready: raw.ready.clone(),
            pointers: raw.pointers.clone(),
            post_states: raw.post_states.clone(),
            amplitudes,
        })
    }

    fn ensemble(&self, name: &str, raw: &RawEnsemble) -> Result<EnsembleSpec, ScenarioError> {
        let entity = format!("ensemble `{name}`");
        let d = self.raw.dimension;
        if raw.members.is_empty() {
            return Err(invalid(entity, "no members"));
        }
        let mut members = Vec::with_capacity(raw.members.len());
        for m in &raw.members {
            let state = match (&m.ket, &m.density) {
                (Some(k), None) => {
                    let v = self.kets.get(k).ok_or_else(|| unknown(k, entity.clone()))?;
                    check_dim(format!("{entity} member `{k}`"), d, v.dim())?;
                    EnsembleState::Ket(k.clone())
                }
                (None, Some(r)) => {
                    let v = self.operators.get(r).ok_or_else(|| unknown(r, entity.clone()))?;
                    check_dim(format!("{entity} member `{r}`"), d, v.rows())?;
                    EnsembleState::Density(r.clone())
                }
                _ => return Err(invalid(entity, "each member needs exactly one of ket, density")),
            };
            members.push((m.prior, state));
        }
        Ok(EnsembleSpec { members })
    }

    fn command(
        &self,
        index: usize,
        c: &Command,
        families: &BTreeMap<String, FamilySpec>,
        models: &BTreeMap<String, ModelSpec>,
    ) -> Result<(), ScenarioError> {
        let context = format!("command {index} ({})", c.kind());
        let d = self.raw.dimension;
        let pdi = |p: &String| if self.raw.pdis.contains_key(p) { Ok(()) } else { Err(unknown(p, context.clone())) };
        let family = |f: &String| families.get(f).ok_or_else(|| unknown(f, context.clone()));
        let time_in_range = |fam: &FamilySpec, t: usize| {
            let steps = fam.times.len() - 1;
            if (1..=steps).contains(&t) {
                Ok(())
            } else {
                Err(invalid(context.clone(), format!("time {t} outside 1..={steps}")))
            }
        };
        match c {
            Command::ValidatePdi { pdi: p } => pdi(p),
            Command::Conjunction { left, right } | Command::Disjunction { left, right } => {
                check_dim(format!("{context} left"), d, self.projector_dim(left, &context)?)?;
                check_dim(format!("{context} right"), d, self.projector_dim(right, &context)?)
            }
            Command::Refinement { left, right } | Command::Compatibility { left, right } => {
                pdi(left)?;
                pdi(right)
            }
            Command::Consistency { family: f, .. } | Command::Probabilities { family: f } => family(f).map(|_| ()),
            Command::Marginal { family: f, time } => time_in_range(family(f)?, *time),
            Command::Conditional { family: f, given, target } => {
                let fam = family(f)?;
                time_in_range(fam, given.time)?;
                time_in_range(fam, target.time)
            }
            Command::MeasureModel { model } => models.get(model).map(|_| ()).ok_or_else(|| unknown(model, context)),
            Command::Retrodict { model, pointer } => {
                let m = models.get(model).ok_or_else(|| unknown(model, context.clone()))?;
                let n = m.s_basis.len();
                if (1..=n).contains(pointer) {
                    Ok(())
                } else {
                    Err(invalid(context, format!("pointer {pointer} outside 1..={n}")))
                }
            }
            Command::Channel { ensemble, measurement } => {
                if !self.raw.ensembles.contains_key(ensemble) {
                    return Err(unknown(ensemble, context));
                }
                pdi(measurement)
            }
            Command::DenseCoding { .. } => Ok(()),
        }
    }
}
