//! Executes scenario commands against the core library.

use histories_core::info::{channel_experiment, dense_coding_demo, Ensemble};
use histories_core::measurement::{particle_label, pointer_label, MeasurementModel};
use histories_core::properties::{
    common_refinement, compatible, conjunction, disjunction, observable_to_pdi, validate_pdi,
};
use histories_core::{
    ComplexMatrix, ConsistencyMode, Decomposition, Dynamics, Error, Events, History, HistoryFamily, InitialCondition,
    ProbabilityTable, Projector, Tolerances,
};

use crate::error::ExecutionError;
use crate::report::{Report, Section, Table, Value};
use crate::scenario::{
    Command, DynamicsSpec, EnsembleState, EventRef, EventsSpec, InitialSpec, Member, Mode, PdiSpec, Scenario, Source,
};
use crate::Profile;

pub fn run_scenario(s: &Scenario, profile: Profile) -> Result<Report, ExecutionError> {
    let tol = profile.tolerances();
    let ctx = Context { s, tol: &tol };
    let mut sections = Vec::with_capacity(s.commands.len());
    for (i, c) in s.commands.iter().enumerate() {
        let index = i + 1;
        let section = ctx.command(index, c).map_err(|source| ExecutionError { index, kind: c.kind(), source })?;
        sections.push(section);
    }
    Ok(Report {
        generator: concat!("histories ", env!("CARGO_PKG_VERSION")).to_string(),
        schema: 1,
        dimension: s.dimension,
        tolerance_profile: profile.name().to_string(),
        warnings: s.warnings.clone(),
        sections,
    })
}

fn inputs(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn members_table(pdi: &Decomposition) -> Table {
    let mut t = Table::new("members", ["label", "rank"]);
    for (label, p) in pdi.iter() {
        t.row(vec![label.into(), p.rank().into()]);
    }
    t
}

fn matrix_table(m: &ComplexMatrix) -> Table {
    let n = m.cols();
    let mut t = Table::new("matrix", std::iter::once("row".to_string()).chain((1..=n).map(|j| format!("c{j}"))));
    for i in 0..m.rows() {
        let mut row: Vec<Value> = vec![(i + 1).into()];
        row.extend(m.row(i).iter().map(|z| Value::Complex(*z)));
        t.row(row);
    }
    t
}

fn probability_table(name: &str, first: &str, entries: impl IntoIterator<Item = (String, f64)>) -> Table {
    let mut t = Table::new(name, [first, "probability"]);
    for (label, p) in entries {
        t.row(vec![label.into(), p.into()]);
    }
    t
}

fn inconsistent(section: &mut Section, report: &histories_core::ConsistencyReport) {
    section.status("INCONSISTENT").field("worst_offdiagonal", report.worst_offdiag);
    if let Some((a, b)) = &report.offending_pair {
        section.field("offending_pair", format!("{a} | {b}"));
    }
}

struct Context<'a> {
    s: &'a Scenario,
    tol: &'a Tolerances,
}

impl Context<'_> {
    fn projector(&self, name: &str) -> Result<Projector, Error> {
        match self.s.kets.get(name) {
            Some(k) => Projector::from_ket(k),
            None => Projector::from_matrix(self.s.operators[name].clone(), self.tol),
        }
    }

    fn member(&self, m: &Member) -> Result<Projector, Error> {
        match &m.source {
            Source::Ket(k) => Projector::from_ket(&self.s.kets[k]),
            Source::Operator(o) => Projector::from_matrix(self.s.operators[o].clone(), self.tol),
            Source::Identity => Ok(Projector::identity(self.s.dimension)),
            Source::Rest => unreachable!("rest members are resolved by the decomposition"),
        }
    }

    fn pdi(&self, name: &str) -> Result<Decomposition, Error> {
        match &self.s.pdis[name] {
            PdiSpec::Members(members) => {
                let d = self.s.dimension;
                let mut projectors: Vec<Option<Projector>> = Vec::with_capacity(members.len());
                for m in members {
                    projectors.push(match m.source {
                        Source::Rest => None,
                        _ => Some(self.member(m)?),
                    });
                }
                let sum = projectors.iter().flatten().fold(ComplexMatrix::zeros(d, d), |acc, p| &acc + p.matrix());
                let rest = &ComplexMatrix::identity(d) - &sum;
                let projectors = projectors
                    .into_iter()
                    .map(|p| match p {
                        Some(p) => Ok(p),
                        None => Projector::from_matrix(rest.clone(), self.tol),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let labels: Vec<&str> = members.iter().map(|m| m.label.as_str()).collect();
                validate_pdi(projectors, &labels, self.tol)
            }
            PdiSpec::Refinement(a, b) => common_refinement(&self.pdi(a)?, &self.pdi(b)?, self.tol),
            PdiSpec::Observable(o) => Ok(observable_to_pdi(&self.s.operators[o], self.tol)?.pdi),
        }
    }

    fn family(&self, name: &str) -> Result<HistoryFamily, Error> {
        let spec = &self.s.families[name];
        let initial = match &spec.initial {
            InitialSpec::Ket(k) => InitialCondition::pure(self.s.kets[k].clone(), self.tol)?,
            InitialSpec::Density(r) => InitialCondition::density(self.s.operators[r].clone(), self.tol)?,
        };
        let dynamics = match &spec.dynamics {
            DynamicsSpec::Trivial => Dynamics::Trivial,
            DynamicsSpec::Propagators(ps) => {
                Dynamics::Propagators(ps.iter().map(|p| self.s.operators[p].clone()).collect())
            }
            DynamicsSpec::Hamiltonian { operator, hbar } => {
                Dynamics::Hamiltonian { h: self.s.operators[operator].clone(), hbar: *hbar }
            }
        };
        let events = match &spec.events {
            EventsSpec::PerTime(names) => Events::PerTime(names.iter().map(|n| self.pdi(n)).collect::<Result<_, _>>()?),
            EventsSpec::Explicit(hs) => {
                let mut out = Vec::with_capacity(hs.len());
                for h in hs {
                    let events = h.events.iter().map(|m| Ok((m.label.clone(), self.member(m)?))).collect::<Result<
                        Vec<_>,
                        Error,
                    >>(
                    )?;
                    out.push(match &h.label {
                        Some(l) => History::new(l.clone(), events),
                        None => History::from_events(events),
                    });
                }
                Events::Explicit(out)
            }
        };
        HistoryFamily::build(initial, spec.times.clone(), dynamics, events, self.tol)
    }

    fn model(&self, name: &str) -> Result<(MeasurementModel, &[histories_core::C64]), Error> {
        let spec = &self.s.models[name];
        let kets = |names: &[String]| names.iter().map(|n| self.s.kets[n].clone()).collect::<Vec<_>>();
        let model = MeasurementModel::build(
            kets(&spec.s_basis),
            self.s.kets[&spec.ready].clone(),
            kets(&spec.pointers),
            spec.post_states.as_deref().map(kets),
            self.tol,
        )?;
        Ok((model, &spec.amplitudes))
    }

    fn ensemble(&self, name: &str) -> Result<Ensemble, Error> {
        let members = self.s.ensembles[name]
            .members
            .iter()
            .map(|(p, state)| {
                let rho = match state {
                    EnsembleState::Ket(k) => self.s.kets[k].dyad(),
                    EnsembleState::Density(r) => self.s.operators[r].clone(),
                };
                (*p, rho)
            })
            .collect();
        Ensemble::new(members, self.tol)
    }

    /// Runs `f` on the family's probability table, or records the
    /// inconsistency verdict.
    fn with_table(
        &self,
        section: &mut Section,
        family: &str,
        f: impl FnOnce(&mut Section, &ProbabilityTable) -> Result<(), Error>,
    ) -> Result<(), Error> {
        match self.family(family)?.assign_probabilities(self.tol) {
            Ok(table) => f(section, &table),
            Err(Error::InconsistentFamily(report)) => {
                inconsistent(section, &report);
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    fn command(&self, index: usize, c: &Command) -> Result<Section, Error> {
        let kind = c.kind();
        match c {
            Command::ValidatePdi { pdi } => {
                let mut s = Section::new(index, kind, inputs(&[("pdi", pdi.clone())]));
                match self.pdi(pdi) {
                    Ok(p) => {
                        s.status("VALID")
                            .field("dimension", p.dim())
                            .field("members", p.len())
                            .table(members_table(&p));
                    }
                    Err(e) => {
                        s.status("INVALID").field("reason", e.to_string());
                    }
                }
                Ok(s)
            }
            Command::Conjunction { left, right } | Command::Disjunction { left, right } => {
                let mut s = Section::new(index, kind, inputs(&[("left", left.clone()), ("right", right.clone())]));
                let (p, q) = (self.projector(left)?, self.projector(right)?);
                let result = if matches!(c, Command::Conjunction { .. }) {
                    conjunction(&p, &q, self.tol)
                } else {
                    disjunction(&p, &q, self.tol)
                };
                match result {
                    Ok(r) => {
                        s.field("rank", r.rank()).table(matrix_table(r.matrix()));
                    }
                    Err(Error::Meaningless(m)) => {
                        s.status("MEANINGLESS").field("commutator_norm", m.commutator_norm);
                    }
                    Err(e) => return Err(e),
                }
                Ok(s)
            }
            Command::Refinement { left, right } => {
                let mut s = Section::new(index, kind, inputs(&[("left", left.clone()), ("right", right.clone())]));
                match common_refinement(&self.pdi(left)?, &self.pdi(right)?, self.tol) {
                    Ok(p) => {
                        s.field("members", p.len()).table(members_table(&p));
                    }
                    Err(Error::Incompatible(e)) => {
                        s.status("INCOMPATIBLE")
                            .field("left_member", e.left_label.clone())
                            .field("right_member", e.right_label.clone())
                            .field("commutator_norm", e.commutator_norm);
                    }
                    Err(e) => return Err(e),
                }
                Ok(s)
            }
            Command::Compatibility { left, right } => {
                let mut s = Section::new(index, kind, inputs(&[("left", left.clone()), ("right", right.clone())]));
                let ok = compatible(&self.pdi(left)?, &self.pdi(right)?, self.tol)?;
                s.status(if ok { "COMPATIBLE" } else { "INCOMPATIBLE" });
                Ok(s)
            }
            Command::Consistency { family, mode } => {
                let mode = match mode.unwrap_or(Mode::Strong) {
                    Mode::Strong => ConsistencyMode::Strong,
                    Mode::Weak => ConsistencyMode::Weak,
                };
                let mut s =
                    Section::new(index, kind, inputs(&[("family", family.clone()), ("mode", mode.to_string())]));
                let report = self.family(family)?.consistency_check(mode, self.tol)?;
                if report.consistent {
                    s.status("CONSISTENT").field("worst_offdiagonal", report.worst_offdiag);
                } else {
                    inconsistent(&mut s, &report);
                }
                s.field("histories", report.labels.len());
                let diag = report.labels.iter().enumerate().map(|(i, l)| (l.clone(), report.gram[(i, i)].re));
                let mut t = Table::new("chain_ket_weights", ["history", "weight"]);
                for (l, w) in diag {
                    t.row(vec![l.into(), w.into()]);
                }
                s.table(t);
                Ok(s)
            }
            Command::Probabilities { family } => {
                let mut s = Section::new(index, kind, inputs(&[("family", family.clone())]));
                self.with_table(&mut s, family, |s, t| {
                    s.field("normalization", t.normalization());
                    s.table(probability_table(
                        "probabilities",
                        "history",
                        t.entries().map(|(l, p)| (l.to_string(), p)),
                    ));
                    Ok(())
                })?;
                Ok(s)
            }
            Command::Marginal { family, time } => {
                let mut s =
                    Section::new(index, kind, inputs(&[("family", family.clone()), ("time", time.to_string())]));
                self.with_table(&mut s, family, |s, t| {
                    s.table(probability_table("marginal", "event", t.marginal_distribution(*time)?));
                    Ok(())
                })?;
                Ok(s)
            }
            Command::Conditional { family, given, target } => {
                let show = |e: &EventRef| format!("{} at t{}", e.event, e.time);
                let mut s = Section::new(
                    index,
                    kind,
                    inputs(&[("family", family.clone()), ("given", show(given)), ("target", show(target))]),
                );
                let tol = self.tol;
                self.with_table(&mut s, family, |s, t| {
                    let g = t.histories_with_event(given.time, &given.event)?;
                    let a = t.histories_with_event(target.time, &target.event)?;
                    match t.conditional_probability(&g, &a, tol) {
                        Ok(p) => {
                            s.field("probability", p);
                        }
                        Err(Error::ZeroConditioningEvent { probability }) => {
                            s.status("UNDEFINED").field("conditioning_probability", probability);
                        }
                        Err(e) => return Err(e),
                    }
                    Ok(())
                })?;
                Ok(s)
            }
            Command::MeasureModel { model } => {
                let mut s = Section::new(index, kind, inputs(&[("model", model.clone())]));
                let (m, amps) = self.model(model)?;
                let n = m.particle_dim();
                s.field("particle_dimension", n).field("apparatus_dimension", m.apparatus_dim());

                let (_, unitary) = m.family_unitary(amps, self.tol)?;
                s.field("unitary_history_probability", unitary.probability("Psi1,Psi2")?);
                match m.refine_unitary_with_pointer(amps, self.tol) {
                    Ok(_) => s.field("unitary_pointer_refinement", "COMPATIBLE"),
                    Err(Error::Incompatible(_)) => s.field("unitary_pointer_refinement", "INCOMPATIBLE"),
                    Err(e) => return Err(e),
                };

                let (_, dist) = m.family_pointer(amps, self.tol)?;
                s.field("pointer_route_discrepancy", dist.max_discrepancy());
                let mut t = Table::new("pointer", ["outcome", "chain kets", "pre-probability"]);
                for k in 0..n {
                    t.row(vec![pointer_label(k).into(), dist.probabilities[k].into(), dist.pre_probability[k].into()]);
                }
                s.table(t);

                let (fam, table) = m.family_retrodiction(amps, self.tol)?;
                let consistent = fam.consistency_check(ConsistencyMode::Strong, self.tol)?.consistent;
                s.field("retrodiction_family_consistent", consistent);
                let joint = m.joint_distribution(&table)?;
                let mut t =
                    Table::new("joint", std::iter::once("property".to_string()).chain((0..n).map(pointer_label)));
                for (j, row) in joint.iter().enumerate() {
                    let mut r: Vec<Value> = vec![particle_label(j).into()];
                    r.extend(row.iter().map(|p| Value::Real(*p)));
                    t.row(r);
                }
                s.table(t);
                let t1 = table.marginal_distribution(1)?;
                let t2 = table.marginal_distribution(2)?;
                let mut t = Table::new("marginals", ["j", "t1", "t2"]);
                for j in 0..n {
                    t.row(vec![(j + 1).into(), t1[j].1.into(), t2[j].1.into()]);
                }
                s.table(t);
                Ok(s)
            }
            Command::Retrodict { model, pointer } => {
                let mut s = Section::new(
                    index,
                    kind,
                    inputs(&[("model", model.clone()), ("pointer", pointer_label(pointer - 1))]),
                );
                let (m, amps) = self.model(model)?;
                match m.retrodict(amps, pointer - 1, self.tol) {
                    Ok(dist) => {
                        s.table(probability_table(
                            "retrodiction",
                            "property",
                            dist.into_iter().enumerate().map(|(j, p)| (particle_label(j), p)),
                        ));
                    }
                    Err(Error::ZeroConditioningEvent { probability }) => {
                        s.status("UNDEFINED").field("conditioning_probability", probability);
                    }
                    Err(e) => return Err(e),
                }
                Ok(s)
            }
            Command::Channel { ensemble, measurement } => {
                let mut s = Section::new(
                    index,
                    kind,
                    inputs(&[("ensemble", ensemble.clone()), ("measurement", measurement.clone())]),
                );
                let e = self.ensemble(ensemble)?;
                let pdi = self.pdi(measurement)?;
                let r = channel_experiment(self.s.dimension, &e, &pdi, self.tol)?;
                s.field("mutual_information_bits", r.mutual_information_bits)
                    .field("holevo_bits", r.holevo_bits)
                    .field("bound_bits", r.bound_bits)
                    .field("achieves_bound", r.achieves_bound);
                let mut t =
                    Table::new("joint", std::iter::once("preparation".to_string()).chain(pdi.labels().iter().cloned()));
                for (a, row) in r.joint.iter().enumerate() {
                    let mut cells: Vec<Value> = vec![(a + 1).into()];
                    cells.extend(row.iter().map(|p| Value::Real(*p)));
                    t.row(cells);
                }
                s.table(t);
                Ok(s)
            }
            Command::DenseCoding { d } => {
                let mut s = Section::new(index, kind, inputs(&[("d", d.to_string())]));
                let r = dense_coding_demo(*d, self.tol)?;
                s.field("messages", r.messages)
                    .field("bits", r.bits)
                    .field("qudits", r.qudits)
                    .field("mutual_information_bits", r.channel.mutual_information_bits)
                    .field("per_qudit_bound_bits", r.per_qudit_bound_bits)
                    .field("per_qudit_bound_respected", r.per_qudit_bound_respected)
                    .field("min_entanglement_bits", r.min_entanglement_bits);
                Ok(s)
            }
        }
    }
}
