//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use histories_core::info::{bell_basis, bell_labels, channel_experiment, dense_coding_demo, Ensemble};
use histories_core::measurement::MeasurementModel;
use histories_core::numeric::{
    complete_to_unitary, hermitian_eigendecomposition, orthonormality_residual, unitary_from_hamiltonian,
};
use histories_core::properties::spin_half::*;
use histories_core::properties::{conjunction, disjunction, validate_pdi};
use histories_core::{
    c64, random, ComplexMatrix, ComplexVector, ConsistencyMode, Decomposition, Dynamics, Error, Events, HistoryFamily,
    InitialCondition, Projector, Tolerances, C64,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: Tolerances = Tolerances::DEFAULT;
const SEED: u64 = 0x5eed_2024;

type Outcome = Result<String, String>;

struct Criterion {
    number: usize,
    limit: Option<Duration>,
    check: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct RandomModel {
    model: MeasurementModel,
    amps: Vec<C64>,
}

fn random_model(r: &mut ChaCha8Rng) -> RandomModel {
    let ds = r.gen_range(2..=4);
    let s_basis = random::orthonormal_basis(r, ds);
    let mut apparatus = random::orthonormal_basis(r, ds + 1);
    let ready = apparatus.remove(0);
    let post = (0..ds).map(|_| random::ket(r, ds)).collect();
    let mut amps = random::amplitudes(r, ds);
    // every fifth model keeps a single nonzero amplitude, every fifth others lose one
    match r.gen_range(0..5) {
        0 => {
            let k = r.gen_range(0..ds);
            for (j, a) in amps.iter_mut().enumerate() {
                *a = if j == k { C64::from_polar(1.0, r.gen_range(0.0..std::f64::consts::TAU)) } else { c64(0.0, 0.0) };
            }
        }
        1 => {
            amps[r.gen_range(0..ds)] = c64(0.0, 0.0);
            let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.iter_mut().for_each(|a| *a /= n);
        }
        _ => {}
    }
    let model = MeasurementModel::build(s_basis, ready, apparatus, Some(post), &TOL).unwrap();
    RandomModel { model, amps }
}

fn models() -> Vec<RandomModel> {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    (0..200).map(|_| random_model(&mut r)).collect()
}

fn measurement_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut retrodictions = 0;
    for (i, m) in models().iter().enumerate() {
        let w: Vec<f64> = m.amps.iter().map(|a| a.norm_sqr()).collect();
        let ds = w.len();
        let (_, table) = m.model.family_retrodiction(&m.amps, &TOL).map_err(|e| format!("model {i}: {e}"))?;
        let joint = m.model.joint_distribution(&table).map_err(|e| e.to_string())?;
        for (j, row) in joint.iter().enumerate() {
            for (k, p) in row.iter().enumerate() {
                let expected = if j == k { w[j] } else { 0.0 };
                worst = worst.max((p - expected).abs());
            }
        }
        for time in [1, 2] {
            let marginal = table.marginal_distribution(time).map_err(|e| e.to_string())?;
            for j in 0..ds {
                worst = worst.max((marginal[j].1 - w[j]).abs());
            }
        }
        for k in (0..ds).filter(|&k| w[k] > 1e-6) {
            let dist = m.model.retrodict(&m.amps, k, &TOL).map_err(|e| format!("model {i}, pointer {k}: {e}"))?;
            for (j, p) in dist.iter().enumerate() {
                worst = worst.max((p - if j == k { 1.0 } else { 0.0 }).abs());
            }
            retrodictions += 1;
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("200 models, {retrodictions} retrodictions, max deviation {worst:.1e}"))
}

fn pointer_routes() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, m) in models().iter().enumerate() {
        let (_, dist) = m.model.family_pointer(&m.amps, &TOL).map_err(|e| format!("model {i}: {e}"))?;
        worst = worst.max(dist.max_discrepancy());
    }
    ensure(worst <= 1e-10, || format!("max discrepancy {worst:.3e}"))?;
    Ok(format!("200 models, max discrepancy {worst:.1e}"))
}

fn is_meaningless<T>(r: Result<T, Error>) -> bool {
    matches!(r, Err(Error::Meaningless(_)))
}

fn single_framework_rule() -> Outcome {
    let (zp, zm, xp, xm) = (projector(z_plus()), projector(z_minus()), projector(x_plus()), projector(x_minus()));
    ensure(is_meaningless(conjunction(&zp, &xm, &TOL)), || "z+ and x- combined".into())?;
    ensure(is_meaningless(disjunction(&zp, &xp, &TOL)), || "z+ or x+ combined".into())?;
    let empty = conjunction(&zp, &zm, &TOL).map_err(|e| e.to_string())?;
    ensure(empty.rank() == 0 && empty.matrix().frobenius_norm() < 1e-15, || "z+ and z- is not zero".into())?;

    let mut r = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let mut pairs = 0;
    while pairs < 500 {
        let a = random::ket(&mut r, 2);
        let b = random::ket(&mut r, 2);
        let overlap = a.inner(&b).norm_sqr();
        if !(1e-6..=1.0 - 1e-6).contains(&overlap) {
            continue;
        }
        let (p, q) = (Projector::from_ket(&a).unwrap(), Projector::from_ket(&b).unwrap());
        ensure(is_meaningless(conjunction(&p, &q, &TOL)), || format!("pair {pairs}: conjunction defined"))?;
        ensure(is_meaningless(disjunction(&p, &q, &TOL)), || format!("pair {pairs}: disjunction defined"))?;
        pairs += 1;
    }
    Ok("3 fixed cases, 500 random pairs".into())
}

fn two_time_consistency() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let d = r.gen_range(1..=6);
        let members = r.gen_range(1..=d);
        let pdi = random::decomposition(&mut r, d, members);
        let fam = HistoryFamily::build(
            InitialCondition::pure(random::ket(&mut r, d), &TOL).unwrap(),
            vec![0.0, 1.0],
            Dynamics::Propagators(vec![random::unitary(&mut r, d)]),
            Events::PerTime(vec![pdi]),
            &TOL,
        )
        .map_err(|e| format!("family {i}: {e}"))?;
        let rep = fam.consistency_check(ConsistencyMode::Strong, &TOL).map_err(|e| e.to_string())?;
        ensure(rep.consistent, || format!("family {i} inconsistent, {:.3e}", rep.worst_offdiag))?;
        worst = worst.max(rep.worst_offdiag);
    }
    Ok(format!("500 families, worst off-diagonal {worst:.1e}"))
}

fn three_box() -> Outcome {
    let s3 = 1.0 / 3f64.sqrt();
    let psi = [s3, s3, s3];
    let phi = [s3, s3, -s3];
    let boxes = ["A", "B", "C"];
    let ket = |v: &[f64; 3]| ComplexVector::from_real(v).unwrap();
    let box_ket = |j: usize| ComplexVector::basis(3, j);
    let two = |label: &str, k: ComplexVector| {
        let p = Projector::from_ket(&k).unwrap();
        let rest = Projector::from_matrix(&ComplexMatrix::identity(3) - p.matrix(), &TOL).unwrap();
        validate_pdi(vec![p, rest], &[label.to_string(), format!("not {label}")], &TOL).unwrap()
    };
    let family = |first: Decomposition| {
        HistoryFamily::build(
            InitialCondition::pure(ket(&psi), &TOL).unwrap(),
            vec![0.0, 1.0, 2.0],
            Dynamics::Trivial,
            Events::PerTime(vec![first, two("phi", ket(&phi))]),
            &TOL,
        )
        .unwrap()
    };

    for (j, b) in boxes.iter().enumerate().take(2) {
        let fam = family(two(b, box_ket(j)));
        let rep = fam.consistency_check(ConsistencyMode::Strong, &TOL).map_err(|e| e.to_string())?;
        ensure(rep.consistent, || format!("family {b} inconsistent"))?;
        let table = fam.assign_probabilities(&TOL).map_err(|e| e.to_string())?;
        let given = table.histories_with_event(2, "phi").map_err(|e| e.to_string())?;
        let target = table.histories_with_event(1, b).map_err(|e| e.to_string())?;
        let p = table.conditional_probability(&given, &target, &TOL).map_err(|e| e.to_string())?;
        ensure((p - 1.0).abs() <= 1e-9, || format!("Pr({b} | phi) = {p}"))?;
    }

    // brute-force chain kets: |phi><phi| [box] |psi>, and (I - |phi><phi|) [box] |psi>
    let mut alphas: Vec<[f64; 3]> = Vec::new();
    for j in 0..3 {
        let projected = psi[j];
        let along_phi = phi[j] * projected;
        alphas.push([phi[0] * along_phi, phi[1] * along_phi, phi[2] * along_phi]);
        let mut rest = [0.0; 3];
        rest[j] = projected;
        for i in 0..3 {
            rest[i] -= phi[i] * along_phi;
        }
        alphas.push(rest);
    }
    let dot = |a: &[f64; 3], b: &[f64; 3]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut oracle: f64 = 0.0;
    for a in 0..alphas.len() {
        for b in a + 1..alphas.len() {
            oracle = oracle.max(dot(&alphas[a], &alphas[b]).abs());
        }
    }
    let labels: Vec<String> = boxes.iter().map(|s| s.to_string()).collect();
    let all = validate_pdi((0..3).map(|j| Projector::from_ket(&box_ket(j)).unwrap()).collect(), &labels, &TOL)
        .map_err(|e| e.to_string())?;
    let rep = family(all).consistency_check(ConsistencyMode::Strong, &TOL).map_err(|e| e.to_string())?;
    ensure(!rep.consistent, || "combined family consistent".into())?;
    ensure((oracle - 1.0 / 9.0).abs() <= 1e-9, || format!("oracle gives {oracle}"))?;
    ensure((rep.worst_offdiag - oracle).abs() <= 1e-9, || format!("worst off-diagonal {}", rep.worst_offdiag))?;
    Ok(format!("Pr = 1 for A and B, combined worst off-diagonal {:.9}", rep.worst_offdiag))
}

fn pointer_incompatibility() -> Outcome {
    let (mut refused, mut refined) = (0, 0);
    for (i, m) in models().iter().enumerate() {
        let nonzero = m.amps.iter().filter(|a| a.norm_sqr() > 0.0).count();
        match m.model.refine_unitary_with_pointer(&m.amps, &TOL) {
            Err(Error::Incompatible(_)) if nonzero >= 2 => refused += 1,
            Ok(_) if nonzero == 1 => refined += 1,
            Ok(_) => return Err(format!("model {i}: {nonzero} nonzero amplitudes but refinement exists")),
            Err(e) => return Err(format!("model {i}: {nonzero} nonzero amplitudes, {e}")),
        }
    }
    ensure(refused > 0 && refined > 0, || format!("{refused} refused, {refined} refined"))?;
    Ok(format!("{refused} incompatible, {refined} refinable"))
}

fn information_bounds() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut worst_gap: f64 = f64::INFINITY;
    for i in 0..500 {
        let d = r.gen_range(2..=4);
        let n = r.gen_range(1..=6);
        let w: Vec<f64> = (0..n).map(|_| r.gen_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        let members = w.iter().map(|x| (x / total, random::ket(&mut r, d))).collect();
        let e = Ensemble::from_pure(members, &TOL).map_err(|e| e.to_string())?;
        let m = r.gen_range(1..=d);
        let meas = random::decomposition(&mut r, d, m);
        let rep = channel_experiment(d, &e, &meas, &TOL).map_err(|e| format!("ensemble {i}: {e}"))?;
        let (mi, chi, bound) = (rep.mutual_information_bits, rep.holevo_bits, (d as f64).log2());
        ensure(mi <= chi + 1e-9 && chi <= bound + 1e-9, || format!("ensemble {i}: I={mi} chi={chi} d={d}"))?;
        worst_gap = worst_gap.min(bound - chi);
    }
    for d in 2..=4 {
        let basis = random::orthonormal_basis(&mut r, d);
        let labels: Vec<String> = (0..d).map(|k| format!("b{k}")).collect();
        let meas = Decomposition::from_basis(&basis, &labels, &TOL).map_err(|e| e.to_string())?;
        let e = Ensemble::from_pure(basis.iter().map(|k| (1.0 / d as f64, k.clone())).collect(), &TOL).unwrap();
        let rep = channel_experiment(d, &e, &meas, &TOL).map_err(|e| e.to_string())?;
        let gap = (rep.mutual_information_bits - (d as f64).log2()).abs();
        ensure(gap <= 1e-9, || format!("same basis d={d}: gap {gap:.3e}"))?;
    }
    let e = Ensemble::from_pure(vec![(0.25, z_plus()), (0.25, z_minus()), (0.25, x_plus()), (0.25, x_minus())], &TOL)
        .unwrap();
    let z = Decomposition::from_basis(&[z_plus(), z_minus()], &["z+", "z-"], &TOL).unwrap();
    let rep = channel_experiment(2, &e, &z, &TOL).map_err(|e| e.to_string())?;
    ensure((rep.mutual_information_bits - 0.5).abs() <= 1e-9, || format!("I = {}", rep.mutual_information_bits))?;
    ensure((rep.holevo_bits - 1.0).abs() <= 1e-9, || format!("chi = {}", rep.holevo_bits))?;
    Ok(format!("500 ensembles, 3 same-basis cases, four-state I=0.5 chi=1, min log d - chi {worst_gap:.2e}"))
}

fn dense_coding() -> Outcome {
    let rep = dense_coding_demo(2, &TOL).map_err(|e| e.to_string())?;
    ensure(rep.messages == 4, || format!("{} messages", rep.messages))?;
    let i = rep.channel.mutual_information_bits;
    ensure((i - 2.0).abs() <= 1e-9, || format!("I = {i}"))?;
    for d in 2..=4 {
        let projectors = bell_basis(d).iter().map(|k| Projector::from_ket(k).unwrap()).collect();
        validate_pdi(projectors, &bell_labels(d), &TOL).map_err(|e| format!("d={d}: {e}"))?;
    }
    Ok("4 messages, I = 2 bits, Bell sets valid for d = 2, 3, 4".into())
}

fn numeric_core() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let (mut recon, mut unit): (f64, f64) = (0.0, 0.0);
    for _ in 0..500 {
        let d = r.gen_range(1..=8);
        let h = random::hermitian(&mut r, d);
        let es = hermitian_eigendecomposition(&h, &TOL).map_err(|e| e.to_string())?;
        recon = recon.max(es.reconstruct().distance(&h));
        let u = unitary_from_hamiltonian(&h, r.gen_range(-5.0..5.0), 1.0, &TOL).map_err(|e| e.to_string())?;
        unit = unit.max(u.unitarity_residual());
    }
    ensure(recon <= 1e-10, || format!("reconstruction {recon:.3e}"))?;
    ensure(unit <= 1e-10, || format!("unitarity {unit:.3e}"))?;

    let mut completion: f64 = 0.0;
    for _ in 0..200 {
        let d = r.gen_range(1..=8);
        let k = r.gen_range(1..=d);
        let columns: Vec<ComplexVector> = random::orthonormal_basis(&mut r, d).into_iter().take(k).collect();
        let mut positions: Vec<usize> = (0..d).collect();
        positions.shuffle(&mut r);
        positions.truncate(k);
        let u = complete_to_unitary(&columns, &positions, &TOL).map_err(|e| e.to_string())?;
        completion = completion.max(u.unitarity_residual());
        for (c, &p) in columns.iter().zip(&positions) {
            let col = ComplexVector::new((0..d).map(|i| u[(i, p)]).collect()).unwrap();
            completion = completion.max(col.distance(c));
        }
        completion = completion.max(orthonormality_residual(&columns));
    }
    ensure(completion <= 1e-10, || format!("completion {completion:.3e}"))?;
    Ok(format!("500 inputs, reconstruction {recon:.1e}, unitarity {unit:.1e}, completion {completion:.1e}"))
}

fn cli_determinism() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let mut files = 0;
    for name in ["spin_half", "three_box", "measurement"] {
        let fixture = root.join("fixtures").join(format!("{name}.json"));
        for (format, ext) in [("text", "txt"), ("machine", "json")] {
            let run = || {
                Command::new(env!("CARGO_BIN_EXE_histories"))
                    .args(["run", fixture.to_str().unwrap(), "--format", format])
                    .output()
                    .map_err(|e| e.to_string())
            };
            let (a, b) = (run()?, run()?);
            ensure(a.status.success(), || format!("{name} {format}: {}", String::from_utf8_lossy(&a.stderr)))?;
            ensure(a.stdout == b.stdout, || format!("{name} {format}: runs differ"))?;
            let golden = std::fs::read(root.join("tests").join("golden").join(format!("{name}.{ext}")))
                .map_err(|e| format!("{name}.{ext}: {e}"))?;
            ensure(a.stdout == golden, || format!("{name}.{ext} differs from golden"))?;
            files += 1;
        }
    }
    Ok(format!("{files} reports identical across runs and to goldens"))
}

fn main() {
    let criteria = [
        Criterion { number: 1, limit: Some(Duration::from_secs(10)), check: measurement_identities },
        Criterion { number: 2, limit: None, check: pointer_routes },
        Criterion { number: 3, limit: Some(Duration::from_secs(1)), check: single_framework_rule },
        Criterion { number: 4, limit: Some(Duration::from_secs(10)), check: two_time_consistency },
        Criterion { number: 5, limit: Some(Duration::from_secs(1)), check: three_box },
        Criterion { number: 6, limit: None, check: pointer_incompatibility },
        Criterion { number: 7, limit: Some(Duration::from_secs(30)), check: information_bounds },
        Criterion { number: 8, limit: None, check: dense_coding },
        Criterion { number: 9, limit: None, check: numeric_core },
        Criterion { number: 10, limit: None, check: cli_determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS ({detail}; {elapsed:.2?})", c.number),
            Err(reason) => {
                failed += 1;
                println!("criterion {}: FAIL ({reason}; {elapsed:.2?})", c.number);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
