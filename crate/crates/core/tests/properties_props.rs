use histories_core::properties::{
    common_refinement, compatible, conjunction, disjunction, event_algebra, negation, observable_to_pdi,
    refinement_label, validate_pdi,
};
use histories_core::{random, ComplexMatrix, ComplexVector, Decomposition, Error, Projector, Tolerances};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: Tolerances = Tolerances::DEFAULT;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn span(dim: usize, vectors: &[&ComplexVector]) -> Projector {
    let m = vectors.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, v| &acc + &v.dyad());
    Projector::from_matrix(m, &TOL).unwrap()
}

/// Two projectors diagonal in one random basis, so they commute.
fn commuting_pair(r: &mut ChaCha8Rng, d: usize) -> (Projector, Projector) {
    let basis = random::orthonormal_basis(r, d);
    let pick = |r: &mut ChaCha8Rng| -> Vec<&ComplexVector> { basis.iter().filter(|_| r.gen_bool(0.5)).collect() };
    let a = pick(r);
    let b = pick(r);
    (span(d, &a), span(d, &b))
}

/// A decomposition that groups the given basis by `groups[i]`.
fn grouped(basis: &[ComplexVector], groups: &[usize], prefix: &str) -> Decomposition {
    let d = basis.len();
    let n = groups.iter().max().unwrap() + 1;
    let mut projectors = Vec::new();
    let mut labels = Vec::new();
    for g in 0..n {
        let members: Vec<&ComplexVector> = basis.iter().zip(groups).filter(|(_, &k)| k == g).map(|(v, _)| v).collect();
        if !members.is_empty() {
            projectors.push(span(d, &members));
            labels.push(format!("{prefix}{g}"));
        }
    }
    validate_pdi(projectors, &labels, &TOL).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pdi_ranks_sum_to_dimension(seed in any::<u64>(), d in 1usize..7, m in 1usize..7) {
        let mut r = rng(seed);
        let pdi = random::decomposition(&mut r, d, m.min(d));
        prop_assert_eq!(pdi.projectors().iter().map(Projector::rank).sum::<usize>(), d);
    }

    #[test]
    fn conjunction_is_symmetric(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let (p, q) = commuting_pair(&mut r, d);
        let pq = conjunction(&p, &q, &TOL).unwrap();
        let qp = conjunction(&q, &p, &TOL).unwrap();
        prop_assert!(pq.matrix().distance(qp.matrix()) < 1e-12);
        prop_assert_eq!(pq.rank(), qp.rank());

        let a = random::projector(&mut r, d.max(2), 1);
        let b = random::projector(&mut r, d.max(2), 1);
        let ab = conjunction(&a, &b, &TOL).is_err();
        let ba = conjunction(&b, &a, &TOL).is_err();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn de_morgan_on_commuting_pairs(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let (p, q) = commuting_pair(&mut r, d);
        let lhs = negation(&disjunction(&p, &q, &TOL).unwrap());
        let rhs = conjunction(&negation(&p), &negation(&q), &TOL).unwrap();
        prop_assert!(lhs.matrix().distance(rhs.matrix()) < 1e-10);
    }

    #[test]
    fn distinct_rank_one_qubit_pairs_are_meaningless(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random::projector(&mut r, 2, 1);
        let q = random::projector(&mut r, 2, 1);
        let same = p.matrix().distance(q.matrix()) < 1e-6;
        let complementary = p.matrix().distance(negation(&q).matrix()) < 1e-6;
        prop_assume!(!same && !complementary);
        prop_assert!(matches!(conjunction(&p, &q, &TOL), Err(Error::Meaningless(_))));
        prop_assert!(matches!(disjunction(&p, &q, &TOL), Err(Error::Meaningless(_))));
    }

    #[test]
    fn refinement_refines_both(seed in any::<u64>(), d in 1usize..7) {
        let mut r = rng(seed);
        let basis = random::orthonormal_basis(&mut r, d);
        let gf: Vec<usize> = (0..d).map(|_| r.gen_range(0..3)).collect();
        let gg: Vec<usize> = (0..d).map(|_| r.gen_range(0..3)).collect();
        let f = grouped(&basis, &gf, "f");
        let g = grouped(&basis, &gg, "g");
        prop_assert!(compatible(&f, &g, &TOL).unwrap());
        let fg = common_refinement(&f, &g, &TOL).unwrap();
        for (lf, pf) in f.iter() {
            let sum = fg
                .iter()
                .filter(|(l, _)| l.starts_with(&format!("{lf}∧")))
                .fold(ComplexMatrix::zeros(d, d), |acc, (_, p)| &acc + p.matrix());
            prop_assert!(sum.distance(pf.matrix()) < 1e-10);
        }
        for (lg, pg) in g.iter() {
            let sum = fg
                .iter()
                .filter(|(l, _)| l.ends_with(&format!("∧{lg}")))
                .fold(ComplexMatrix::zeros(d, d), |acc, (_, p)| &acc + p.matrix());
            prop_assert!(sum.distance(pg.matrix()) < 1e-10);
        }
    }

    #[test]
    fn observable_round_trip(seed in any::<u64>(), d in 1usize..7, m in 1usize..7) {
        let mut r = rng(seed);
        let pdi = random::decomposition(&mut r, d, m.min(d));
        let n = pdi.len();
        // distinct, well separated eigenvalues in descending order
        let values: Vec<f64> = (0..n).map(|j| (n - j) as f64 * 1.5 + r.gen_range(-0.5..0.5)).collect();
        let a = values
            .iter()
            .zip(pdi.projectors())
            .fold(ComplexMatrix::zeros(d, d), |acc, (v, p)| &acc + &p.matrix().scale_real(*v));
        let spec = observable_to_pdi(&a, &TOL).unwrap();
        prop_assert_eq!(spec.pdi.len(), n);
        for (j, v) in values.iter().enumerate() {
            prop_assert!((spec.eigenvalues[j] - v).abs() < 1e-9);
            prop_assert!(spec.pdi.projectors()[j].matrix().distance(pdi.projectors()[j].matrix()) < 1e-9);
        }
        prop_assert!(spec.reconstruct().distance(&a) < 1e-9);
    }

    #[test]
    fn event_algebra_is_closed_under_negation(seed in any::<u64>(), d in 1usize..6, m in 1usize..5) {
        let mut r = rng(seed);
        let pdi = random::decomposition(&mut r, d, m.min(d));
        let alg = event_algebra(&pdi).unwrap();
        let full = alg.len() - 1;
        for (mask, (_, p)) in alg.iter().enumerate() {
            let complement = &alg[full ^ mask].1;
            prop_assert!(negation(p).matrix().distance(complement.matrix()) < 1e-10);
        }
    }
}

#[test]
fn refinement_labels_join_with_wedge() {
    assert_eq!(refinement_label("z+", "x-"), "z+∧x-");
}

#[test]
fn incompatible_frameworks_name_the_pair() {
    use histories_core::properties::spin_half::*;
    let z = Decomposition::from_basis(&[z_plus(), z_minus()], &["z+", "z-"], &TOL).unwrap();
    let x = Decomposition::from_basis(&[x_plus(), x_minus()], &["x+", "x-"], &TOL).unwrap();
    assert!(!compatible(&z, &x, &TOL).unwrap());
    match common_refinement(&z, &x, &TOL) {
        Err(Error::Incompatible(e)) => {
            assert_eq!((e.left_label.as_str(), e.right_label.as_str()), ("z+", "x+"));
            // ‖[z+][x+] - [x+][z+]‖_F = 1/√2
            assert!((e.commutator_norm - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
        other => panic!("expected incompatibility, got {other:?}"),
    }
}
