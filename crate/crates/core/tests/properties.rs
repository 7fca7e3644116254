use proptest::prelude::*;
use qcfa_core::closure::{complement, intersect, union};
use qcfa_core::compile::{compile_dfa, compile_mo1qfa};
use qcfa_core::linalg::{tensor, validate_measurement, validate_unitary};
use qcfa_core::models::{build_figure1_dfa, in_lm};
use qcfa_core::random::{
    random_dfa, random_measurement, random_mm1qfa, random_mo1qfa, random_qcfa, random_state,
    random_unitary,
};
use qcfa_core::semantics::{
    dfa_accepts, mm1qfa_run, pfa_accept_prob, qcfa_run, qcfa_run_branching_oracle,
    qcfa_run_traced, DEFAULT_BRANCH_CAP,
};
use qcfa_core::{validate, Alphabet, ComplexMatrix, MachineDescription, Pfa, Word, TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ab() -> Alphabet {
    Alphabet::from_chars("ab").unwrap()
}

fn word_strategy(max_len: usize) -> impl Strategy<Value = Word> {
    proptest::collection::vec(prop_oneof![Just('a'), Just('b')], 0..=max_len)
        .prop_map(|cs| Word::from(cs.into_iter().collect::<String>().as_str()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitaries_preserve_norm(seed in any::<u64>(), dim in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(&mut rng, dim);
        prop_assert!(validate_unitary(&u, TOL).unwrap());
        let v = random_state(&mut rng, dim);
        let image = u.mul_vec(&v).unwrap();
        prop_assert!((image.norm() - 1.0).abs() < TOL);
    }

    #[test]
    fn measurements_are_complete(seed in any::<u64>(), dim in 1usize..=4, outcomes in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<String> = (0..outcomes).map(|i| i.to_string()).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let m = random_measurement(&mut rng, dim, &refs);
        prop_assert!(validate_measurement(&m, TOL).unwrap());
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for o in &m.outcomes {
            sum.accumulate(&o.projector).unwrap();
        }
        prop_assert!(sum.max_abs_diff(&ComplexMatrix::identity(dim)) < TOL);
        let v = random_state(&mut rng, dim);
        let total: f64 = m
            .outcomes
            .iter()
            .map(|o| o.projector.mul_vec(&v).unwrap().norm_sqr())
            .sum();
        prop_assert!((total - 1.0).abs() < TOL);
    }

    #[test]
    fn tensor_is_associative(seed in any::<u64>(), d1 in 1usize..=2, d2 in 1usize..=3, d3 in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_unitary(&mut rng, d1);
        let b = random_unitary(&mut rng, d2);
        let c = random_unitary(&mut rng, d3);
        let left = tensor(&tensor(&a, &b), &c);
        let right = tensor(&a, &tensor(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < TOL);
    }

    #[test]
    fn identity_is_neutral(seed in any::<u64>(), dim in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(&mut rng, dim);
        let id = ComplexMatrix::identity(dim);
        prop_assert!(u.mul(&id).unwrap().max_abs_diff(&u) < TOL);
        prop_assert!(id.mul(&u).unwrap().max_abs_diff(&u) < TOL);
    }

    #[test]
    fn figure1_recognizes_lm(m in prop_oneof![Just(2usize), Just(3), Just(5), Just(7)], w in word_strategy(21)) {
        let w = Word::new(w.0.into_iter().take(3 * m).collect());
        let d = build_figure1_dfa(m).unwrap();
        prop_assert_eq!(dfa_accepts(&d, &w).unwrap(), in_lm(&w, m));
    }

    #[test]
    fn validation_is_deterministic(seed in any::<u64>(), dim in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let machine = MachineDescription::Qcfa(random_qcfa(&mut rng, dim, 3, &ab(), 3));
        let first = validate(&machine);
        prop_assert!(first.is_valid());
        prop_assert_eq!(first, validate(&machine));
    }

    #[test]
    fn density_engine_matches_branching_oracle(seed in any::<u64>(), dim in 1usize..=3, w in word_strategy(4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qcfa(&mut rng, dim, 4, &ab(), 3);
        let exact = qcfa_run(&a, &w).unwrap();
        let oracle = qcfa_run_branching_oracle(&a, &w, DEFAULT_BRANCH_CAP).unwrap();
        prop_assert!((exact.accept - oracle.accept).abs() < TOL);
        prop_assert!((exact.reject - oracle.reject).abs() < TOL);
        prop_assert!((exact.accept + exact.reject - 1.0).abs() < TOL);
    }

    #[test]
    fn mm_mass_is_conserved(seed in any::<u64>(), dim in 1usize..=4, w in word_strategy(5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_mm1qfa(&mut rng, dim, &ab());
        let run = mm1qfa_run(&m, &w).unwrap();
        prop_assert!(run.accept >= -TOL && run.reject >= -TOL && run.residual >= -TOL);
        prop_assert!(run.accept + run.reject <= 1.0 + TOL);
        prop_assert!((run.accept + run.reject + run.residual - 1.0).abs() < TOL);
    }

    #[test]
    fn deterministic_pfa_matches_dfa(seed in any::<u64>(), states in 1usize..=5, w in word_strategy(6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_dfa(&mut rng, states, &ab());
        let n = d.num_states();
        let row = |t: usize| (0..n).map(|j| if j == t { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let transitions = (0..n)
            .map(|s| {
                let mut rows = vec![row(s)];
                rows.extend(d.transitions[s].iter().map(|&t| row(t)));
                rows.push(row(s));
                rows
            })
            .collect();
        let p = Pfa {
            states: d.states.clone(),
            alphabet: d.alphabet.clone(),
            transitions,
            initial: d.initial,
            accepting: d.accepting.clone(),
            strict: true,
        };
        prop_assert!(p.validate().is_valid());
        let expected = if dfa_accepts(&d, &w).unwrap() { 1.0 } else { 0.0 };
        prop_assert!((pfa_accept_prob(&p, &w).unwrap() - expected).abs() < TOL);
    }

    #[test]
    fn product_traces_factorize(seed in any::<u64>(), w in word_strategy(4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qcfa(&mut rng, 2, 3, &ab(), 2);
        let b = random_qcfa(&mut rng, 2, 2, &ab(), 2);
        let joint = intersect(&a, &b).unwrap();
        let ta = qcfa_run_traced(&a, &w).unwrap().trace.unwrap();
        let tb = qcfa_run_traced(&b, &w).unwrap().trace.unwrap();
        let tj = qcfa_run_traced(&joint, &w).unwrap().trace.unwrap();
        prop_assert_eq!(ta.len(), tj.len());
        let (m1, m2) = (a.num_states(), b.num_states());
        for step in 0..tj.len() {
            for i1 in 0..m1 {
                for i2 in 0..m2 {
                    let expected = ta[step][i1] * tb[step][i2];
                    prop_assert!((tj[step][i1 * m2 + i2] - expected).abs() < TOL);
                }
            }
        }
    }

    #[test]
    fn de_morgan_holds(seed in any::<u64>(), w in word_strategy(4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qcfa(&mut rng, 2, 3, &ab(), 2);
        let b = random_qcfa(&mut rng, 2, 3, &ab(), 2);
        let lhs = complement(&union(&a, &b).unwrap());
        let rhs = intersect(&complement(&a), &complement(&b)).unwrap();
        let (l, r) = (qcfa_run(&lhs, &w).unwrap(), qcfa_run(&rhs, &w).unwrap());
        prop_assert!((l.accept - r.accept).abs() < TOL);
        prop_assert!((l.reject - r.reject).abs() < TOL);
    }

    #[test]
    fn complement_swaps_outcomes(seed in any::<u64>(), dim in 1usize..=3, w in word_strategy(4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_qcfa(&mut rng, dim, 4, &ab(), 3);
        let c = complement(&a);
        let (x, y) = (qcfa_run(&a, &w).unwrap(), qcfa_run(&c, &w).unwrap());
        prop_assert_eq!(x.accept, y.reject);
        prop_assert_eq!(x.reject, y.accept);
        prop_assert_eq!(complement(&c), a);
    }

    #[test]
    fn compiled_mo_matches_product_with_itself(seed in any::<u64>(), w in word_strategy(4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = compile_mo1qfa(&random_mo1qfa(&mut rng, 2, &ab())).unwrap();
        let d = compile_dfa(&random_dfa(&mut rng, 3, &ab())).unwrap();
        let joint = intersect(&m, &d).unwrap();
        let (pm, pd) = (qcfa_run(&m, &w).unwrap(), qcfa_run(&d, &w).unwrap());
        prop_assert!((qcfa_run(&joint, &w).unwrap().accept - pm.accept * pd.accept).abs() < TOL);
    }
}
