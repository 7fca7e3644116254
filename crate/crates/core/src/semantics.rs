//! Exact acceptance-probability engines.
//!
//! Each model has a primary engine and, for the quantum models with
//! intermediate measurements, an independent enumeration oracle that walks
//! every measurement-outcome sequence with pure states. Tapes are always
//! processed as `¢`, the input symbols, then `$`.

use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix, ComplexVector, DensityMatrix, TOL};
use crate::models::{Dfa, Mm1qfa, Mo1qfa, Pfa, Qcfa, Qfacl, Word};

/// Default cap on enumerated branches in the oracles.
pub const DEFAULT_BRANCH_CAP: usize = 1_000_000;

/// Outcomes below this probability are dropped by the enumeration oracles.
const PRUNE_BELOW: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub accept: f64,
    pub reject: f64,
    /// Mass that ended neither accepted nor rejected. Only MM-1QFA runs
    /// report a non-zero value here.
    pub residual: f64,
    /// Per-step probability mass on each classical state, when requested.
    pub trace: Option<Vec<Vec<f64>>>,
}

pub fn dfa_accepts(d: &Dfa, w: &Word) -> Result<bool> {
    let symbols = d.alphabet.encode(w)?;
    Ok(d.is_accepting(d.run_from(d.initial, &symbols)))
}

/// `v_{|w|} = A_$ A_{σ_l} ⋯ A_{σ₁} A_¢ v₀`, summed over accepting states.
pub fn pfa_accept_prob(p: &Pfa, w: &Word) -> Result<f64> {
    let tape = p.alphabet.encode_tape(w)?;
    let n = p.num_states();
    let mut dist = vec![0.0; n];
    dist[p.initial] = 1.0;
    for g in tape {
        let mut next = vec![0.0; n];
        for (s, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (t, &weight) in p.transitions[s][g].iter().enumerate() {
                next[t] += mass * weight;
            }
        }
        dist = next;
    }
    Ok(p.accepting.iter().map(|&s| dist[s]).sum())
}

/// `‖P_a Θ_$ Θ_{σ_l} ⋯ Θ_¢ |q₀⟩‖²`.
pub fn mo1qfa_accept_prob(m: &Mo1qfa, w: &Word) -> Result<f64> {
    let tape = m.alphabet.encode_tape(w)?;
    let mut psi = m.initial.clone();
    for g in tape {
        psi = m.unitaries[g].mul_vec(&psi)?;
    }
    Ok(m.accepting.mul_vec(&psi)?.norm_sqr())
}

/// Measure-many run: after each tape symbol the state is measured with
/// `{P_a, P_r, P_n}`; only the non-halting component continues.
pub fn mm1qfa_run(m: &Mm1qfa, w: &Word) -> Result<RunOutcome> {
    let tape = m.alphabet.encode_tape(w)?;
    let non_halting = m.non_halting();
    let mut psi = m.initial.clone();
    let (mut accept, mut reject) = (0.0, 0.0);
    for g in tape {
        let evolved = m.unitaries[g].mul_vec(&psi)?;
        accept += m.accepting.mul_vec(&evolved)?.norm_sqr();
        reject += m.rejecting.mul_vec(&evolved)?.norm_sqr();
        psi = non_halting.mul_vec(&evolved)?;
    }
    Ok(RunOutcome {
        accept,
        reject,
        residual: psi.norm_sqr(),
        trace: None,
    })
}

/// Control-language acceptance by dynamic programming over
/// (control state, density matrix) pairs.
pub fn qfacl_accept_prob(q: &Qfacl, w: &Word) -> Result<f64> {
    let tape = q.alphabet.encode_tape(w)?;
    let letters = q.outcome_letters()?;
    let control = &q.control;
    let mut config: Vec<Option<DensityMatrix>> = vec![None; control.num_states()];
    config[control.initial] = Some(DensityMatrix::pure(&q.initial));
    for g in tape {
        let unitary = &q.unitaries[g];
        let mut next: Vec<Option<DensityMatrix>> = vec![None; control.num_states()];
        for (s, rho) in config.iter().enumerate() {
            let Some(rho) = rho else { continue };
            let evolved = rho.conjugate_by(unitary)?;
            for (outcome, &letter) in q.observable.outcomes.iter().zip(&letters) {
                let part = evolved.conjugate_by(&outcome.projector)?;
                add_into(&mut next[control.transitions[s][letter]], part)?;
            }
        }
        config = next;
    }
    Ok(control
        .accepting
        .iter()
        .filter_map(|&s| config[s].as_ref())
        .map(DensityMatrix::trace)
        .sum())
}

/// Explicit sum over accepted outcome strings: enumerates every
/// `y₀ y₁ ⋯ y_{l+1}` with its pure-state probability and replays the control
/// DFA on it.
pub fn qfacl_accept_prob_enumerated(q: &Qfacl, w: &Word, cap: usize) -> Result<f64> {
    let tape = q.alphabet.encode_tape(w)?;
    let letters = q.outcome_letters()?;
    let mut accept = 0.0;
    let mut branches = 0usize;
    // (position, collapsed state, outcome string so far, branch probability)
    let mut stack = vec![(0usize, q.initial.clone(), Vec::<usize>::new(), 1.0f64)];
    while let Some((pos, psi, outcomes, prob)) = stack.pop() {
        if pos == tape.len() {
            branches += 1;
            if branches > cap {
                return Err(Error::BranchCapExceeded { cap });
            }
            let end = q.control.run_from(q.control.initial, &outcomes);
            if q.control.is_accepting(end) {
                accept += prob;
            }
            continue;
        }
        let evolved = q.unitaries[tape[pos]].mul_vec(&psi)?;
        for (outcome, &letter) in q.observable.outcomes.iter().zip(&letters) {
            let projected = outcome.projector.mul_vec(&evolved)?;
            let p = projected.norm_sqr();
            if p < PRUNE_BELOW {
                continue;
            }
            let mut y = outcomes.clone();
            y.push(letter);
            stack.push((
                pos + 1,
                projected.scale(Complex::new(1.0 / p.sqrt(), 0.0)),
                y,
                prob * p,
            ));
        }
    }
    Ok(accept)
}

/// Exact 1QCFA semantics over a hybrid configuration: one unnormalized
/// density matrix per classical state.
pub fn qcfa_run(a: &Qcfa, w: &Word) -> Result<RunOutcome> {
    run_density(a, w, false)
}

/// [`qcfa_run`] that also records the mass on each classical state after
/// every tape symbol (initial configuration first).
pub fn qcfa_run_traced(a: &Qcfa, w: &Word) -> Result<RunOutcome> {
    run_density(a, w, true)
}

/// Hybrid configuration after each tape symbol, initial configuration
/// first. Exposed for structural checks on product machines.
pub fn qcfa_configurations(a: &Qcfa, w: &Word) -> Result<Vec<Vec<Option<DensityMatrix>>>> {
    let tape = a.alphabet.encode_tape(w)?;
    let mut config = initial_configuration(a);
    let mut history = vec![config.clone()];
    for g in tape {
        config = step_configuration(a, &config, g)?;
        history.push(config.clone());
    }
    Ok(history)
}

fn initial_configuration(a: &Qcfa) -> Vec<Option<DensityMatrix>> {
    let mut config = vec![None; a.num_states()];
    config[a.initial_state] = Some(DensityMatrix::pure(&a.initial_quantum));
    config
}

fn step_configuration(
    a: &Qcfa,
    config: &[Option<DensityMatrix>],
    g: usize,
) -> Result<Vec<Option<DensityMatrix>>> {
    let mut next: Vec<Option<DensityMatrix>> = vec![None; a.num_states()];
    for (s, rho) in config.iter().enumerate() {
        let Some(rho) = rho else { continue };
        let rule = a.rule(s, g);
        let evolved = rho.conjugate_by(&rule.unitary)?;
        if rule.measurement.is_trivial() {
            add_into(&mut next[rule.next[0]], evolved)?;
            continue;
        }
        for (outcome, &t) in rule.measurement.outcomes.iter().zip(&rule.next) {
            add_into(&mut next[t], evolved.conjugate_by(&outcome.projector)?)?;
        }
    }
    Ok(next)
}

fn run_density(a: &Qcfa, w: &Word, record: bool) -> Result<RunOutcome> {
    let tape = a.alphabet.encode_tape(w)?;
    let masses = |config: &[Option<DensityMatrix>]| -> Vec<f64> {
        config
            .iter()
            .map(|rho| rho.as_ref().map_or(0.0, DensityMatrix::trace))
            .collect()
    };
    let mut config = initial_configuration(a);
    let mut trace = record.then(|| vec![masses(&config)]);
    for g in tape {
        config = step_configuration(a, &config, g)?;
        if let Some(t) = trace.as_mut() {
            t.push(masses(&config));
        }
    }
    finish(a, &masses(&config), trace)
}

fn finish(a: &Qcfa, mass: &[f64], trace: Option<Vec<Vec<f64>>>) -> Result<RunOutcome> {
    let accept: f64 = a.accepting.iter().map(|&s| mass[s]).sum();
    let reject: f64 = a.rejecting.iter().map(|&s| mass[s]).sum();
    let stray: f64 = mass
        .iter()
        .enumerate()
        .filter(|(s, _)| !a.accepting.contains(s) && !a.rejecting.contains(s))
        .map(|(_, m)| *m)
        .sum();
    if stray > TOL {
        return Err(Error::NonHalting { mass: stray });
    }
    Ok(RunOutcome {
        accept,
        reject,
        residual: 0.0,
        trace,
    })
}

fn add_into(slot: &mut Option<DensityMatrix>, part: DensityMatrix) -> Result<()> {
    match slot {
        Some(acc) => acc.accumulate(&part),
        None => {
            *slot = Some(part);
            Ok(())
        }
    }
}

/// Independent 1QCFA oracle: enumerates every measurement-outcome sequence
/// with pure-state collapse, weighting each leaf by the product of its branch
/// probabilities.
pub fn qcfa_run_branching_oracle(a: &Qcfa, w: &Word, cap: usize) -> Result<RunOutcome> {
    let tape = a.alphabet.encode_tape(w)?;
    let mut mass = vec![0.0; a.num_states()];
    let mut leaves = 0usize;
    let mut stack = vec![(0usize, a.initial_state, a.initial_quantum.clone(), 1.0f64)];
    while let Some((pos, s, psi, prob)) = stack.pop() {
        if pos == tape.len() {
            leaves += 1;
            if leaves > cap {
                return Err(Error::BranchCapExceeded { cap });
            }
            mass[s] += prob;
            continue;
        }
        let rule = a.rule(s, tape[pos]);
        let evolved = rule.unitary.mul_vec(&psi)?;
        for (outcome, &t) in rule.measurement.outcomes.iter().zip(&rule.next) {
            let projected = outcome.projector.mul_vec(&evolved)?;
            let p = projected.norm_sqr();
            if p < PRUNE_BELOW {
                continue;
            }
            stack.push((
                pos + 1,
                t,
                projected.scale(Complex::new(1.0 / p.sqrt(), 0.0)),
                prob * p,
            ));
        }
    }
    finish(a, &mass, None)
}

/// Independent MM-1QFA oracle: enumerates halting times explicitly and
/// applies the products in the `A_n ⋯ A_1` order (rightmost first).
pub fn mm1qfa_run_enumerated(m: &Mm1qfa, w: &Word) -> Result<RunOutcome> {
    let tape = m.alphabet.encode_tape(w)?;
    let non_halting = m.non_halting();
    let dim = m.dim;
    let halting_mass = |k: usize, projector: &ComplexMatrix| -> Result<f64> {
        // P · Θ_{σ_k} · ∏_{i=0}^{k-1} (P_n Θ_{σ_i}), built left to right as
        // a matrix and applied to |q₀⟩ once.
        let mut op = ComplexMatrix::identity(dim);
        for &g in &tape[..k] {
            op = non_halting.mul(&m.unitaries[g])?.mul(&op)?;
        }
        let full = projector.mul(&m.unitaries[tape[k]])?.mul(&op)?;
        Ok(full.mul_vec(&m.initial)?.norm_sqr())
    };
    let mut accept = 0.0;
    let mut reject = 0.0;
    for k in 0..tape.len() {
        accept += halting_mass(k, &m.accepting)?;
        reject += halting_mass(k, &m.rejecting)?;
    }
    let mut psi: ComplexVector = m.initial.clone();
    for &g in &tape {
        psi = non_halting.mul(&m.unitaries[g])?.mul_vec(&psi)?;
    }
    Ok(RunOutcome {
        accept,
        reject,
        residual: psi.norm_sqr(),
        trace: None,
    })
}

/// Result of a bounded-error recognition check over a finite word list.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionCheck {
    pub recognized: bool,
    /// Word whose correct-answer probability is smallest.
    pub worst_word: Option<Word>,
    /// Probability of the correct answer on `worst_word`.
    pub worst_correct: f64,
}

/// True iff every member is accepted and every non-member rejected with
/// probability at least `1 − ε`.
pub fn recognizes_with_error(
    a: &Qcfa,
    membership: impl Fn(&Word) -> bool,
    words: &[Word],
    epsilon: f64,
) -> Result<RecognitionCheck> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 1/2), got {epsilon}"
        )));
    }
    let mut check = RecognitionCheck {
        recognized: true,
        worst_word: None,
        worst_correct: 1.0,
    };
    for w in words {
        let run = qcfa_run(a, w)?;
        let correct = if membership(w) { run.accept } else { run.reject };
        if check.worst_word.is_none() || correct < check.worst_correct {
            check.worst_correct = correct;
            check.worst_word = Some(w.clone());
        }
    }
    // TOL absorbs rounding so exact machines pass at ε = 0.
    check.recognized = check.worst_correct >= 1.0 - epsilon - TOL;
    Ok(check)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::linalg::MeasurementFamily;
    use crate::models::{build_figure1_dfa, build_figure2_dfa, Alphabet, QcfaRule};

    fn rotation(theta: f64) -> ComplexMatrix {
        let (s, c) = theta.sin_cos();
        ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]).unwrap()
    }

    fn rotation_mo1qfa(theta: f64) -> Mo1qfa {
        let id = ComplexMatrix::identity(2);
        Mo1qfa {
            alphabet: Alphabet::from_chars("a").unwrap(),
            dim: 2,
            unitaries: vec![id.clone(), rotation(theta), id],
            initial: ComplexVector::basis(2, 0).unwrap(),
            accepting: ComplexMatrix::basis_projector(2, &[0]).unwrap(),
        }
    }

    /// Two states; every tape symbol (end-markers included) flips a fair
    /// coin between them. Only `s1` accepts.
    fn coin_pfa() -> Pfa {
        Pfa {
            states: vec!["s0".into(), "s1".into()],
            alphabet: Alphabet::from_chars("a").unwrap(),
            transitions: vec![vec![vec![0.5, 0.5]; 3]; 2],
            initial: 0,
            accepting: BTreeSet::from([1]),
            strict: true,
        }
    }

    #[test]
    fn dfa_examples() {
        let fig1 = build_figure1_dfa(3).unwrap();
        assert!(dfa_accepts(&fig1, &"aaa".into()).unwrap());
        assert!(!dfa_accepts(&fig1, &"ab".into()).unwrap());
        assert!(dfa_accepts(&build_figure2_dfa(), &Word::empty()).unwrap());
        assert!(matches!(
            dfa_accepts(&fig1, &"abc".into()),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn pfa_fair_coin_is_one_half() {
        let p = coin_pfa();
        assert!((pfa_accept_prob(&p, &"a".into()).unwrap() - 0.5).abs() < 1e-15);
        assert!((pfa_accept_prob(&p, &Word::empty()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pfa_empty_word_matches_monte_carlo() {
        // Coin only on ¢; `$` keeps the state. Exact value is 1/2.
        let mut p = coin_pfa();
        p.transitions[0][2] = vec![1.0, 0.0];
        p.transitions[1][2] = vec![0.0, 1.0];
        let exact = pfa_accept_prob(&p, &Word::empty()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..samples {
            let mut s = p.initial;
            for g in [0usize, 2] {
                let u: f64 = rng.gen();
                let row = &p.transitions[s][g];
                let mut acc = 0.0;
                for (t, w) in row.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        s = t;
                        break;
                    }
                }
            }
            if p.accepting.contains(&s) {
                hits += 1;
            }
        }
        let estimate = hits as f64 / samples as f64;
        assert!((exact - estimate).abs() < 1e-2, "{exact} vs {estimate}");
    }

    #[test]
    fn mo1qfa_rotation_examples() {
        let m = rotation_mo1qfa(2.0 * PI / 3.0);
        assert!((mo1qfa_accept_prob(&m, &"a".into()).unwrap() - 0.25).abs() < 1e-12);
        assert!((mo1qfa_accept_prob(&m, &"aaa".into()).unwrap() - 1.0).abs() < 1e-12);
        let stationary = rotation_mo1qfa(0.0);
        for w in ["", "a", "aaaa"] {
            assert!((mo1qfa_accept_prob(&stationary, &w.into()).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mm1qfa_immediate_halting_and_silence() {
        let id = ComplexMatrix::identity(2);
        let mut m = Mm1qfa {
            alphabet: Alphabet::from_chars("a").unwrap(),
            dim: 2,
            unitaries: vec![id.clone(); 3],
            initial: ComplexVector::basis(2, 0).unwrap(),
            accepting: ComplexMatrix::basis_projector(2, &[0]).unwrap(),
            rejecting: ComplexMatrix::basis_projector(2, &[1]).unwrap(),
        };
        let run = mm1qfa_run(&m, &"aa".into()).unwrap();
        assert_eq!((run.accept, run.reject, run.residual), (1.0, 0.0, 0.0));

        m.accepting = ComplexMatrix::zeros(2, 2);
        m.rejecting = ComplexMatrix::zeros(2, 2);
        let run = mm1qfa_run(&m, &"aa".into()).unwrap();
        assert_eq!((run.accept, run.reject), (0.0, 0.0));
        assert!((run.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mm1qfa_product_order_is_rightmost_first() {
        // Θ_¢ = X swaps |0⟩ and |1⟩; Θ_a = rotation. With P_a = |1⟩⟨1| and
        // P_r = 0, P_n = |0⟩⟨0|: ¢ sends all mass to |1⟩ which halts at k = 0.
        // Reversing the product order would apply the rotation first and
        // change the answer.
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let m = Mm1qfa {
            alphabet: Alphabet::from_chars("a").unwrap(),
            dim: 2,
            unitaries: vec![x, rotation(0.3), ComplexMatrix::identity(2)],
            initial: ComplexVector::basis(2, 0).unwrap(),
            accepting: ComplexMatrix::basis_projector(2, &[1]).unwrap(),
            rejecting: ComplexMatrix::zeros(2, 2),
        };
        let direct = mm1qfa_run(&m, &"a".into()).unwrap();
        let enumerated = mm1qfa_run_enumerated(&m, &"a".into()).unwrap();
        assert!((direct.accept - 1.0).abs() < 1e-15);
        assert!((enumerated.accept - 1.0).abs() < 1e-15);
    }

    fn coin_qcfa() -> Qcfa {
        // Classical chain s0 -> s1 -> ... flipping a coin on each `a`.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]).unwrap();
        let coin = MeasurementFamily::from_basis_groups(2, &[("0", &[0]), ("1", &[1])]).unwrap();
        let alphabet = Alphabet::from_chars("a").unwrap();
        let heads = 0;
        let tails = 1;
        let states = vec!["heads".to_string(), "tails".to_string()];
        let mut rules = Vec::new();
        for _ in 0..2 {
            rules.push(vec![
                QcfaRule::classical(2, heads),
                QcfaRule {
                    unitary: hadamard.clone(),
                    measurement: coin.clone(),
                    next: vec![heads, tails],
                },
                QcfaRule::classical(2, heads),
            ]);
        }
        // `$` keeps the current state.
        rules[1][2] = QcfaRule::classical(2, tails);
        Qcfa {
            alphabet,
            dim: 2,
            states,
            rules,
            initial_quantum: ComplexVector::basis(2, 0).unwrap(),
            initial_state: heads,
            accepting: BTreeSet::from([heads]),
            rejecting: BTreeSet::from([tails]),
        }
    }

    #[test]
    fn coin_gadget_gives_one_half() {
        let a = coin_qcfa();
        assert!(a.validate().is_valid());
        let run = qcfa_run(&a, &"a".into()).unwrap();
        assert!((run.accept - 0.5).abs() < 1e-12);
        assert!((run.reject - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coin_gadget_twice_has_four_quarter_branches() {
        let a = coin_qcfa();
        let oracle = qcfa_run_branching_oracle(&a, &"aa".into(), 10).unwrap();
        assert!((oracle.accept - 0.5).abs() < 1e-12);
        // ¢, a, a, $: only the two `a` steps branch.
        assert!(matches!(
            qcfa_run_branching_oracle(&a, &"aa".into(), 3),
            Err(Error::BranchCapExceeded { cap: 3 })
        ));
        let density = qcfa_run(&a, &"aa".into()).unwrap();
        assert!((density.accept - oracle.accept).abs() < 1e-12);
    }

    #[test]
    fn traced_run_conserves_probability() {
        let a = coin_qcfa();
        let run = qcfa_run_traced(&a, &"aaa".into()).unwrap();
        let trace = run.trace.unwrap();
        assert_eq!(trace.len(), 6);
        for step in trace {
            assert!((step.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn recognition_rejects_bad_epsilon() {
        let a = coin_qcfa();
        assert!(recognizes_with_error(&a, |_| true, &[], 0.5).is_err());
        let check = recognizes_with_error(&a, |_| true, &["a".into()], 0.49).unwrap();
        assert!(!check.recognized);
        assert_eq!(check.worst_word, Some("a".into()));
    }
}
