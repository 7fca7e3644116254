//! Compilers from the classical and quantum automata models to 1QCFA.
//!
//! | source       | quantum dim | classical states |
//! |--------------|-------------|------------------|
//! | DFA, n st.   | 1           | n + 1            |
//! | 1PFA, n st.  | 2           | n + 1            |
//! | MO-1QFA, n   | n           | 3                |
//! | MM-1QFA, n   | n           | 3                |
//! | 1QFACL, n/m  | n           | m + 1            |
//!
//! The extra classical state in the DFA, 1PFA and 1QFACL cases is a
//! rejecting sink entered at `$` whenever the source would not accept.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, MeasurementFamily};
use crate::models::{
    Dfa, MachineDescription, Mm1qfa, Mo1qfa, Pfa, Qcfa, QcfaRule, Qfacl, ACCEPT_LABEL,
    CONTINUE_LABEL, REJECT_LABEL,
};

/// Returns `base`, or `base` with primes appended, so that it does not clash
/// with any name in `taken`.
pub(crate) fn fresh_name(taken: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

fn ensure_valid(report: crate::models::ValidationReport) -> Result<()> {
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidMachine(report.to_string()))
    }
}

fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]).expect("2x2 literal")
}

fn coin_measurement() -> MeasurementFamily {
    MeasurementFamily::from_basis_groups(2, &[("0", &[0]), ("1", &[1])]).expect("2x2 literal")
}

/// DFA with `n` states to a 1QCFA with one quantum state and `n + 1`
/// classical states.
pub fn compile_dfa(d: &Dfa) -> Result<Qcfa> {
    ensure_valid(d.validate())?;
    let n = d.num_states();
    let sink = n;
    let mut states = d.states.clone();
    states.push(fresh_name(&d.states, "s_r"));
    let end = d.alphabet.right_end_index();

    let mut rules: Vec<Vec<QcfaRule>> = (0..n)
        .map(|s| {
            (0..d.alphabet.tape_len())
                .map(|g| {
                    let next = if g == 0 {
                        s
                    } else if g == end {
                        if d.is_accepting(s) {
                            s
                        } else {
                            sink
                        }
                    } else {
                        d.transitions[s][g - 1]
                    };
                    QcfaRule::classical(1, next)
                })
                .collect()
        })
        .collect();
    rules.push(absorbing_rules(1, d.alphabet.tape_len(), sink));

    Ok(Qcfa {
        alphabet: d.alphabet.clone(),
        dim: 1,
        states,
        rules,
        initial_quantum: ComplexVector::basis(1, 0)?,
        initial_state: d.initial,
        accepting: d.accepting.clone(),
        rejecting: BTreeSet::from([sink]),
    })
}

/// Coin-tossing 1PFA with `n` states to a 1QCFA with two quantum states and
/// `n + 1` classical states.
///
/// A row that moves to `t₁ < t₂` with probability 1/2 each is realized by
/// the Hadamard-type coin operator followed by a computational-basis
/// measurement: outcome `0` leads to `t₁`, outcome `1` to `t₂`. The qubit is
/// always in a basis state before the coin, so both outcomes are equally
/// likely.
pub fn compile_pfa(p: &Pfa) -> Result<Qcfa> {
    ensure_valid(p.validate())?;
    let n = p.num_states();
    let sink = n;
    let end = p.alphabet.right_end_index();
    let route = |g: usize, t: usize| {
        if g == end && !p.accepting.contains(&t) {
            sink
        } else {
            t
        }
    };

    let mut rules = Vec::with_capacity(n + 1);
    for s in 0..n {
        let mut block = Vec::with_capacity(p.alphabet.tape_len());
        for (g, row) in p.transitions[s].iter().enumerate() {
            let support: Vec<(usize, f64)> = row
                .iter()
                .copied()
                .enumerate()
                .filter(|(_, w)| *w != 0.0)
                .collect();
            let rule = match support.as_slice() {
                [(t, w)] if *w == 1.0 => QcfaRule::classical(2, route(g, *t)),
                [(t1, w1), (t2, w2)] if *w1 == 0.5 && *w2 == 0.5 => QcfaRule {
                    unitary: hadamard(),
                    measurement: coin_measurement(),
                    next: vec![route(g, *t1), route(g, *t2)],
                },
                _ => {
                    return Err(Error::Unsupported(format!(
                        "row ({}, {}) is not a fair coin or a deterministic move; \
                         only coin-tossing PFAs (weights 0, 1/2, 1) can be compiled",
                        p.states[s],
                        p.alphabet.tape_name(g)
                    )))
                }
            };
            block.push(rule);
        }
        rules.push(block);
    }
    rules.push(absorbing_rules(2, p.alphabet.tape_len(), sink));

    let mut states = p.states.clone();
    states.push(fresh_name(&p.states, "s_r"));
    Ok(Qcfa {
        alphabet: p.alphabet.clone(),
        dim: 2,
        states,
        rules,
        initial_quantum: ComplexVector::basis(2, 0)?,
        initial_state: p.initial,
        accepting: p.accepting.clone(),
        rejecting: BTreeSet::from([sink]),
    })
}

const S0: usize = 0;
const SA: usize = 1;
const SR: usize = 2;

fn three_states() -> Vec<String> {
    vec!["s0".into(), "s_a".into(), "s_r".into()]
}

/// MO-1QFA to a 1QCFA with the same quantum dimension and three classical
/// states. The only non-trivial measurement is `{P_a, I − P_a}` at `$`.
pub fn compile_mo1qfa(m: &Mo1qfa) -> Result<Qcfa> {
    ensure_valid(m.validate())?;
    let end = m.alphabet.right_end_index();
    let final_measurement = MeasurementFamily::new(vec![
        (ACCEPT_LABEL.into(), m.accepting.clone()),
        (
            REJECT_LABEL.into(),
            ComplexMatrix::identity(m.dim).sub(&m.accepting)?,
        ),
    ]);
    let rules = (0..3)
        .map(|s| {
            (0..m.alphabet.tape_len())
                .map(|g| {
                    if g == end {
                        QcfaRule {
                            unitary: m.unitaries[g].clone(),
                            measurement: final_measurement.clone(),
                            next: vec![SA, SR],
                        }
                    } else {
                        QcfaRule {
                            unitary: m.unitaries[g].clone(),
                            measurement: MeasurementFamily::trivial(m.dim),
                            next: vec![s],
                        }
                    }
                })
                .collect()
        })
        .collect();
    Ok(Qcfa {
        alphabet: m.alphabet.clone(),
        dim: m.dim,
        states: three_states(),
        rules,
        initial_quantum: m.initial.clone(),
        initial_state: S0,
        accepting: BTreeSet::from([SA]),
        rejecting: BTreeSet::from([SR]),
    })
}

/// MM-1QFA to a 1QCFA with the same quantum dimension and three classical
/// states. `{P_a, P_r, P_n}` is measured after every symbol; mass still
/// non-halting at `$` is routed to the rejecting state. The halting states
/// are absorbing with `Θ = I` and a trivial measurement.
pub fn compile_mm1qfa(m: &Mm1qfa) -> Result<Qcfa> {
    ensure_valid(m.validate())?;
    let end = m.alphabet.right_end_index();
    let measurement = m.measurement();
    debug_assert_eq!(
        measurement.labels().collect::<Vec<_>>(),
        [ACCEPT_LABEL, REJECT_LABEL, CONTINUE_LABEL]
    );
    let running = (0..m.alphabet.tape_len())
        .map(|g| QcfaRule {
            unitary: m.unitaries[g].clone(),
            measurement: measurement.clone(),
            next: vec![SA, SR, if g == end { SR } else { S0 }],
        })
        .collect();
    let rules = vec![
        running,
        absorbing_rules(m.dim, m.alphabet.tape_len(), SA),
        absorbing_rules(m.dim, m.alphabet.tape_len(), SR),
    ];
    Ok(Qcfa {
        alphabet: m.alphabet.clone(),
        dim: m.dim,
        states: three_states(),
        rules,
        initial_quantum: m.initial.clone(),
        initial_state: S0,
        accepting: BTreeSet::from([SA]),
        rejecting: BTreeSet::from([SR]),
    })
}

/// 1QFACL whose control DFA has `m` states to a 1QCFA with the same quantum
/// dimension and `m + 1` classical states: the control DFA reads the
/// observable's outcomes, and at `$` any non-accepting successor is
/// replaced by a rejecting sink.
pub fn compile_qfacl(q: &Qfacl) -> Result<Qcfa> {
    ensure_valid(q.validate())?;
    let letters = q.outcome_letters()?;
    let control = &q.control;
    let m = control.num_states();
    let sink = m;
    let end = q.alphabet.right_end_index();
    let mut rules: Vec<Vec<QcfaRule>> = (0..m)
        .map(|s| {
            (0..q.alphabet.tape_len())
                .map(|g| QcfaRule {
                    unitary: q.unitaries[g].clone(),
                    measurement: q.observable.clone(),
                    next: letters
                        .iter()
                        .map(|&c| {
                            let t = control.transitions[s][c];
                            if g == end && !control.is_accepting(t) {
                                sink
                            } else {
                                t
                            }
                        })
                        .collect(),
                })
                .collect()
        })
        .collect();
    rules.push(absorbing_rules(q.dim, q.alphabet.tape_len(), sink));
    let mut states = control.states.clone();
    states.push(fresh_name(&control.states, "s_r"));
    Ok(Qcfa {
        alphabet: q.alphabet.clone(),
        dim: q.dim,
        states,
        rules,
        initial_quantum: q.initial.clone(),
        initial_state: control.initial,
        accepting: control.accepting.clone(),
        rejecting: BTreeSet::from([sink]),
    })
}

/// Dispatches on the machine kind.
pub fn compile(machine: &MachineDescription) -> Result<Qcfa> {
    match machine {
        MachineDescription::Dfa(m) => compile_dfa(m),
        MachineDescription::Pfa(m) => compile_pfa(m),
        MachineDescription::Mo1qfa(m) => compile_mo1qfa(m),
        MachineDescription::Mm1qfa(m) => compile_mm1qfa(m),
        MachineDescription::Qfacl(m) => compile_qfacl(m),
        MachineDescription::Qcfa(_) => Err(Error::Unsupported("already a 1QCFA".into())),
    }
}

/// Rules for a state that never leaves itself and never touches the
/// quantum register.
pub(crate) fn absorbing_rules(dim: usize, tape_len: usize, state: usize) -> Vec<QcfaRule> {
    (0..tape_len)
        .map(|_| QcfaRule::classical(dim, state))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::models::{build_figure1_dfa, build_figure2_dfa, Alphabet, Word};
    use crate::semantics::{
        dfa_accepts, mm1qfa_run, mo1qfa_accept_prob, pfa_accept_prob, qcfa_run, qfacl_accept_prob,
    };

    #[test]
    fn figure2_compiles_to_four_states() {
        let d = build_figure2_dfa();
        let a = compile_dfa(&d).unwrap();
        assert_eq!((a.dim, a.num_states()), (1, 4));
        assert!(a.validate().is_valid(), "{}", a.validate());
        for w in d.alphabet.words_up_to(6) {
            let run = qcfa_run(&a, &w).unwrap();
            let expected = if dfa_accepts(&d, &w).unwrap() { 1.0 } else { 0.0 };
            assert_eq!(run.accept, expected, "{w}");
            assert_eq!(run.reject, 1.0 - expected, "{w}");
        }
    }

    #[test]
    fn figure1_compiles_equivalently() {
        let d = build_figure1_dfa(3).unwrap();
        let a = compile_dfa(&d).unwrap();
        assert_eq!(a.num_states(), 9);
        for w in d.alphabet.words_up_to(9) {
            let accepted = qcfa_run(&a, &w).unwrap().accept == 1.0;
            assert_eq!(accepted, dfa_accepts(&d, &w).unwrap(), "{w}");
        }
    }

    #[test]
    fn single_state_dfa() {
        let d = Dfa::from_edges(
            &["s"],
            Alphabet::from_chars("ab").unwrap(),
            &[("s", "a", "s"), ("s", "b", "s")],
            "s",
            &["s"],
        )
        .unwrap();
        let a = compile_dfa(&d).unwrap();
        assert_eq!(a.num_states(), 2);
        assert_eq!(qcfa_run(&a, &"abba".into()).unwrap().accept, 1.0);
    }

    #[test]
    fn sink_name_avoids_collisions() {
        let d = Dfa::from_edges(
            &["s_r"],
            Alphabet::from_chars("a").unwrap(),
            &[("s_r", "a", "s_r")],
            "s_r",
            &[],
        )
        .unwrap();
        let a = compile_dfa(&d).unwrap();
        assert_eq!(a.states, vec!["s_r".to_string(), "s_r'".to_string()]);
    }

    fn coin_pfa() -> Pfa {
        Pfa {
            states: vec!["s0".into(), "s1".into()],
            alphabet: Alphabet::from_chars("a").unwrap(),
            transitions: vec![
                vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![1.0, 0.0]],
                vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![0.0, 1.0]],
            ],
            initial: 0,
            accepting: BTreeSet::from([1]),
            strict: true,
        }
    }

    #[test]
    fn fair_coin_pfa() {
        let p = coin_pfa();
        let a = compile_pfa(&p).unwrap();
        assert_eq!((a.dim, a.num_states()), (2, 3));
        assert!(a.validate().is_valid());
        let w: Word = "a".into();
        assert!((qcfa_run(&a, &w).unwrap().accept - 0.5).abs() < 1e-12);
        assert!((pfa_accept_prob(&p, &w).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn general_pfa_is_rejected() {
        let mut p = coin_pfa();
        p.strict = false;
        p.transitions[0][1] = vec![0.25, 0.75];
        assert!(matches!(compile_pfa(&p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rotation_mo1qfa() {
        let (s, c) = (2.0 * PI / 3.0).sin_cos();
        let rot = ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]).unwrap();
        let id = ComplexMatrix::identity(2);
        let m = Mo1qfa {
            alphabet: Alphabet::from_chars("a").unwrap(),
            dim: 2,
            unitaries: vec![id.clone(), rot, id],
            initial: ComplexVector::basis(2, 0).unwrap(),
            accepting: ComplexMatrix::basis_projector(2, &[0]).unwrap(),
        };
        let a = compile_mo1qfa(&m).unwrap();
        assert_eq!((a.dim, a.num_states()), (2, 3));
        assert!(a.validate().is_valid());
        let w: Word = "a".into();
        assert!((qcfa_run(&a, &w).unwrap().accept - 0.25).abs() < 1e-12);
        assert!((mo1qfa_accept_prob(&m, &w).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn silent_mm1qfa_rejects_everything() {
        let id = ComplexMatrix::identity(2);
        let m = Mm1qfa {
            alphabet: Alphabet::from_chars("a").unwrap(),
            dim: 2,
            unitaries: vec![id; 3],
            initial: ComplexVector::basis(2, 0).unwrap(),
            accepting: ComplexMatrix::zeros(2, 2),
            rejecting: ComplexMatrix::zeros(2, 2),
        };
        let a = compile_mm1qfa(&m).unwrap();
        assert!(a.validate().is_valid());
        for w in ["", "a", "aaa"] {
            let run = qcfa_run(&a, &w.into()).unwrap();
            assert_eq!(run.accept, 0.0);
            assert!((run.reject - 1.0).abs() < 1e-12);
            let raw = mm1qfa_run(&m, &w.into()).unwrap();
            assert!((raw.reject + raw.residual - run.reject).abs() < 1e-12);
        }
    }

    #[test]
    fn immediately_accepting_mm1qfa() {
        let id = ComplexMatrix::identity(2);
        let m = Mm1qfa {
            alphabet: Alphabet::from_chars("a").unwrap(),
            dim: 2,
            unitaries: vec![id; 3],
            initial: ComplexVector::basis(2, 0).unwrap(),
            accepting: ComplexMatrix::basis_projector(2, &[0]).unwrap(),
            rejecting: ComplexMatrix::zeros(2, 2),
        };
        let a = compile_mm1qfa(&m).unwrap();
        for w in ["", "a", "aa"] {
            assert!((qcfa_run(&a, &w.into()).unwrap().accept - 1.0).abs() < 1e-12);
        }
    }

    fn trivial_qfacl(accepting: bool) -> Qfacl {
        let control_alphabet = Alphabet::new(&["c"]).unwrap();
        let control = Dfa::from_edges(
            &["k"],
            control_alphabet,
            &[("k", "c", "k")],
            "k",
            if accepting { &["k"] } else { &[] },
        )
        .unwrap();
        Qfacl {
            alphabet: Alphabet::from_chars("ab").unwrap(),
            dim: 1,
            unitaries: vec![ComplexMatrix::identity(1); 4],
            initial: ComplexVector::basis(1, 0).unwrap(),
            observable: MeasurementFamily::new(vec![("c".into(), ComplexMatrix::identity(1))]),
            control,
        }
    }

    #[test]
    fn trivial_control_languages() {
        let all = trivial_qfacl(true);
        let a = compile_qfacl(&all).unwrap();
        assert_eq!(a.num_states(), 2);
        assert!(a.validate().is_valid());
        let none = trivial_qfacl(false);
        let b = compile_qfacl(&none).unwrap();
        for w in ["", "ab", "bba"] {
            assert_eq!(qcfa_run(&a, &w.into()).unwrap().accept, 1.0);
            assert_eq!(qfacl_accept_prob(&all, &w.into()).unwrap(), 1.0);
            assert_eq!(qcfa_run(&b, &w.into()).unwrap().accept, 0.0);
            assert_eq!(qfacl_accept_prob(&none, &w.into()).unwrap(), 0.0);
        }
    }

    #[test]
    fn qcfa_input_is_refused() {
        let a = compile_dfa(&build_figure2_dfa()).unwrap();
        assert!(matches!(
            compile(&MachineDescription::Qcfa(a)),
            Err(Error::Unsupported(msg)) if msg == "already a 1QCFA"
        ));
    }
}
