//! Random machine generators for property tests, cross-engine sweeps and
//! benchmarks. Every generator produces a machine that passes validation.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::linalg::{Complex, ComplexMatrix, ComplexVector, MeasurementFamily};
use crate::models::{Alphabet, Dfa, Mm1qfa, Mo1qfa, Pfa, Qcfa, QcfaRule, Qfacl};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; `1 - u` keeps the logarithm finite.
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    (-2.0 * (1.0 - u).ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Columns of a random unitary, obtained by Gram-Schmidt on a complex
/// Gaussian matrix.
pub fn random_orthonormal_basis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<ComplexVector> {
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v: Vec<Complex> = (0..dim)
            .map(|_| Complex::new(gaussian(rng), gaussian(rng)))
            .collect();
        for b in &basis {
            let overlap: Complex = b
                .entries()
                .iter()
                .zip(&v)
                .map(|(x, y)| x.conj() * y)
                .sum();
            for (vi, bi) in v.iter_mut().zip(b.entries()) {
                *vi -= overlap * bi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        basis.push(ComplexVector::new(v.into_iter().map(|z| z / norm).collect()));
    }
    basis
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let basis = random_orthonormal_basis(rng, dim);
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (j, col) in basis.iter().enumerate() {
        for i in 0..dim {
            u[(i, j)] = col[i];
        }
    }
    u
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    random_orthonormal_basis(rng, dim).swap_remove(0)
}

/// Projective measurement with the given labels in a random basis; each basis
/// vector is assigned to a uniformly chosen outcome, so some projectors may
/// be zero.
pub fn random_measurement<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    labels: &[&str],
) -> MeasurementFamily {
    let basis = random_orthonormal_basis(rng, dim);
    let mut groups: Vec<Vec<ComplexVector>> = vec![Vec::new(); labels.len()];
    for v in basis {
        groups[rng.gen_range(0..labels.len())].push(v);
    }
    MeasurementFamily::new(
        labels
            .iter()
            .zip(groups)
            .map(|(label, vs)| {
                (
                    label.to_string(),
                    ComplexMatrix::span_projector(dim, &vs).expect("dimensions agree"),
                )
            })
            .collect(),
    )
}

fn state_names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize) -> BTreeSet<usize> {
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}

pub fn random_dfa<R: Rng + ?Sized>(rng: &mut R, states: usize, alphabet: &Alphabet) -> Dfa {
    Dfa {
        states: state_names("d", states),
        alphabet: alphabet.clone(),
        transitions: (0..states)
            .map(|_| (0..alphabet.len()).map(|_| rng.gen_range(0..states)).collect())
            .collect(),
        initial: 0,
        accepting: random_subset(rng, states),
    }
}

/// Coin-tossing PFA: every row is either deterministic or a fair coin
/// between two distinct states.
pub fn random_strict_pfa<R: Rng + ?Sized>(rng: &mut R, states: usize, alphabet: &Alphabet) -> Pfa {
    let indices: Vec<usize> = (0..states).collect();
    let transitions = (0..states)
        .map(|_| {
            (0..alphabet.tape_len())
                .map(|_| {
                    let mut row = vec![0.0; states];
                    if states > 1 && rng.gen_bool(0.5) {
                        for &t in indices.choose_multiple(rng, 2) {
                            row[t] = 0.5;
                        }
                    } else {
                        row[rng.gen_range(0..states)] = 1.0;
                    }
                    row
                })
                .collect()
        })
        .collect();
    Pfa {
        states: state_names("p", states),
        alphabet: alphabet.clone(),
        transitions,
        initial: 0,
        accepting: random_subset(rng, states),
        strict: true,
    }
}

fn random_unitaries<R: Rng + ?Sized>(rng: &mut R, dim: usize, alphabet: &Alphabet) -> Vec<ComplexMatrix> {
    (0..alphabet.tape_len())
        .map(|_| random_unitary(rng, dim))
        .collect()
}

pub fn random_mo1qfa<R: Rng + ?Sized>(rng: &mut R, dim: usize, alphabet: &Alphabet) -> Mo1qfa {
    let basis = random_orthonormal_basis(rng, dim);
    let chosen: Vec<ComplexVector> = basis.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    Mo1qfa {
        alphabet: alphabet.clone(),
        dim,
        unitaries: random_unitaries(rng, dim, alphabet),
        initial: random_state(rng, dim),
        accepting: ComplexMatrix::span_projector(dim, &chosen).expect("dimensions agree"),
    }
}

pub fn random_mm1qfa<R: Rng + ?Sized>(rng: &mut R, dim: usize, alphabet: &Alphabet) -> Mm1qfa {
    let m = random_measurement(rng, dim, &["a", "r", "n"]);
    Mm1qfa {
        alphabet: alphabet.clone(),
        dim,
        unitaries: random_unitaries(rng, dim, alphabet),
        initial: random_state(rng, dim),
        accepting: m.outcomes[0].projector.clone(),
        rejecting: m.outcomes[1].projector.clone(),
    }
}

/// QFA with a random observable over `labels` and a random control DFA with
/// `control_states` states over the same labels.
pub fn random_qfacl<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    alphabet: &Alphabet,
    labels: &[&str],
    control_states: usize,
) -> Qfacl {
    let control_alphabet = Alphabet::new(labels).expect("distinct labels");
    Qfacl {
        alphabet: alphabet.clone(),
        dim,
        unitaries: random_unitaries(rng, dim, alphabet),
        initial: random_state(rng, dim),
        observable: random_measurement(rng, dim, labels),
        control: random_dfa(rng, control_states, &control_alphabet),
    }
}

/// General 1QCFA with up to `max_outcomes` outcomes per measurement. At least
/// one state accepts and one rejects, and `$` only leads into halting states,
/// so the machine always halts.
pub fn random_qcfa<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    states: usize,
    alphabet: &Alphabet,
    max_outcomes: usize,
) -> Qcfa {
    assert!(states >= 2, "need room for an accepting and a rejecting state");
    let mut order: Vec<usize> = (0..states).collect();
    order.shuffle(rng);
    let mut accepting = BTreeSet::from([order[0]]);
    let mut rejecting = BTreeSet::from([order[1]]);
    for &s in &order[2..] {
        match rng.gen_range(0..3) {
            0 => {
                accepting.insert(s);
            }
            1 => {
                rejecting.insert(s);
            }
            _ => {}
        }
    }
    let halting: Vec<usize> = accepting.union(&rejecting).copied().collect();
    let labels = ["x", "y", "z", "w"];
    let end = alphabet.right_end_index();
    let rules = (0..states)
        .map(|_| {
            (0..alphabet.tape_len())
                .map(|g| {
                    let outcomes = rng.gen_range(1..=max_outcomes.clamp(1, labels.len()));
                    let measurement = if outcomes == 1 {
                        MeasurementFamily::trivial(dim)
                    } else {
                        random_measurement(rng, dim, &labels[..outcomes])
                    };
                    let next = (0..outcomes)
                        .map(|_| {
                            if g == end {
                                *halting.choose(rng).expect("nonempty")
                            } else {
                                rng.gen_range(0..states)
                            }
                        })
                        .collect();
                    let unitary = if rng.gen_bool(0.8) {
                        random_unitary(rng, dim)
                    } else {
                        ComplexMatrix::identity(dim)
                    };
                    QcfaRule {
                        unitary,
                        measurement,
                        next,
                    }
                })
                .collect()
        })
        .collect();
    Qcfa {
        alphabet: alphabet.clone(),
        dim,
        states: state_names("s", states),
        rules,
        initial_quantum: random_state(rng, dim),
        initial_state: 0,
        accepting,
        rejecting,
    }
}
