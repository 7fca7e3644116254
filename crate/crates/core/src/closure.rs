//! Intersection, union and complement of 1QCFA, plus alphabet extension.
//!
//! Product machines run both components side by side on the tensor product
//! of their quantum registers. Classical states are pairs `<s1,s2>` indexed
//! left-major (`i1 * m2 + i2`), joint outcomes are label pairs `c1|c2` with
//! tensor-product projectors.

use std::collections::BTreeSet;

use crate::compile::{absorbing_rules, fresh_name};
use crate::error::{Error, Result};
use crate::linalg::{validate_measurement, TOL};
use crate::models::{Alphabet, Qcfa, QcfaRule};

/// Bounded-error budget `ε ∈ [0, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ErrorBudget(f64);

impl ErrorBudget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "error budget must lie in [0, 1/2), got {epsilon}"
            )));
        }
        Ok(Self(epsilon))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Error of a product machine whose components err independently:
/// `ε₁ + ε₂ − ε₁ε₂`.
pub fn combine_error(e1: ErrorBudget, e2: ErrorBudget) -> Result<ErrorBudget> {
    ErrorBudget::new(e1.0 + e2.0 - e1.0 * e2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphabetMode {
    /// Keep only symbols both machines read.
    #[default]
    Intersect,
    /// Read every symbol of either machine; a machine that meets a foreign
    /// symbol falls into a fresh rejecting sink.
    UnionWithExtension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductOp {
    Intersect,
    Union,
}

pub fn intersect(a: &Qcfa, b: &Qcfa) -> Result<Qcfa> {
    product(a, b, ProductOp::Intersect, AlphabetMode::Intersect)
}

pub fn union(a: &Qcfa, b: &Qcfa) -> Result<Qcfa> {
    product(a, b, ProductOp::Union, AlphabetMode::Intersect)
}

/// Runs `a` and `b` in parallel. The accepting and rejecting sets depend on
/// `op`; everything else is shared between intersection and union.
pub fn product(a: &Qcfa, b: &Qcfa, op: ProductOp, mode: AlphabetMode) -> Result<Qcfa> {
    let (a, b, alphabet) = match mode {
        AlphabetMode::Intersect => {
            let shared: Vec<&String> = a
                .alphabet
                .symbols()
                .iter()
                .filter(|s| b.alphabet.contains(s))
                .collect();
            if shared.is_empty() {
                return Err(Error::AlphabetMismatch(
                    "the input alphabets have no symbol in common".into(),
                ));
            }
            (a.clone(), b.clone(), Alphabet::new(&shared)?)
        }
        AlphabetMode::UnionWithExtension => {
            let mut symbols: Vec<String> = a.alphabet.symbols().to_vec();
            for s in b.alphabet.symbols() {
                if !a.alphabet.contains(s) {
                    symbols.push(s.clone());
                }
            }
            let target = Alphabet::new(&symbols)?;
            let widen = |m: &Qcfa| -> Result<Qcfa> {
                if m.alphabet.len() == target.len() {
                    Ok(m.clone())
                } else {
                    extend_alphabet(m, &target)
                }
            };
            (widen(a)?, widen(b)?, target)
        }
    };

    let m2 = b.num_states();
    let pair = |s1: usize, s2: usize| s1 * m2 + s2;

    let mut states = Vec::with_capacity(a.num_states() * m2);
    let mut rules = Vec::with_capacity(a.num_states() * m2);
    for (s1, name1) in a.states.iter().enumerate() {
        for (s2, name2) in b.states.iter().enumerate() {
            states.push(format!("<{name1},{name2}>"));
            let mut block = Vec::with_capacity(alphabet.tape_len());
            for g in 0..alphabet.tape_len() {
                let name = alphabet.tape_name(g);
                let r1 = a.rule(s1, a.alphabet.tape_index(name).expect("alphabet subset"));
                let r2 = b.rule(s2, b.alphabet.tape_index(name).expect("alphabet subset"));
                let mut next = Vec::with_capacity(r1.next.len() * r2.next.len());
                for &t1 in &r1.next {
                    for &t2 in &r2.next {
                        next.push(pair(t1, t2));
                    }
                }
                block.push(QcfaRule {
                    unitary: r1.unitary.tensor(&r2.unitary),
                    measurement: r1.measurement.tensor(&r2.measurement),
                    next,
                });
            }
            rules.push(block);
        }
    }

    let pairs = |x: &BTreeSet<usize>, y: &BTreeSet<usize>| -> BTreeSet<usize> {
        x.iter()
            .flat_map(|&s1| y.iter().map(move |&s2| pair(s1, s2)))
            .collect()
    };
    let both_accept = pairs(&a.accepting, &b.accepting);
    let both_reject = pairs(&a.rejecting, &b.rejecting);
    let mixed: BTreeSet<usize> = pairs(&a.accepting, &b.rejecting)
        .union(&pairs(&a.rejecting, &b.accepting))
        .copied()
        .collect();
    let (accepting, rejecting) = match op {
        ProductOp::Intersect => (both_accept, mixed.union(&both_reject).copied().collect()),
        ProductOp::Union => (mixed.union(&both_accept).copied().collect(), both_reject),
    };

    let machine = Qcfa {
        alphabet,
        dim: a.dim * b.dim,
        states,
        rules,
        initial_quantum: a.initial_quantum.tensor(&b.initial_quantum),
        initial_state: pair(a.initial_state, b.initial_state),
        accepting,
        rejecting,
    };
    // Joint measurements are complete by construction; recheck anyway since
    // every downstream engine assumes it.
    for block in &machine.rules {
        for rule in block {
            if !validate_measurement(&rule.measurement, TOL)? {
                return Err(Error::InvalidMachine(
                    "joint measurement is not a projective measurement".into(),
                ));
            }
        }
    }
    Ok(machine)
}

/// Swaps the accepting and rejecting sets.
pub fn complement(a: &Qcfa) -> Qcfa {
    Qcfa {
        accepting: a.rejecting.clone(),
        rejecting: a.accepting.clone(),
        ..a.clone()
    }
}

/// Widens the input alphabet to `target`, adding a rejecting sink that
/// absorbs every run which reads a symbol outside the original alphabet.
/// On new symbols `Θ = I` and the measurement is trivial.
pub fn extend_alphabet(a: &Qcfa, target: &Alphabet) -> Result<Qcfa> {
    if !a.alphabet.is_subset_of(target) {
        return Err(Error::AlphabetMismatch(
            "target alphabet is missing symbols of the machine".into(),
        ));
    }
    let sink = a.num_states();
    let mut states = a.states.clone();
    states.push(fresh_name(&a.states, "s_r"));
    let mut rules: Vec<Vec<QcfaRule>> = (0..a.num_states())
        .map(|s| {
            (0..target.tape_len())
                .map(|g| match a.alphabet.tape_index(target.tape_name(g)) {
                    Some(old) => a.rule(s, old).clone(),
                    None => QcfaRule::classical(a.dim, sink),
                })
                .collect()
        })
        .collect();
    rules.push(absorbing_rules(a.dim, target.tape_len(), sink));
    let mut rejecting = a.rejecting.clone();
    rejecting.insert(sink);
    Ok(Qcfa {
        alphabet: target.clone(),
        states,
        rules,
        rejecting,
        ..a.clone()
    })
}
