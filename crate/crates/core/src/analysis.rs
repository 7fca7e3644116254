//! DFA analysis: minimization, distinguishing words, and detection of the
//! forbidden construction that rules out measure-many quantum recognition.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::models::{Dfa, Word};

#[derive(Debug, Clone, PartialEq)]
pub struct Minimized {
    pub dfa: Dfa,
    /// `mapping[old]` is the state of the minimal DFA that `old` collapsed
    /// into, or `None` if `old` was unreachable.
    pub mapping: Vec<Option<usize>>,
}

impl Minimized {
    /// True iff minimization changed nothing: every state survived and no two
    /// were merged.
    pub fn is_unchanged(&self) -> bool {
        self.dfa.num_states() == self.mapping.len() && self.mapping.iter().all(Option::is_some)
    }
}

fn reachable(d: &Dfa, from: usize) -> Vec<bool> {
    let mut seen = vec![false; d.num_states()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        for &t in &d.transitions[s] {
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    seen
}

/// Moore partition refinement after pruning unreachable states.
///
/// Merged states keep the name of their lowest-indexed member and appear in
/// order of that member, so an already-minimal DFA comes back identical.
pub fn minimize_dfa(d: &Dfa) -> Minimized {
    let alive = reachable(d, d.initial);
    let live: Vec<usize> = (0..d.num_states()).filter(|&s| alive[s]).collect();

    let mut class: Vec<usize> = vec![usize::MAX; d.num_states()];
    for &s in &live {
        class[s] = usize::from(d.is_accepting(s));
    }
    let mut count = 0;
    loop {
        let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut next = vec![usize::MAX; d.num_states()];
        for &s in &live {
            let mut signature = Vec::with_capacity(d.alphabet.len() + 1);
            signature.push(class[s]);
            signature.extend(d.transitions[s].iter().map(|&t| class[t]));
            let fresh = ids.len();
            next[s] = *ids.entry(signature).or_insert(fresh);
        }
        let refined = ids.len();
        class = next;
        if refined == count {
            break;
        }
        count = refined;
    }

    // `live` is ascending, so classes are numbered by their lowest member.
    let representatives: Vec<usize> = {
        let mut seen = vec![false; count];
        live.iter()
            .copied()
            .filter(|&s| !std::mem::replace(&mut seen[class[s]], true))
            .collect()
    };
    let new_index: HashMap<usize, usize> = representatives
        .iter()
        .enumerate()
        .map(|(i, &rep)| (class[rep], i))
        .collect();
    let mapping: Vec<Option<usize>> = (0..d.num_states())
        .map(|s| alive[s].then(|| new_index[&class[s]]))
        .collect();
    let dfa = Dfa {
        states: representatives.iter().map(|&r| d.states[r].clone()).collect(),
        alphabet: d.alphabet.clone(),
        transitions: representatives
            .iter()
            .map(|&r| {
                d.transitions[r]
                    .iter()
                    .map(|&t| mapping[t].expect("successor of a live state is live"))
                    .collect()
            })
            .collect(),
        initial: mapping[d.initial].expect("initial state is live"),
        accepting: representatives
            .iter()
            .enumerate()
            .filter(|(_, &r)| d.is_accepting(r))
            .map(|(i, _)| i)
            .collect(),
    };
    Minimized { dfa, mapping }
}

/// A word on which exactly one of two states leads to acceptance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinguishabilityCertificate {
    pub s: usize,
    pub t: usize,
    pub witness: Word,
}

impl DistinguishabilityCertificate {
    pub fn verify(&self, d: &Dfa) -> bool {
        let Ok(symbols) = d.alphabet.encode(&self.witness) else {
            return false;
        };
        d.is_accepting(d.run_from(self.s, &symbols)) != d.is_accepting(d.run_from(self.t, &symbols))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Distinguishability {
    Distinguished(DistinguishabilityCertificate),
    Equivalent,
}

/// Shortest distinguishing word for `s` and `t` (ties broken by alphabet
/// order), found by breadth-first search over state pairs.
pub fn distinguish(d: &Dfa, s: usize, t: usize) -> Result<Distinguishability> {
    let n = d.num_states();
    for x in [s, t] {
        if x >= n {
            return Err(Error::UnknownState(x.to_string()));
        }
    }
    let differs = |(x, y): (usize, usize)| d.is_accepting(x) != d.is_accepting(y);
    let path = bfs_pairs(d, (s, t), differs, |(x, y)| x != y);
    Ok(match path {
        Some(symbols) => Distinguishability::Distinguished(DistinguishabilityCertificate {
            s,
            t,
            witness: word_of(d, &symbols),
        }),
        None => Distinguishability::Equivalent,
    })
}

/// Breadth-first search over the synchronized product from `start` until a
/// pair satisfies `goal`. Successors failing `keep` are not expanded.
/// Symbols are tried in alphabet order, so the returned path is the
/// shortlex-least one.
fn bfs_pairs(
    d: &Dfa,
    start: (usize, usize),
    goal: impl Fn((usize, usize)) -> bool,
    keep: impl Fn((usize, usize)) -> bool,
) -> Option<Vec<usize>> {
    let n = d.num_states();
    let key = |(x, y): (usize, usize)| x * n + y;
    let mut parent: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut seen = vec![false; n * n];
    seen[key(start)] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(pair) = queue.pop_front() {
        if goal(pair) {
            let mut symbols = Vec::new();
            let mut cur = key(pair);
            while let Some(&(prev, a)) = parent.get(&cur) {
                symbols.push(a);
                cur = prev;
            }
            symbols.reverse();
            return Some(symbols);
        }
        for a in 0..d.alphabet.len() {
            let succ = (d.transitions[pair.0][a], d.transitions[pair.1][a]);
            if !keep(succ) || seen[key(succ)] {
                continue;
            }
            seen[key(succ)] = true;
            parent.insert(key(succ), (key(pair), a));
            queue.push_back(succ);
        }
    }
    None
}

fn word_of(d: &Dfa, symbols: &[usize]) -> Word {
    Word::new(
        symbols
            .iter()
            .map(|&a| d.alphabet.symbols()[a].clone())
            .collect(),
    )
}

/// States `s ≠ t` and a word `x` with `δ̂(s,x) = t` and `δ̂(t,x) = t`, where
/// both an accepting and a non-accepting state are reachable from `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbiddenConstructionWitness {
    pub s: usize,
    pub t: usize,
    pub word: Word,
}

impl ForbiddenConstructionWitness {
    /// Replays the witness and checks all four conditions directly.
    pub fn verify(&self, d: &Dfa) -> bool {
        let Ok(x) = d.alphabet.encode(&self.word) else {
            return false;
        };
        if self.s >= d.num_states() || self.t >= d.num_states() {
            return false;
        }
        self.s != self.t
            && d.run_from(self.s, &x) == self.t
            && d.run_from(self.t, &x) == self.t
            && is_mixed(d, self.t)
    }
}

/// Neither every state reachable from `t` (including `t`) is accepting nor
/// every one is non-accepting.
pub fn is_mixed(d: &Dfa, t: usize) -> bool {
    let seen = reachable(d, t);
    let reach = (0..d.num_states()).filter(|&s| seen[s]);
    let accepting: BTreeSet<bool> = reach.map(|s| d.is_accepting(s)).collect();
    accepting.len() == 2
}

/// Searches every pair `(s, t)` and returns the witness with the
/// shortlex-least word, ties broken by `(s, t)`. The DFA should be minimal;
/// run [`minimize_dfa`] first otherwise.
pub fn find_forbidden_construction(d: &Dfa) -> Option<ForbiddenConstructionWitness> {
    let n = d.num_states();
    let mut best: Option<(Vec<usize>, usize, usize)> = None;
    for t in (0..n).filter(|&t| is_mixed(d, t)) {
        for s in (0..n).filter(|&s| s != t) {
            let Some(x) = bfs_pairs(d, (s, t), |pair| pair == (t, t), |_| true) else {
                continue;
            };
            // An empty word would need s == t.
            debug_assert!(!x.is_empty());
            let better = match &best {
                None => true,
                Some((bx, bs, bt)) => {
                    (x.len(), &x, s, t) < (bx.len(), bx, *bs, *bt)
                }
            };
            if better {
                best = Some((x, s, t));
            }
        }
    }
    best.map(|(x, s, t)| ForbiddenConstructionWitness {
        s,
        t,
        word: word_of(d, &x),
    })
}
