//! The six automata models and their structural validation.
//!
//! Every model reads its input framed by the left end-marker `¢` and the
//! right end-marker `$`. Per-tape-symbol data is stored in vectors indexed by
//! tape position: `0` is `¢`, `1..=n` are the input symbols in alphabet
//! order, `n + 1` is `$`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{
    validate_measurement, validate_unitary, ComplexMatrix, ComplexVector, MeasurementFamily, TOL,
};

pub const LEFT_END: &str = "¢";
pub const RIGHT_END: &str = "$";

/// Ordered set of input symbols. The end-markers are reserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(symbols: &[S]) -> Result<Self> {
        let symbols: Vec<String> = symbols.iter().map(|s| s.as_ref().to_string()).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("no symbols".into()));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidAlphabet("empty symbol".into()));
            }
            if s == LEFT_END || s == RIGHT_END {
                return Err(Error::InvalidAlphabet(format!("`{s}` is a reserved end-marker")));
            }
            if s.chars().any(char::is_whitespace) {
                return Err(Error::InvalidAlphabet(format!("symbol `{s}` contains whitespace")));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Self { symbols, index })
    }

    /// Alphabet whose symbols are the characters of `chars`.
    pub fn from_chars(chars: &str) -> Result<Self> {
        let symbols: Vec<String> = chars.chars().map(String::from).collect();
        Self::new(&symbols)
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    /// Number of tape symbols: the input symbols plus both end-markers.
    pub fn tape_len(&self) -> usize {
        self.symbols.len() + 2
    }

    pub fn right_end_index(&self) -> usize {
        self.symbols.len() + 1
    }

    /// Name of a tape position (`¢`, a symbol, or `$`).
    pub fn tape_name(&self, tape_index: usize) -> &str {
        if tape_index == 0 {
            LEFT_END
        } else if tape_index == self.right_end_index() {
            RIGHT_END
        } else {
            &self.symbols[tape_index - 1]
        }
    }

    /// Tape position of a symbol name, accepting the end-markers too.
    pub fn tape_index(&self, name: &str) -> Option<usize> {
        match name {
            LEFT_END => Some(0),
            RIGHT_END => Some(self.right_end_index()),
            _ => self.index_of(name).map(|i| i + 1),
        }
    }

    /// Encodes `¢ w $` as tape indices.
    pub fn encode_tape(&self, word: &Word) -> Result<Vec<usize>> {
        let mut tape = Vec::with_capacity(word.len() + 2);
        tape.push(0);
        for s in word.symbols() {
            let i = self
                .index_of(s)
                .ok_or_else(|| Error::UnknownSymbol(s.clone()))?;
            tape.push(i + 1);
        }
        tape.push(self.right_end_index());
        Ok(tape)
    }

    /// Encodes `w` as symbol indices (no end-markers).
    pub fn encode(&self, word: &Word) -> Result<Vec<usize>> {
        word.symbols()
            .iter()
            .map(|s| self.index_of(s).ok_or_else(|| Error::UnknownSymbol(s.clone())))
            .collect()
    }

    /// Parses user input: whitespace-separated symbols if the text contains
    /// whitespace, otherwise one symbol per character.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let word = if text.chars().any(char::is_whitespace) {
            Word::new(text.split_whitespace().map(String::from).collect())
        } else {
            Word::from_chars(text)
        };
        self.encode(&word)?;
        Ok(word)
    }

    /// All words over this alphabet of length at most `max_len`, in
    /// shortlex order.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut frontier = vec![Word::empty()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(frontier.len() * self.len());
            for w in &frontier {
                for s in &self.symbols {
                    let mut symbols = w.0.clone();
                    symbols.push(s.clone());
                    next.push(Word(symbols));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    pub fn is_subset_of(&self, other: &Alphabet) -> bool {
        self.symbols.iter().all(|s| other.contains(s))
    }
}

/// A finite input word as a sequence of symbol names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<String>);

impl Word {
    pub fn new(symbols: Vec<String>) -> Self {
        Self(symbols)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn from_chars(text: &str) -> Self {
        Self(text.chars().map(String::from).collect())
    }

    pub fn symbols(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<&str> for Word {
    fn from(text: &str) -> Self {
        Self::from_chars(text)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|s| s.chars().count() == 1) {
            write!(f, "{}", self.0.concat())
        } else {
            write!(f, "{}", self.0.join(" "))
        }
    }
}

/// Deterministic finite automaton with a total transition table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dfa {
    pub states: Vec<String>,
    pub alphabet: Alphabet,
    /// `transitions[state][symbol]`.
    pub transitions: Vec<Vec<usize>>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
}

impl Dfa {
    /// Builds a DFA from `(from, symbol, to)` triples over named states.
    pub fn from_edges(
        states: &[&str],
        alphabet: Alphabet,
        edges: &[(&str, &str, &str)],
        initial: &str,
        accepting: &[&str],
    ) -> Result<Self> {
        let names: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let lookup = |name: &str| {
            names
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::UnknownState(name.to_string()))
        };
        let mut transitions = vec![vec![usize::MAX; alphabet.len()]; names.len()];
        for (from, symbol, to) in edges {
            let a = alphabet
                .index_of(symbol)
                .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))?;
            transitions[lookup(from)?][a] = lookup(to)?;
        }
        let dfa = Self {
            initial: lookup(initial)?,
            accepting: accepting.iter().map(|s| lookup(s)).collect::<Result<_>>()?,
            states: names,
            alphabet,
            transitions,
        };
        let report = dfa.validate();
        if !report.is_valid() {
            return Err(Error::InvalidMachine(report.to_string()));
        }
        Ok(dfa)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting.contains(&state)
    }

    /// `δ̂(state, symbols)` over symbol indices.
    pub fn run_from(&self, state: usize, symbols: &[usize]) -> usize {
        symbols.iter().fold(state, |s, &a| self.transitions[s][a])
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.states.len();
        if n == 0 {
            report.push("states", "empty", "DFA has no states");
            return report;
        }
        check_distinct_names(&self.states, "states", &mut report);
        if self.initial >= n {
            report.push("initial", "range", "initial state out of range");
        }
        for &s in &self.accepting {
            if s >= n {
                report.push("accepting", "range", format!("accepting state {s} out of range"));
            }
        }
        if self.transitions.len() != n {
            report.push("transitions", "totality", "one transition row per state required");
        }
        for (s, row) in self.transitions.iter().enumerate() {
            if row.len() != self.alphabet.len() {
                report.push(
                    format!("transitions[{}]", self.state_name(s)),
                    "totality",
                    "one entry per input symbol required",
                );
                continue;
            }
            for (a, &t) in row.iter().enumerate() {
                if t >= n {
                    report.push(
                        format!(
                            "transitions[{}][{}]",
                            self.state_name(s),
                            self.alphabet.symbols()[a]
                        ),
                        "totality",
                        "transition undefined or target out of range",
                    );
                }
            }
        }
        report
    }

    fn state_name(&self, s: usize) -> &str {
        self.states.get(s).map_or("?", String::as_str)
    }
}

/// One-way probabilistic finite automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct Pfa {
    pub states: Vec<String>,
    pub alphabet: Alphabet,
    /// `transitions[state][tape symbol][target]` = probability of moving to
    /// `target`.
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    /// Restricts weights to the coin-tossing class `{0, 1/2, 1}`.
    pub strict: bool,
}

impl Pfa {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.states.len();
        if n == 0 {
            report.push("states", "empty", "PFA has no states");
            return report;
        }
        check_distinct_names(&self.states, "states", &mut report);
        if self.initial >= n {
            report.push("initial", "range", "initial state out of range");
        }
        if self.accepting.iter().any(|&s| s >= n) {
            report.push("accepting", "range", "accepting state out of range");
        }
        if self.transitions.len() != n {
            report.push("transitions", "shape", "one transition block per state required");
            return report;
        }
        for (s, block) in self.transitions.iter().enumerate() {
            if block.len() != self.alphabet.tape_len() {
                report.push(
                    format!("transitions[{}]", self.states[s]),
                    "shape",
                    "one row per tape symbol required",
                );
                continue;
            }
            for (g, row) in block.iter().enumerate() {
                let path = format!(
                    "transitions[{}][{}]",
                    self.states[s],
                    self.alphabet.tape_name(g)
                );
                if row.len() != n {
                    report.push(path, "shape", "one weight per target state required");
                    continue;
                }
                if row.iter().any(|w| !w.is_finite() || *w < 0.0 || *w > 1.0) {
                    report.push(path.clone(), "weight range", "weights must lie in [0, 1]");
                }
                if self.strict && row.iter().any(|&w| w != 0.0 && w != 0.5 && w != 1.0) {
                    report.push(
                        path.clone(),
                        "coin-tossing weights",
                        "strict PFA weights must be 0, 1/2 or 1",
                    );
                }
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    report.push(
                        path,
                        "row stochasticity",
                        format!("outgoing weights sum to {total}"),
                    );
                }
            }
        }
        report
    }
}

/// Measure-once one-way quantum finite automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct Mo1qfa {
    pub alphabet: Alphabet,
    pub dim: usize,
    /// One unitary per tape symbol.
    pub unitaries: Vec<ComplexMatrix>,
    pub initial: ComplexVector,
    pub accepting: ComplexMatrix,
}

impl Mo1qfa {
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        check_quantum_core(
            &self.alphabet,
            self.dim,
            &self.unitaries,
            &self.initial,
            &mut report,
        );
        check_projector(&self.accepting, self.dim, "accepting", &mut report);
        report
    }
}

/// Measure-many one-way quantum finite automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct Mm1qfa {
    pub alphabet: Alphabet,
    pub dim: usize,
    pub unitaries: Vec<ComplexMatrix>,
    pub initial: ComplexVector,
    pub accepting: ComplexMatrix,
    pub rejecting: ComplexMatrix,
}

pub const ACCEPT_LABEL: &str = "ca";
pub const REJECT_LABEL: &str = "cr";
pub const CONTINUE_LABEL: &str = "cn";

impl Mm1qfa {
    /// `P_n = I − P_a − P_r`.
    pub fn non_halting(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.dim)
            .sub(&self.accepting)
            .and_then(|m| m.sub(&self.rejecting))
            .unwrap_or_else(|_| ComplexMatrix::zeros(self.dim, self.dim))
    }

    /// The measurement `{ca: P_a, cr: P_r, cn: P_n}` applied after every symbol.
    pub fn measurement(&self) -> MeasurementFamily {
        MeasurementFamily::new(vec![
            (ACCEPT_LABEL.into(), self.accepting.clone()),
            (REJECT_LABEL.into(), self.rejecting.clone()),
            (CONTINUE_LABEL.into(), self.non_halting()),
        ])
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        check_quantum_core(
            &self.alphabet,
            self.dim,
            &self.unitaries,
            &self.initial,
            &mut report,
        );
        check_projector(&self.accepting, self.dim, "accepting", &mut report);
        check_projector(&self.rejecting, self.dim, "rejecting", &mut report);
        if report.is_valid() && !validate_measurement(&self.measurement(), TOL).unwrap_or(false) {
            report.push(
                "accepting/rejecting",
                "measurement",
                "{P_a, P_r, I - P_a - P_r} is not a projective measurement",
            );
        }
        report
    }
}

/// One-way quantum finite automaton with a regular control language over
/// the observable's outcome labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Qfacl {
    pub alphabet: Alphabet,
    pub dim: usize,
    pub unitaries: Vec<ComplexMatrix>,
    pub initial: ComplexVector,
    pub observable: MeasurementFamily,
    pub control: Dfa,
}

impl Qfacl {
    /// Maps observable outcome positions to control-DFA symbol indices.
    pub fn outcome_letters(&self) -> Result<Vec<usize>> {
        let labels: BTreeSet<&str> = self.observable.labels().collect();
        let control: BTreeSet<&str> = self
            .control
            .alphabet
            .symbols()
            .iter()
            .map(String::as_str)
            .collect();
        if labels != control {
            return Err(Error::AlphabetMismatch(format!(
                "control alphabet {control:?} differs from outcome labels {labels:?}"
            )));
        }
        Ok(self
            .observable
            .labels()
            .map(|l| self.control.alphabet.index_of(l).expect("checked above"))
            .collect())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        check_quantum_core(
            &self.alphabet,
            self.dim,
            &self.unitaries,
            &self.initial,
            &mut report,
        );
        check_measurement(&self.observable, self.dim, "observable", &mut report);
        report.extend_prefixed("control", self.control.validate());
        if let Err(e) = self.outcome_letters() {
            report.push("control.alphabet", "alphabet", e.to_string());
        }
        report
    }
}

/// Per-(classical state, tape symbol) behaviour of a 1QCFA: a unitary, a
/// projective measurement, and the classical successor for each outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct QcfaRule {
    pub unitary: ComplexMatrix,
    pub measurement: MeasurementFamily,
    /// `next[k]` is the successor for `measurement.outcomes[k]`.
    pub next: Vec<usize>,
}

impl QcfaRule {
    /// `Θ = I`, `Δ` trivial, always moving to `next`.
    pub fn classical(dim: usize, next: usize) -> Self {
        Self {
            unitary: ComplexMatrix::identity(dim),
            measurement: MeasurementFamily::trivial(dim),
            next: vec![next],
        }
    }
}

/// One-way finite automaton with quantum and classical states.
#[derive(Debug, Clone, PartialEq)]
pub struct Qcfa {
    pub alphabet: Alphabet,
    pub dim: usize,
    pub states: Vec<String>,
    /// `rules[state][tape symbol]`.
    pub rules: Vec<Vec<QcfaRule>>,
    pub initial_quantum: ComplexVector,
    pub initial_state: usize,
    pub accepting: BTreeSet<usize>,
    pub rejecting: BTreeSet<usize>,
}

impl Qcfa {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn rule(&self, state: usize, tape_symbol: usize) -> &QcfaRule {
        &self.rules[state][tape_symbol]
    }

    /// Classical states reachable after the right end-marker, following every
    /// measurement outcome regardless of its probability.
    pub fn reachable_after_end(&self) -> BTreeSet<usize> {
        let step = |from: &BTreeSet<usize>, g: usize| -> BTreeSet<usize> {
            from.iter()
                .flat_map(|&s| self.rules[s][g].next.iter().copied())
                .collect()
        };
        let mut inside = step(&BTreeSet::from([self.initial_state]), 0);
        let mut frontier: Vec<usize> = inside.iter().copied().collect();
        while let Some(s) = frontier.pop() {
            for g in 1..self.alphabet.right_end_index() {
                for &t in &self.rules[s][g].next {
                    if inside.insert(t) {
                        frontier.push(t);
                    }
                }
            }
        }
        step(&inside, self.alphabet.right_end_index())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.states.len();
        if n == 0 {
            report.push("states", "empty", "1QCFA has no classical states");
            return report;
        }
        if self.dim == 0 {
            report.push("dim", "empty", "quantum dimension must be positive");
            return report;
        }
        check_distinct_names(&self.states, "states", &mut report);
        if self.initial_state >= n {
            report.push("initial_state", "range", "initial classical state out of range");
        }
        if self.initial_quantum.dim() != self.dim {
            report.push("initial_quantum", "dimension", "initial state has wrong dimension");
        } else if !self.initial_quantum.is_normalized(TOL) {
            report.push("initial_quantum", "normalization", "initial state is not normalized");
        }
        if self.accepting.iter().chain(&self.rejecting).any(|&s| s >= n) {
            report.push("accepting/rejecting", "range", "halting state out of range");
        }
        if let Some(s) = self.accepting.intersection(&self.rejecting).next() {
            report.push(
                format!("states[{}]", self.states[*s]),
                "disjoint halting sets",
                "state is both accepting and rejecting",
            );
        }
        if self.rules.len() != n {
            report.push("rules", "shape", "one rule block per classical state required");
            return report;
        }
        let mut structurally_sound = true;
        for (s, block) in self.rules.iter().enumerate() {
            if block.len() != self.alphabet.tape_len() {
                report.push(
                    format!("rules[{}]", self.states[s]),
                    "shape",
                    "one rule per tape symbol required",
                );
                structurally_sound = false;
                continue;
            }
            for (g, rule) in block.iter().enumerate() {
                let path = format!("rules[{}][{}]", self.states[s], self.alphabet.tape_name(g));
                check_unitary(&rule.unitary, self.dim, &format!("{path}.unitary"), &mut report);
                check_measurement(
                    &rule.measurement,
                    self.dim,
                    &format!("{path}.measurement"),
                    &mut report,
                );
                if rule.next.len() != rule.measurement.len() {
                    report.push(
                        format!("{path}.next"),
                        "transition totality",
                        "one successor per measurement outcome required",
                    );
                    structurally_sound = false;
                } else if rule.next.iter().any(|&t| t >= n) {
                    report.push(
                        format!("{path}.next"),
                        "range",
                        "successor state out of range",
                    );
                    structurally_sound = false;
                }
            }
        }
        if structurally_sound && self.initial_state < n {
            for s in self.reachable_after_end() {
                if !self.accepting.contains(&s) && !self.rejecting.contains(&s) {
                    report.push(
                        format!("states[{}]", self.states[s]),
                        "non-halting",
                        "reachable after the right end-marker but neither accepting nor rejecting",
                    );
                }
            }
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineKind {
    Dfa,
    Pfa,
    Mo1qfa,
    Mm1qfa,
    Qfacl,
    Qcfa,
}

impl MachineKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Dfa => "dfa",
            Self::Pfa => "pfa",
            Self::Mo1qfa => "mo1qfa",
            Self::Mm1qfa => "mm1qfa",
            Self::Qfacl => "qfacl",
            Self::Qcfa => "qcfa",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "dfa" => Self::Dfa,
            "pfa" => Self::Pfa,
            "mo1qfa" => Self::Mo1qfa,
            "mm1qfa" => Self::Mm1qfa,
            "qfacl" => Self::Qfacl,
            "qcfa" => Self::Qcfa,
            _ => return None,
        })
    }
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MachineDescription {
    Dfa(Dfa),
    Pfa(Pfa),
    Mo1qfa(Mo1qfa),
    Mm1qfa(Mm1qfa),
    Qfacl(Qfacl),
    Qcfa(Qcfa),
}

impl MachineDescription {
    pub fn kind(&self) -> MachineKind {
        match self {
            Self::Dfa(_) => MachineKind::Dfa,
            Self::Pfa(_) => MachineKind::Pfa,
            Self::Mo1qfa(_) => MachineKind::Mo1qfa,
            Self::Mm1qfa(_) => MachineKind::Mm1qfa,
            Self::Qfacl(_) => MachineKind::Qfacl,
            Self::Qcfa(_) => MachineKind::Qcfa,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Self::Dfa(m) => &m.alphabet,
            Self::Pfa(m) => &m.alphabet,
            Self::Mo1qfa(m) => &m.alphabet,
            Self::Mm1qfa(m) => &m.alphabet,
            Self::Qfacl(m) => &m.alphabet,
            Self::Qcfa(m) => &m.alphabet,
        }
    }
}

/// A single violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Location of the offending element, e.g. `rules[s0][a].unitary`.
    pub path: String,
    /// Short name of the invariant, e.g. `row stochasticity`.
    pub rule: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.path, self.rule, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, path: impl Into<String>, rule: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            rule: rule.to_string(),
            message: message.into(),
        });
    }

    fn extend_prefixed(&mut self, prefix: &str, other: ValidationReport) {
        for v in other.violations {
            self.violations.push(Violation {
                path: format!("{prefix}.{}", v.path),
                ..v
            });
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        let lines: Vec<String> = self.violations.iter().map(Violation::to_string).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

/// Lists every violated invariant of `machine`; an empty report means valid.
pub fn validate(machine: &MachineDescription) -> ValidationReport {
    match machine {
        MachineDescription::Dfa(m) => m.validate(),
        MachineDescription::Pfa(m) => m.validate(),
        MachineDescription::Mo1qfa(m) => m.validate(),
        MachineDescription::Mm1qfa(m) => m.validate(),
        MachineDescription::Qfacl(m) => m.validate(),
        MachineDescription::Qcfa(m) => m.validate(),
    }
}

fn check_distinct_names(names: &[String], path: &str, report: &mut ValidationReport) {
    let mut seen = BTreeSet::new();
    for name in names {
        if !seen.insert(name) {
            report.push(path, "distinct names", format!("duplicate state name `{name}`"));
        }
    }
}

fn check_quantum_core(
    alphabet: &Alphabet,
    dim: usize,
    unitaries: &[ComplexMatrix],
    initial: &ComplexVector,
    report: &mut ValidationReport,
) {
    if dim == 0 {
        report.push("dim", "empty", "quantum dimension must be positive");
        return;
    }
    if unitaries.len() != alphabet.tape_len() {
        report.push("unitaries", "shape", "one unitary per tape symbol required");
    }
    for (g, u) in unitaries.iter().enumerate().take(alphabet.tape_len()) {
        check_unitary(
            u,
            dim,
            &format!("unitaries[{}]", alphabet.tape_name(g)),
            report,
        );
    }
    if initial.dim() != dim {
        report.push("initial", "dimension", "initial state has wrong dimension");
    } else if !initial.is_normalized(TOL) {
        report.push("initial", "normalization", "initial state is not normalized");
    }
}

fn check_unitary(u: &ComplexMatrix, dim: usize, path: &str, report: &mut ValidationReport) {
    if u.shape() != (dim, dim) {
        report.push(path, "dimension", format!("expected {dim}x{dim}, got {:?}", u.shape()));
    } else if !validate_unitary(u, TOL).unwrap_or(false) {
        report.push(path, "unitarity", "matrix is not unitary");
    }
}

fn check_projector(p: &ComplexMatrix, dim: usize, path: &str, report: &mut ValidationReport) {
    if p.shape() != (dim, dim) {
        report.push(path, "dimension", format!("expected {dim}x{dim}, got {:?}", p.shape()));
    } else if !p.is_projector(TOL) {
        report.push(path, "projector", "matrix is not an orthogonal projector");
    }
}

fn check_measurement(
    m: &MeasurementFamily,
    dim: usize,
    path: &str,
    report: &mut ValidationReport,
) {
    if m.outcomes.iter().any(|o| o.projector.shape() != (dim, dim)) {
        report.push(path, "dimension", format!("projectors must be {dim}x{dim}"));
    } else if !validate_measurement(m, TOL).unwrap_or(false) {
        report.push(
            path,
            "measurement",
            "projectors are not orthogonal, complete and distinctly labeled",
        );
    }
}

/// The `2m + 2` state DFA for `{ a^i b^j : i + j = km, k ≥ 1 }`.
///
/// States are `p0..p_m`, `q1..q_m`, `r` in that order. `p_i` counts leading
/// `a`s, `q_j` tracks the total length modulo `m` once a `b` has been read, and
/// `r` is the dead state reached by any `a` after a `b`.
pub fn build_figure1_dfa(m: usize) -> Result<Dfa> {
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let alphabet = Alphabet::from_chars("ab")?;
    let p = |i: usize| i;
    let q = |j: usize| m + j;
    let r = 2 * m + 1;
    let mut states: Vec<String> = (0..=m).map(|i| format!("p{i}")).collect();
    states.extend((1..=m).map(|j| format!("q{j}")));
    states.push("r".into());

    let mut transitions = vec![vec![0; 2]; 2 * m + 2];
    for i in 0..=m {
        transitions[p(i)][0] = if i < m { p(i + 1) } else { p(1) };
        transitions[p(i)][1] = if i < m { q(i + 1) } else { q(1) };
    }
    for j in 1..=m {
        transitions[q(j)][0] = r;
        transitions[q(j)][1] = if j < m { q(j + 1) } else { q(1) };
    }
    transitions[r] = vec![r, r];
    Ok(Dfa {
        states,
        alphabet,
        transitions,
        initial: p(0),
        accepting: BTreeSet::from([p(m), q(m)]),
    })
}

/// The three-state DFA for `a*b*`.
pub fn build_figure2_dfa() -> Dfa {
    Dfa::from_edges(
        &["p0", "p1", "r"],
        Alphabet::from_chars("ab").expect("static alphabet"),
        &[
            ("p0", "a", "p0"),
            ("p0", "b", "p1"),
            ("p1", "a", "r"),
            ("p1", "b", "p1"),
            ("r", "a", "r"),
            ("r", "b", "r"),
        ],
        "p0",
        &["p0", "p1"],
    )
    .expect("static DFA is valid")
}

/// Membership in `a*b*`.
pub fn in_a_star_b_star(word: &Word) -> bool {
    let mut seen_b = false;
    for s in word.symbols() {
        match s.as_str() {
            "a" if seen_b => return false,
            "a" => {}
            "b" => seen_b = true,
            _ => return false,
        }
    }
    true
}

/// Membership in `L_m`: `w ∈ a*b*`, `|w| > 0` and `m` divides `|w|`.
pub fn in_lm(word: &Word, m: usize) -> bool {
    !word.is_empty() && word.len().is_multiple_of(m) && in_a_star_b_star(word)
}
