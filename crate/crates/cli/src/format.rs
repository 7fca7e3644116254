//! JSON machine files.
//!
//! A file is an envelope `{ "format_version": 1, "kind": "<tag>", "machine":
//! {...} }`. States, symbols and measurement labels are referenced by name.
//! Complex numbers are `[re, im]` pairs, matrices are row-major nested
//! arrays, and measurements are label to projector maps whose key order is
//! the outcome order. Unknown fields are rejected.
//!
//! Missing table entries are kept as out-of-range placeholders so that
//! validation can report them; references to names that do not exist are
//! format errors.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use qcfa_core::linalg::EPSILON_LABEL;
use qcfa_core::models::{LEFT_END, RIGHT_END};
use qcfa_core::{
    Alphabet, Complex, ComplexMatrix, ComplexVector, Dfa, MachineDescription, MachineKind,
    MeasurementFamily, Mm1qfa, Mo1qfa, Pfa, Qcfa, QcfaRule, Qfacl,
};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed machine file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("unknown machine kind `{0}`")]
    Kind(String),
    #[error("{0}")]
    Structure(String),
    #[error(transparent)]
    Core(#[from] qcfa_core::Error),
}

type Result<T> = std::result::Result<T, FormatError>;

fn structure<T>(message: impl Into<String>) -> Result<T> {
    Err(FormatError::Structure(message.into()))
}

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;
pub type JsonMeasurement = IndexMap<String, JsonMatrix>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineFile {
    pub format_version: u32,
    pub kind: String,
    pub machine: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfaFile {
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    /// `state -> symbol -> target`.
    pub transitions: IndexMap<String, IndexMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfaFile {
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    #[serde(default = "default_true")]
    pub strict: bool,
    /// `state -> tape symbol -> target -> probability`; absent targets have
    /// probability zero.
    pub transitions: IndexMap<String, IndexMap<String, IndexMap<String, f64>>>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mo1qfaFile {
    pub alphabet: Vec<String>,
    pub dim: usize,
    /// `tape symbol -> unitary`.
    pub unitaries: IndexMap<String, JsonMatrix>,
    pub initial: Vec<JsonComplex>,
    pub accepting: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mm1qfaFile {
    pub alphabet: Vec<String>,
    pub dim: usize,
    pub unitaries: IndexMap<String, JsonMatrix>,
    pub initial: Vec<JsonComplex>,
    pub accepting: JsonMatrix,
    pub rejecting: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfaclFile {
    pub alphabet: Vec<String>,
    pub dim: usize,
    pub unitaries: IndexMap<String, JsonMatrix>,
    pub initial: Vec<JsonComplex>,
    pub observable: JsonMeasurement,
    /// DFA over the observable's labels.
    pub control: DfaFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    /// Omitted means the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<JsonMatrix>,
    /// Omitted means the trivial measurement with the single outcome `eps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement: Option<JsonMeasurement>,
    /// `outcome label -> next classical state`.
    pub next: IndexMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QcfaFile {
    pub alphabet: Vec<String>,
    pub dim: usize,
    pub states: Vec<String>,
    pub initial_state: String,
    pub initial_quantum: Vec<JsonComplex>,
    pub accepting: Vec<String>,
    pub rejecting: Vec<String>,
    /// `state -> tape symbol -> rule`.
    pub rules: IndexMap<String, IndexMap<String, RuleFile>>,
}

/// Parses a machine file from JSON text.
pub fn parse_machine(text: &str) -> Result<MachineDescription> {
    let file: MachineFile = serde_json::from_str(text)?;
    if file.format_version != FORMAT_VERSION {
        return Err(FormatError::Version(file.format_version));
    }
    let kind = MachineKind::from_tag(&file.kind).ok_or_else(|| FormatError::Kind(file.kind.clone()))?;
    let payload = file.machine;
    Ok(match kind {
        MachineKind::Dfa => MachineDescription::Dfa(dfa_from_file(&serde_json::from_value(payload)?)?),
        MachineKind::Pfa => MachineDescription::Pfa(pfa_from_file(&serde_json::from_value(payload)?)?),
        MachineKind::Mo1qfa => {
            MachineDescription::Mo1qfa(mo1qfa_from_file(&serde_json::from_value(payload)?)?)
        }
        MachineKind::Mm1qfa => {
            MachineDescription::Mm1qfa(mm1qfa_from_file(&serde_json::from_value(payload)?)?)
        }
        MachineKind::Qfacl => {
            MachineDescription::Qfacl(qfacl_from_file(&serde_json::from_value(payload)?)?)
        }
        MachineKind::Qcfa => MachineDescription::Qcfa(qcfa_from_file(&serde_json::from_value(payload)?)?),
    })
}

/// Serializes a machine as pretty-printed JSON with a trailing newline.
pub fn serialize_machine(machine: &MachineDescription) -> String {
    let payload = match machine {
        MachineDescription::Dfa(m) => serde_json::to_value(dfa_to_file(m)),
        MachineDescription::Pfa(m) => serde_json::to_value(pfa_to_file(m)),
        MachineDescription::Mo1qfa(m) => serde_json::to_value(mo1qfa_to_file(m)),
        MachineDescription::Mm1qfa(m) => serde_json::to_value(mm1qfa_to_file(m)),
        MachineDescription::Qfacl(m) => serde_json::to_value(qfacl_to_file(m)),
        MachineDescription::Qcfa(m) => serde_json::to_value(qcfa_to_file(m)),
    }
    .expect("machine payloads are plain data");
    let file = MachineFile {
        format_version: FORMAT_VERSION,
        kind: machine.kind().tag().to_string(),
        machine: payload,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("machine files are plain data");
    text.push('\n');
    text
}

fn complex_to_json(z: Complex) -> JsonComplex {
    [z.re, z.im]
}

fn vector_to_json(v: &ComplexVector) -> Vec<JsonComplex> {
    v.entries().iter().copied().map(complex_to_json).collect()
}

fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(complex_to_json).collect())
        .collect()
}

fn measurement_to_json(m: &MeasurementFamily) -> JsonMeasurement {
    m.outcomes
        .iter()
        .map(|o| (o.label.clone(), matrix_to_json(&o.projector)))
        .collect()
}

fn vector_from_json(v: &[JsonComplex]) -> ComplexVector {
    ComplexVector::new(v.iter().map(|&[re, im]| Complex::new(re, im)).collect())
}

fn matrix_from_json(m: &JsonMatrix, what: &str) -> Result<ComplexMatrix> {
    if m.is_empty() {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let rows = m
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(rows).map_err(|e| FormatError::Structure(format!("{what}: {e}")))
}

fn measurement_from_json(m: &JsonMeasurement, what: &str) -> Result<MeasurementFamily> {
    let mut outcomes = Vec::with_capacity(m.len());
    for (label, projector) in m {
        outcomes.push((label.clone(), matrix_from_json(projector, &format!("{what}[{label}]"))?));
    }
    Ok(MeasurementFamily::new(outcomes))
}

fn tape_symbols(alphabet: &Alphabet) -> Vec<String> {
    (0..alphabet.tape_len()).map(|g| alphabet.tape_name(g).to_string()).collect()
}

fn state_lookup<'a>(states: &'a [String], what: &'a str) -> impl Fn(&str) -> Result<usize> + 'a {
    move |name| match states.iter().position(|s| s == name) {
        Some(i) => Ok(i),
        None => structure(format!("{what}: unknown state `{name}`")),
    }
}

fn state_set(names: &[String], lookup: &impl Fn(&str) -> Result<usize>) -> Result<BTreeSet<usize>> {
    names.iter().map(|n| lookup(n)).collect()
}

fn set_names(states: &[String], set: &BTreeSet<usize>) -> Vec<String> {
    set.iter().map(|&s| states[s].clone()).collect()
}

fn tape_lookup(alphabet: &Alphabet, key: &str, what: &str) -> Result<usize> {
    match alphabet.tape_index(key) {
        Some(g) => Ok(g),
        None => structure(format!(
            "{what}: unknown tape symbol `{key}` (expected one of {LEFT_END}, the alphabet, {RIGHT_END})"
        )),
    }
}

/// Tape-symbol-indexed unitaries; missing symbols become empty placeholders
/// that validation flags.
fn unitaries_from_json(alphabet: &Alphabet, map: &IndexMap<String, JsonMatrix>) -> Result<Vec<ComplexMatrix>> {
    let mut out = vec![ComplexMatrix::zeros(0, 0); alphabet.tape_len()];
    for (key, m) in map {
        let g = tape_lookup(alphabet, key, "unitaries")?;
        out[g] = matrix_from_json(m, &format!("unitaries[{key}]"))?;
    }
    Ok(out)
}

fn unitaries_to_json(alphabet: &Alphabet, unitaries: &[ComplexMatrix]) -> IndexMap<String, JsonMatrix> {
    tape_symbols(alphabet)
        .into_iter()
        .zip(unitaries)
        .map(|(name, u)| (name, matrix_to_json(u)))
        .collect()
}

pub fn dfa_from_file(f: &DfaFile) -> Result<Dfa> {
    let alphabet = Alphabet::new(&f.alphabet)?;
    let lookup = state_lookup(&f.states, "dfa");
    let mut transitions = vec![vec![usize::MAX; alphabet.len()]; f.states.len()];
    for (from, row) in &f.transitions {
        let s = lookup(from)?;
        for (symbol, to) in row {
            let Some(a) = alphabet.index_of(symbol) else {
                return structure(format!("transitions[{from}]: unknown symbol `{symbol}`"));
            };
            transitions[s][a] = lookup(to)?;
        }
    }
    Ok(Dfa {
        initial: lookup(&f.initial)?,
        accepting: state_set(&f.accepting, &lookup)?,
        states: f.states.clone(),
        alphabet,
        transitions,
    })
}

pub fn dfa_to_file(d: &Dfa) -> DfaFile {
    DfaFile {
        alphabet: d.alphabet.symbols().to_vec(),
        states: d.states.clone(),
        initial: d.states[d.initial].clone(),
        accepting: set_names(&d.states, &d.accepting),
        transitions: d
            .states
            .iter()
            .zip(&d.transitions)
            .map(|(s, row)| {
                let row = d
                    .alphabet
                    .symbols()
                    .iter()
                    .zip(row)
                    .map(|(a, &t)| (a.clone(), d.states[t].clone()))
                    .collect();
                (s.clone(), row)
            })
            .collect(),
    }
}

pub fn pfa_from_file(f: &PfaFile) -> Result<Pfa> {
    let alphabet = Alphabet::new(&f.alphabet)?;
    let n = f.states.len();
    let lookup = state_lookup(&f.states, "pfa");
    let mut transitions = vec![vec![vec![0.0; n]; alphabet.tape_len()]; n];
    for (from, block) in &f.transitions {
        let s = lookup(from)?;
        for (key, row) in block {
            let g = tape_lookup(&alphabet, key, &format!("transitions[{from}]"))?;
            for (to, &p) in row {
                transitions[s][g][lookup(to)?] = p;
            }
        }
    }
    Ok(Pfa {
        initial: lookup(&f.initial)?,
        accepting: state_set(&f.accepting, &lookup)?,
        states: f.states.clone(),
        alphabet,
        transitions,
        strict: f.strict,
    })
}

pub fn pfa_to_file(p: &Pfa) -> PfaFile {
    let tape = tape_symbols(&p.alphabet);
    PfaFile {
        alphabet: p.alphabet.symbols().to_vec(),
        states: p.states.clone(),
        initial: p.states[p.initial].clone(),
        accepting: set_names(&p.states, &p.accepting),
        strict: p.strict,
        transitions: p
            .states
            .iter()
            .zip(&p.transitions)
            .map(|(s, block)| {
                let block = tape
                    .iter()
                    .zip(block)
                    .map(|(g, row)| {
                        let row = p
                            .states
                            .iter()
                            .zip(row)
                            .filter(|(_, &w)| w != 0.0)
                            .map(|(t, &w)| (t.clone(), w))
                            .collect();
                        (g.clone(), row)
                    })
                    .collect();
                (s.clone(), block)
            })
            .collect(),
    }
}

pub fn mo1qfa_from_file(f: &Mo1qfaFile) -> Result<Mo1qfa> {
    let alphabet = Alphabet::new(&f.alphabet)?;
    Ok(Mo1qfa {
        unitaries: unitaries_from_json(&alphabet, &f.unitaries)?,
        alphabet,
        dim: f.dim,
        initial: vector_from_json(&f.initial),
        accepting: matrix_from_json(&f.accepting, "accepting")?,
    })
}

pub fn mo1qfa_to_file(m: &Mo1qfa) -> Mo1qfaFile {
    Mo1qfaFile {
        alphabet: m.alphabet.symbols().to_vec(),
        dim: m.dim,
        unitaries: unitaries_to_json(&m.alphabet, &m.unitaries),
        initial: vector_to_json(&m.initial),
        accepting: matrix_to_json(&m.accepting),
    }
}

pub fn mm1qfa_from_file(f: &Mm1qfaFile) -> Result<Mm1qfa> {
    let alphabet = Alphabet::new(&f.alphabet)?;
    Ok(Mm1qfa {
        unitaries: unitaries_from_json(&alphabet, &f.unitaries)?,
        alphabet,
        dim: f.dim,
        initial: vector_from_json(&f.initial),
        accepting: matrix_from_json(&f.accepting, "accepting")?,
        rejecting: matrix_from_json(&f.rejecting, "rejecting")?,
    })
}

pub fn mm1qfa_to_file(m: &Mm1qfa) -> Mm1qfaFile {
    Mm1qfaFile {
        alphabet: m.alphabet.symbols().to_vec(),
        dim: m.dim,
        unitaries: unitaries_to_json(&m.alphabet, &m.unitaries),
        initial: vector_to_json(&m.initial),
        accepting: matrix_to_json(&m.accepting),
        rejecting: matrix_to_json(&m.rejecting),
    }
}

pub fn qfacl_from_file(f: &QfaclFile) -> Result<Qfacl> {
    let alphabet = Alphabet::new(&f.alphabet)?;
    Ok(Qfacl {
        unitaries: unitaries_from_json(&alphabet, &f.unitaries)?,
        alphabet,
        dim: f.dim,
        initial: vector_from_json(&f.initial),
        observable: measurement_from_json(&f.observable, "observable")?,
        control: dfa_from_file(&f.control)?,
    })
}

pub fn qfacl_to_file(q: &Qfacl) -> QfaclFile {
    QfaclFile {
        alphabet: q.alphabet.symbols().to_vec(),
        dim: q.dim,
        unitaries: unitaries_to_json(&q.alphabet, &q.unitaries),
        initial: vector_to_json(&q.initial),
        observable: measurement_to_json(&q.observable),
        control: dfa_to_file(&q.control),
    }
}

pub fn qcfa_from_file(f: &QcfaFile) -> Result<Qcfa> {
    let alphabet = Alphabet::new(&f.alphabet)?;
    let lookup = state_lookup(&f.states, "qcfa");
    let placeholder = QcfaRule {
        unitary: ComplexMatrix::identity(f.dim),
        measurement: MeasurementFamily::trivial(f.dim),
        next: Vec::new(),
    };
    let mut rules = vec![vec![placeholder; alphabet.tape_len()]; f.states.len()];
    for (from, block) in &f.rules {
        let s = lookup(from)?;
        for (key, rule) in block {
            let path = format!("rules[{from}][{key}]");
            let g = tape_lookup(&alphabet, key, &path)?;
            let unitary = match &rule.unitary {
                Some(u) => matrix_from_json(u, &format!("{path}.unitary"))?,
                None => ComplexMatrix::identity(f.dim),
            };
            let measurement = match &rule.measurement {
                Some(m) => measurement_from_json(m, &format!("{path}.measurement"))?,
                None => MeasurementFamily::trivial(f.dim),
            };
            for label in rule.next.keys() {
                if measurement.position(label).is_none() {
                    return structure(format!("{path}.next: unknown outcome `{label}`"));
                }
            }
            let mut next = Vec::with_capacity(measurement.len());
            for label in measurement.labels() {
                next.push(match rule.next.get(label) {
                    Some(t) => lookup(t)?,
                    None => usize::MAX,
                });
            }
            rules[s][g] = QcfaRule {
                unitary,
                measurement,
                next,
            };
        }
    }
    Ok(Qcfa {
        initial_state: lookup(&f.initial_state)?,
        accepting: state_set(&f.accepting, &lookup)?,
        rejecting: state_set(&f.rejecting, &lookup)?,
        initial_quantum: vector_from_json(&f.initial_quantum),
        states: f.states.clone(),
        alphabet,
        dim: f.dim,
        rules,
    })
}

pub fn qcfa_to_file(a: &Qcfa) -> QcfaFile {
    let tape = tape_symbols(&a.alphabet);
    let identity = ComplexMatrix::identity(a.dim);
    let rule_to_file = |rule: &QcfaRule| RuleFile {
        unitary: (rule.unitary != identity).then(|| matrix_to_json(&rule.unitary)),
        measurement: (!(rule.measurement.is_trivial()
            && rule.measurement.outcomes[0].label == EPSILON_LABEL))
            .then(|| measurement_to_json(&rule.measurement)),
        next: rule
            .measurement
            .labels()
            .zip(&rule.next)
            .map(|(label, &t)| (label.to_string(), a.states[t].clone()))
            .collect(),
    };
    QcfaFile {
        alphabet: a.alphabet.symbols().to_vec(),
        dim: a.dim,
        states: a.states.clone(),
        initial_state: a.states[a.initial_state].clone(),
        initial_quantum: vector_to_json(&a.initial_quantum),
        accepting: set_names(&a.states, &a.accepting),
        rejecting: set_names(&a.states, &a.rejecting),
        rules: a
            .states
            .iter()
            .zip(&a.rules)
            .map(|(s, block)| {
                let block = tape
                    .iter()
                    .zip(block)
                    .map(|(g, rule)| (g.clone(), rule_to_file(rule)))
                    .collect();
                (s.clone(), block)
            })
            .collect(),
    }
}
