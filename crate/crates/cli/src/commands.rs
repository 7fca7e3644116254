//! Command implementations. Every command writes its report to `out`;
//! failures come back as [`CliError`] carrying the process exit code.

use std::fs;
use std::io::Write;
use std::path::Path;

use qcfa_core::analysis::{distinguish, find_forbidden_construction, minimize_dfa, Distinguishability};
use qcfa_core::closure::{complement, product, AlphabetMode, ProductOp};
use qcfa_core::compile::compile;
use qcfa_core::models::{build_figure1_dfa, build_figure2_dfa};
use qcfa_core::semantics::{qcfa_run, qcfa_run_branching_oracle, RunOutcome, DEFAULT_BRANCH_CAP};
use qcfa_core::succinct::{
    build_l2_mo1qfa, build_lm_qcfa, run_lm_experiment, search_divisibility_params, ExperimentReport,
    ForbiddenSummary,
};
use qcfa_core::{validate, Dfa, MachineDescription, Qcfa, Word};
use serde::Serialize;

use crate::format::{parse_machine, serialize_machine};
use crate::{AlphabetPolicy, Cli, Command, Engine, ExampleMachine, ProductKind};

/// Environment variable overriding the branch cap of the enumeration engine.
pub const BRANCH_CAP_VAR: &str = "QCFA_BRANCH_CAP";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable input: I/O failure or malformed machine file.
    #[error("{0}")]
    Input(String),
    /// Well-formed input that violates a domain rule.
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Domain(_) => 1,
        }
    }
}

impl From<qcfa_core::Error> for CliError {
    fn from(e: qcfa_core::Error) -> Self {
        Self::Domain(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Input(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Validate { path } => cmd_validate(path, out),
        Command::Run {
            path,
            word,
            engine,
            oracle_check,
        } => cmd_run(path, word, *engine, *oracle_check, out),
        Command::Compile { path, output } => cmd_compile(path, output, out),
        Command::Product {
            op,
            a,
            b,
            alphabet_mode,
            output,
        } => cmd_product(*op, a, b, *alphabet_mode, output, out),
        Command::Complement { path, output } => cmd_complement(path, output, out),
        Command::Analyze {
            path,
            minimize,
            forbidden,
        } => {
            let both = !minimize && !forbidden;
            cmd_analyze(path, *minimize || both, *forbidden || both, out)
        }
        Command::ExperimentLm {
            m,
            epsilon,
            max_len,
            seed,
            report,
        } => cmd_experiment_lm(*m, *epsilon, max_len.unwrap_or(4 * m), *seed, report, out),
        Command::Example {
            machine,
            m,
            epsilon,
            seed,
            output,
        } => cmd_example(*machine, *m, *epsilon, *seed, output, out),
    }
}

fn load(path: &Path) -> Result<MachineDescription> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_machine(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_valid(path: &Path) -> Result<MachineDescription> {
    let machine = load(path)?;
    let report = validate(&machine);
    if !report.is_valid() {
        return Err(CliError::Domain(format!(
            "{} is not a valid {} machine:\n{report}",
            path.display(),
            machine.kind()
        )));
    }
    Ok(machine)
}

fn load_qcfa(path: &Path) -> Result<Qcfa> {
    match load_valid(path)? {
        MachineDescription::Qcfa(a) => Ok(a),
        other => Err(CliError::Domain(format!(
            "{} holds a {} machine; compile it to a 1QCFA first",
            path.display(),
            other.kind()
        ))),
    }
}

fn save(path: &Path, machine: MachineDescription) -> Result<()> {
    fs::write(path, serialize_machine(&machine))
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn plural(n: usize, noun: &str) -> String {
    if n == 1 {
        format!("{n} {noun}")
    } else {
        format!("{n} {noun}s")
    }
}

/// Prints probabilities at fixed precision without a spurious minus sign on
/// rounding noise.
fn prob(p: f64) -> String {
    let p = if p.abs() < 5e-13 { 0.0 } else { p };
    format!("{p:.12}")
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> Result<()> {
    let machine = load(path)?;
    let report = validate(&machine);
    writeln!(out, "{}: {} machine", path.display(), machine.kind())?;
    writeln!(out, "{report}")?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Domain(format!(
            "{} found",
            plural(report.violations.len(), "violation")
        )))
    }
}

fn branch_cap() -> Result<usize> {
    match std::env::var(BRANCH_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{BRANCH_CAP_VAR} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_BRANCH_CAP),
    }
}

fn cmd_run(path: &Path, word: &str, engine: Engine, oracle_check: bool, out: &mut dyn Write) -> Result<()> {
    let machine = load_valid(path)?;
    let a = match machine {
        MachineDescription::Qcfa(a) => a,
        other => {
            writeln!(out, "running the 1QCFA compiled from this {} machine", other.kind())?;
            compile(&other)?
        }
    };
    let w = a.alphabet.parse_word(word)?;
    let density = |w: &Word| -> Result<RunOutcome> { Ok(qcfa_run(&a, w)?) };
    let branch = |w: &Word| -> Result<RunOutcome> {
        Ok(qcfa_run_branching_oracle(&a, w, branch_cap()?)?)
    };
    let primary = match engine {
        Engine::Density => density(&w)?,
        Engine::Branch => branch(&w)?,
    };
    writeln!(out, "accept {}", prob(primary.accept))?;
    writeln!(out, "reject {}", prob(primary.reject))?;
    if oracle_check {
        let other = match engine {
            Engine::Density => branch(&w)?,
            Engine::Branch => density(&w)?,
        };
        let gap = (primary.accept - other.accept)
            .abs()
            .max((primary.reject - other.reject).abs());
        writeln!(out, "oracle discrepancy {gap:.3e}")?;
    }
    Ok(())
}

fn cmd_compile(path: &Path, output: &Path, out: &mut dyn Write) -> Result<()> {
    let machine = load_valid(path)?;
    let compiled = compile(&machine)?;
    writeln!(
        out,
        "{}, {}",
        plural(compiled.dim, "quantum state"),
        plural(compiled.num_states(), "classical state")
    )?;
    save(output, MachineDescription::Qcfa(compiled))
}

fn counts_line(a: &Qcfa) -> String {
    format!("QS = {}, CS = {}", a.dim, a.num_states())
}

fn cmd_product(
    op: ProductKind,
    a: &Path,
    b: &Path,
    policy: AlphabetPolicy,
    output: &Path,
    out: &mut dyn Write,
) -> Result<()> {
    let (a, b) = (load_qcfa(a)?, load_qcfa(b)?);
    let op = match op {
        ProductKind::Intersect => ProductOp::Intersect,
        ProductKind::Union => ProductOp::Union,
    };
    let mode = match policy {
        AlphabetPolicy::Intersect => AlphabetMode::Intersect,
        AlphabetPolicy::Union => AlphabetMode::UnionWithExtension,
    };
    let joint = product(&a, &b, op, mode)?;
    writeln!(out, "{}", counts_line(&joint))?;
    save(output, MachineDescription::Qcfa(joint))
}

fn cmd_complement(path: &Path, output: &Path, out: &mut dyn Write) -> Result<()> {
    let c = complement(&load_qcfa(path)?);
    writeln!(out, "{}", counts_line(&c))?;
    save(output, MachineDescription::Qcfa(c))
}

fn shown(w: &Word) -> String {
    if w.is_empty() {
        "(empty word)".to_string()
    } else {
        w.to_string()
    }
}

fn cmd_analyze(path: &Path, show_minimization: bool, show_forbidden: bool, out: &mut dyn Write) -> Result<()> {
    let d: Dfa = match load_valid(path)? {
        MachineDescription::Dfa(d) => d,
        other => {
            return Err(CliError::Domain(format!(
                "analyze expects a dfa file, got {}",
                other.kind()
            )))
        }
    };
    let minimized = minimize_dfa(&d);
    let m = &minimized.dfa;
    if minimized.is_unchanged() {
        writeln!(out, "minimal: yes ({})", plural(m.num_states(), "state"))?;
    } else {
        writeln!(
            out,
            "minimal: no ({} -> {})",
            plural(d.num_states(), "state"),
            plural(m.num_states(), "state")
        )?;
    }
    if show_minimization {
        writeln!(out, "minimization map:")?;
        for (s, target) in d.states.iter().zip(&minimized.mapping) {
            match target {
                Some(t) => writeln!(out, "  {s} -> {}", m.states[*t])?,
                None => writeln!(out, "  {s} -> (unreachable, removed)")?,
            }
        }
        writeln!(out, "distinguishing words:")?;
        for s in 0..m.num_states() {
            for t in s + 1..m.num_states() {
                if let Distinguishability::Distinguished(cert) = distinguish(m, s, t)? {
                    debug_assert!(cert.verify(m));
                    writeln!(out, "  {} / {}: {}", m.states[s], m.states[t], shown(&cert.witness))?;
                }
            }
        }
    }
    if show_forbidden {
        match find_forbidden_construction(m) {
            Some(w) => writeln!(
                out,
                "forbidden construction: s = {}, t = {}, x = {} (replay {})",
                m.states[w.s],
                m.states[w.t],
                shown(&w.word),
                if w.verify(m) { "verified" } else { "FAILED" }
            )?,
            None => writeln!(out, "forbidden construction: none")?,
        }
    }
    Ok(())
}

/// JSON summary of an `L_m` run; the per-word rows live in the CSV.
#[derive(Debug, Serialize)]
struct ExperimentSummary<'a> {
    m: usize,
    epsilon: f64,
    seed: u64,
    max_len: usize,
    tracks_d: usize,
    copies_t: u32,
    multipliers_k: &'a [usize],
    angle_denominator: usize,
    single_copy_bound: f64,
    verified_bound: f64,
    combined_epsilon: f64,
    quantum_dim: usize,
    classical_states: usize,
    words_checked: usize,
    violations: usize,
    min_member_accept: f64,
    max_non_member_accept: f64,
    max_outside_shape_accept: f64,
    empty_word_accept: f64,
    dfa_states: usize,
    minimal_dfa_states: usize,
    dfa_is_minimal: bool,
    forbidden_construction: Option<&'a ForbiddenSummary>,
    context: &'a [String],
}

impl<'a> From<&'a ExperimentReport> for ExperimentSummary<'a> {
    fn from(r: &'a ExperimentReport) -> Self {
        Self {
            m: r.m,
            epsilon: r.epsilon,
            seed: r.seed,
            max_len: r.max_len,
            tracks_d: r.params.num_tracks(),
            copies_t: r.params.copies,
            multipliers_k: &r.params.tracks,
            angle_denominator: r.params.angle_denominator,
            single_copy_bound: r.params.single_copy_bound,
            verified_bound: r.params.bound,
            combined_epsilon: r.combined_epsilon,
            quantum_dim: r.quantum_dim,
            classical_states: r.classical_states,
            words_checked: r.words.len(),
            violations: r.violations,
            min_member_accept: r.min_member_accept,
            max_non_member_accept: r.max_non_member_accept,
            max_outside_shape_accept: r.max_outside_shape_accept,
            empty_word_accept: r.empty_word_accept,
            dfa_states: r.dfa_states,
            minimal_dfa_states: r.minimal_dfa_states,
            dfa_is_minimal: r.dfa_is_minimal,
            forbidden_construction: r.forbidden_construction.as_ref(),
            context: &r.context,
        }
    }
}

fn cmd_experiment_lm(
    m: usize,
    epsilon: f64,
    max_len: usize,
    seed: u64,
    csv_path: &Path,
    out: &mut dyn Write,
) -> Result<()> {
    let report = run_lm_experiment(m, epsilon, max_len, seed)?;
    let json_path = csv_path.with_extension("json");

    let mut writer = csv::Writer::from_path(csv_path)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", csv_path.display())))?;
    for row in &report.words {
        writer
            .serialize(row)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", csv_path.display())))?;
    }
    writer.flush()?;
    let mut json = serde_json::to_string_pretty(&ExperimentSummary::from(&report))
        .expect("summary is plain data");
    json.push('\n');
    fs::write(&json_path, json)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", json_path.display())))?;

    let p = &report.params;
    writeln!(out, "m = {m}, epsilon = {epsilon}, seed = {seed}, max length = {max_len}")?;
    writeln!(
        out,
        "tracks d = {} (k = {:?}, angle 2*pi*k/{}), copies t = {}, verified bound v^t = {:.6}",
        p.num_tracks(),
        p.tracks,
        p.angle_denominator,
        p.copies,
        p.bound
    )?;
    writeln!(
        out,
        "{}, {}",
        plural(report.quantum_dim, "quantum state"),
        plural(report.classical_states, "classical state")
    )?;
    writeln!(
        out,
        "words checked {}, violations {}",
        report.words.len(),
        report.violations
    )?;
    writeln!(
        out,
        "min member accept {}, max non-member accept {}",
        prob(report.min_member_accept),
        prob(report.max_non_member_accept)
    )?;
    writeln!(
        out,
        "empty word accept {} (the empty word is not in L_{m})",
        prob(report.empty_word_accept)
    )?;
    if let Some(f) = &report.forbidden_construction {
        writeln!(
            out,
            "DFA: {} (minimal: {}), forbidden construction s = {}, t = {}, x = {}",
            plural(report.dfa_states, "state"),
            if report.dfa_is_minimal { "yes" } else { "no" },
            f.s,
            f.t,
            f.word
        )?;
    }
    for line in &report.context {
        writeln!(out, "note: {line}")?;
    }
    writeln!(out, "wrote {} and {}", csv_path.display(), json_path.display())?;
    if report.violations > 0 {
        return Err(CliError::Domain(format!(
            "{} of the bounded-error requirement",
            plural(report.violations, "violation")
        )));
    }
    Ok(())
}

fn cmd_example(
    which: ExampleMachine,
    m: usize,
    epsilon: f64,
    seed: u64,
    output: &Path,
    out: &mut dyn Write,
) -> Result<()> {
    let machine = match which {
        ExampleMachine::LmDfa => MachineDescription::Dfa(build_figure1_dfa(m)?),
        ExampleMachine::ShapeDfa => MachineDescription::Dfa(build_figure2_dfa()),
        ExampleMachine::LmLength => {
            let params = search_divisibility_params(m, epsilon, seed)?;
            MachineDescription::Mo1qfa(build_l2_mo1qfa(&params)?)
        }
        ExampleMachine::Lm => MachineDescription::Qcfa(build_lm_qcfa(m, epsilon, seed)?),
    };
    writeln!(out, "wrote {} machine to {}", machine.kind(), output.display())?;
    save(output, machine)
}
