use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qcfa_cli::format::{parse_machine, serialize_machine};
use qcfa_core::random::{random_mm1qfa, random_qcfa};
use qcfa_core::semantics::qcfa_run;
use qcfa_core::{Alphabet, MachineDescription};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn qcfa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcfa"))
        .args(args)
        .env_remove("QCFA_BRANCH_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn example(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = path(dir, name);
    let mut all = vec!["example"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["-o", s(&out)]);
    let o = qcfa(&all);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

/// The `L_m` machine assembled from its two components through the CLI.
fn lm_machine(dir: &TempDir, m: &str) -> PathBuf {
    let shape = example(dir, "shape.json", &["shape-dfa"]);
    let length = example(dir, "length.json", &["lm-length", "--m", m]);
    let (shape_q, length_q, lm) = (path(dir, "shape_q.json"), path(dir, "length_q.json"), path(dir, "lm.json"));
    assert!(qcfa(&["compile", s(&shape), "-o", s(&shape_q)]).status.success());
    assert!(qcfa(&["compile", s(&length), "-o", s(&length_q)]).status.success());
    let o = qcfa(&["product", "--op", "intersect", s(&shape_q), s(&length_q), "-o", s(&lm)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("CS = 12"), "{}", stdout(&o));
    lm
}

fn probability(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} ")))
        .unwrap_or_else(|| panic!("no `{key}` line in {text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn validate_accepts_lm_dfa() {
    let dir = TempDir::new().unwrap();
    let f1 = example(&dir, "f1.json", &["lm-dfa", "--m", "3"]);
    let o = qcfa(&["validate", s(&f1)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("valid"));
}

#[test]
fn validate_flags_non_unitary_rule() {
    let dir = TempDir::new().unwrap();
    let f2 = example(&dir, "f2.json", &["shape-dfa"]);
    let compiled = path(&dir, "f2q.json");
    assert!(qcfa(&["compile", s(&f2), "-o", s(&compiled)]).status.success());
    let mut value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&compiled).unwrap()).unwrap();
    value["machine"]["rules"]["p0"]["a"]["unitary"] = serde_json::json!([[[2.0, 0.0]]]);
    fs::write(&compiled, value.to_string()).unwrap();
    let o = qcfa(&["validate", s(&compiled)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("rules[p0][a].unitary: unitarity"), "{}", stdout(&o));
}

#[test]
fn validate_rejects_malformed_numbers() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    fs::write(
        &bad,
        r#"{"format_version":1,"kind":"mo1qfa","machine":{"alphabet":["a"],"dim":1,"unitaries":{},"initial":[[1,"zero"]],"accepting":[[[1,0]]]}}"#,
    )
    .unwrap();
    assert_eq!(qcfa(&["validate", s(&bad)]).status.code(), Some(2));
    fs::write(&bad, r#"{"format_version":1,"kind":"dfa","extra":0,"machine":{}}"#).unwrap();
    assert_eq!(qcfa(&["validate", s(&bad)]).status.code(), Some(2));
    assert_eq!(qcfa(&["validate", s(&path(&dir, "missing.json"))]).status.code(), Some(2));
}

#[test]
fn run_compiled_shape_dfa() {
    let dir = TempDir::new().unwrap();
    let f2 = example(&dir, "f2.json", &["shape-dfa"]);
    let compiled = path(&dir, "f2q.json");
    let o = qcfa(&["compile", s(&f2), "-o", s(&compiled)]);
    assert_eq!(stdout(&o).trim(), "1 quantum state, 4 classical states");
    let o = qcfa(&["run", s(&compiled), "aabb"]);
    assert!(stdout(&o).contains("accept 1.000000000000"), "{}", stdout(&o));
    let o = qcfa(&["run", s(&compiled), "ba"]);
    assert!(stdout(&o).contains("accept 0.000000000000"));
}

#[test]
fn run_lm_machine_with_oracle_check() {
    let dir = TempDir::new().unwrap();
    let lm = lm_machine(&dir, "3");
    let o = qcfa(&["run", s(&lm), "ab", "--oracle-check"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(probability(&text, "accept") <= 0.1);
    assert!(probability(&text, "oracle discrepancy") <= 1e-9);
    let o = qcfa(&["run", s(&lm), "aab", "--engine", "branch"]);
    assert!(probability(&stdout(&o), "accept") >= 1.0 - 1e-9);
}

#[test]
fn branch_cap_is_read_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let lm = lm_machine(&dir, "3");
    let o = Command::new(env!("CARGO_BIN_EXE_qcfa"))
        .args(["run", s(&lm), "ab", "--engine", "branch"])
        .env("QCFA_BRANCH_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("branch cap of 1 exceeded"), "{}", stderr(&o));
}

#[test]
fn compile_reports_state_counts() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mm = path(&dir, "mm.json");
    let ab = Alphabet::from_chars("ab").unwrap();
    fs::write(&mm, serialize_machine(&MachineDescription::Mm1qfa(random_mm1qfa(&mut rng, 3, &ab)))).unwrap();
    let out = path(&dir, "mmq.json");
    let o = qcfa(&["compile", s(&mm), "-o", s(&out)]);
    assert_eq!(stdout(&o).trim(), "3 quantum states, 3 classical states");

    let o = qcfa(&["compile", s(&out), "-o", s(&path(&dir, "again.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("already a 1QCFA"), "{}", stderr(&o));
}

#[test]
fn complement_twice_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let lm = lm_machine(&dir, "3");
    let (c1, c2) = (path(&dir, "c1.json"), path(&dir, "c2.json"));
    assert!(qcfa(&["complement", s(&lm), "-o", s(&c1)]).status.success());
    assert!(qcfa(&["complement", s(&c1), "-o", s(&c2)]).status.success());
    assert_eq!(fs::read(&lm).unwrap(), fs::read(&c2).unwrap());
}

#[test]
fn union_with_alphabet_extension() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (a, b, u) = (path(&dir, "a.json"), path(&dir, "b.json"), path(&dir, "u.json"));
    let m1 = random_qcfa(&mut rng, 2, 3, &Alphabet::from_chars("ab").unwrap(), 2);
    let m2 = random_qcfa(&mut rng, 1, 2, &Alphabet::from_chars("bc").unwrap(), 2);
    fs::write(&a, serialize_machine(&MachineDescription::Qcfa(m1))).unwrap();
    fs::write(&b, serialize_machine(&MachineDescription::Qcfa(m2))).unwrap();
    let o = qcfa(&["product", "--op", "union", "--alphabet-mode", "union", s(&a), s(&b), "-o", s(&u)]);
    assert!(o.status.success(), "{}", stderr(&o));
    // Each side gains a rejecting sink for the foreign symbol.
    assert_eq!(stdout(&o).trim(), "QS = 2, CS = 12");
    let MachineDescription::Qcfa(joint) = parse_machine(&fs::read_to_string(&u).unwrap()).unwrap() else {
        panic!("expected a 1QCFA");
    };
    assert_eq!(joint.alphabet.symbols(), ["a", "b", "c"]);
}

#[test]
fn analyze_lm_dfa() {
    let dir = TempDir::new().unwrap();
    let f1 = example(&dir, "f1.json", &["lm-dfa", "--m", "3"]);
    let o = qcfa(&["analyze", s(&f1), "--forbidden"]);
    let text = stdout(&o);
    assert!(text.contains("minimal: yes (8 states)"), "{text}");
    assert!(text.contains("s = p0, t = p3, x = aaa (replay verified)"), "{text}");
}

#[test]
fn experiment_writes_reports() {
    let dir = TempDir::new().unwrap();
    let csv_path = path(&dir, "lm5.csv");
    let o = qcfa(&["experiment-lm", "--m", "5", "--report", s(&csv_path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv_text = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(lines.next(), Some("word,length,member,accept_prob,margin"));
    let margins: Vec<f64> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(margins.iter().all(|&m| m >= -1e-9));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(path(&dir, "lm5.json")).unwrap()).unwrap();
    assert_eq!(summary["violations"], 0);
    assert_eq!(summary["classical_states"], 12);
    assert_eq!(summary["words_checked"].as_u64().unwrap() as usize, margins.len());
}

#[test]
fn experiment_rejects_composite_m() {
    let dir = TempDir::new().unwrap();
    let o = qcfa(&["experiment-lm", "--m", "4", "--report", s(&path(&dir, "r.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("m must be prime"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (r1, r2) = (path(&dir, "r1.csv"), path(&dir, "r2.csv"));
    let o1 = qcfa(&["experiment-lm", "--m", "3", "--seed", "7", "--report", s(&r1)]);
    let o2 = qcfa(&["experiment-lm", "--m", "3", "--seed", "7", "--report", s(&r2)]);
    assert_eq!(stdout(&o1).replace("r1", "r2"), stdout(&o2));
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
    assert_eq!(fs::read(path(&dir, "r1.json")).unwrap(), fs::read(path(&dir, "r2.json")).unwrap());
}

#[test]
fn save_load_cycle_preserves_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ab = Alphabet::from_chars("ab").unwrap();
    for _ in 0..20 {
        let a = random_qcfa(&mut rng, 3, 4, &ab, 3);
        let MachineDescription::Qcfa(b) =
            parse_machine(&serialize_machine(&MachineDescription::Qcfa(a.clone()))).unwrap()
        else {
            panic!("kind changed");
        };
        for w in ab.words_up_to(3) {
            let (x, y) = (qcfa_run(&a, &w).unwrap(), qcfa_run(&b, &w).unwrap());
            assert!((x.accept - y.accept).abs() <= 1e-12);
        }
    }
}
