use std::path::PathBuf;
use std::process::{Command, Output};

use nsu_core::corpus::Corpus;
use nsu_core::features::{FeatureExtractor, SchemaTag};
use nsu_core::learn::{Dataset, DecisionTree};

fn nsu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsu")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn core_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn golden(name: &str) -> String {
    core_dir().join("rules/golden").join(name).to_string_lossy().into_owned()
}

#[test]
fn train_then_reload_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    for (schema, n) in [("baseline", 9), ("extended", 32)] {
        let model = dir.path().join(format!("{schema}.tree"));
        let o = nsu(&["train", "--schema", schema, "--out", model.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains(&format!("{n} features")));
        let tree = DecisionTree::from_text(&std::fs::read_to_string(&model).unwrap()).unwrap();
        assert_eq!(tree.schema.len(), n);
        let tag: SchemaTag = schema.parse().unwrap();
        let corpus = nsu_core::synth::generate(&Default::default());
        let d = Dataset::from_corpus(&corpus, tag, &FeatureExtractor::default()).unwrap();
        let fresh = DecisionTree::train(&d, Default::default()).unwrap();
        for r in &d.rows {
            assert_eq!(tree.predict(&r.values).unwrap(), fresh.predict(&r.values).unwrap());
        }
    }
}

#[test]
fn empty_corpus_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("nsu.csv"), "file_id,sentence_id,antecedent_id,label\n").unwrap();
    let out = dir.path().join("m.tree");
    let o = nsu(&["train", "--corpus", dir.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}

#[test]
fn eval_rejects_schema_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.tree");
    assert!(nsu(&["train", "--schema", "extended", "--out", model.to_str().unwrap()]).status.success());
    let o = nsu(&["eval", "--model", model.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("accuracy"));
    let o = nsu(&["eval", "--model", model.to_str().unwrap(), "--schema", "baseline"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema mismatch"));
}

#[test]
fn crossval_compares_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("report.csv");
    let o = nsu(&["crossval", "--against", "extended", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("10-fold"));
    assert!(text.contains("paired t"));
    let report = std::fs::read_to_string(csv).unwrap();
    assert!(report.starts_with("class,precision,recall,f1,support"));
    assert_eq!(nsu(&["crossval", "-k", "1"]).status.code(), Some(1));
}

#[test]
fn communicator_trace_matches_golden() {
    let o = nsu(&["resolve", &golden("communicator.tsv")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), std::fs::read_to_string(golden("communicator.trace")).unwrap());
    assert_eq!(stdout(&o).matches("## step").count(), 13);
}

#[test]
fn disabled_rule_reports_divergence() {
    let o = nsu(&["resolve", &golden("communicator.tsv"), "--disable", "reject"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("divergence from the full rule set at step 6"));
    let o = nsu(&["resolve", &golden("communicator.tsv"), "--disable", "sluice_who"]);
    assert!(stdout(&o).contains("no divergence"));
    assert_eq!(nsu(&["resolve", &golden("communicator.tsv"), "--disable", "nope"]).status.code(), Some(1));
}

#[test]
fn empty_script_gives_empty_trace() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.tsv");
    std::fs::write(&p, "# nothing\n").unwrap();
    let o = nsu(&["resolve", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
}

#[test]
fn resolve_single_state() {
    let o = nsu(&["resolve", "--state", &golden("shortans.pre")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# shortAns"));
    assert!(text.contains("a_a = Assert(organizingTheParty(Paul)): 1.0000"));
}

#[test]
fn synth_writes_the_bundled_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let o = nsu(&["synth", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let written = Corpus::load_dir(dir.path()).unwrap();
    let bundled = Corpus::load_dir(&core_dir().join("data/synthetic")).unwrap();
    assert_eq!(written.records, bundled.records);
    assert_eq!(written.transcripts, bundled.transcripts);
}

#[test]
fn features_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.csv");
    assert!(nsu(&["features", "--schema", "extended", "--out", p.to_str().unwrap()]).status.success());
    let text = std::fs::read_to_string(p).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 33);
    assert_eq!(text.lines().count(), 421);
}

#[test]
fn al_is_reproducible_with_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let run = |p: &PathBuf| nsu(&["al", "--seed", "5", "--budget", "8", "--batch", "2", "--out", p.to_str().unwrap()]);
    let (oa, ob) = (run(&a), run(&b));
    assert!(oa.status.success());
    assert_eq!(stdout(&oa), stdout(&ob));
    let ca = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ca, std::fs::read_to_string(&b).unwrap());
    assert_eq!(ca.lines().count(), 1 + 1 + 4);
}

#[test]
fn tune_prints_trajectory() {
    let o = nsu(&["tune", "-k", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("sweep 0"));
    assert!(text.contains("best: C="));
}
