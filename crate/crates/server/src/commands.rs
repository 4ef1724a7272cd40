//! Implementations of the `nsu` subcommands. Each writes its report to the
//! given sink so that the binary and the tests share one code path.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};

use nsu_core::active::{al_loop, holdout, write_curve, ActiveSession, GoldOracle};
use nsu_core::corpus::Corpus;
use nsu_core::features::{write_matrix, FeatureExtractor, SchemaTag};
use nsu_core::learn::{cross_validate, evaluate, paired_t_test, tune_tree, Dataset, DecisionTree, TreeParams};
use nsu_core::rules::RuleSet;
use nsu_core::session::{first_divergence, format_trace, parse_script, replay, Classifier};
use nsu_core::synth::{generate, SynthParams};
use nsu_core::dialogue::DialogueState;
use nsu_core::Config;

use crate::api::AlService;

/// Options shared by the corpus-driven commands.
#[derive(Debug, Clone, Default)]
pub struct Common {
    /// Corpus directory; the built-in synthetic corpus when absent.
    pub corpus: Option<PathBuf>,
    pub schema: Option<SchemaTag>,
    pub seed: u64,
    pub config: Option<PathBuf>,
}

impl Common {
    pub fn config(&self) -> Result<Config> {
        match &self.config {
            Some(p) => Config::load(p).with_context(|| format!("loading config {}", p.display())),
            None => Ok(Config::default()),
        }
    }

    pub fn corpus(&self) -> Result<Corpus> {
        match &self.corpus {
            Some(dir) => Corpus::load_dir(dir).with_context(|| format!("loading corpus {}", dir.display())),
            None => Ok(generate(&SynthParams::default())),
        }
    }

    pub fn schema(&self) -> SchemaTag {
        self.schema.unwrap_or(SchemaTag::Baseline)
    }

    fn extractor(&self, cfg: &Config) -> FeatureExtractor {
        FeatureExtractor::new(cfg.lexicon.clone(), cfg.alignment)
    }

    /// Feature rows with the (file id, sentence id) of each.
    pub fn dataset(&self, tag: SchemaTag) -> Result<(Dataset, Vec<(String, u32)>, Corpus)> {
        let cfg = self.config()?;
        let corpus = self.corpus()?;
        let d = Dataset::from_corpus(&corpus, tag, &self.extractor(&cfg))?;
        let sources = corpus
            .records
            .iter()
            .map(|r| (r.file_id.clone(), r.sentence_id))
            .collect();
        Ok((d, sources, corpus))
    }
}

pub fn tree_params(min_leaf: usize, confidence: f64, unpruned: bool) -> TreeParams {
    if unpruned {
        TreeParams::unpruned(min_leaf)
    } else {
        TreeParams {
            min_leaf,
            confidence: Some(confidence),
        }
    }
}

pub fn train(c: &Common, params: TreeParams, out: &Path, w: &mut dyn Write) -> Result<()> {
    let (d, _, _) = c.dataset(c.schema())?;
    let tree = DecisionTree::train(&d, params)?;
    std::fs::write(out, tree.to_text()).with_context(|| format!("writing {}", out.display()))?;
    writeln!(
        w,
        "trained on {} rows, {} features: depth {}, {} leaves -> {}",
        d.len(),
        d.schema.len(),
        tree.depth(),
        tree.leaves(),
        out.display()
    )?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<DecisionTree> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(DecisionTree::from_text(&text)?)
}

fn model_schema(tree: &DecisionTree) -> Result<SchemaTag> {
    tree.schema.name.parse().map_err(|e: String| anyhow!(e))
}

pub fn eval(c: &Common, model: &Path, csv: Option<&Path>, w: &mut dyn Write) -> Result<()> {
    let tree = load_model(model)?;
    let tag = model_schema(&tree)?;
    if let Some(s) = c.schema {
        if s != tag {
            bail!("schema mismatch: model uses `{}`, requested `{}`", tree.schema.name, s.schema().name);
        }
    }
    let (d, _, _) = c.dataset(tag)?;
    let report = evaluate(&tree, &d)?;
    writeln!(w, "{report}")?;
    if let Some(p) = csv {
        report.write_csv(std::fs::File::create(p)?)?;
    }
    Ok(())
}

pub fn crossval(
    c: &Common,
    k: usize,
    params: TreeParams,
    csv: Option<&Path>,
    against: Option<SchemaTag>,
    w: &mut dyn Write,
) -> Result<()> {
    if k < 2 {
        bail!("k must be at least 2");
    }
    let tag = c.schema();
    let (d, _, _) = c.dataset(tag)?;
    let cv = cross_validate(&d, k, params, c.seed)?;
    writeln!(w, "{k}-fold cross-validation, {} rows, schema {}", d.len(), d.schema.name)?;
    writeln!(w, "majority baseline {:.4}", d.majority_rate())?;
    writeln!(w, "{}", cv.pooled)?;
    if let Some(p) = csv {
        cv.pooled.write_csv(std::fs::File::create(p)?)?;
    }
    if let Some(other) = against {
        let (d2, _, _) = c.dataset(other)?;
        let cv2 = cross_validate(&d2, k, params, c.seed)?;
        let (a, b) = (cv.fold_accuracies(), cv2.fold_accuracies());
        writeln!(w, "{} accuracy {:.4}", d2.schema.name, cv2.pooled.accuracy)?;
        match paired_t_test(&a, &b) {
            Ok(t) => writeln!(w, "paired t = {:.4}, df = {}, p = {:.4}", t.t, t.df, t.p)?,
            Err(e) => writeln!(w, "paired t-test undefined: {e}")?,
        }
    }
    Ok(())
}

pub fn tune(c: &Common, k: usize, w: &mut dyn Write) -> Result<()> {
    let (d, _, _) = c.dataset(c.schema())?;
    let r = tune_tree(&d, k, c.seed, TreeParams::default())?;
    for (i, (p, acc)) in r.trajectory.iter().enumerate() {
        writeln!(w, "sweep {i}: C={:.4} M={} accuracy {acc:.4}", p.confidence.unwrap_or(0.0), p.min_leaf)?;
    }
    writeln!(
        w,
        "best: C={:.4} M={} accuracy {:.4}",
        r.params.confidence.unwrap_or(0.0),
        r.params.min_leaf,
        r.accuracy
    )?;
    Ok(())
}

pub fn rule_set(rules: Option<&Path>, cfg: &Config) -> Result<RuleSet> {
    Ok(match rules {
        Some(p) => RuleSet::load(p, cfg.rules.clone(), cfg.lexicon.clone())?,
        None => RuleSet::canonical().with_config(cfg.rules.clone(), cfg.lexicon.clone()),
    })
}

/// Replays a script, or resolves a single state file when `state` is set.
pub fn resolve(
    c: &Common,
    input: &Path,
    rules: Option<&Path>,
    disable: &[String],
    state: bool,
    w: &mut dyn Write,
) -> Result<()> {
    let cfg = c.config()?;
    let full = rule_set(rules, &cfg)?;
    let mut reduced = full.clone();
    for name in disable {
        reduced.set_enabled(name, false)?;
    }
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    if state {
        let s = DialogueState::from_text(&text)?;
        let (resolved, firings) = reduced.resolve(&s)?;
        for f in &firings {
            let outs: Vec<String> = f.outcomes.iter().map(|(e, p)| format!("{e}: {p:.4}")).collect();
            writeln!(w, "# {} -> {}", f.rule, outs.join("; "))?;
        }
        write!(w, "{}", resolved.to_text())?;
        return Ok(());
    }
    let script = parse_script(&text)?;
    let trace = replay(&script, Arc::new(reduced), None)?;
    write!(w, "{}", format_trace(&trace))?;
    if !disable.is_empty() {
        let reference = replay(&script, Arc::new(full), None)?;
        match first_divergence(&reference, &trace) {
            Some(step) => writeln!(w, "# divergence from the full rule set at step {step}")?,
            None => writeln!(w, "# no divergence from the full rule set")?,
        }
    }
    Ok(())
}

pub fn synth(params: &SynthParams, out: &Path, w: &mut dyn Write) -> Result<()> {
    let c = generate(params);
    c.write_dir(out)?;
    writeln!(
        w,
        "wrote {} transcripts and {} records to {}",
        c.transcripts.len(),
        c.records.len(),
        out.display()
    )?;
    Ok(())
}

pub fn features(c: &Common, out: &Path, w: &mut dyn Write) -> Result<()> {
    let (d, _, _) = c.dataset(c.schema())?;
    let rows: Vec<_> = d.rows.iter().map(|r| (r.values.clone(), r.label)).collect();
    write_matrix(&d.schema, &rows, std::fs::File::create(out)?)?;
    writeln!(w, "wrote {} rows x {} features to {}", d.len(), d.schema.len(), out.display())?;
    Ok(())
}

/// Simulated active learning with gold labels as the oracle.
pub fn al(c: &Common, budget: usize, batch: usize, out: Option<&Path>, w: &mut dyn Write) -> Result<()> {
    let cfg = c.config()?;
    let a = cfg.active;
    let (d, sources, _) = c.dataset(c.schema())?;
    let (train, dev, pool) = holdout(&d, &sources, (a.train_ratio, a.dev_ratio, a.test_ratio), c.seed);
    writeln!(w, "train {}, dev {}, pool {}", train.len(), dev.len(), pool.len())?;
    let outcome = al_loop(train, dev, pool, &mut GoldOracle, budget, batch, TreeParams::default())?;
    for p in &outcome.curve {
        writeln!(w, "{:>5} labeled: accuracy {:.4} f1 {:.4}", p.labeled_count, p.accuracy, p.f1)?;
    }
    if let Some(p) = out {
        write_curve(&outcome.curve, std::fs::File::create(p)?)?;
    }
    Ok(())
}

/// Classifier and annotation service for `serve`.
pub fn service_parts(c: &Common, model: Option<&Path>) -> Result<(Classifier, AlService)> {
    let cfg = c.config()?;
    let (tree, tag) = match model {
        Some(p) => {
            let t = load_model(p)?;
            let tag = model_schema(&t)?;
            (t, tag)
        }
        None => {
            let (d, _, _) = c.dataset(c.schema())?;
            (DecisionTree::train(&d, TreeParams::default())?, c.schema())
        }
    };
    let classifier = Classifier::new(tree, tag, &cfg);
    let (d, sources, corpus) = c.dataset(c.schema())?;
    let a = cfg.active;
    let (train, dev, pool) = holdout(&d, &sources, (a.train_ratio, a.dev_ratio, a.test_ratio), c.seed);
    let texts = pool
        .iter()
        .map(|p| {
            let r = corpus
                .records
                .iter()
                .find(|r| r.file_id == p.file_id && r.sentence_id == p.sentence_id)
                .expect("pool rows come from records");
            let (nsu, ant) = corpus.pair(r).expect("records resolve");
            (nsu.text(), ant.text())
        })
        .collect();
    let session = ActiveSession::new(train, dev, pool, TreeParams::default())?;
    Ok((classifier, AlService { session, texts }))
}
