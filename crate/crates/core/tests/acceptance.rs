//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nsu_core::active::{al_loop, entropy_sampling, holdout, GoldOracle, PoolInstance};
use nsu_core::config::{AlignmentScoring, DetectConfig};
use nsu_core::corpus::{detect_nsu, NsuClass, Sentence, Token};
use nsu_core::dialogue::{max_qud_prior, DialogueState};
use nsu_core::features::{lcs_length, local_alignment, FeatureExtractor, FeatureKind, FeatureValue, Schema, SchemaTag};
use nsu_core::learn::{
    coordinate_ascent, cross_validate, info_gain, paired_t_test, Dataset, DecisionTree, StepRule, TreeParams,
};
use nsu_core::rules::RuleSet;
use nsu_core::session::{format_trace, parse_script, replay};
use nsu_core::synth::{generate, SynthParams};
use nsu_core::tagger::Tagger;
use nsu_core::Config;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/rules/golden");

fn read_golden(name: &str) -> Result<String, String> {
    std::fs::read_to_string(format!("{GOLDEN}/{name}")).map_err(|e| format!("{name}: {e}"))
}

fn within(elapsed: Duration, limit: Duration) -> Outcome {
    ensure!(elapsed < limit, "took {elapsed:.2?}, limit {limit:.2?}");
    Ok(format!("{elapsed:.2?}"))
}

// Worked examples: file stem, expected a_a line, expected new_fec line.
const EXAMPLES: [(&str, &str, &str); 10] = [
    ("ack", "Accept(): 1.0000", "{}"),
    (
        "ack_uncertain",
        "Accept(): 0.7500, Assert(goingToParty(IND_1)): 0.2000, Ask(goingToParty(IND_1)): 0.0500",
        "{}",
    ),
    ("affans", "Assert(goingToParty(IND_2)): 1.0000", "{}"),
    ("reject", "Assert(Neg(goingToParty)(IND_2)): 1.0000", "{}"),
    ("propmod", "Assert(PropRel_probably(goingToParty)(IND_2)): 1.0000", "{}"),
    ("checkqu", "Ask(goingToParty(IND_1)): 1.0000", "{}"),
    ("shortans", "Assert(organizingTheParty(Paul)): 1.0000", "{friend(IND_2,Paul)}"),
    ("sluice", "Ask(named(X_1,X_2)): 1.0000", "{friend(IND_2,X_1), person(X_1)}"),
    (
        "sluice_ambiguous",
        "Ask(named(X_1,X_3)): 0.5000, Ask(named(X_2,X_3)): 0.5000",
        "{friend(IND_1,X_1), person(X_1)}",
    ),
    ("ce", "Ask(named(IND_1,Paul)): 1.0000", "{}"),
];

fn golden_traces() -> Outcome {
    let rules = RuleSet::canonical();
    let start = Instant::now();
    for (name, a_a, new_fec) in EXAMPLES {
        let pre = DialogueState::from_text(&read_golden(&format!("{name}.pre"))?).map_err(|e| e.to_string())?;
        let (post, _) = rules.resolve(&pre).map_err(|e| format!("{name}: {e}"))?;
        let text = post.to_text();
        ensure!(text == read_golden(&format!("{name}.post"))?, "{name}: snapshot differs:\n{text}");
        ensure!(text.contains(&format!("\na_a = {a_a}\n")), "{name}: a_a differs");
        ensure!(text.contains(&format!("\nnew_fec = {new_fec}\n")), "{name}: new_fec differs");
    }
    within(start.elapsed(), Duration::from_secs(1)).map(|t| format!("{} examples in {t}", EXAMPLES.len()))
}

const BASE_FACTS: [&str; 4] = [
    "travelPlans(C_1,C_2,D_1)",
    "city(C_1,Columbus)",
    "city(C_2,Phoenix)",
    "date(D_1,05-10)",
];
const TIME_FACTS: [&str; 3] = ["departTime(T_1)", "before(T_1,T_2)", "time(T_2,18:00)"];

fn communicator_table() -> Vec<(BTreeSet<String>, usize, &'static str)> {
    let facts = |extra: &[&[&str]]| -> BTreeSet<String> {
        extra.iter().flat_map(|s| s.iter()).map(|s| s.to_string()).collect()
    };
    let airline: &[&str] = &["Neg(havePreferredAirline)(user)"];
    let ret: &[&str] = &["Neg(return)(C_2,C_1)"];
    let dest: &[&str] = &["finalDest(C_2)"];
    vec![
        (facts(&[]), 1, "Ask(travelPlans(X_1,X_2,X_3))"),
        (facts(&[&BASE_FACTS]), 0, "Assert(travelPlans(C_1,C_2,D_1))"),
        (facts(&[&BASE_FACTS]), 1, "Ask(departTime(X_1))"),
        (facts(&[&BASE_FACTS, &TIME_FACTS]), 0, "Assert(departTime(T_1))"),
        (facts(&[&BASE_FACTS, &TIME_FACTS]), 1, "Ask(havePreferredAirline(user))"),
        (facts(&[&BASE_FACTS, &TIME_FACTS, airline]), 0, "Assert(Neg(havePreferredAirline)(user))"),
        (facts(&[&BASE_FACTS, &TIME_FACTS, airline]), 1, "Ask(travelPlans(C_1,C_2,D_1))"),
        (facts(&[&BASE_FACTS, &TIME_FACTS, airline]), 0, "Assert(travelPlans(C_1,C_2,D_1))"),
        (facts(&[&BASE_FACTS, &TIME_FACTS, airline]), 1, "Ask(return(C_2,C_1))"),
        (facts(&[&BASE_FACTS, &TIME_FACTS, airline, ret]), 0, "Assert(Neg(return)(C_2,C_1))"),
        (facts(&[&BASE_FACTS, &TIME_FACTS, airline, ret]), 1, "Ask(finalDest(C_2))"),
        (facts(&[&BASE_FACTS, &TIME_FACTS, airline, ret, dest]), 0, "Assert(finalDest(C_2))"),
        (facts(&[&BASE_FACTS, &TIME_FACTS, airline, ret, dest]), 0, "None"),
    ]
}

fn communicator() -> Outcome {
    let start = Instant::now();
    let script = parse_script(&read_golden("communicator.tsv")?).map_err(|e| e.to_string())?;
    let trace = replay(&script, Arc::new(RuleSet::canonical()), None).map_err(|e| e.to_string())?;
    let table = communicator_table();
    ensure!(trace.len() == table.len(), "{} steps, expected {}", trace.len(), table.len());
    for (i, (rec, (facts, max_qud, act))) in trace.iter().zip(&table).enumerate() {
        let step = i + 1;
        let s = &rec.snapshot;
        let got: BTreeSet<String> = s.facts.iter().cloned().collect();
        ensure!(&got == facts, "step {step}: facts {got:?}, expected {facts:?}");
        let top = &s.max_qud[0];
        ensure!(
            top.value == max_qud.to_string() && top.prob == 1.0,
            "step {step}: max_qud {top:?}, expected {max_qud}"
        );
        // The act of the turn's speaker: user acts on even steps.
        let acts = if step % 2 == 0 { &s.a_a } else { &s.a_b };
        ensure!(
            acts.len() == 1 && acts[0].value == *act,
            "step {step}: act {acts:?}, expected {act}"
        );
    }
    ensure!(
        format_trace(&trace) == read_golden("communicator.trace")?,
        "trace text differs from the golden trace"
    );
    within(start.elapsed(), Duration::from_secs(1)).map(|t| format!("13 steps in {t}"))
}

fn sluice_ambiguity() -> Outcome {
    let pre = DialogueState::from_text(&read_golden("sluice_ambiguous.pre")?).map_err(|e| e.to_string())?;
    let (post, _) = RuleSet::canonical().resolve(&pre).map_err(|e| e.to_string())?;
    let probs: Vec<(String, f64)> = post.a_a.iter().map(|(a, p)| (a.to_string(), p)).collect();
    ensure!(probs.len() == 2, "expected two outcomes, got {probs:?}");
    for (a, p) in &probs {
        ensure!((p - 0.5).abs() <= 1e-9, "{a} has probability {p}");
    }
    Ok(format!("{} and {} at 0.5", probs[0].0, probs[1].0))
}

fn max_qud_ratios() -> Outcome {
    let e = std::f64::consts::E;
    for size in 1..=6usize {
        let d = max_qud_prior(size);
        let total: f64 = (1..=size).map(|i| d.prob(&i)).sum();
        ensure!((total - 1.0).abs() <= 1e-9, "size {size}: total {total}");
        for i in 1..size {
            let r = d.prob(&(i + 1)) / d.prob(&i);
            ensure!((r - e).abs() <= 1e-9, "size {size}: P({})/P({i}) = {r}", i + 1);
        }
    }
    let d = max_qud_prior(3);
    for (i, want) in [(1, 0.0900), (2, 0.2447), (3, 0.6652)] {
        ensure!((d.prob(&i) - want).abs() <= 1e-4, "size 3: P({i}) = {}", d.prob(&i));
    }
    Ok("sizes 1-6, size 3 = {0.0900, 0.2447, 0.6652}".into())
}

const NAMES: [&str; 8] = ["f0", "f1", "f2", "f3", "f4", "f5", "f6", "f7"];
const LABELS: [NsuClass; 4] = [NsuClass::Ack, NsuClass::ShortAns, NsuClass::AffAns, NsuClass::Reject];

fn counted_entropy<'a>(labels: impl Iterator<Item = &'a NsuClass>) -> f64 {
    let mut counts: BTreeMap<&NsuClass, f64> = BTreeMap::new();
    let mut n = 0.0;
    for l in labels {
        *counts.entry(l).or_default() += 1.0;
        n += 1.0;
    }
    counts.values().map(|c| -(c / n) * (c / n).log2()).sum()
}

fn split_gain(parent: &[NsuClass], parts: &[Vec<NsuClass>]) -> f64 {
    let n = parent.len() as f64;
    counted_entropy(parent.iter())
        - parts
            .iter()
            .filter(|p| !p.is_empty())
            .map(|p| p.len() as f64 / n * counted_entropy(p.iter()))
            .sum::<f64>()
}

fn gain_oracle(d: &Dataset, f: usize) -> f64 {
    let labels: Vec<NsuClass> = d.rows.iter().map(|r| r.label).collect();
    match d.schema.features[f].kind {
        FeatureKind::Categorical => {
            let mut groups: BTreeMap<String, Vec<NsuClass>> = BTreeMap::new();
            for r in &d.rows {
                groups.entry(r.values[f].to_string()).or_default().push(r.label);
            }
            split_gain(&labels, &groups.into_values().collect::<Vec<_>>())
        }
        FeatureKind::Numeric => {
            let mut xs: Vec<f64> = d.rows.iter().filter_map(|r| r.values[f].as_num()).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let mut best: Option<f64> = None;
            for w in xs.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let (mut lo, mut hi, mut unk) = (Vec::new(), Vec::new(), Vec::new());
                for r in &d.rows {
                    match r.values[f].as_num() {
                        Some(x) if x <= t => lo.push(r.label),
                        Some(_) => hi.push(r.label),
                        None => unk.push(r.label),
                    }
                }
                if lo.len() >= hi.len() {
                    lo.extend(unk);
                } else {
                    hi.extend(unk);
                }
                let g = split_gain(&labels, &[lo, hi]);
                best = Some(best.map_or(g, |b: f64| b.max(g)));
            }
            best.unwrap_or(0.0)
        }
    }
}

fn random_value(rng: &mut ChaCha8Rng, kind: FeatureKind) -> FeatureValue {
    if rng.gen_bool(0.1) {
        return FeatureValue::Unknown;
    }
    match kind {
        FeatureKind::Categorical => FeatureValue::cat(["a", "b", "c"][rng.gen_range(0..3)]),
        FeatureKind::Numeric => FeatureValue::Num(rng.gen_range(0..5) as f64),
    }
}

fn information_gain() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for case in 0..1000 {
        let nf = rng.gen_range(1..=8);
        let defs: Vec<(&str, FeatureKind)> = (0..nf)
            .map(|i| {
                let kind = if rng.gen_bool(0.5) {
                    FeatureKind::Categorical
                } else {
                    FeatureKind::Numeric
                };
                (NAMES[i], kind)
            })
            .collect();
        let mut d = Dataset::new(Schema::new("random", &defs));
        for _ in 0..rng.gen_range(1..=30) {
            let values = defs.iter().map(|(_, k)| random_value(&mut rng, *k)).collect();
            let label = LABELS[rng.gen_range(0..LABELS.len())];
            d.push(values, label).map_err(|e| e.to_string())?;
        }
        for (f, (name, _)) in defs.iter().enumerate() {
            let got = info_gain(&d, name).map_err(|e| e.to_string())?;
            let want = gain_oracle(&d, f);
            ensure!((got - want).abs() <= 1e-9, "case {case} feature {name}: {got} vs oracle {want}");
            checked += 1;
        }
    }
    let t = within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{checked} features over 1000 datasets in {t}"))
}

fn lcs_oracle(a: &[u8], b: &[u8], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    if let Some(&v) = memo.get(&(a.len(), b.len())) {
        return v;
    }
    let v = if a[0] == b[0] {
        1 + lcs_oracle(&a[1..], &b[1..], memo)
    } else {
        lcs_oracle(&a[1..], b, memo).max(lcs_oracle(a, &b[1..], memo))
    };
    memo.insert((a.len(), b.len()), v);
    v
}

/// Best global alignment score of any pair of substrings: one global table
/// per pair of start positions, maximised over every end cell.
fn local_oracle(a: &[u8], b: &[u8], s: &AlignmentScoring) -> f64 {
    let mut best = 0.0f64;
    for i in 0..a.len() {
        for k in 0..b.len() {
            let (x, y) = (&a[i..], &b[k..]);
            let mut g = vec![vec![0.0f64; y.len() + 1]; x.len() + 1];
            for p in 0..=x.len() {
                for q in 0..=y.len() {
                    g[p][q] = match (p, q) {
                        (0, 0) => 0.0,
                        (0, q) => q as f64 * s.gap_score,
                        (p, 0) => p as f64 * s.gap_score,
                        (p, q) => {
                            let sub = if x[p - 1] == y[q - 1] {
                                s.match_score
                            } else {
                                s.mismatch_score
                            };
                            (g[p - 1][q - 1] + sub)
                                .max(g[p - 1][q] + s.gap_score)
                                .max(g[p][q - 1] + s.gap_score)
                        }
                    };
                    best = best.max(g[p][q]);
                }
            }
        }
    }
    best
}

fn alignment() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for case in 0..500 {
        let alphabet = rng.gen_range(2..=4u8);
        let word = |rng: &mut ChaCha8Rng| -> Vec<u8> {
            let n = rng.gen_range(0..=15);
            (0..n).map(|_| rng.gen_range(0..alphabet)).collect()
        };
        let (a, b) = (word(&mut rng), word(&mut rng));
        let scoring = if case % 2 == 0 {
            AlignmentScoring::default()
        } else {
            AlignmentScoring {
                match_score: rng.gen_range(1..=3) as f64,
                mismatch_score: -(rng.gen_range(0..=3) as f64),
                gap_score: -(rng.gen_range(1..=3) as f64),
            }
        };
        let got = local_alignment(&a, &b, &scoring);
        let want = local_oracle(&a, &b, &scoring);
        ensure!(got == want, "case {case}: local_alignment {got} vs {want} for {a:?} / {b:?}");
        let got = lcs_length(&a, &b);
        let want = lcs_oracle(&a, &b, &mut HashMap::new());
        ensure!(got == want, "case {case}: lcs_length {got} vs {want} for {a:?} / {b:?}");
    }
    Ok("500 pairs".into())
}

fn brute_entropy(model: &DecisionTree, x: &[FeatureValue]) -> f64 {
    let dist = model.predict(x).expect("schema matches");
    let h: f64 = dist.0.iter().filter(|p| **p > 0.0).map(|p| -p * p.log2()).sum();
    h.max(0.0)
}

fn entropy_ranking() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let defs = [("f0", FeatureKind::Categorical), ("f1", FeatureKind::Categorical), ("f2", FeatureKind::Categorical)];
    let mut ties = 0;
    for case in 0..200 {
        let mut d = Dataset::new(Schema::new("pool", &defs));
        let row = |rng: &mut ChaCha8Rng| -> Vec<FeatureValue> {
            (0..3).map(|_| FeatureValue::cat(["x", "y"][rng.gen_range(0..2)])).collect()
        };
        for _ in 0..rng.gen_range(4..=24) {
            let values = row(&mut rng);
            d.push(values, LABELS[rng.gen_range(0..3)]).map_err(|e| e.to_string())?;
        }
        let model = DecisionTree::train(&d, TreeParams::unpruned(1)).map_err(|e| e.to_string())?;
        let pool: Vec<PoolInstance> = (0..rng.gen_range(1..=30))
            .map(|i| PoolInstance {
                values: row(&mut rng),
                file_id: "P".into(),
                sentence_id: i,
                label: None,
            })
            .collect();
        let k = rng.gen_range(1..=pool.len() + 2);
        let got = entropy_sampling(&model, &pool, k).map_err(|e| e.to_string())?;
        let mut remaining: Vec<(usize, f64)> =
            pool.iter().enumerate().map(|(i, p)| (i, brute_entropy(&model, &p.values))).collect();
        let mut want = Vec::new();
        while !remaining.is_empty() && want.len() < k {
            let mut best = 0;
            for j in 1..remaining.len() {
                if remaining[j].1 > remaining[best].1 {
                    best = j;
                }
            }
            want.push(remaining.remove(best));
        }
        ties += want.windows(2).filter(|w| w[0].1 == w[1].1).count();
        ensure!(got == want, "case {case}: {got:?} vs {want:?}");
    }
    Ok(format!("200 pools, {ties} tied neighbours"))
}

fn ascent() -> Outcome {
    let f = |x: &[f64]| -(x[0] - 3.0).powi(2) - (x[1] + 1.0).powi(2);
    let r = coordinate_ascent(f, &[1.0, 1.0], &[1.0, 1.0], &[1e-4, 1e-4], 0.5, StepRule::Additive)
        .map_err(|e| e.to_string())?;
    let (x, y) = (r.x[0], r.x[1]);
    ensure!((x - 3.0).abs() <= 0.01 && (y + 1.0).abs() <= 0.01, "stopped at ({x}, {y})");
    Ok(format!("({x:.4}, {y:.4}) after {} sweeps", r.sweeps))
}

/// Log-gamma for positive integers and half-integers by recurrence.
fn ln_gamma_half(x: f64) -> f64 {
    let mut v = if x.fract() == 0.0 {
        0.0
    } else {
        std::f64::consts::PI.sqrt().ln()
    };
    let mut z = if x.fract() == 0.0 { 1.0 } else { 0.5 };
    while z < x {
        v += z.ln();
        z += 1.0;
    }
    v
}

/// Two-tailed p-value by Simpson quadrature of the t density over [0, |t|].
fn t_oracle(t: f64, df: f64) -> f64 {
    let c = (ln_gamma_half((df + 1.0) / 2.0) - ln_gamma_half(df / 2.0)).exp() / (df * std::f64::consts::PI).sqrt();
    let pdf = |x: f64| c * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
    let n = 20_000;
    let h = t.abs() / n as f64;
    let mut s = pdf(0.0) + pdf(t.abs());
    for i in 1..n {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * s * h / 3.0
}

fn t_test() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let a: Vec<f64> = (0..10).map(|_| rng.gen_range(0.7..0.95)).collect();
        let shift = rng.gen_range(-0.03..0.03);
        let b: Vec<f64> = a.iter().map(|x| x + shift + rng.gen_range(-0.02..0.02)).collect();
        let r = paired_t_test(&a, &b).map_err(|e| e.to_string())?;
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let mean = diffs.iter().sum::<f64>() / 10.0;
        let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 9.0).sqrt();
        let t = mean / (sd / 10f64.sqrt());
        let p = t_oracle(t, 9.0);
        ensure!(r.df == 9.0, "case {case}: df {}", r.df);
        ensure!((r.t - t).abs() <= 1e-6, "case {case}: t {} vs {t}", r.t);
        ensure!((r.p - p).abs() <= 1e-6, "case {case}: p {} vs {p}", r.p);
        worst = worst.max((r.p - p).abs());
    }
    Ok(format!("20 samples, max p deviation {worst:.1e}"))
}

fn synthetic_corpus() -> Outcome {
    let corpus = generate(&SynthParams::default());
    let classes: BTreeSet<NsuClass> = corpus.records.iter().map(|r| r.label).collect();
    ensure!(corpus.records.len() >= 300, "{} records", corpus.records.len());
    ensure!(classes.len() >= 8, "{} classes", classes.len());
    let cfg = Config::default();
    let fx = FeatureExtractor::new(cfg.lexicon.clone(), cfg.alignment);
    let d = Dataset::from_corpus(&corpus, SchemaTag::Baseline, &fx).map_err(|e| e.to_string())?;
    let cv = cross_validate(&d, 10, TreeParams::default(), 1).map_err(|e| e.to_string())?;
    let (acc, majority) = (cv.pooled.accuracy, d.majority_rate());
    ensure!(acc - majority >= 0.15, "accuracy {acc:.4} vs majority {majority:.4}");

    let sources: Vec<(String, u32)> = corpus.records.iter().map(|r| (r.file_id.clone(), r.sentence_id)).collect();
    let a = cfg.active;
    let mut deltas = Vec::new();
    for seed in 0..5 {
        let (train, dev, pool) = holdout(&d, &sources, (a.train_ratio, a.dev_ratio, a.test_ratio), seed);
        let out = al_loop(train, dev, pool, &mut GoldOracle, 50, 1, TreeParams::default()).map_err(|e| e.to_string())?;
        let (first, last) = (out.curve[0], out.curve[out.curve.len() - 1]);
        ensure!(last.labeled_count - first.labeled_count == 50, "seed {seed}: only {} labels", last.labeled_count - first.labeled_count);
        let delta = last.accuracy - first.accuracy;
        ensure!(delta >= -0.01, "seed {seed}: dev accuracy {:.4} -> {:.4}", first.accuracy, last.accuracy);
        deltas.push(format!("{delta:+.3}"));
    }
    Ok(format!(
        "{} rows, {} classes, accuracy {acc:.4} vs majority {majority:.4}; AL deltas [{}]",
        d.len(),
        classes.len(),
        deltas.join(", ")
    ))
}

fn tokens(items: &[(&str, &str)]) -> Sentence {
    Sentence {
        id: 1,
        speaker: Some("A".into()),
        tokens: items
            .iter()
            .map(|(w, pos)| match *w {
                "<pause>" => Token::pause(),
                "<unclear>" => Token::unclear(),
                _ => Token::word(w, &w.to_lowercase(), pos),
            })
            .collect(),
        syntax: None,
    }
}

fn detector() -> Outcome {
    let tagger = Tagger::default();
    let cfg = DetectConfig::default();
    let tagged = |text: &str| tagger.tag(1, Some("A"), text);
    let eleven = "the very big red and blue old wooden house near Paul";
    let twelve = "the very big red and blue old wooden house near Paul today";
    let cases: Vec<(&str, Sentence, DetectConfig, bool)> = vec![
        ("bare answer particle", tagged("Yes."), cfg.clone(), true),
        ("noun phrase", tagged("Paul and Mary."), cfg.clone(), true),
        ("no tokens", tagged(""), cfg.clone(), false),
        ("punctuation only", tagged("?"), cfg.clone(), false),
        ("markers only", tokens(&[("<pause>", ""), ("<unclear>", "")]), cfg.clone(), false),
        ("markers are not words", tokens(&[("Paul", "NP0"), ("<pause>", ""), ("<unclear>", "")]), cfg.clone(), true),
        ("below minimum characters", tokens(&[("A", "ZZ0"), (".", "PUN")]), cfg.clone(), false),
        ("one word under the limit", tagged(eleven), cfg.clone(), true),
        ("at the word limit", tagged(twelve), cfg.clone(), false),
        (
            "custom word limit",
            tagged("the red one"),
            DetectConfig {
                max_words: 3,
                ..cfg.clone()
            },
            false,
        ),
        ("greeting", tagged("Hello."), cfg.clone(), false),
        ("greeting in capitals", tagged("HIYA Paul"), cfg.clone(), false),
        ("multi-word greeting", tagged("Good morning, Paul."), cfg.clone(), false),
        ("split greeting words", tagged("Good Paul morning"), cfg.clone(), true),
        ("finite verb", tagged("Is it?"), cfg.clone(), false),
        ("modal verb", tagged("Can."), cfg.clone(), false),
        ("verb participle", tagged("Going."), cfg.clone(), false),
        ("lexical verb tag", tokens(&[("Swim", "VVB")]), cfg, false),
    ];
    for (name, s, c, want) in &cases {
        ensure!(detect_nsu(s, c) == *want, "{name}: expected {want} for `{}`", s.text());
    }
    Ok(format!("{} cases", cases.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("golden resolution traces", golden_traces),
        ("flight booking walkthrough", communicator),
        ("sluice ambiguity", sluice_ambiguity),
        ("max-qud prior", max_qud_ratios),
        ("information gain oracle", information_gain),
        ("alignment oracles", alignment),
        ("entropy sampling order", entropy_ranking),
        ("coordinate ascent", ascent),
        ("paired t-test oracle", t_test),
        ("synthetic corpus learning", synthetic_corpus),
        ("NSU detector heuristics", detector),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(e) => {
                failed += 1;
                println!("FAIL  {name}: {e}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
