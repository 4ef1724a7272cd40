use proptest::prelude::*;

use nsu_core::config::{AlignmentScoring, DetectConfig};
use nsu_core::corpus::{
    detect_nsu, parse_transcript, restrict_adjacent, select_antecedent, Constituent, ConstituentLevel, Corpus,
    Dependency, NsuRecord, PartyCount, Sentence, Syntax, Token, Transcript,
};
use nsu_core::features::{lcs_length, local_alignment, FeatureExtractor, FeatureValue, Schema, SchemaTag};
use nsu_core::synth::{generate, SynthParams};

const WORDS: [&str; 12] = [
    "yes", "no", "Paul", "party", "going", "is", "what", "the", "probably", "tonight", "and", "mm",
];
const TAGS: [&str; 12] = [
    "ITJ", "XX0", "NP0", "NN1", "VVG", "VBZ", "DTQ", "AT0", "AV0", "AV0", "CJC", "ITJ",
];

fn token() -> impl Strategy<Value = Token> {
    prop_oneof![
        8 => (0..WORDS.len()).prop_map(|i| Token::word(WORDS[i], &WORDS[i].to_lowercase(), TAGS[i])),
        1 => prop::sample::select(vec![".", "?", "!", ","]).prop_map(|p| Token::word(p, p, "PUN")),
        1 => Just(Token::pause()),
        1 => Just(Token::unclear()),
    ]
}

fn syntax() -> impl Strategy<Value = Option<Syntax>> {
    let constituent = (
        prop::sample::select(vec![ConstituentLevel::Clause, ConstituentLevel::Phrase, ConstituentLevel::Word]),
        prop::sample::select(vec!["S", "SQ", "SBARQ", "NP", "VP", "ADVP", "NN", "UH"]),
    )
        .prop_map(|(level, tag)| Constituent { level, tag: tag.into() });
    let dep = (prop::sample::select(vec!["nsubj", "dobj", "neg"]), 0u32..6, 1u32..6).prop_map(|(rel, head, dependent)| {
        Dependency {
            rel: rel.into(),
            head,
            dependent,
        }
    });
    prop::option::of(
        (prop::collection::vec(constituent, 0..4), prop::collection::vec(dep, 0..3))
            .prop_map(|(constituents, dependencies)| Syntax { constituents, dependencies }),
    )
}

fn sentence() -> impl Strategy<Value = (Vec<Token>, Option<Syntax>, bool)> {
    (prop::collection::vec(token(), 1..14), syntax(), any::<bool>())
}

fn transcript() -> impl Strategy<Value = Transcript> {
    (prop::collection::vec(sentence(), 1..8), any::<bool>(), prop::collection::vec(1u32..4, 8)).prop_map(
        |(sents, two, gaps)| {
            let mut id = 0;
            let sentences = sents
                .into_iter()
                .zip(gaps)
                .map(|((tokens, syntax, a), gap)| {
                    id += gap;
                    Sentence {
                        id,
                        speaker: Some(if a { "A" } else { "B" }.into()),
                        tokens,
                        syntax,
                    }
                })
                .collect();
            Transcript {
                file_id: "P01".into(),
                party_count: if two { PartyCount::Two } else { PartyCount::Multi },
                sentences,
            }
        },
    )
}

fn as_sentence(tokens: Vec<Token>, syntax: Option<Syntax>) -> Sentence {
    Sentence {
        id: 1,
        speaker: Some("A".into()),
        tokens,
        syntax,
    }
}

proptest! {
    #[test]
    fn transcripts_round_trip(t in transcript()) {
        let text = t.to_canonical();
        let back = parse_transcript(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.to_canonical(), text);
    }

    #[test]
    fn detection_depends_only_on_inputs((tokens, syntax, _) in sentence(), max_words in 1usize..15) {
        let s = as_sentence(tokens, syntax);
        let cfg = DetectConfig { max_words, ..DetectConfig::default() };
        let first = detect_nsu(&s, &cfg);
        prop_assert_eq!(first, detect_nsu(&s.clone(), &cfg.clone()));
        if first {
            prop_assert!(s.word_count() < max_words);
            prop_assert!(!s.has_pos_prefix("V"));
        }
    }

    #[test]
    fn restriction_is_idempotent_and_ordered(keep in prop::collection::vec(any::<bool>(), 420), shift in prop::collection::vec(0u32..3, 420)) {
        let c = generate(&SynthParams::default());
        let records: Vec<NsuRecord> = c
            .records
            .iter()
            .zip(&keep)
            .zip(&shift)
            .filter(|((_, k), _)| **k)
            .map(|((r, _), s)| {
                let t = &c.transcripts[&r.file_id];
                let pos = t.position(r.antecedent_id).unwrap();
                let mut r = r.clone();
                r.antecedent_id = t.sentences[pos.saturating_sub(*s as usize)].id;
                r
            })
            .collect();
        let once = restrict_adjacent(&records, &c).unwrap();
        prop_assert_eq!(&restrict_adjacent(&once, &c).unwrap(), &once);
        let mut it = records.iter();
        for r in &once {
            prop_assert!(it.any(|x| x == r), "order not preserved");
        }
    }

    #[test]
    fn features_are_total_and_bounded(
        (nt, ns, _) in sentence(),
        (at, asyn, _) in sentence(),
    ) {
        let fx = FeatureExtractor::default();
        let (nsu, ant) = (as_sentence(nt, ns), as_sentence(at, asyn));
        let ext = fx.extract(SchemaTag::Extended, &nsu, &ant);
        prop_assert_eq!(ext.values.len(), 32);
        for (name, v) in ext.iter() {
            if let FeatureValue::Num(x) = v {
                prop_assert!(x.is_finite(), "{} = {}", name, x);
            }
        }
        let num = |n: &str| ext.get(n).and_then(FeatureValue::as_num);
        for n in ["repeat", "parallel"] {
            if let Some(x) = num(n) {
                prop_assert!((0.0..=3.0).contains(&x), "{} = {}", n, x);
            }
        }
        if let (Some(a), Some(c)) = (num("abs_len"), num("cont_len")) {
            prop_assert!(a >= c && c >= 0.0);
        }
        if let Some(x) = num("local_all") {
            prop_assert!(x >= 0.0);
        }
        if let Some(x) = num("lcs") {
            prop_assert!(x <= nsu.word_count().min(ant.word_count()) as f64);
        }
        let base = fx.extract_baseline(&nsu, &ant);
        prop_assert_eq!(&ext.to_baseline(), &base);
        prop_assert_eq!(base.values.len(), Schema::baseline().len());
    }

    #[test]
    fn alignment_identities(a in prop::collection::vec(0u8..4, 0..20), b in prop::collection::vec(0u8..4, 0..20)) {
        prop_assert_eq!(lcs_length(&a, &b), lcs_length(&b, &a));
        prop_assert!(lcs_length(&a, &b) <= a.len().min(b.len()));
        let s = AlignmentScoring::default();
        prop_assert_eq!(local_alignment(&a, &a, &s), 2.0 * a.len() as f64);
        prop_assert_eq!(local_alignment(&a, &b, &s), local_alignment(&b, &a, &s));
        prop_assert!(local_alignment(&a, &b, &s) >= 0.0);
    }
}

#[test]
fn bundled_corpus_is_the_generated_one() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic");
    let bundled = Corpus::load_dir(std::path::Path::new(dir)).unwrap();
    let fresh = generate(&SynthParams::default());
    assert_eq!(bundled.records, fresh.records);
    assert_eq!(bundled.transcripts, fresh.transcripts);
    assert_eq!(bundled.transcripts.len(), 60);
    for (id, t) in &bundled.transcripts {
        let on_disk = std::fs::read_to_string(format!("{dir}/{id}.txt")).unwrap();
        assert_eq!(t.to_canonical(), on_disk, "{id}");
    }
    for r in &bundled.records {
        let (nsu, ant) = bundled.pair(r).unwrap();
        let t = &bundled.transcripts[&r.file_id];
        assert_eq!(select_antecedent(nsu, t).map(|s| s.id), Some(ant.id));
    }
    assert_eq!(restrict_adjacent(&bundled.records, &bundled).unwrap(), bundled.records);
}
