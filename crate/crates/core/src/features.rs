//! Feature extraction for (NSU, antecedent) pairs.
//!
//! Two schemas are provided: a 9-feature baseline and a 32-feature extended
//! set that adds POS, phrase-level, dependency, turn-taking and alignment
//! features. Syntax-dependent features are [`FeatureValue::Unknown`] when a
//! sentence has no annotation block.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{AlignmentScoring, Lexicon};
use crate::corpus::{ConstituentLevel, NsuClass, Sentence, Token, TokenKind};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("header does not match schema `{0}`")]
    Header(String),
    #[error("row {row}: {msg}")]
    Value { row: usize, msg: String },
    #[error(transparent)]
    Class(#[from] crate::corpus::CorpusError),
}

/// Symbol used for a missing value in CSV files.
pub const UNKNOWN: &str = "?";
/// Symbol for an absent POS slot or an annotation level with no tag.
pub const NONE_SYMBOL: &str = "None";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureValue {
    Cat(String),
    Num(f64),
    Unknown,
}

impl FeatureValue {
    pub fn cat(s: &str) -> Self {
        FeatureValue::Cat(s.to_string())
    }

    fn yes_no(b: bool) -> Self {
        FeatureValue::cat(if b { "yes" } else { "no" })
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            FeatureValue::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            FeatureValue::Cat(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, FeatureValue::Unknown)
    }
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Cat(s) => f.write_str(s),
            FeatureValue::Num(x) => write!(f, "{x}"),
            FeatureValue::Unknown => f.write_str(UNKNOWN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub kind: FeatureKind,
}

/// Ordered feature names and kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub name: String,
    pub features: Vec<FeatureDef>,
}

use FeatureKind::{Categorical as C, Numeric as N};

const BASELINE: [(&str, FeatureKind); 9] = [
    ("nsu_cont", C),
    ("wh_nsu", C),
    ("aff_neg", C),
    ("lex", C),
    ("ant_mood", C),
    ("wh_ant", C),
    ("finished", C),
    ("repeat", N),
    ("parallel", N),
];

const EXTENSION: [(&str, FeatureKind); 23] = [
    ("pos_1", C),
    ("pos_2", C),
    ("pos_3", C),
    ("pos_4", C),
    ("ending_punct", C),
    ("has_pause", C),
    ("has_unclear", C),
    ("ant_sq", C),
    ("ant_sbarq", C),
    ("ant_sinv", C),
    ("nsu_first_clause", C),
    ("nsu_first_phrase", C),
    ("nsu_first_word", C),
    ("neg_correct", C),
    ("ant_neg", C),
    ("wh_inter", C),
    ("same_who", C),
    ("repeat_last", N),
    ("abs_len", N),
    ("cont_len", N),
    ("local_all", N),
    ("lcs", N),
    ("lcs_pos", N),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemaTag {
    Baseline,
    Extended,
}

impl SchemaTag {
    pub fn schema(self) -> Schema {
        match self {
            SchemaTag::Baseline => Schema::baseline(),
            SchemaTag::Extended => Schema::extended(),
        }
    }

    pub fn len(self) -> usize {
        match self {
            SchemaTag::Baseline => BASELINE.len(),
            SchemaTag::Extended => BASELINE.len() + EXTENSION.len(),
        }
    }

    pub fn is_empty(self) -> bool {
        false
    }
}

impl std::str::FromStr for SchemaTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(SchemaTag::Baseline),
            "extended" => Ok(SchemaTag::Extended),
            other => Err(format!("unknown schema `{other}` (expected baseline or extended)")),
        }
    }
}

impl Schema {
    pub fn new(name: &str, defs: &[(&str, FeatureKind)]) -> Self {
        Schema {
            name: name.to_string(),
            features: defs
                .iter()
                .map(|(n, k)| FeatureDef {
                    name: n.to_string(),
                    kind: *k,
                })
                .collect(),
        }
    }

    pub fn baseline() -> Self {
        Self::new("baseline", &BASELINE)
    }

    pub fn extended() -> Self {
        let all: Vec<_> = BASELINE.iter().chain(EXTENSION.iter()).copied().collect();
        Self::new("extended", &all)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }
}

/// Feature values in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub schema: SchemaTag,
    pub values: Vec<FeatureValue>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<&FeatureValue> {
        let idx = match self.schema {
            SchemaTag::Baseline => BASELINE.iter().position(|(n, _)| *n == name),
            SchemaTag::Extended => BASELINE
                .iter()
                .chain(EXTENSION.iter())
                .position(|(n, _)| *n == name),
        }?;
        self.values.get(idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &FeatureValue)> {
        BASELINE
            .iter()
            .chain(EXTENSION.iter())
            .map(|(n, _)| *n)
            .zip(self.values.iter())
    }

    /// The baseline prefix of an extended vector.
    pub fn to_baseline(&self) -> FeatureVector {
        FeatureVector {
            schema: SchemaTag::Baseline,
            values: self.values[..BASELINE.len()].to_vec(),
        }
    }
}

/// Extracts features using a lexicon and alignment scoring.
#[derive(Debug, Clone, Default)]
pub struct FeatureExtractor {
    pub lexicon: Lexicon,
    pub scoring: AlignmentScoring,
}

fn is_content_tag(pos: &str) -> bool {
    pos.starts_with('N') || pos.starts_with('V') || pos.starts_with("AJ") || pos.starts_with("AV")
}

fn lower_words(s: &Sentence) -> Vec<String> {
    s.words().map(|t| t.surface.to_lowercase()).collect()
}

fn lower_lemmas(s: &Sentence) -> Vec<String> {
    s.words().map(|t| t.lemma.to_lowercase()).collect()
}

fn pos_tags(s: &Sentence) -> Vec<&str> {
    s.words().map(|t| t.pos.as_str()).collect()
}

fn content_lemmas(s: &Sentence) -> HashSet<String> {
    s.words()
        .filter(|t| is_content_tag(&t.pos))
        .map(|t| t.lemma.to_lowercase())
        .collect()
}

fn last_non_marker(s: &Sentence) -> Option<&Token> {
    s.tokens.iter().rev().find(|t| !t.is_marker())
}

/// Length of the longest common contiguous run of the two sequences.
fn longest_common_run<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut best = 0;
    let mut prev = vec![0usize; b.len() + 1];
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            if x == y {
                cur[j + 1] = prev[j] + 1;
                best = best.max(cur[j + 1]);
            }
        }
        prev = cur;
    }
    best
}

impl FeatureExtractor {
    pub fn new(lexicon: Lexicon, scoring: AlignmentScoring) -> Self {
        FeatureExtractor { lexicon, scoring }
    }

    pub fn extract(&self, tag: SchemaTag, nsu: &Sentence, ant: &Sentence) -> FeatureVector {
        match tag {
            SchemaTag::Baseline => self.extract_baseline(nsu, ant),
            SchemaTag::Extended => self.extract_extended(nsu, ant),
        }
    }

    pub fn extract_baseline(&self, nsu: &Sentence, ant: &Sentence) -> FeatureVector {
        FeatureVector {
            schema: SchemaTag::Baseline,
            values: self.baseline_values(nsu, ant),
        }
    }

    pub fn extract_extended(&self, nsu: &Sentence, ant: &Sentence) -> FeatureVector {
        let mut values = self.baseline_values(nsu, ant);
        values.extend(self.extension_values(nsu, ant));
        FeatureVector {
            schema: SchemaTag::Extended,
            values,
        }
    }

    fn baseline_values(&self, nsu: &Sentence, ant: &Sentence) -> Vec<FeatureValue> {
        let lex = &self.lexicon;
        let nsu_words = lower_words(nsu);
        let ant_words = lower_words(ant);

        let nsu_cont = match last_non_marker(nsu) {
            Some(t) if t.surface == "?" => "q",
            _ => "p",
        };
        let wh_nsu = nsu_words.iter().any(|w| lex.is_wh(w));
        let aff_neg = if nsu_words.iter().any(|w| lex.is_yes(w)) {
            "yes"
        } else if nsu_words.iter().any(|w| lex.is_no(w)) {
            "no"
        } else if nsu_words.iter().any(|w| lex.is_ack(w)) {
            "yes"
        } else {
            "e"
        };
        let lex_value = self.lex_value(nsu);
        let n_decl = matches!(last_non_marker(ant), Some(t) if t.surface == "?")
            || ant
                .syntax
                .as_ref()
                .is_some_and(|s| s.has_tag("SQ") || s.has_tag("SBARQ"));
        let wh_ant = ant_words.iter().any(|w| lex.is_wh(w));
        let finished = if self.is_finished(ant) { "fin" } else { "unf" };

        let repeat = content_lemmas(nsu).intersection(&content_lemmas(ant)).count().min(3);
        let run = longest_common_run(&pos_tags(nsu), &pos_tags(ant));
        let parallel = if run >= 2 { run.min(3) } else { 0 };

        vec![
            FeatureValue::cat(nsu_cont),
            FeatureValue::yes_no(wh_nsu),
            FeatureValue::cat(aff_neg),
            FeatureValue::cat(lex_value),
            FeatureValue::cat(if n_decl { "n_decl" } else { "decl" }),
            FeatureValue::yes_no(wh_ant),
            FeatureValue::cat(finished),
            FeatureValue::Num(repeat as f64),
            FeatureValue::Num(parallel as f64),
        ]
    }

    fn lex_value(&self, nsu: &Sentence) -> &'static str {
        let lex = &self.lexicon;
        let Some(first) = nsu.words().next() else {
            return "e";
        };
        let w = first.surface.to_lowercase();
        if lex.is_modal(&w) {
            "p_mod"
        } else if lex.is_factual(&w) {
            "f_mod"
        } else if lex.is_conjunction(&w) {
            "conj"
        } else if (first.pos.starts_with("PR") || first.pos.starts_with("AV"))
            && !(lex.is_yes(&w) || lex.is_no(&w) || lex.is_ack(&w))
        {
            "mod"
        } else {
            "e"
        }
    }

    fn is_finished(&self, ant: &Sentence) -> bool {
        let Some(last) = ant.tokens.last() else {
            return false;
        };
        if last.is_marker() {
            return false;
        }
        if !(last.kind == TokenKind::Punctuation && matches!(last.surface.as_str(), "." | "?" | "!")) {
            return false;
        }
        match ant.words().last() {
            Some(w) => !self.lexicon.is_non_closing(&w.surface),
            None => false,
        }
    }

    fn extension_values(&self, nsu: &Sentence, ant: &Sentence) -> Vec<FeatureValue> {
        let lex = &self.lexicon;
        let mut out = Vec::with_capacity(EXTENSION.len());

        let tags = pos_tags(nsu);
        for i in 0..4 {
            out.push(FeatureValue::cat(tags.get(i).copied().unwrap_or(NONE_SYMBOL)));
        }
        let ending = match ant.tokens.last() {
            Some(t) if t.kind == TokenKind::Punctuation => match t.surface.as_str() {
                "." => "dot",
                "?" => "qm",
                "!" => "excl",
                _ => "e",
            },
            _ => "e",
        };
        out.push(FeatureValue::cat(ending));
        out.push(FeatureValue::yes_no(
            ant.tokens.iter().any(|t| t.kind == TokenKind::Pause),
        ));
        out.push(FeatureValue::yes_no(
            ant.tokens.iter().any(|t| t.kind == TokenKind::Unclear),
        ));

        for tag in ["SQ", "SBARQ", "SINV"] {
            out.push(match &ant.syntax {
                Some(s) => FeatureValue::yes_no(s.has_tag(tag)),
                None => FeatureValue::Unknown,
            });
        }
        for level in [ConstituentLevel::Clause, ConstituentLevel::Phrase, ConstituentLevel::Word] {
            out.push(match &nsu.syntax {
                Some(s) => FeatureValue::cat(s.first_at(level).unwrap_or(NONE_SYMBOL)),
                None => FeatureValue::Unknown,
            });
        }

        let neg_correct = nsu.tokens.iter().enumerate().any(|(i, t)| {
            t.is_word()
                && lex.is_no(&t.surface)
                && nsu.tokens.get(i + 1).is_some_and(|c| c.surface == ",")
                && nsu.tokens[i + 2..].iter().any(Token::is_word)
        });
        out.push(FeatureValue::yes_no(neg_correct));

        out.push(match &ant.syntax {
            Some(s) => FeatureValue::yes_no(s.dependencies.iter().any(|d| d.rel == "neg")),
            None => FeatureValue::Unknown,
        });
        out.push(match &ant.syntax {
            Some(s) => {
                let is_wh_at = |pos: u32| {
                    pos >= 1
                        && ant
                            .tokens
                            .get(pos as usize - 1)
                            .is_some_and(|t| t.is_word() && lex.is_wh(&t.surface))
                };
                let found = s.dependencies.iter().any(|d| {
                    d.rel == "dobj"
                        && is_wh_at(d.dependent)
                        && s.dependencies.iter().any(|e| e.rel == "nsubj" && e.head == d.head)
                });
                FeatureValue::yes_no(found)
            }
            None => FeatureValue::Unknown,
        });

        let same_who = match (&nsu.speaker, &ant.speaker) {
            (Some(a), Some(b)) if a == b => "same",
            (Some(_), Some(_)) => "diff",
            _ => "unk",
        };
        out.push(FeatureValue::cat(same_who));

        let nsu_lemmas = lower_lemmas(nsu);
        let ant_lemmas = lower_lemmas(ant);
        let tail: HashSet<&String> = ant_lemmas
            .iter()
            .rev()
            .take(lex.repeat_last_window)
            .collect();
        let nsu_set: HashSet<&String> = nsu_lemmas.iter().collect();
        let repeat_last = nsu_set.iter().filter(|w| tail.contains(*w)).count();
        out.push(FeatureValue::Num(repeat_last as f64));

        out.push(FeatureValue::Num(nsu.word_count() as f64));
        out.push(FeatureValue::Num(
            nsu.words().filter(|t| is_content_tag(&t.pos)).count() as f64,
        ));

        let chars = |s: &Sentence| -> Vec<char> { lower_words(s).join(" ").chars().collect() };
        out.push(FeatureValue::Num(local_alignment(
            &chars(nsu),
            &chars(ant),
            &self.scoring,
        )));
        out.push(FeatureValue::Num(lcs_length(&nsu_lemmas, &ant_lemmas) as f64));
        out.push(FeatureValue::Num(
            lcs_length(&pos_tags(nsu), &pos_tags(ant)) as f64,
        ));
        out
    }
}

/// Smith-Waterman local alignment score with a linear gap penalty.
pub fn local_alignment<T: PartialEq>(a: &[T], b: &[T], scoring: &AlignmentScoring) -> f64 {
    let mut best = 0.0f64;
    let mut prev = vec![0.0f64; b.len() + 1];
    for x in a {
        let mut cur = vec![0.0f64; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            let sub = if x == y {
                scoring.match_score
            } else {
                scoring.mismatch_score
            };
            let score = (prev[j] + sub)
                .max(prev[j + 1] + scoring.gap_score)
                .max(cur[j] + scoring.gap_score)
                .max(0.0);
            cur[j + 1] = score;
            best = best.max(score);
        }
        prev = cur;
    }
    best
}

/// Longest common subsequence length (Needleman-Wunsch style table).
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Writes a feature matrix with a trailing `label` column.
pub fn write_matrix(
    schema: &Schema,
    rows: &[(Vec<FeatureValue>, NsuClass)],
    sink: impl Write,
) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<&str> = schema.names().collect();
    header.push("label");
    w.write_record(&header)?;
    for (values, label) in rows {
        let mut rec: Vec<String> = values.iter().map(ToString::to_string).collect();
        rec.push(label.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a matrix written by [`write_matrix`] against a known schema.
pub fn read_matrix(
    schema: &Schema,
    source: impl Read,
) -> Result<Vec<(Vec<FeatureValue>, NsuClass)>, FeatureError> {
    let mut r = csv::Reader::from_reader(source);
    let header = r.headers()?.clone();
    let expected: Vec<&str> = schema.names().chain(std::iter::once("label")).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(FeatureError::Header(schema.name.clone()));
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut values = Vec::with_capacity(schema.len());
        for (def, field) in schema.features.iter().zip(rec.iter()) {
            let v = if field == UNKNOWN {
                FeatureValue::Unknown
            } else {
                match def.kind {
                    FeatureKind::Categorical => FeatureValue::cat(field),
                    FeatureKind::Numeric => {
                        let x: f64 = field.parse().map_err(|_| FeatureError::Value {
                            row: row + 1,
                            msg: format!("`{field}` is not a number for {}", def.name),
                        })?;
                        if !x.is_finite() {
                            return Err(FeatureError::Value {
                                row: row + 1,
                                msg: format!("non-finite value for {}", def.name),
                            });
                        }
                        FeatureValue::Num(x)
                    }
                }
            };
            values.push(v);
        }
        let label: NsuClass = rec.get(schema.len()).unwrap_or_default().parse()?;
        out.push((values, label));
    }
    Ok(out)
}
