//! Dialogue transcripts, NSU annotations and the NSU class taxonomy.
//!
//! Transcripts use a line-oriented UTF-8 format:
//!
//! ```text
//! #file J91 2
//! 172	A	What|what|DTQ 's|be|VBZ plus|plus|PRP three|three|CRD ?|?|PUN
//! 173	B	Nine|nine|CRD .|.|PUN	SYN: phrase:NP word:CD
//! ```
//!
//! The header carries the file id and the party count (`2` or `multi`).
//! Each sentence line is `id TAB speaker TAB tokens` with an optional
//! trailing `TAB SYN: items` block. Tokens are `surface|lemma|pos` or one of
//! the markers `<pause>` and `<unclear>`; `-` stands for an unknown speaker.
//! Syntax items are `clause:TAG`, `phrase:TAG`, `word:TAG` or
//! `dep(rel,head,dependent)`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::DetectConfig;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed transcript at line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("duplicate sentence id {id} at line {line}")]
    DuplicateId { id: u32, line: usize },
    #[error("record {file_id}:{sentence_id} does not resolve: {msg}")]
    Unresolvable {
        file_id: String,
        sentence_id: u32,
        msg: String,
    },
    #[error("unknown NSU class `{0}`")]
    UnknownClass(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// The fifteen NSU classes plus the `NoNsu` sentinel used by the dialogue
/// state for utterances that are not fragments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NsuClass {
    Ack,
    RepAck,
    CE,
    CheckQu,
    Sluice,
    Filler,
    ShortAns,
    AffAns,
    Reject,
    RepAffAns,
    HelpReject,
    PropMod,
    FactMod,
    BareModPh,
    Conj,
    NoNsu,
}

impl NsuClass {
    pub const COUNT: usize = 16;

    pub const ALL: [NsuClass; 16] = [
        NsuClass::Ack,
        NsuClass::RepAck,
        NsuClass::CE,
        NsuClass::CheckQu,
        NsuClass::Sluice,
        NsuClass::Filler,
        NsuClass::ShortAns,
        NsuClass::AffAns,
        NsuClass::Reject,
        NsuClass::RepAffAns,
        NsuClass::HelpReject,
        NsuClass::PropMod,
        NsuClass::FactMod,
        NsuClass::BareModPh,
        NsuClass::Conj,
        NsuClass::NoNsu,
    ];

    /// The fifteen taxonomy classes (everything except `NoNsu`).
    pub fn taxonomy() -> &'static [NsuClass] {
        &Self::ALL[..15]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<NsuClass> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NsuClass::Ack => "Ack",
            NsuClass::RepAck => "RepAck",
            NsuClass::CE => "CE",
            NsuClass::CheckQu => "CheckQu",
            NsuClass::Sluice => "Sluice",
            NsuClass::Filler => "Filler",
            NsuClass::ShortAns => "ShortAns",
            NsuClass::AffAns => "AffAns",
            NsuClass::Reject => "Reject",
            NsuClass::RepAffAns => "RepAffAns",
            NsuClass::HelpReject => "HelpReject",
            NsuClass::PropMod => "PropMod",
            NsuClass::FactMod => "FactMod",
            NsuClass::BareModPh => "BareModPh",
            NsuClass::Conj => "Conj",
            NsuClass::NoNsu => "NoNsu",
        }
    }
}

impl fmt::Display for NsuClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NsuClass {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownClass(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Pause,
    Unclear,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    /// C5-style part-of-speech tag. Empty for markers.
    pub pos: String,
    pub kind: TokenKind,
}

pub const PAUSE_MARKER: &str = "<pause>";
pub const UNCLEAR_MARKER: &str = "<unclear>";

impl Token {
    pub fn word(surface: &str, lemma: &str, pos: &str) -> Self {
        let kind = if pos.starts_with("PU") {
            TokenKind::Punctuation
        } else {
            TokenKind::Word
        };
        Token {
            surface: surface.to_string(),
            lemma: lemma.to_string(),
            pos: pos.to_string(),
            kind,
        }
    }

    pub fn pause() -> Self {
        Token {
            surface: PAUSE_MARKER.to_string(),
            lemma: String::new(),
            pos: String::new(),
            kind: TokenKind::Pause,
        }
    }

    pub fn unclear() -> Self {
        Token {
            surface: UNCLEAR_MARKER.to_string(),
            lemma: String::new(),
            pos: String::new(),
            kind: TokenKind::Unclear,
        }
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }

    pub fn is_marker(&self) -> bool {
        matches!(self.kind, TokenKind::Pause | TokenKind::Unclear)
    }

    fn parse(raw: &str, line: usize) -> Result<Self> {
        match raw {
            PAUSE_MARKER => return Ok(Token::pause()),
            UNCLEAR_MARKER => return Ok(Token::unclear()),
            _ => {}
        }
        let parts: Vec<&str> = raw.split('|').collect();
        if parts.len() != 3 || parts.iter().any(|p| p.is_empty()) {
            return Err(CorpusError::Malformed {
                line,
                msg: format!("token `{raw}` is not surface|lemma|pos"),
            });
        }
        Ok(Token::word(parts[0], parts[1], parts[2]))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Pause | TokenKind::Unclear => f.write_str(&self.surface),
            _ => write!(f, "{}|{}|{}", self.surface, self.lemma, self.pos),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstituentLevel {
    Clause,
    Phrase,
    Word,
}

impl ConstituentLevel {
    fn as_str(self) -> &'static str {
        match self {
            ConstituentLevel::Clause => "clause",
            ConstituentLevel::Phrase => "phrase",
            ConstituentLevel::Word => "word",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constituent {
    pub level: ConstituentLevel,
    pub tag: String,
}

/// A dependency triple over 1-based token positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub rel: String,
    pub head: u32,
    pub dependent: u32,
}

/// Pre-computed parser output attached to a sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syntax {
    /// Constituent tags in pre-order.
    pub constituents: Vec<Constituent>,
    pub dependencies: Vec<Dependency>,
}

impl Syntax {
    pub fn has_tag(&self, tag: &str) -> bool {
        self.constituents.iter().any(|c| c.tag == tag)
    }

    pub fn first_at(&self, level: ConstituentLevel) -> Option<&str> {
        self.constituents
            .iter()
            .find(|c| c.level == level)
            .map(|c| c.tag.as_str())
    }

    fn parse(block: &str, line: usize) -> Result<Self> {
        let mut syntax = Syntax::default();
        for item in block.split_whitespace() {
            if let Some(rest) = item.strip_prefix("dep(") {
                let inner = rest.strip_suffix(')').ok_or_else(|| CorpusError::Malformed {
                    line,
                    msg: format!("unterminated dependency `{item}`"),
                })?;
                let parts: Vec<&str> = inner.split(',').collect();
                let bad = || CorpusError::Malformed {
                    line,
                    msg: format!("dependency `{item}` is not dep(rel,head,dependent)"),
                };
                if parts.len() != 3 || parts[0].is_empty() {
                    return Err(bad());
                }
                syntax.dependencies.push(Dependency {
                    rel: parts[0].to_string(),
                    head: parts[1].parse().map_err(|_| bad())?,
                    dependent: parts[2].parse().map_err(|_| bad())?,
                });
                continue;
            }
            let (level, tag) = item.split_once(':').ok_or_else(|| CorpusError::Malformed {
                line,
                msg: format!("syntax item `{item}` lacks a level"),
            })?;
            let level = match level {
                "clause" => ConstituentLevel::Clause,
                "phrase" => ConstituentLevel::Phrase,
                "word" => ConstituentLevel::Word,
                other => {
                    return Err(CorpusError::Malformed {
                        line,
                        msg: format!("unknown constituent level `{other}`"),
                    })
                }
            };
            if tag.is_empty() {
                return Err(CorpusError::Malformed {
                    line,
                    msg: format!("empty tag in `{item}`"),
                });
            }
            syntax.constituents.push(Constituent {
                level,
                tag: tag.to_string(),
            });
        }
        Ok(syntax)
    }
}

impl fmt::Display for Syntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SYN:")?;
        for c in &self.constituents {
            write!(f, " {}:{}", c.level.as_str(), c.tag)?;
        }
        for d in &self.dependencies {
            write!(f, " dep({},{},{})", d.rel, d.head, d.dependent)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: u32,
    pub speaker: Option<String>,
    pub tokens: Vec<Token>,
    pub syntax: Option<Syntax>,
}

impl Sentence {
    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.is_word())
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    /// Characters in word tokens (markers and punctuation excluded).
    pub fn char_count(&self) -> usize {
        self.words().map(|t| t.surface.chars().count()).sum()
    }

    pub fn has_pos_prefix(&self, prefix: &str) -> bool {
        self.words().any(|t| t.pos.starts_with(prefix))
    }

    /// Surface text with words separated by spaces and punctuation attached.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            if !out.is_empty() && t.kind != TokenKind::Punctuation {
                out.push(' ');
            }
            out.push_str(&t.surface);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartyCount {
    Two,
    Multi,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub file_id: String,
    pub party_count: PartyCount,
    pub sentences: Vec<Sentence>,
}

impl Transcript {
    pub fn position(&self, id: u32) -> Option<usize> {
        self.sentences.binary_search_by_key(&id, |s| s.id).ok()
    }

    pub fn sentence(&self, id: u32) -> Option<&Sentence> {
        self.position(id).map(|i| &self.sentences[i])
    }

    /// Canonical serialization; `load_transcript` of the output is identity.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        let party = match self.party_count {
            PartyCount::Two => "2",
            PartyCount::Multi => "multi",
        };
        out.push_str(&format!("#file {} {}\n", self.file_id, party));
        for s in &self.sentences {
            out.push_str(&s.id.to_string());
            out.push('\t');
            out.push_str(s.speaker.as_deref().unwrap_or("-"));
            out.push('\t');
            let toks: Vec<String> = s.tokens.iter().map(Token::to_string).collect();
            out.push_str(&toks.join(" "));
            if let Some(syn) = &s.syntax {
                out.push('\t');
                out.push_str(&syn.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(self.to_canonical().as_bytes())
    }
}

/// Parses a transcript in the line format described at module level.
pub fn load_transcript(mut source: impl Read) -> Result<Transcript> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    parse_transcript(&text)
}

pub fn parse_transcript(text: &str) -> Result<Transcript> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (header_no, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(CorpusError::Malformed {
            line: 1,
            msg: "missing #file header".into(),
        })?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("#file") {
        return Err(CorpusError::Malformed {
            line: header_no,
            msg: "expected `#file <id> <party-count>`".into(),
        });
    }
    let file_id = parts.next().ok_or(CorpusError::Malformed {
        line: header_no,
        msg: "missing file id".into(),
    })?;
    let party_count = match parts.next() {
        Some("2") => PartyCount::Two,
        Some("multi") => PartyCount::Multi,
        other => {
            return Err(CorpusError::Malformed {
                line: header_no,
                msg: format!("party count must be `2` or `multi`, got {other:?}"),
            })
        }
    };
    if parts.next().is_some() {
        return Err(CorpusError::Malformed {
            line: header_no,
            msg: "trailing fields in header".into(),
        });
    }

    let mut sentences: Vec<Sentence> = Vec::new();
    let mut seen = HashSet::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(CorpusError::Malformed {
                line: line_no,
                msg: "expected `id<TAB>speaker<TAB>tokens[<TAB>SYN: ...]`".into(),
            });
        }
        let id: u32 = fields[0].trim().parse().map_err(|_| CorpusError::Malformed {
            line: line_no,
            msg: format!("sentence id `{}` is not a positive integer", fields[0]),
        })?;
        if id == 0 {
            return Err(CorpusError::Malformed {
                line: line_no,
                msg: "sentence ids start at 1".into(),
            });
        }
        if !seen.insert(id) {
            return Err(CorpusError::DuplicateId { id, line: line_no });
        }
        if let Some(prev) = sentences.last() {
            if id < prev.id {
                return Err(CorpusError::Malformed {
                    line: line_no,
                    msg: format!("sentence id {id} follows {}", prev.id),
                });
            }
        }
        let speaker = match fields[1] {
            "" => {
                return Err(CorpusError::Malformed {
                    line: line_no,
                    msg: "empty speaker field (use `-` for unknown)".into(),
                })
            }
            "-" => None,
            s => Some(s.to_string()),
        };
        let tokens = fields[2]
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(|t| Token::parse(t, line_no))
            .collect::<Result<Vec<_>>>()?;
        if tokens.is_empty() {
            return Err(CorpusError::Malformed {
                line: line_no,
                msg: "sentence has no tokens".into(),
            });
        }
        let syntax = match fields.get(3) {
            None => None,
            Some(block) => {
                let body = block.strip_prefix("SYN:").ok_or(CorpusError::Malformed {
                    line: line_no,
                    msg: "fourth field must start with `SYN:`".into(),
                })?;
                Some(Syntax::parse(body, line_no)?)
            }
        };
        sentences.push(Sentence {
            id,
            speaker,
            tokens,
            syntax,
        });
    }
    Ok(Transcript {
        file_id: file_id.to_string(),
        party_count,
        sentences,
    })
}

/// One gold NSU annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NsuRecord {
    pub file_id: String,
    pub sentence_id: u32,
    pub antecedent_id: u32,
    pub label: NsuClass,
}

pub fn read_records(source: impl Read) -> Result<Vec<NsuRecord>> {
    let mut rdr = csv::Reader::from_reader(source);
    let mut out = Vec::new();
    for row in rdr.deserialize::<(String, u32, u32, String)>() {
        let (file_id, sentence_id, antecedent_id, label) = row?;
        let label: NsuClass = label.parse()?;
        if label == NsuClass::NoNsu {
            return Err(CorpusError::UnknownClass("NoNsu is not a gold label".into()));
        }
        out.push(NsuRecord {
            file_id,
            sentence_id,
            antecedent_id,
            label,
        });
    }
    Ok(out)
}

pub fn write_records(records: &[NsuRecord], sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["file_id", "sentence_id", "antecedent_id", "label"])?;
    for r in records {
        w.write_record([
            r.file_id.as_str(),
            &r.sentence_id.to_string(),
            &r.antecedent_id.to_string(),
            r.label.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Transcripts indexed by file id, plus the annotation records over them.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub transcripts: HashMap<String, Transcript>,
    pub records: Vec<NsuRecord>,
}

pub const RECORDS_FILE: &str = "nsu.csv";

impl Corpus {
    /// Loads every `*.txt` transcript in `dir` and the `nsu.csv` records file.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut corpus = Corpus::default();
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        paths.sort();
        for path in paths {
            let t = load_transcript(std::fs::File::open(&path)?)?;
            corpus.transcripts.insert(t.file_id.clone(), t);
        }
        let records_path = dir.join(RECORDS_FILE);
        if records_path.exists() {
            corpus.records = read_records(std::fs::File::open(records_path)?)?;
        }
        corpus.check_records()?;
        Ok(corpus)
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut ids: Vec<_> = self.transcripts.keys().collect();
        ids.sort();
        for id in ids {
            let t = &self.transcripts[id];
            std::fs::write(dir.join(format!("{id}.txt")), t.to_canonical())?;
        }
        write_records(&self.records, std::fs::File::create(dir.join(RECORDS_FILE))?)
    }

    pub fn check_records(&self) -> Result<()> {
        for r in &self.records {
            self.resolve(r)?;
        }
        Ok(())
    }

    /// Returns (transcript, nsu position, antecedent position).
    pub fn resolve(&self, r: &NsuRecord) -> Result<(&Transcript, usize, usize)> {
        let err = |msg: &str| CorpusError::Unresolvable {
            file_id: r.file_id.clone(),
            sentence_id: r.sentence_id,
            msg: msg.to_string(),
        };
        let t = self
            .transcripts
            .get(&r.file_id)
            .ok_or_else(|| err("unknown file"))?;
        let nsu = t.position(r.sentence_id).ok_or_else(|| err("unknown sentence id"))?;
        let ant = t
            .position(r.antecedent_id)
            .ok_or_else(|| err("unknown antecedent id"))?;
        Ok((t, nsu, ant))
    }

    /// The (NSU, antecedent) sentence pair of a record.
    pub fn pair(&self, r: &NsuRecord) -> Result<(&Sentence, &Sentence)> {
        let (t, nsu, ant) = self.resolve(r)?;
        Ok((&t.sentences[nsu], &t.sentences[ant]))
    }
}

/// Keeps the records whose antecedent is the sentence immediately before the
/// NSU in its transcript. Order is preserved.
pub fn restrict_adjacent(records: &[NsuRecord], corpus: &Corpus) -> Result<Vec<NsuRecord>> {
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let (_, nsu, ant) = corpus.resolve(r)?;
        if ant + 1 == nsu {
            out.push(r.clone());
        }
    }
    Ok(out)
}

/// Heuristic NSU detector: short, non-empty, no greeting, no verb.
pub fn detect_nsu(s: &Sentence, cfg: &DetectConfig) -> bool {
    let words: Vec<String> = s.words().map(|t| t.surface.to_lowercase()).collect();
    if words.is_empty() || words.len() >= cfg.max_words || s.char_count() < cfg.min_chars {
        return false;
    }
    if contains_greeting(&words, &cfg.greetings) {
        return false;
    }
    !s.has_pos_prefix("V")
}

fn contains_greeting(words: &[String], greetings: &[String]) -> bool {
    greetings.iter().any(|g| {
        let parts: Vec<String> = g.split_whitespace().map(str::to_lowercase).collect();
        !parts.is_empty() && words.windows(parts.len()).any(|w| w == parts.as_slice())
    })
}

/// Picks the preceding sentence as antecedent when the dialogue is two-party,
/// the candidate is longer than the NSU and has a verb and a noun tag.
pub fn select_antecedent<'t>(s: &Sentence, t: &'t Transcript) -> Option<&'t Sentence> {
    if t.party_count != PartyCount::Two {
        return None;
    }
    let pos = t.position(s.id)?;
    let prev = t.sentences.get(pos.checked_sub(1)?)?;
    if prev.word_count() <= s.word_count() {
        return None;
    }
    if !(prev.has_pos_prefix("V") && prev.has_pos_prefix("N")) {
        return None;
    }
    Some(prev)
}
