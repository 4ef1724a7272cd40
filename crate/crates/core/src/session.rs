//! The dialogue manager loop: NSU classification of user turns, resolution,
//! action selection and context update, with a per-turn log.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Config, DetectConfig};
use crate::corpus::{detect_nsu, NsuClass};
use crate::dialogue::semantics::parse_set;
use crate::dialogue::{
    DialogueAct, DialogueError, DialogueState, Distribution, Firing, Fragment, Party, PredicateSet, Snapshot, Term,
};
use crate::features::{FeatureExtractor, FeatureVector, SchemaTag};
use crate::learn::{DecisionTree, LearnError};
use crate::rules::RuleSet;
use crate::tagger::Tagger;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("script line {line}: {msg}")]
    Script { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, SessionError>;

/// Decision tree plus everything needed to turn raw text into its features.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub tree: DecisionTree,
    pub schema: SchemaTag,
    pub extractor: FeatureExtractor,
    pub tagger: Tagger,
    pub detect: DetectConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub is_nsu: bool,
    pub features: FeatureVector,
    /// Tree output; `NoNsu` with certainty when the detector rejects the
    /// utterance.
    pub distribution: Distribution<NsuClass>,
}

impl Classifier {
    pub fn new(tree: DecisionTree, schema: SchemaTag, config: &Config) -> Self {
        Classifier {
            tree,
            schema,
            extractor: FeatureExtractor::new(config.lexicon.clone(), config.alignment),
            tagger: Tagger::default(),
            detect: config.detect.clone(),
        }
    }

    pub fn classify(&self, nsu: &str, antecedent: &str) -> Result<Classification> {
        let s = self.tagger.tag(2, Some("A"), nsu);
        let a = self.tagger.tag(1, Some("B"), antecedent);
        let features = self.extractor.extract(self.schema, &s, &a);
        let is_nsu = detect_nsu(&s, &self.detect);
        let distribution = if is_nsu {
            let dist = self.tree.predict(&features.values)?;
            Distribution::from_weights(dist.support())?
        } else {
            Distribution::point(NsuClass::NoNsu)
        };
        Ok(Classification {
            is_nsu,
            features,
            distribution,
        })
    }
}

/// One utterance with its optional gold annotations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TurnInput {
    pub speaker: Party,
    pub text: String,
    pub act: Option<DialogueAct>,
    pub fec: PredicateSet,
    pub nsu: Option<NsuClass>,
    pub term: Option<Term>,
}

impl TurnInput {
    pub fn user(text: &str) -> Self {
        TurnInput {
            speaker: Party::User,
            text: text.to_string(),
            ..Default::default()
        }
    }

    pub fn system(text: &str, act: DialogueAct) -> Self {
        TurnInput {
            speaker: Party::System,
            text: text.to_string(),
            act: Some(act),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub speaker: Party,
    pub input: String,
    pub fired: Vec<Firing>,
    pub snapshot: Snapshot,
    pub warnings: Vec<String>,
}

pub struct Session {
    pub state: DialogueState,
    rules: Arc<RuleSet>,
    classifier: Option<Arc<Classifier>>,
    log: Vec<TurnRecord>,
}

impl Session {
    pub fn new(rules: Arc<RuleSet>, classifier: Option<Arc<Classifier>>) -> Self {
        Session {
            state: DialogueState::new(),
            rules,
            classifier,
            log: Vec::new(),
        }
    }

    pub fn with_state(mut self, state: DialogueState) -> Self {
        self.state = state;
        self
    }

    pub fn log(&self) -> &[TurnRecord] {
        &self.log
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    /// Processes one utterance. On error the state and log are unchanged.
    pub fn turn(&mut self, input: TurnInput) -> Result<&TurnRecord> {
        let mut fired = Vec::new();
        let mut warnings = Vec::new();
        let state = match input.speaker {
            Party::User => self.user_turn(&input, &mut fired, &mut warnings)?,
            Party::System => self.system_turn(&input, &mut fired, &mut warnings)?,
        };
        state.check()?;
        self.state = state;
        self.log.push(TurnRecord {
            speaker: input.speaker,
            input: input.text,
            fired,
            snapshot: self.state.snapshot(),
            warnings,
        });
        Ok(self.log.last().expect("just pushed"))
    }

    fn user_turn(&self, input: &TurnInput, fired: &mut Vec<Firing>, warnings: &mut Vec<String>) -> Result<DialogueState> {
        let mut s = self.state.clone();
        s.u_a = input.text.clone();
        s.a_a = Distribution::point(DialogueAct::None);
        s.nlu_a = None;
        if let Some(act) = &input.act {
            s.a_a = Distribution::point(act.clone());
            s.new_fec = input.fec.clone();
            s.nsu_a = Distribution::point(NsuClass::NoNsu);
        } else {
            s.new_fec = PredicateSet::new();
            s.nlu_a = input.term.clone().map(|term| Fragment {
                term,
                fec: input.fec.clone(),
            });
            s.nsu_a = match (input.nsu, &self.classifier) {
                (Some(c), _) => Distribution::point(c),
                (None, Some(clf)) => clf.classify(&input.text, &s.u_b)?.distribution,
                (None, None) => Distribution::point(NsuClass::NoNsu),
            };
            if s.nsu_a.prob(&NsuClass::NoNsu) > 0.0 {
                warnings.push("no semantics for a non-fragment utterance; act is None".into());
            }
            let (next, f) = self.rules.resolve(&s)?;
            s = next;
            fired.extend(f);
        }
        s.a_b = select_action(&s);
        let (next, f) = self.rules.update(&s)?;
        fired.extend(f);
        Ok(next)
    }

    fn system_turn(&self, input: &TurnInput, fired: &mut Vec<Firing>, warnings: &mut Vec<String>) -> Result<DialogueState> {
        let mut s = self.state.clone();
        s.u_b = input.text.clone();
        let act = input.act.clone().unwrap_or_else(|| {
            warnings.push("no semantics for a system utterance; act is None".into());
            DialogueAct::None
        });
        s.a_b = Distribution::point(act);
        s.new_fec = input.fec.clone();
        let (next, f) = self.rules.update(&s)?;
        fired.extend(f);
        Ok(next)
    }
}

/// The system's reply to each hypothesis about the user act: assertions
/// are accepted, a bare acknowledgement accepts the most salient question,
/// anything else gets no reply.
pub fn select_action(s: &DialogueState) -> Distribution<DialogueAct> {
    let salient = s.max_qud_entry().map(|e| e.q.clone());
    s.a_a.map(|act| match act {
        DialogueAct::Assert(p) | DialogueAct::Accept(Some(p)) => DialogueAct::Accept(Some(p.clone())),
        DialogueAct::Accept(None) => salient
            .clone()
            .map_or(DialogueAct::None, |q| DialogueAct::Accept(Some(q))),
        _ => DialogueAct::None,
    })
}

/// Parses a scripted transcript: one utterance per line,
/// `M|U TAB text` followed by optional `TAB key=value` fields among
/// `act`, `fec` (predicates separated by `;`), `nsu` and `term`.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_script(text: &str) -> Result<Vec<TurnInput>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let err = |msg: String| SessionError::Script { line: line_no, msg };
        let mut fields = line.split('\t');
        let speaker = match fields.next().map(str::trim) {
            Some("M") | Some("S") => Party::System,
            Some("U") => Party::User,
            other => return Err(err(format!("unknown speaker {other:?}"))),
        };
        let text = fields.next().ok_or_else(|| err("missing utterance text".into()))?;
        let mut input = TurnInput {
            speaker,
            text: text.trim().to_string(),
            ..Default::default()
        };
        for f in fields {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| err(format!("field `{f}` is not key=value")))?;
            let v = v.trim();
            match k.trim() {
                "act" => input.act = Some(v.parse().map_err(|e: DialogueError| err(e.to_string()))?),
                "fec" => {
                    let braced = format!("{{{}}}", v.split(';').map(str::trim).collect::<Vec<_>>().join(", "));
                    input.fec = parse_set(&braced).map_err(|e| err(e.to_string()))?;
                }
                "nsu" => input.nsu = Some(v.parse().map_err(|e: crate::corpus::CorpusError| err(e.to_string()))?),
                "term" => input.term = Some(v.parse().map_err(|e: DialogueError| err(e.to_string()))?),
                other => return Err(err(format!("unknown field `{other}`"))),
            }
        }
        out.push(input);
    }
    Ok(out)
}

/// Replays a script from the empty state.
pub fn replay(
    script: &[TurnInput],
    rules: Arc<RuleSet>,
    classifier: Option<Arc<Classifier>>,
) -> Result<Vec<TurnRecord>> {
    let mut session = Session::new(rules, classifier);
    for input in script {
        session.turn(input.clone())?;
    }
    Ok(session.log)
}

/// Text form of a trace: a header per step followed by its snapshot.
pub fn format_trace(trace: &[TurnRecord]) -> String {
    let mut out = String::new();
    for (i, t) in trace.iter().enumerate() {
        let who = match t.speaker {
            Party::User => "U",
            Party::System => "M",
        };
        let _ = writeln!(out, "## step {} {who}: {}", i + 1, t.input);
        out.push_str(&t.snapshot.to_text());
        out.push('\n');
    }
    out
}

/// The first 1-based step at which two traces have different snapshots.
pub fn first_divergence(a: &[TurnRecord], b: &[TurnRecord]) -> Option<usize> {
    let n = a.len().max(b.len());
    (0..n)
        .find(|&i| a.get(i).map(|t| &t.snapshot) != b.get(i).map(|t| &t.snapshot))
        .map(|i| i + 1)
}
