use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::distribution::{max_qud_prior, Distribution, TOLERANCE};
use super::semantics::{parse_set, split_top, DialogueAct, Predicate, PredicateSet, Term};
use super::DialogueError;
use crate::corpus::NsuClass;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QudEntry {
    pub utt: String,
    pub q: Predicate,
    pub fec: PredicateSet,
}

/// Semantics of an NSU fragment supplied by the caller: the term it
/// denotes plus constituents it introduces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub term: Term,
    pub fec: PredicateSet,
}

/// Dialogue context. Speaker `a` is the user, `b` the system.
#[derive(Debug, Clone, PartialEq)]
pub struct DialogueState {
    pub u_a: String,
    pub u_b: String,
    pub a_a: Distribution<DialogueAct>,
    pub a_b: Distribution<DialogueAct>,
    pub nsu_a: Distribution<NsuClass>,
    pub new_fec: PredicateSet,
    pub facts: PredicateSet,
    /// `qud[0]` is the element with index 1.
    pub qud: Vec<QudEntry>,
    pub max_qud: Distribution<usize>,
    pub nlu_a: Option<Fragment>,
}

impl Default for DialogueState {
    fn default() -> Self {
        DialogueState {
            u_a: String::new(),
            u_b: String::new(),
            a_a: Distribution::point(DialogueAct::None),
            a_b: Distribution::point(DialogueAct::None),
            nsu_a: Distribution::point(NsuClass::NoNsu),
            new_fec: PredicateSet::new(),
            facts: PredicateSet::new(),
            qud: Vec::new(),
            max_qud: Distribution::point(0),
            nlu_a: None,
        }
    }
}

impl DialogueState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Entry at 1-based index `i`.
    pub fn qud_at(&self, i: usize) -> Option<&QudEntry> {
        i.checked_sub(1).and_then(|j| self.qud.get(j))
    }

    /// The most probable MaxQUD entry.
    pub fn max_qud_entry(&self) -> Option<&QudEntry> {
        self.qud_at(*self.max_qud.argmax())
    }

    /// Appends an entry and resets `max_qud` to the recency prior.
    pub fn push_qud(&mut self, utt: &str, q: Predicate, fec: PredicateSet) {
        self.qud.push(QudEntry {
            utt: utt.to_string(),
            q,
            fec,
        });
        self.refresh_max_qud();
    }

    pub fn refresh_max_qud(&mut self) {
        self.max_qud = max_qud_prior(self.qud.len());
    }

    fn predicates(&self) -> impl Iterator<Item = &Predicate> {
        let acts = self
            .a_a
            .iter()
            .chain(self.a_b.iter())
            .filter_map(|(a, _)| a.content());
        let qud = self.qud.iter().flat_map(|e| std::iter::once(&e.q).chain(e.fec.iter()));
        let nlu = self.nlu_a.iter().flat_map(|f| f.fec.iter());
        acts.chain(qud)
            .chain(self.new_fec.iter())
            .chain(self.facts.iter())
            .chain(nlu)
    }

    /// A variable index not used anywhere in the state.
    pub fn fresh_variable(&self) -> u32 {
        let in_preds = self.predicates().flat_map(|p| p.variables()).max().unwrap_or(0);
        let in_nlu = match self.nlu_a.as_ref().map(|f| &f.term) {
            Some(Term::Variable(i)) => *i,
            _ => 0,
        };
        in_preds.max(in_nlu) + 1
    }

    /// Checks the structural invariants.
    pub fn check(&self) -> Result<(), DialogueError> {
        for total in [self.a_a.total(), self.a_b.total(), self.nsu_a.total(), self.max_qud.total()] {
            if (total - 1.0).abs() > TOLERANCE {
                return Err(DialogueError::InvalidDistribution);
            }
        }
        if let Some((i, _)) = self.max_qud.iter().find(|(i, _)| **i > self.qud.len()) {
            return Err(DialogueError::Invariant(format!(
                "max_qud index {i} exceeds qud size {}",
                self.qud.len()
            )));
        }
        if let Some(p) = self.facts.iter().find(|p| p.has_variables()) {
            return Err(DialogueError::Invariant(format!("fact {p} contains a variable")));
        }
        Ok(())
    }

    pub fn snapshot(&self) -> Snapshot {
        fn weighted<V: PartialEq + Clone>(d: &Distribution<V>, show: impl Fn(&V) -> String) -> Vec<Weighted> {
            d.sorted()
                .into_iter()
                .map(|(v, p)| Weighted { value: show(v), prob: p })
                .collect()
        }
        fn strings(set: &PredicateSet) -> Vec<String> {
            set.iter().map(Predicate::to_string).collect()
        }
        Snapshot {
            u_a: self.u_a.clone(),
            u_b: self.u_b.clone(),
            a_a: weighted(&self.a_a, DialogueAct::to_string),
            a_b: weighted(&self.a_b, DialogueAct::to_string),
            nsu_a: weighted(&self.nsu_a, NsuClass::to_string),
            new_fec: strings(&self.new_fec),
            facts: strings(&self.facts),
            qud: self
                .qud
                .iter()
                .map(|e| QudView {
                    utt: e.utt.clone(),
                    q: e.q.to_string(),
                    fec: strings(&e.fec),
                })
                .collect(),
            max_qud: weighted(&self.max_qud, usize::to_string),
            nlu_a: self.nlu_a.as_ref().map(|f| FragmentView {
                term: f.term.to_string(),
                fec: strings(&f.fec),
            }),
        }
    }

    pub fn from_snapshot(s: &Snapshot) -> Result<Self, DialogueError> {
        fn dist<V: PartialEq + Clone>(
            items: &[Weighted],
            parse: impl Fn(&str) -> Result<V, DialogueError>,
        ) -> Result<Distribution<V>, DialogueError> {
            let parsed = items
                .iter()
                .map(|w| Ok((parse(&w.value)?, w.prob)))
                .collect::<Result<Vec<_>, DialogueError>>()?;
            Distribution::from_weights(parsed)
        }
        fn set(items: &[String]) -> Result<PredicateSet, DialogueError> {
            items.iter().map(|p| p.parse()).collect()
        }
        let state = DialogueState {
            u_a: s.u_a.clone(),
            u_b: s.u_b.clone(),
            a_a: dist(&s.a_a, |v| v.parse())?,
            a_b: dist(&s.a_b, |v| v.parse())?,
            nsu_a: dist(&s.nsu_a, |v| {
                v.parse::<NsuClass>()
                    .map_err(|_| DialogueError::Parse(format!("unknown class `{v}`")))
            })?,
            new_fec: set(&s.new_fec)?,
            facts: set(&s.facts)?,
            qud: s
                .qud
                .iter()
                .map(|e| {
                    Ok(QudEntry {
                        utt: e.utt.clone(),
                        q: e.q.parse()?,
                        fec: set(&e.fec)?,
                    })
                })
                .collect::<Result<Vec<_>, DialogueError>>()?,
            max_qud: dist(&s.max_qud, |v| {
                v.parse::<usize>()
                    .map_err(|_| DialogueError::Parse(format!("bad qud index `{v}`")))
            })?,
            nlu_a: s
                .nlu_a
                .as_ref()
                .map(|f| {
                    Ok::<_, DialogueError>(Fragment {
                        term: f.term.parse()?,
                        fec: set(&f.fec)?,
                    })
                })
                .transpose()?,
        };
        state.check()?;
        Ok(state)
    }

    pub fn to_text(&self) -> String {
        self.snapshot().to_text()
    }

    pub fn from_text(text: &str) -> Result<Self, DialogueError> {
        Self::from_snapshot(&Snapshot::from_text(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weighted {
    pub value: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QudView {
    pub utt: String,
    pub q: String,
    pub fec: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentView {
    pub term: String,
    pub fec: Vec<String>,
}

/// Canonical, serialisable view of a dialogue state. Distributions are
/// listed most probable first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub u_a: String,
    pub u_b: String,
    pub a_a: Vec<Weighted>,
    pub a_b: Vec<Weighted>,
    pub nsu_a: Vec<Weighted>,
    pub new_fec: Vec<String>,
    pub facts: Vec<String>,
    pub qud: Vec<QudView>,
    pub max_qud: Vec<Weighted>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nlu_a: Option<FragmentView>,
}

fn format_dist(items: &[Weighted]) -> String {
    items
        .iter()
        .map(|w| format!("{}: {:.4}", w.value, w.prob))
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_dist(s: &str) -> Result<Vec<Weighted>, DialogueError> {
    split_top(s, ", ")
        .into_iter()
        .map(|item| {
            let (value, prob) = item
                .rsplit_once(": ")
                .ok_or_else(|| DialogueError::Parse(format!("bad weighted value `{item}`")))?;
            let prob = prob
                .trim()
                .parse::<f64>()
                .map_err(|_| DialogueError::Parse(format!("bad probability `{prob}`")))?;
            Ok(Weighted {
                value: value.trim().to_string(),
                prob,
            })
        })
        .collect()
}

fn braces(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

fn unbraces(s: &str) -> Result<Vec<String>, DialogueError> {
    Ok(parse_set(s)?.iter().map(Predicate::to_string).collect())
}

impl Snapshot {
    /// `key = value` lines with probabilities at four decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &str| {
            let _ = writeln!(out, "{}", format!("{k} = {v}").trim_end());
        };
        line("u_a", &self.u_a);
        line("u_b", &self.u_b);
        line("a_a", &format_dist(&self.a_a));
        line("a_b", &format_dist(&self.a_b));
        line("nsu_a", &format_dist(&self.nsu_a));
        line("new_fec", &braces(&self.new_fec));
        line("facts", &braces(&self.facts));
        line("qud.size", &self.qud.len().to_string());
        for (i, e) in self.qud.iter().enumerate() {
            line(&format!("qud[{}].utt", i + 1), &e.utt);
            line(&format!("qud[{}].q", i + 1), &e.q);
            line(&format!("qud[{}].fec", i + 1), &braces(&e.fec));
        }
        line("max_qud", &format_dist(&self.max_qud));
        if let Some(f) = &self.nlu_a {
            line("nlu_a", &format!("{} {}", f.term, braces(&f.fec)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, DialogueError> {
        let mut s = Snapshot {
            u_a: String::new(),
            u_b: String::new(),
            a_a: vec![Weighted {
                value: "None".into(),
                prob: 1.0,
            }],
            a_b: vec![Weighted {
                value: "None".into(),
                prob: 1.0,
            }],
            nsu_a: vec![Weighted {
                value: "NoNsu".into(),
                prob: 1.0,
            }],
            new_fec: Vec::new(),
            facts: Vec::new(),
            qud: Vec::new(),
            max_qud: Vec::new(),
            nlu_a: None,
        };
        let mut size = None;
        for (n, raw) in text.lines().enumerate() {
            let raw = raw.trim_end();
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let (key, value) = raw
                .split_once('=')
                .ok_or_else(|| DialogueError::Parse(format!("line {}: expected `key = value`", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "u_a" => s.u_a = value.to_string(),
                "u_b" => s.u_b = value.to_string(),
                "a_a" => s.a_a = parse_dist(value)?,
                "a_b" => s.a_b = parse_dist(value)?,
                "nsu_a" => s.nsu_a = parse_dist(value)?,
                "new_fec" => s.new_fec = unbraces(value)?,
                "facts" => s.facts = unbraces(value)?,
                "max_qud" => s.max_qud = parse_dist(value)?,
                "qud.size" => {
                    let k: usize = value
                        .parse()
                        .map_err(|_| DialogueError::Parse(format!("line {}: bad size", n + 1)))?;
                    size = Some(k);
                    s.qud = vec![
                        QudView {
                            utt: String::new(),
                            q: String::new(),
                            fec: Vec::new(),
                        };
                        k
                    ];
                }
                "nlu_a" => {
                    let (term, fec) = value.split_once(' ').unwrap_or((value, "{}"));
                    s.nlu_a = Some(FragmentView {
                        term: term.to_string(),
                        fec: unbraces(fec)?,
                    });
                }
                _ => {
                    let bad = || DialogueError::Parse(format!("line {}: unknown key `{key}`", n + 1));
                    let rest = key.strip_prefix("qud[").ok_or_else(bad)?;
                    let (idx, field) = rest.split_once("].").ok_or_else(bad)?;
                    let i: usize = idx.parse().map_err(|_| bad())?;
                    let e = i
                        .checked_sub(1)
                        .and_then(|j| s.qud.get_mut(j))
                        .ok_or_else(bad)?;
                    match field {
                        "utt" => e.utt = value.to_string(),
                        "q" => e.q = value.to_string(),
                        "fec" => e.fec = unbraces(value)?,
                        _ => return Err(bad()),
                    }
                }
            }
        }
        if s.max_qud.is_empty() {
            let prior = max_qud_prior(size.unwrap_or(0));
            s.max_qud = prior
                .sorted()
                .into_iter()
                .map(|(i, p)| Weighted {
                    value: i.to_string(),
                    prob: p,
                })
                .collect();
        }
        Ok(s)
    }
}
