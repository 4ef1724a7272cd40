//! Terms, predicates and dialogue acts.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DialogueError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    #[default]
    User,
    System,
}

/// An argument of a predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    /// `KIND_n`, e.g. `IND_1`, `C_2`.
    Individual { kind: String, index: u32 },
    /// `X_n`.
    Variable(u32),
    Constant(String),
    Speaker(Party),
}

impl Term {
    pub fn individual(kind: &str, index: u32) -> Self {
        Term::Individual {
            kind: kind.to_string(),
            index,
        }
    }

    pub fn constant(name: &str) -> Self {
        Term::Constant(name.to_string())
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Term::Constant(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Individual { kind, index } => write!(f, "{kind}_{index}"),
            Term::Variable(i) => write!(f, "X_{i}"),
            Term::Constant(c) => f.write_str(c),
            Term::Speaker(Party::User) => f.write_str("user"),
            Term::Speaker(Party::System) => f.write_str("system"),
        }
    }
}

impl FromStr for Term {
    type Err = DialogueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.contains(['(', ')', ',']) {
            return Err(DialogueError::Parse(format!("bad term `{s}`")));
        }
        match s {
            "user" => return Ok(Term::Speaker(Party::User)),
            "system" => return Ok(Term::Speaker(Party::System)),
            _ => {}
        }
        if let Some((kind, idx)) = s.rsplit_once('_') {
            let upper = !kind.is_empty() && kind.chars().all(|c| c.is_ascii_uppercase());
            if let (true, Ok(index)) = (upper, idx.parse::<u32>()) {
                if index > 0 {
                    return Ok(if kind == "X" {
                        Term::Variable(index)
                    } else {
                        Term::individual(kind, index)
                    });
                }
            }
        }
        Ok(Term::Constant(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    #[default]
    Positive,
    Negative,
}

/// `name(args)`, optionally negated (`Neg(name)(args)`) and/or modalised
/// (`PropRel_lexeme(name)(args)`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub polarity: Polarity,
    pub modality: Option<String>,
    pub args: Vec<Term>,
}

impl Predicate {
    pub fn new(name: &str, args: Vec<Term>) -> Self {
        Predicate {
            name: name.to_string(),
            polarity: Polarity::Positive,
            modality: None,
            args,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.polarity == Polarity::Negative
    }

    /// Distinct variables in argument order.
    pub fn variables(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for a in &self.args {
            if let Term::Variable(i) = a {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
        }
        out
    }

    pub fn has_variables(&self) -> bool {
        self.args.iter().any(Term::is_variable)
    }

    pub fn mentions(&self, t: &Term) -> bool {
        self.args.contains(t)
    }

    /// The first variable argument.
    pub fn focus(&self) -> Option<u32> {
        self.args.iter().find_map(|a| match a {
            Term::Variable(i) => Some(*i),
            _ => None,
        })
    }

    pub fn without_modality(&self) -> Predicate {
        Predicate {
            modality: None,
            ..self.clone()
        }
    }
}

/// Negates a positive predicate; a negative one is returned unchanged.
pub fn neg(p: &Predicate) -> Predicate {
    Predicate {
        polarity: Polarity::Negative,
        ..p.clone()
    }
}

/// Applies the modality named by `lexeme`.
pub fn prop_rel(lexeme: &str, p: &Predicate) -> Result<Predicate, DialogueError> {
    if let Some(m) = &p.modality {
        return Err(DialogueError::AlreadyModalized(m.clone()));
    }
    Ok(Predicate {
        modality: Some(lexeme.to_string()),
        ..p.clone()
    })
}

/// Replaces every occurrence of variable `v` by `t`.
pub fn substitute(p: &Predicate, v: u32, t: &Term) -> Predicate {
    Predicate {
        args: p
            .args
            .iter()
            .map(|a| if *a == Term::Variable(v) { t.clone() } else { a.clone() })
            .collect(),
        ..p.clone()
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let core = if self.is_negative() {
            format!("Neg({})", self.name)
        } else {
            self.name.clone()
        };
        let head = match &self.modality {
            Some(m) => format!("PropRel_{m}({core})"),
            None => core,
        };
        let args: Vec<String> = self.args.iter().map(Term::to_string).collect();
        write!(f, "{head}({})", args.join(","))
    }
}

fn split_args(s: &str) -> Vec<&str> {
    if s.trim().is_empty() {
        return Vec::new();
    }
    s.split(',').map(str::trim).collect()
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

impl FromStr for Predicate {
    type Err = DialogueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DialogueError::Parse(format!("bad predicate `{s}`"));
        let s = s.trim();
        let body = s.strip_suffix(')').ok_or_else(bad)?;
        let open = body.rfind('(').ok_or_else(bad)?;
        let (head, args) = (&body[..open], &body[open + 1..]);
        let args = split_args(args)
            .into_iter()
            .map(Term::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        let (modality, inner) = match head.strip_prefix("PropRel_") {
            Some(rest) => {
                let (lex, inner) = rest.split_once('(').ok_or_else(bad)?;
                let inner = inner.strip_suffix(')').ok_or_else(bad)?;
                (Some(lex.to_string()), inner)
            }
            None => (None, head),
        };
        let (polarity, name) = match inner.strip_prefix("Neg(") {
            Some(rest) => (Polarity::Negative, rest.strip_suffix(')').ok_or_else(bad)?),
            None => (Polarity::Positive, inner),
        };
        if !is_name(name) || modality.as_deref().is_some_and(|m| !is_name(m)) {
            return Err(bad());
        }
        Ok(Predicate {
            name: name.to_string(),
            polarity,
            modality,
            args,
        })
    }
}

/// A set of predicates rendered as `{p, q}`.
pub type PredicateSet = BTreeSet<Predicate>;

pub fn format_set(set: &PredicateSet) -> String {
    let items: Vec<String> = set.iter().map(Predicate::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn parse_set(s: &str) -> Result<PredicateSet, DialogueError> {
    let s = s.trim();
    let inner = s
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| DialogueError::Parse(format!("bad set `{s}`")))?;
    split_top(inner, ", ")
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .map(Predicate::from_str)
        .collect()
}

/// Splits `s` on `sep` outside parentheses and braces.
pub(crate) fn split_top<'a>(s: &'a str, sep: &str) -> Vec<&'a str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < s.len() {
        match bytes[i] {
            b'(' | b'{' => depth += 1,
            b')' | b'}' => depth -= 1,
            _ => {}
        }
        if depth == 0 && s[i..].starts_with(sep) {
            out.push(&s[start..i]);
            i += sep.len();
            start = i;
            continue;
        }
        i += 1;
    }
    out.push(&s[start..]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActKind {
    Assert,
    Ask,
    Accept,
    Ground,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum DialogueAct {
    Assert(Predicate),
    Ask(Predicate),
    Accept(Option<Predicate>),
    Ground(Option<Predicate>),
    #[default]
    None,
}

impl DialogueAct {
    pub fn kind(&self) -> ActKind {
        match self {
            DialogueAct::Assert(_) => ActKind::Assert,
            DialogueAct::Ask(_) => ActKind::Ask,
            DialogueAct::Accept(_) => ActKind::Accept,
            DialogueAct::Ground(_) => ActKind::Ground,
            DialogueAct::None => ActKind::None,
        }
    }

    pub fn content(&self) -> Option<&Predicate> {
        match self {
            DialogueAct::Assert(p) | DialogueAct::Ask(p) => Some(p),
            DialogueAct::Accept(p) | DialogueAct::Ground(p) => p.as_ref(),
            DialogueAct::None => None,
        }
    }
}

impl fmt::Display for DialogueAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |p: &Option<Predicate>| p.as_ref().map_or(String::new(), Predicate::to_string);
        match self {
            DialogueAct::Assert(p) => write!(f, "Assert({p})"),
            DialogueAct::Ask(p) => write!(f, "Ask({p})"),
            DialogueAct::Accept(p) => write!(f, "Accept({})", opt(p)),
            DialogueAct::Ground(p) => write!(f, "Ground({})", opt(p)),
            DialogueAct::None => f.write_str("None"),
        }
    }
}

impl FromStr for DialogueAct {
    type Err = DialogueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "None" {
            return Ok(DialogueAct::None);
        }
        let bad = || DialogueError::Parse(format!("bad dialogue act `{s}`"));
        let (kind, rest) = s.split_once('(').ok_or_else(bad)?;
        let inner = rest.strip_suffix(')').ok_or_else(bad)?.trim();
        let opt = || -> Result<Option<Predicate>, DialogueError> {
            if inner.is_empty() {
                Ok(None)
            } else {
                inner.parse().map(Some)
            }
        };
        Ok(match kind {
            "Assert" => DialogueAct::Assert(inner.parse()?),
            "Ask" => DialogueAct::Ask(inner.parse()?),
            "Accept" => DialogueAct::Accept(opt()?),
            "Ground" => DialogueAct::Ground(opt()?),
            _ => return Err(bad()),
        })
    }
}
