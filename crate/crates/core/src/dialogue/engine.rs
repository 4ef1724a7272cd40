//! Probabilistic rules with ordered branches, fired by exact enumeration
//! over the joint support of the state variables they read.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::distribution::{max_qud_prior, Distribution};
use super::semantics::{format_set, neg, prop_rel, substitute, ActKind, DialogueAct, Predicate, PredicateSet, Term};
use super::state::{DialogueState, QudEntry};
use super::DialogueError;
use crate::config::{words_of, Lexicon, RuleParams};
use crate::corpus::NsuClass;

pub const DEFAULT_SUPPORT_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActVar {
    #[serde(rename = "a_a")]
    A,
    #[serde(rename = "a_b")]
    B,
}

impl fmt::Display for ActVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActVar::A => "a_a",
            ActVar::B => "a_b",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `nsu_a` is one of the classes.
    NsuIs(Vec<NsuClass>),
    /// `max_qud > 0`.
    MaxQudSet,
    /// The MaxQUD question has no variables.
    MaxQudPolar,
    /// The MaxQUD question has at least one variable.
    MaxQudWh,
    MaxQudSingleVariable,
    MaxQudNegative,
    MaxQudModalized,
    /// `u_a` contains one of the words.
    UaContains(Vec<String>),
    UaHasModal,
    UaIsQuestion,
    ActIs { target: ActVar, kinds: Vec<ActKind> },
    ActHasContent(ActVar),
    /// The last QUD entry holds the content of `a_b`.
    LastQudIsAct,
    Not(Box<Condition>),
}

/// Variables a rule ranges over besides the state variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    /// Each variable of the MaxQUD question that is the focus of some FEC
    /// predicate; binds a fresh variable too.
    WhVariable,
    /// Each predicate of the MaxQUD question or FEC that mentions the
    /// constant uttered in `u_a`.
    CeMatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Content {
    None,
    MaxQudQ,
    NegMaxQudQ,
    PropRelMaxQudQ,
    ShortAnswer,
    /// `rel(x, x̂)` over the bound and fresh variables.
    SluiceQuery(String),
    BoundPredicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FecSource {
    MaxQudFec,
    ShortAnswer,
    /// FEC predicates focused on the bound variable, plus `sort(x)`.
    Focus {
        #[serde(default)]
        sort: Option<String>,
    },
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Act { target: ActVar, kind: ActKind, content: Content },
    NewFec(FecSource),
    /// Appends `(u_b, content of a_b, {})` to the QUD.
    QudPush,
    /// Adds `new_fec` predicates sharing a non-constant term with the last
    /// QUD question to its FEC.
    QudLastFec,
    QudRemoveMax,
    /// `facts ∪ {p} ∪ new_fec` for `a_b = Accept(p)`, modality stripped.
    FactsAccept,
    MaxQudPrior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prob {
    Fixed(f64),
    /// `assert_insert`, or `prop_rel` looked up by the modality of the
    /// accepted content.
    Param(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub prob: Prob,
    #[serde(default)]
    pub effects: Vec<Effect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    #[serde(default)]
    pub when: Vec<Condition>,
    #[serde(default)]
    pub then: Vec<Outcome>,
}

fn enabled_default() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbRule {
    pub name: String,
    #[serde(default)]
    pub quantifier: Option<Quantifier>,
    #[serde(default, rename = "branch")]
    pub branches: Vec<Branch>,
    #[serde(default = "enabled_default")]
    pub enabled: bool,
}

impl ProbRule {
    pub fn validate(&self) -> Result<(), DialogueError> {
        for b in &self.branches {
            let mut fixed = 0.0;
            for o in &b.then {
                match &o.prob {
                    Prob::Fixed(p) if !(0.0..=1.0).contains(p) => return Err(DialogueError::InvalidDistribution),
                    Prob::Fixed(p) => fixed += p,
                    Prob::Param(name) if name == "assert_insert" || name == "prop_rel" => {}
                    Prob::Param(name) => return Err(DialogueError::UnknownParam(name.clone())),
                }
            }
            if fixed > 1.0 + 1e-9 {
                return Err(DialogueError::InvalidDistribution);
            }
        }
        Ok(())
    }
}

/// Lexical resources and probability parameters rules consult.
#[derive(Debug, Clone, Copy)]
pub struct RuleContext<'a> {
    pub lexicon: &'a Lexicon,
    pub params: &'a RuleParams,
    pub support_cap: usize,
}

/// A concrete assignment to one state variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Assignment {
    Act(ActVar, DialogueAct),
    NewFec(PredicateSet),
    Qud(Vec<QudEntry>),
    Facts(PredicateSet),
    MaxQud(Distribution<usize>),
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assignment::Act(v, a) => write!(f, "{v} <- {a}"),
            Assignment::NewFec(s) => write!(f, "new_fec <- {}", format_set(s)),
            Assignment::Qud(q) => {
                let qs: Vec<String> = q.iter().map(|e| e.q.to_string()).collect();
                write!(f, "qud <- [{}]", qs.join(", "))
            }
            Assignment::Facts(s) => write!(f, "facts <- {} predicates", s.len()),
            Assignment::MaxQud(d) => {
                let parts: Vec<String> = d.sorted().iter().map(|(i, p)| format!("{i}: {p:.4}")).collect();
                write!(f, "max_qud <- {}", parts.join(", "))
            }
        }
    }
}

pub type EffectSet = Vec<Assignment>;

fn render(set: &EffectSet) -> String {
    if set.is_empty() {
        return "no change".into();
    }
    set.iter().map(Assignment::to_string).collect::<Vec<_>>().join("; ")
}

/// The aggregated effect distribution of one rule during `apply_rules`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Firing {
    pub rule: String,
    pub outcomes: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Default)]
struct Grounding {
    var: Option<u32>,
    fresh: Option<u32>,
    bound: Option<Predicate>,
    weight: f64,
}

fn act_of(w: &DialogueState, v: ActVar) -> &DialogueAct {
    match v {
        ActVar::A => w.a_a.argmax(),
        ActVar::B => w.a_b.argmax(),
    }
}

fn max_entry(w: &DialogueState) -> Option<&QudEntry> {
    w.qud_at(*w.max_qud.argmax())
}

/// Every combination of values of `nsu_a`, `max_qud`, `a_a` and `a_b`, each
/// as a state holding point distributions.
fn worlds(s: &DialogueState, cap: usize) -> Result<Vec<(DialogueState, f64)>, DialogueError> {
    let size = s.nsu_a.len() * s.max_qud.len() * s.a_a.len() * s.a_b.len();
    if size > cap {
        return Err(DialogueError::SupportExplosion { size, cap });
    }
    let mut out = Vec::with_capacity(size);
    for (n, pn) in s.nsu_a.iter() {
        for (m, pm) in s.max_qud.iter() {
            for (a, pa) in s.a_a.iter() {
                for (b, pb) in s.a_b.iter() {
                    let mut w = s.clone();
                    w.nsu_a = Distribution::point(*n);
                    w.max_qud = Distribution::point(*m);
                    w.a_a = Distribution::point(a.clone());
                    w.a_b = Distribution::point(b.clone());
                    out.push((w, pn * pm * pa * pb));
                }
            }
        }
    }
    Ok(out)
}

fn holds(c: &Condition, w: &DialogueState, ctx: &RuleContext) -> bool {
    let entry = max_entry(w);
    match c {
        Condition::NsuIs(classes) => classes.contains(w.nsu_a.argmax()),
        Condition::MaxQudSet => entry.is_some(),
        Condition::MaxQudPolar => entry.is_some_and(|e| !e.q.has_variables()),
        Condition::MaxQudWh => entry.is_some_and(|e| e.q.has_variables()),
        Condition::MaxQudSingleVariable => entry.is_some_and(|e| e.q.variables().len() == 1),
        Condition::MaxQudNegative => entry.is_some_and(|e| e.q.is_negative()),
        Condition::MaxQudModalized => entry.is_some_and(|e| e.q.modality.is_some()),
        Condition::UaContains(words) => {
            let ua = words_of(&w.u_a);
            words.iter().any(|x| ua.iter().any(|u| u.eq_ignore_ascii_case(x)))
        }
        Condition::UaHasModal => ctx.lexicon.find_modal(&w.u_a).is_some(),
        Condition::UaIsQuestion => w.u_a.trim_end().ends_with('?'),
        Condition::ActIs { target, kinds } => kinds.contains(&act_of(w, *target).kind()),
        Condition::ActHasContent(target) => act_of(w, *target).content().is_some(),
        Condition::LastQudIsAct => match (w.qud.last(), act_of(w, ActVar::B).content()) {
            (Some(e), Some(p)) => e.q == *p,
            _ => false,
        },
        Condition::Not(inner) => !holds(inner, w, ctx),
    }
}

fn weights(n: usize, saliency: &[f64]) -> Vec<f64> {
    if saliency.len() >= n && n > 0 && saliency[..n].iter().all(|w| *w >= 0.0) {
        let total: f64 = saliency[..n].iter().sum();
        if total > 0.0 {
            return saliency[..n].iter().map(|w| w / total).collect();
        }
    }
    vec![1.0 / n as f64; n]
}

fn groundings(q: Option<Quantifier>, w: &DialogueState, ctx: &RuleContext) -> Vec<Grounding> {
    let Some(q) = q else {
        return vec![Grounding {
            weight: 1.0,
            ..Grounding::default()
        }];
    };
    let Some(entry) = max_entry(w) else {
        return Vec::new();
    };
    match q {
        Quantifier::WhVariable => {
            let vars: Vec<u32> = entry
                .q
                .variables()
                .into_iter()
                .filter(|x| entry.fec.iter().any(|p| p.focus() == Some(*x)))
                .collect();
            let fresh = w.fresh_variable();
            let ws = weights(vars.len(), &ctx.params.sluice_saliency);
            vars.into_iter()
                .zip(ws)
                .map(|(x, weight)| Grounding {
                    var: Some(x),
                    fresh: Some(fresh),
                    bound: None,
                    weight,
                })
                .collect()
        }
        Quantifier::CeMatch => {
            let surface = words_of(&w.u_a).join(" ");
            if surface.is_empty() {
                return Vec::new();
            }
            let matches = |p: &Predicate| {
                p.args
                    .iter()
                    .any(|t| matches!(t, Term::Constant(c) if c.eq_ignore_ascii_case(&surface)))
            };
            let preds: Vec<&Predicate> = std::iter::once(&entry.q)
                .chain(entry.fec.iter())
                .filter(|p| matches(p))
                .collect();
            let n = preds.len();
            preds
                .into_iter()
                .map(|p| Grounding {
                    var: None,
                    fresh: None,
                    bound: Some(p.clone()),
                    weight: 1.0 / n as f64,
                })
                .collect()
        }
    }
}

/// The term a short answer denotes: supplied fragment semantics, or a
/// constant made of the content words of `u_a`.
fn answer_term(w: &DialogueState, lex: &Lexicon) -> Option<Term> {
    if let Some(f) = &w.nlu_a {
        return Some(f.term.clone());
    }
    let words: Vec<String> = words_of(&w.u_a)
        .into_iter()
        .map(|x| x.trim_end_matches('.').to_string())
        .filter(|x| {
            !x.is_empty()
                && !(lex.is_yes(x)
                    || lex.is_no(x)
                    || lex.is_ack(x)
                    || lex.is_wh(x)
                    || lex.is_conjunction(x)
                    || lex.is_non_closing(x))
        })
        .collect();
    (!words.is_empty()).then(|| Term::Constant(words.join("_")))
}

fn single_var(e: &QudEntry) -> Option<u32> {
    let v = e.q.variables();
    (v.len() == 1).then(|| v[0])
}

fn content(c: &Content, w: &DialogueState, g: &Grounding, ctx: &RuleContext) -> Option<Option<Predicate>> {
    let entry = max_entry(w);
    Some(match c {
        Content::None => None,
        Content::MaxQudQ => Some(entry?.q.clone()),
        Content::NegMaxQudQ => Some(neg(&entry?.q)),
        Content::PropRelMaxQudQ => {
            let lex = ctx.lexicon.find_modal(&w.u_a)?;
            Some(prop_rel(&lex, &entry?.q).ok()?)
        }
        Content::ShortAnswer => {
            let e = entry?;
            Some(substitute(&e.q, single_var(e)?, &answer_term(w, ctx.lexicon)?))
        }
        Content::SluiceQuery(rel) => Some(Predicate::new(
            rel,
            vec![Term::Variable(g.var?), Term::Variable(g.fresh?)],
        )),
        Content::BoundPredicate => Some(g.bound.clone()?),
    })
}

fn shares_open_term(p: &Predicate, q: &Predicate) -> bool {
    p.args.iter().any(|t| !t.is_constant() && q.mentions(t))
}

fn instantiate(e: &Effect, w: &DialogueState, g: &Grounding, ctx: &RuleContext) -> Option<Assignment> {
    let entry = max_entry(w);
    Some(match e {
        Effect::Act { target, kind, content: c } => {
            let p = content(c, w, g, ctx)?;
            let act = match kind {
                ActKind::Assert => DialogueAct::Assert(p?),
                ActKind::Ask => DialogueAct::Ask(p?),
                ActKind::Accept => DialogueAct::Accept(p),
                ActKind::Ground => DialogueAct::Ground(p),
                ActKind::None => DialogueAct::None,
            };
            Assignment::Act(*target, act)
        }
        Effect::NewFec(src) => Assignment::NewFec(match src {
            FecSource::MaxQudFec => entry?.fec.clone(),
            FecSource::ShortAnswer => {
                let e = entry?;
                let x = single_var(e)?;
                let t = answer_term(w, ctx.lexicon)?;
                let mut out: PredicateSet = e.fec.iter().map(|p| substitute(p, x, &t)).collect();
                if let Some(f) = &w.nlu_a {
                    out.extend(f.fec.iter().cloned());
                }
                out
            }
            FecSource::Focus { sort } => {
                let x = g.var?;
                let mut out: PredicateSet = entry?.fec.iter().filter(|p| p.focus() == Some(x)).cloned().collect();
                if let Some(s) = sort {
                    out.insert(Predicate::new(s, vec![Term::Variable(x)]));
                }
                out
            }
            FecSource::Empty => PredicateSet::new(),
        }),
        Effect::QudPush => {
            let q = act_of(w, ActVar::B).content()?.clone();
            let mut qud = w.qud.clone();
            qud.push(QudEntry {
                utt: w.u_b.clone(),
                q,
                fec: PredicateSet::new(),
            });
            Assignment::Qud(qud)
        }
        Effect::QudLastFec => {
            let mut qud = w.qud.clone();
            let last = qud.last_mut()?;
            let extra: Vec<Predicate> = w
                .new_fec
                .iter()
                .filter(|p| shares_open_term(p, &last.q))
                .cloned()
                .collect();
            last.fec.extend(extra);
            Assignment::Qud(qud)
        }
        Effect::QudRemoveMax => {
            let i = *w.max_qud.argmax();
            if i == 0 || i > w.qud.len() {
                return None;
            }
            let mut qud = w.qud.clone();
            qud.remove(i - 1);
            Assignment::Qud(qud)
        }
        Effect::FactsAccept => {
            let p = match act_of(w, ActVar::B) {
                DialogueAct::Accept(Some(p)) => p.without_modality(),
                _ => return None,
            };
            let mut facts = w.facts.clone();
            facts.extend(
                std::iter::once(p)
                    .chain(w.new_fec.iter().cloned())
                    .filter(|p| !p.has_variables()),
            );
            Assignment::Facts(facts)
        }
        Effect::MaxQudPrior => Assignment::MaxQud(max_qud_prior(w.qud.len())),
    })
}

fn probability(p: &Prob, w: &DialogueState, ctx: &RuleContext) -> Result<f64, DialogueError> {
    match p {
        Prob::Fixed(x) => Ok(*x),
        Prob::Param(name) if name == "assert_insert" => Ok(ctx.params.assert_insert),
        Prob::Param(name) if name == "prop_rel" => {
            let lex = act_of(w, ActVar::B).content().and_then(|p| p.modality.clone());
            Ok(match lex {
                None => 1.0,
                Some(l) => ctx
                    .params
                    .prop_rel
                    .get(&l)
                    .or_else(|| ctx.params.prop_rel.get("default"))
                    .copied()
                    .unwrap_or(1.0),
            })
        }
        Prob::Param(name) => Err(DialogueError::UnknownParam(name.clone())),
    }
}

/// Effect sets produced in one world (a state with point values), with
/// their conditional probabilities. Unassigned mass is the empty set.
fn fire_world(r: &ProbRule, w: &DialogueState, ctx: &RuleContext) -> Result<Vec<(EffectSet, f64)>, DialogueError> {
    for b in &r.branches {
        if !b.when.iter().all(|c| holds(c, w, ctx)) {
            continue;
        }
        let probs = b
            .then
            .iter()
            .map(|o| probability(&o.prob, w, ctx))
            .collect::<Result<Vec<f64>, _>>()?;
        let mass: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || mass > 1.0 + 1e-9 {
            return Err(DialogueError::InvalidDistribution);
        }
        let mut kept: Vec<(f64, Vec<EffectSet>)> = Vec::new();
        for g in groundings(r.quantifier, w, ctx) {
            let sets: Option<Vec<EffectSet>> = b
                .then
                .iter()
                .map(|o| o.effects.iter().map(|e| instantiate(e, w, &g, ctx)).collect())
                .collect();
            if let Some(sets) = sets {
                kept.push((g.weight, sets));
            }
        }
        if kept.is_empty() {
            continue;
        }
        let total: f64 = kept.iter().map(|k| k.0).sum();
        let mut out = Vec::new();
        for (gw, sets) in kept {
            for (set, p) in sets.into_iter().zip(&probs) {
                out.push((set, gw / total * p));
            }
        }
        out.push((Vec::new(), 1.0 - mass));
        return Ok(out);
    }
    Ok(vec![(Vec::new(), 1.0)])
}

/// Distribution over effect sets of `r` fired against `s`.
pub fn ground_and_fire(
    r: &ProbRule,
    s: &DialogueState,
    ctx: &RuleContext,
) -> Result<Distribution<EffectSet>, DialogueError> {
    let mut weighted = Vec::new();
    for (w, pw) in worlds(s, ctx.support_cap)? {
        for (set, p) in fire_world(r, &w, ctx)? {
            weighted.push((set, pw * p));
        }
    }
    Distribution::from_weights(weighted)
}

fn assign(w: &mut DialogueState, set: &EffectSet) {
    for a in set {
        match a {
            Assignment::Act(ActVar::A, act) => w.a_a = Distribution::point(act.clone()),
            Assignment::Act(ActVar::B, act) => w.a_b = Distribution::point(act.clone()),
            Assignment::NewFec(s) => w.new_fec = s.clone(),
            Assignment::Qud(q) => w.qud = q.clone(),
            Assignment::Facts(s) => w.facts = s.clone(),
            Assignment::MaxQud(d) => w.max_qud = d.clone(),
        }
    }
}

fn argmax_value<T: PartialEq + Clone>(values: impl IntoIterator<Item = (T, f64)>) -> T {
    Distribution::from_weights(values)
        .expect("paths carry positive mass")
        .argmax()
        .clone()
}

/// Fires `rules` in order. Every rule sees the joint outcome of the
/// previous ones; at the end acts, `nsu_a` and `max_qud` keep their full
/// posterior while `new_fec`, `facts` and `qud` take their most probable
/// value (`max_qud` conditioned on the chosen `qud`).
pub fn apply_rules(
    s: &DialogueState,
    rules: &[ProbRule],
    ctx: &RuleContext,
) -> Result<(DialogueState, Vec<Firing>), DialogueError> {
    let mut paths: Vec<(DialogueState, f64)> = vec![(s.clone(), 1.0)];
    let mut firings = Vec::new();
    for r in rules.iter().filter(|r| r.enabled) {
        let mut next: Vec<(DialogueState, f64)> = Vec::new();
        let mut seen: Vec<(String, f64)> = Vec::new();
        for (ps, pp) in &paths {
            for (w, pw) in worlds(ps, ctx.support_cap)? {
                for (set, pe) in fire_world(r, &w, ctx)? {
                    let p = pp * pw * pe;
                    if p <= 0.0 {
                        continue;
                    }
                    let label = render(&set);
                    match seen.iter_mut().find(|(l, _)| *l == label) {
                        Some(e) => e.1 += p,
                        None => seen.push((label, p)),
                    }
                    let mut n = w.clone();
                    assign(&mut n, &set);
                    match next.iter_mut().find(|(st, _)| *st == n) {
                        Some(e) => e.1 += p,
                        None => next.push((n, p)),
                    }
                }
            }
        }
        if next.len() > ctx.support_cap {
            return Err(DialogueError::SupportExplosion {
                size: next.len(),
                cap: ctx.support_cap,
            });
        }
        if !(seen.len() == 1 && seen[0].0 == "no change") {
            seen.sort_by(|a, b| b.1.total_cmp(&a.1));
            firings.push(Firing {
                rule: r.name.clone(),
                outcomes: seen,
            });
        }
        paths = next;
    }
    Ok((collapse(s, &paths)?, firings))
}

fn collapse(s: &DialogueState, paths: &[(DialogueState, f64)]) -> Result<DialogueState, DialogueError> {
    let mut out = s.clone();
    out.a_a = Distribution::mixture(paths.iter().map(|(p, w)| (*w, p.a_a.clone())))?;
    out.a_b = Distribution::mixture(paths.iter().map(|(p, w)| (*w, p.a_b.clone())))?;
    out.nsu_a = Distribution::mixture(paths.iter().map(|(p, w)| (*w, p.nsu_a.clone())))?;
    out.new_fec = argmax_value(paths.iter().map(|(p, w)| (p.new_fec.clone(), *w)));
    out.facts = argmax_value(paths.iter().map(|(p, w)| (p.facts.clone(), *w)));
    out.qud = argmax_value(paths.iter().map(|(p, w)| (p.qud.clone(), *w)));
    out.max_qud = Distribution::mixture(
        paths
            .iter()
            .filter(|(p, _)| p.qud == out.qud)
            .map(|(p, w)| (*w, p.max_qud.clone())),
    )?;
    out.check()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx<'a>(lex: &'a Lexicon, params: &'a RuleParams) -> RuleContext<'a> {
        RuleContext {
            lexicon: lex,
            params,
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }

    fn rule(toml_text: &str) -> ProbRule {
        toml::from_str(toml_text).unwrap()
    }

    const ACK: &str = r#"
name = "ack"
[[branch]]
when = [{ nsu_is = ["Ack", "RepAck"] }, "max_qud_set"]
[[branch.then]]
prob = 1.0
effects = [{ act = { target = "a_a", kind = "accept", content = "none" } }]
"#;

    fn party() -> DialogueState {
        DialogueState::from_text(
            "qud.size = 1\nqud[1].q = goingToParty(IND_1)\nnsu_a = Ack: 0.75, AffAns: 0.2, CheckQu: 0.05\n",
        )
        .unwrap()
    }

    #[test]
    fn vacuous_rule() {
        let (lex, params) = (Lexicon::default(), RuleParams::default());
        let r = rule("name = \"never\"\n[[branch]]\nwhen = [\"max_qud_set\"]\n[[branch.then]]\nprob = 1.0\n");
        let d = ground_and_fire(&r, &DialogueState::new(), &ctx(&lex, &params)).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.prob(&Vec::new()), 1.0);
    }

    #[test]
    fn ack_mass_follows_classifier() {
        let (lex, params) = (Lexicon::default(), RuleParams::default());
        let r = rule(ACK);
        let d = ground_and_fire(&r, &party(), &ctx(&lex, &params)).unwrap();
        let accept = vec![Assignment::Act(ActVar::A, DialogueAct::Accept(None))];
        assert!((d.prob(&accept) - 0.75).abs() < 1e-12);
        let (st, firings) = apply_rules(&party(), &[r], &ctx(&lex, &params)).unwrap();
        assert!((st.a_a.prob(&DialogueAct::Accept(None)) - 0.75).abs() < 1e-12);
        assert!((st.a_a.prob(&DialogueAct::None) - 0.25).abs() < 1e-12);
        assert_eq!(firings.len(), 1);
    }

    #[test]
    fn empty_rule_list_is_identity() {
        let (lex, params) = (Lexicon::default(), RuleParams::default());
        let (st, firings) = apply_rules(&party(), &[], &ctx(&lex, &params)).unwrap();
        assert_eq!(st, party());
        assert!(firings.is_empty());
    }

    #[test]
    fn support_cap_is_enforced() {
        let (lex, params) = (Lexicon::default(), RuleParams::default());
        let mut c = ctx(&lex, &params);
        c.support_cap = 2;
        assert!(matches!(
            ground_and_fire(&rule(ACK), &party(), &c),
            Err(DialogueError::SupportExplosion { size: 3, cap: 2 })
        ));
    }

    #[test]
    fn unknown_param_rejected() {
        let r = rule("name = \"x\"\n[[branch]]\n[[branch.then]]\nprob = \"nope\"\n");
        assert!(matches!(r.validate(), Err(DialogueError::UnknownParam(_))));
    }
}
