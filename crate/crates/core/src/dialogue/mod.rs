//! Semantic content, dialogue state and the probabilistic rule engine.

pub mod distribution;
pub mod engine;
pub mod semantics;
pub mod state;

pub use distribution::{max_qud_prior, Distribution};
pub use engine::{
    apply_rules, ground_and_fire, ActVar, Assignment, Branch, Condition, Content, Effect, EffectSet, FecSource,
    Firing, Outcome, Prob, ProbRule, Quantifier, RuleContext, DEFAULT_SUPPORT_CAP,
};
pub use semantics::{neg, prop_rel, substitute, ActKind, DialogueAct, Party, Polarity, Predicate, PredicateSet, Term};
pub use state::{DialogueState, Fragment, QudEntry, Snapshot};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DialogueError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("predicate already carries modality `{0}`")]
    AlreadyModalized(String),
    #[error("probabilities must be non-negative and sum to 1")]
    InvalidDistribution,
    #[error("state invariant violated: {0}")]
    Invariant(String),
    #[error("joint support of {size} exceeds the cap of {cap}")]
    SupportExplosion { size: usize, cap: usize },
    #[error("unknown probability parameter `{0}`")]
    UnknownParam(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("invalid rules file: {0}")]
    Rules(#[from] toml::de::Error),
}
