//! Classification and probabilistic resolution of non-sentential utterances
//! (NSUs) in dialogue.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`] reads annotated transcripts and detects NSU candidates;
//! * [`features`] turns an (NSU, antecedent) pair into a feature vector;
//! * [`learn`] grows information-gain decision trees, evaluates them and
//!   tunes their hyperparameters;
//! * [`active`] runs entropy-sampling active learning and self-training;
//! * [`dialogue`] holds the semantic terms, the dialogue state and the
//!   probabilistic rule engine;
//! * [`rules`] is the concrete resolution and context-update rule set;
//! * [`session`] ties the classifier and the rules into a turn loop;
//! * [`tagger`] tokenizes and tags raw utterances for live classification;
//! * [`synth`] generates the bundled synthetic training corpus.

pub mod active;
pub mod config;
pub mod corpus;
pub mod dialogue;
pub mod features;
pub mod learn;
pub mod rules;
pub mod session;
pub mod synth;
pub mod tagger;

pub use config::Config;
pub use corpus::{NsuClass, NsuRecord, Sentence, Transcript};
