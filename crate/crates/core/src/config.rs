//! Runtime configuration: word lists, thresholds, alignment scoring, rule
//! probabilities and active-learning split ratios.
//!
//! The bundled defaults live in `config/default.toml`; any key may be
//! overridden by a user file with the same layout.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub detect: DetectConfig,
    pub lexicon: Lexicon,
    pub alignment: AlignmentScoring,
    pub rules: RuleParams,
    pub active: ActiveConfig,
}

/// Thresholds and word lists for NSU detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectConfig {
    /// An NSU has strictly fewer words than this.
    pub max_words: usize,
    /// An NSU has at least this many characters (word tokens only).
    pub min_chars: usize,
    /// Greeting lexemes; multi-word entries match contiguous words.
    pub greetings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Lexicon {
    pub wh_words: Vec<String>,
    pub yes_words: Vec<String>,
    pub no_words: Vec<String>,
    pub ack_words: Vec<String>,
    pub modal_adverbs: Vec<String>,
    pub factual_adjectives: Vec<String>,
    pub conjunctions: Vec<String>,
    /// Words that leave an utterance unfinished when they end it.
    pub non_closing: Vec<String>,
    /// Size of the antecedent tail used by `repeat_last`.
    pub repeat_last_window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignmentScoring {
    pub match_score: f64,
    pub mismatch_score: f64,
    pub gap_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleParams {
    /// Probability that a system assertion is pushed on the QUD.
    pub assert_insert: f64,
    /// Facts-insertion probability per propositional-modifier lexeme.
    /// The `default` key covers lexemes not listed.
    pub prop_rel: BTreeMap<String, f64>,
    /// Optional saliency weights for competing sluice antecedents, by
    /// candidate position. Empty means uniform.
    pub sluice_saliency: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActiveConfig {
    pub train_ratio: f64,
    pub dev_ratio: f64,
    pub test_ratio: f64,
    pub batch: usize,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn default_toml() -> &'static str {
        DEFAULT_CONFIG
    }
}

impl Default for Config {
    fn default() -> Self {
        Self {
            detect: DetectConfig::default(),
            lexicon: Lexicon::default(),
            alignment: AlignmentScoring::default(),
            rules: RuleParams::default(),
            active: ActiveConfig::default(),
        }
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

// Keep in sync with config/default.toml (checked by a unit test).

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            max_words: 12,
            min_chars: 2,
            greetings: strings(&[
                "hi",
                "hello",
                "hiya",
                "bye",
                "goodbye",
                "good morning",
                "good afternoon",
                "good evening",
                "good night",
                "cheerio",
            ]),
        }
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self {
            wh_words: strings(&["what", "which", "who", "whom", "whose", "where", "when", "how", "why"]),
            yes_words: strings(&["yes", "yeah", "yep", "aye", "yea", "sure", "certainly"]),
            no_words: strings(&["no", "not", "nay", "nope", "never"]),
            ack_words: strings(&["right", "aha", "mhm", "ok", "okay", "alright", "uhu", "mm", "uh-huh"]),
            modal_adverbs: strings(&[
                "absolutely",
                "clearly",
                "probably",
                "possibly",
                "definitely",
                "certainly",
                "maybe",
                "perhaps",
                "occasionally",
                "unlikely",
                "surely",
                "hopefully",
            ]),
            factual_adjectives: strings(&[
                "good",
                "amazing",
                "terrible",
                "brilliant",
                "wonderful",
                "great",
                "lovely",
                "awful",
                "fantastic",
                "excellent",
                "horrible",
            ]),
            conjunctions: strings(&["and", "or", "but", "so", "plus"]),
            non_closing: strings(&[
                "and", "or", "but", "so", "the", "a", "an", "of", "to", "with", "like", "er", "erm", "because",
            ]),
            repeat_last_window: 4,
        }
    }
}

impl Default for AlignmentScoring {
    fn default() -> Self {
        Self {
            match_score: 2.0,
            mismatch_score: -1.0,
            gap_score: -1.0,
        }
    }
}

impl Default for RuleParams {
    fn default() -> Self {
        let prop_rel = [("probably", 0.75), ("unlikely", 0.25), ("default", 1.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Self {
            assert_insert: 0.75,
            prop_rel,
            sluice_saliency: Vec::new(),
        }
    }
}

impl Default for ActiveConfig {
    fn default() -> Self {
        Self {
            train_ratio: 0.5,
            dev_ratio: 0.25,
            test_ratio: 0.25,
            batch: 1,
        }
    }
}

impl Lexicon {
    fn contains(list: &[String], word: &str) -> bool {
        list.iter().any(|w| w.eq_ignore_ascii_case(word))
    }

    pub fn is_wh(&self, word: &str) -> bool {
        Self::contains(&self.wh_words, word)
    }

    pub fn is_yes(&self, word: &str) -> bool {
        Self::contains(&self.yes_words, word)
    }

    pub fn is_no(&self, word: &str) -> bool {
        Self::contains(&self.no_words, word)
    }

    pub fn is_ack(&self, word: &str) -> bool {
        Self::contains(&self.ack_words, word)
    }

    pub fn is_modal(&self, word: &str) -> bool {
        Self::contains(&self.modal_adverbs, word)
    }

    pub fn is_factual(&self, word: &str) -> bool {
        Self::contains(&self.factual_adjectives, word)
    }

    pub fn is_conjunction(&self, word: &str) -> bool {
        Self::contains(&self.conjunctions, word)
    }

    pub fn is_non_closing(&self, word: &str) -> bool {
        Self::contains(&self.non_closing, word)
    }

    /// First modal adverb occurring in `text`, lowercased.
    pub fn find_modal(&self, text: &str) -> Option<String> {
        words_of(text)
            .into_iter()
            .find(|w| self.is_modal(w))
            .map(|w| w.to_lowercase())
    }
}

/// Splits raw text into lowercase-insensitive words, dropping punctuation.
pub(crate) fn words_of(text: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace() || c == ',' || c == '?' || c == '!' || c == ';')
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'' && c != '-'))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_matches_defaults() {
        let cfg = Config::from_toml(Config::default_toml()).unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.detect.max_words, 12);
        assert_eq!(cfg.detect.min_chars, 2);
        assert_eq!(cfg.alignment, AlignmentScoring::default());
        assert_eq!(cfg.rules.assert_insert, 0.75);
        assert_eq!(cfg.rules.prop_rel["probably"], 0.75);
        assert_eq!(cfg.rules.prop_rel["unlikely"], 0.25);
    }

    #[test]
    fn partial_file_inherits_defaults() {
        let cfg = Config::from_toml("[detect]\nmax_words = 5\n").unwrap();
        assert_eq!(cfg.detect.max_words, 5);
        assert_eq!(cfg.detect.min_chars, 2);
        assert!(cfg.lexicon.is_wh("Who"));
    }

    #[test]
    fn modal_lookup() {
        let lex = Lexicon::default();
        assert_eq!(lex.find_modal("Probably."), Some("probably".into()));
        assert_eq!(lex.find_modal("Clearly, yes"), Some("clearly".into()));
        assert_eq!(lex.find_modal("Paul."), None);
    }
}
