//! A small lexicon-driven tokenizer and C5 tagger for raw utterances.

use std::collections::HashMap;

use crate::corpus::{Sentence, Token};

const BUNDLED: &str = include_str!("../data/lexicon.tsv");

const CLITICS: [&str; 7] = ["n't", "'s", "'d", "'ll", "'re", "'m", "'ve"];

#[derive(Debug, Clone)]
pub struct Tagger {
    entries: HashMap<String, (String, String)>,
}

impl Default for Tagger {
    fn default() -> Self {
        Self::from_tsv(BUNDLED)
    }
}

impl Tagger {
    /// Reads `word TAB lemma TAB tag` lines; `#` starts a comment.
    pub fn from_tsv(text: &str) -> Self {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .filter_map(|l| {
                let mut f = l.split('\t');
                let (w, lemma, pos) = (f.next()?, f.next()?, f.next()?);
                Some((w.to_lowercase(), (lemma.to_string(), pos.to_string())))
            })
            .collect();
        Tagger { entries }
    }

    pub fn lookup(&self, word: &str) -> Option<(&str, &str)> {
        self.entries
            .get(&word.to_lowercase())
            .map(|(l, p)| (l.as_str(), p.as_str()))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn tag_token(&self, surface: &str) -> Token {
        if surface.chars().all(|c| c.is_ascii_punctuation()) {
            return Token::word(surface, surface, "PUN");
        }
        if let Some((lemma, pos)) = self.lookup(surface) {
            return Token::word(surface, lemma, pos);
        }
        let lower = surface.to_lowercase();
        let pos = if surface.chars().any(|c| c.is_ascii_digit()) {
            "CRD"
        } else if surface.chars().next().is_some_and(char::is_uppercase) {
            "NP0"
        } else if lower.ends_with("ing") {
            "VVG"
        } else if lower.ends_with("ed") {
            "VVD"
        } else if lower.ends_with("ly") {
            "AV0"
        } else {
            "NN1"
        };
        Token::word(surface, &lower, pos)
    }

    pub fn tokenize(text: &str) -> Vec<String> {
        let mut out = Vec::new();
        for raw in text.split_whitespace() {
            let raw: String = raw.chars().filter(|&c| c != '|').collect();
            let start = raw.find(|c: char| !c.is_ascii_punctuation() || c == '\'');
            let Some(start) = start else {
                out.push(raw);
                continue;
            };
            let end = raw
                .rfind(|c: char| !c.is_ascii_punctuation() || c == '\'')
                .map_or(raw.len(), |i| i + raw[i..].chars().next().map_or(1, char::len_utf8));
            if start > 0 {
                out.push(raw[..start].to_string());
            }
            let mut core = raw[start..end].to_string();
            let mut tail = Vec::new();
            while let Some(c) = CLITICS
                .iter()
                .find(|c| core.len() > c.len() && core.to_lowercase().ends_with(*c))
            {
                tail.push(core.split_off(core.len() - c.len()));
            }
            out.push(core);
            out.extend(tail.into_iter().rev());
            for p in raw[end..].chars() {
                out.push(p.to_string());
            }
        }
        out
    }

    pub fn tag(&self, id: u32, speaker: Option<&str>, text: &str) -> Sentence {
        Sentence {
            id,
            speaker: speaker.map(str::to_string),
            tokens: Self::tokenize(text).iter().map(|w| self.tag_token(w)).collect(),
            syntax: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_punctuation_and_clitics() {
        assert_eq!(Tagger::tokenize("What's plus three?"), vec!["What", "'s", "plus", "three", "?"]);
        assert_eq!(Tagger::tokenize("I don't know..."), vec!["I", "do", "n't", "know", ".", ".", "."]);
        assert_eq!(Tagger::tokenize("\"Paul.\""), vec!["\"", "Paul", ".", "\""]);
    }

    #[test]
    fn tags_known_and_unknown_words() {
        let t = Tagger::default();
        let s = t.tag(1, Some("A"), "Is Gloria coming to the party tonight?");
        let tags: Vec<&str> = s.tokens.iter().map(|t| t.pos.as_str()).collect();
        assert_eq!(tags, vec!["VBZ", "NP0", "VVG", "PRP", "AT0", "NN1", "AV0", "PUN"]);
        assert_eq!(s.word_count(), 7);
        assert_eq!(t.tag_token("18:00").pos, "CRD");
        assert_eq!(t.tag_token("slowly").pos, "AV0");
        assert_eq!(t.tag_token("Yes").lemma, "yes");
    }
}
