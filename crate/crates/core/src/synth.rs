//! Deterministic generator for a small synthetic two-party corpus with
//! gold NSU annotations over all fifteen classes.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, NsuClass, NsuRecord, PartyCount, Sentence, Transcript};
use crate::tagger::Tagger;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub files: usize,
    pub pairs_per_file: usize,
    /// Probability that a gold label is swapped for a confusable class.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            files: 60,
            pairs_per_file: 7,
            noise: 0.05,
            seed: 2024,
        }
    }
}

const WEIGHTS: [(NsuClass, u32); 15] = [
    (NsuClass::Ack, 25),
    (NsuClass::ShortAns, 15),
    (NsuClass::AffAns, 10),
    (NsuClass::Reject, 7),
    (NsuClass::RepAck, 6),
    (NsuClass::CE, 6),
    (NsuClass::Sluice, 6),
    (NsuClass::CheckQu, 4),
    (NsuClass::FactMod, 4),
    (NsuClass::PropMod, 4),
    (NsuClass::HelpReject, 3),
    (NsuClass::BareModPh, 3),
    (NsuClass::Conj, 3),
    (NsuClass::Filler, 3),
    (NsuClass::RepAffAns, 2),
];

const NAMES: [&str; 7] = ["Paul", "Mary", "John", "Sue", "Gloria", "Peter", "Anna"];
const PEOPLE: [&str; 4] = ["my sister", "your brother", "the teacher", "my mother"];
const NOUNS: [&str; 12] = [
    "car", "cake", "book", "letter", "door", "window", "table", "ticket", "dog", "box", "bag", "key",
];
const PLURALS: [&str; 4] = ["books", "keys", "tickets", "cars"];
const ROOMS: [&str; 4] = ["kitchen", "garden", "office", "car"];
const PLACES: [&str; 6] = ["party", "shop", "school", "office", "station", "meeting"];
const TIMES: [&str; 4] = ["today", "tomorrow", "tonight", "later"];
const VERBS: [(&str, &str); 7] = [
    ("buy", "bought"),
    ("paint", "painted"),
    ("fix", "fixed"),
    ("cook", "cooked"),
    ("take", "took"),
    ("make", "made"),
    ("see", "saw"),
];
const NUMBERS: [&str; 6] = ["Two", "Three", "Four", "Five", "Ten", "Twelve"];

struct Gen {
    rng: ChaCha8Rng,
}

fn cap(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

impl Gen {
    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs.choose(&mut self.rng).expect("non-empty bank")
    }

    fn subject(&mut self) -> String {
        if self.rng.gen_bool(0.6) {
            self.pick(&NAMES).to_string()
        } else {
            self.pick(&PEOPLE).to_string()
        }
    }

    fn verb(&mut self) -> (&'static str, &'static str) {
        *VERBS.choose(&mut self.rng).expect("non-empty bank")
    }

    fn declarative(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => {
                let (s, (_, past), n) = (self.subject(), self.verb(), self.pick(&NOUNS));
                format!("{} {past} the {n} yesterday.", cap(&s))
            }
            1 => format!("I am going to the {} {}.", self.pick(&PLACES), self.pick(&TIMES)),
            2 => format!("{} is coming to the {} tomorrow.", cap(&self.subject()), self.pick(&PLACES)),
            _ => {
                let ((base, _), n, t) = (self.verb(), self.pick(&NOUNS), self.pick(&TIMES));
                format!("We should {base} the {n} {t}.")
            }
        }
    }

    fn polar(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => {
                let (s, (base, _), n) = (self.subject(), self.verb(), self.pick(&NOUNS));
                format!("Did {s} {base} the {n}?")
            }
            1 => format!("Are you going to the {} {}?", self.pick(&PLACES), self.pick(&TIMES)),
            2 => format!("Is {} coming to the {}?", self.subject(), self.pick(&PLACES)),
            _ => {
                let ((base, _), n, t) = (self.verb(), self.pick(&NOUNS), self.pick(&TIMES));
                format!("Will you {base} the {n} {t}?")
            }
        }
    }

    /// A wh-question and a fitting short answer.
    fn wh(&mut self) -> (String, String) {
        match self.rng.gen_range(0..6) {
            0 => (
                format!("Where did you put the {}?", self.pick(&NOUNS)),
                format!("In the {}.", self.pick(&ROOMS)),
            ),
            1 => {
                let ((_, past), n) = (self.verb(), self.pick(&NOUNS));
                (format!("Who {past} the {n}?"), format!("{}.", self.pick(&NAMES)))
            }
            2 => (
                format!("When are you going to the {}?", self.pick(&PLACES)),
                format!("{}.", cap(self.pick(&TIMES))),
            ),
            3 => {
                let (s, (base, _)) = (self.subject(), self.verb());
                (format!("What did {s} {base} for the party?"), format!("A {}.", self.pick(&NOUNS)))
            }
            4 => {
                let (p, (base, _)) = (self.pick(&PLURALS), self.verb());
                (format!("How many {p} did you {base}?"), format!("{}.", self.pick(&NUMBERS)))
            }
            _ => {
                let (n, (base, _)) = (self.pick(&NOUNS), self.verb());
                (format!("Which {n} did you {base}?"), "The red one.".to_string())
            }
        }
    }

    /// Antecedent and NSU text for a class.
    fn pair(&mut self, class: NsuClass) -> (String, String) {
        use NsuClass::*;
        match class {
            Ack => {
                let a = self.declarative();
                (a, self.pick(&["Yeah.", "Mm.", "OK.", "Right.", "Mhm.", "Yes.", "Okay.", "Aha."]).into())
            }
            RepAck => {
                let (s, (_, past), n) = (self.subject(), self.verb(), self.pick(&NOUNS));
                (format!("{} {past} the {n} yesterday.", cap(&s)), format!("The {n}."))
            }
            CE => {
                let name = self.pick(&NAMES);
                let a = if self.rng.gen_bool(0.5) {
                    format!("Is {name} coming to the {}?", self.pick(&PLACES))
                } else {
                    let ((_, past), n) = (self.verb(), self.pick(&NOUNS));
                    format!("{name} {past} the {n} yesterday.")
                };
                (a, format!("{name}?"))
            }
            CheckQu => {
                let a = self.declarative();
                (a, self.pick(&["OK?", "Right?", "Yeah?", "Okay?"]).into())
            }
            Sluice => {
                let (s, (_, past), n) = (self.subject(), self.verb(), self.pick(&NOUNS));
                let a = format!("{} {past} a {n} for somebody.", cap(&s));
                (a, self.pick(&["Who?", "When?", "Where?", "Why?", "Which one?", "What?"]).into())
            }
            Filler => {
                let (s, (_, past), n) = (self.subject(), self.verb(), self.pick(&NOUNS));
                let tail = self.pick(&["and the", "with the", "and a", "because of the"]);
                (format!("{} {past} the {n} {tail}", cap(&s)), format!("{}.", cap(self.pick(&NOUNS))))
            }
            ShortAns => self.wh(),
            AffAns => {
                let a = self.polar();
                (a, self.pick(&["Yes.", "Yeah.", "Yep.", "Aye.", "Sure."]).into())
            }
            Reject => {
                let a = if self.rng.gen_bool(0.8) {
                    self.polar()
                } else {
                    self.declarative()
                };
                (a, self.pick(&["No.", "Nope.", "No, no.", "Not really."]).into())
            }
            RepAffAns => {
                let (s, (base, _), n) = (self.subject(), self.verb(), self.pick(&NOUNS));
                let nsu = if self.rng.gen_bool(0.5) {
                    format!("{}, yes.", cap(&s))
                } else {
                    format!("The {n}, yeah.")
                };
                (format!("Did {s} {base} the {n}?"), nsu)
            }
            HelpReject => {
                let (s, (base, _), n) = (self.subject(), self.verb(), self.pick(&NOUNS));
                let nsu = if self.rng.gen_bool(0.5) {
                    format!("No, the {}.", self.pick(&NOUNS))
                } else {
                    format!("No, {}.", self.pick(&NAMES))
                };
                (format!("Did {s} {base} the {n}?"), nsu)
            }
            PropMod => {
                let a = self.polar();
                let m = ["Probably.", "Maybe.", "Possibly.", "Definitely.", "Perhaps.", "Clearly.", "Probably not."];
                (a, self.pick(&m).into())
            }
            FactMod => {
                let a = self.declarative();
                (a, self.pick(&["Great.", "Brilliant!", "Lovely.", "Wonderful.", "Good.", "Terrible."]).into())
            }
            BareModPh => {
                let a = self.declarative();
                let nsu = match self.rng.gen_range(0..3) {
                    0 => format!("With {}.", self.pick(&NAMES)),
                    1 => format!("In the {}.", self.pick(&ROOMS)),
                    _ => self.pick(&["After lunch.", "Before dinner.", "At night."]).to_string(),
                };
                (a, nsu)
            }
            Conj => {
                let a = self.declarative();
                let nsu = match self.rng.gen_range(0..3) {
                    0 => format!("And the {}.", self.pick(&NOUNS)),
                    1 => format!("Or {}.", self.pick(&NAMES)),
                    _ => format!("And {} too.", self.pick(&NAMES)),
                };
                (a, nsu)
            }
            NoNsu => unreachable!("not a generated class"),
        }
    }

    fn class(&mut self) -> NsuClass {
        let total: u32 = WEIGHTS.iter().map(|w| w.1).sum();
        let mut r = self.rng.gen_range(0..total);
        for (c, w) in WEIGHTS {
            if r < w {
                return c;
            }
            r -= w;
        }
        unreachable!()
    }

    fn confusable(&mut self, c: NsuClass) -> NsuClass {
        use NsuClass::*;
        let alts: &[NsuClass] = match c {
            Ack => &[AffAns, CheckQu, RepAck],
            AffAns => &[Ack, RepAffAns],
            Reject => &[HelpReject],
            RepAck => &[CE, Ack],
            CE => &[RepAck, Sluice],
            ShortAns => &[BareModPh, Filler],
            BareModPh => &[ShortAns],
            PropMod => &[FactMod],
            FactMod => &[Ack],
            _ => &[Ack],
        };
        *alts.choose(&mut self.rng).expect("non-empty")
    }
}

/// Generates the corpus: transcripts `S001`, `S002`, ... and one record per
/// (antecedent, NSU) pair. Identical parameters give identical output.
pub fn generate(params: &SynthParams) -> Corpus {
    let tagger = Tagger::default();
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(params.seed),
    };
    let mut transcripts = HashMap::new();
    let mut records = Vec::new();
    for f in 0..params.files {
        let file_id = format!("S{:03}", f + 1);
        let mut sentences: Vec<Sentence> = Vec::new();
        let push = |speaker: &str, text: &str, sentences: &mut Vec<Sentence>| {
            let id = sentences.last().map_or(1, |s| s.id + 1);
            sentences.push(tagger.tag(id, Some(speaker), text));
            id
        };
        for _ in 0..params.pairs_per_file {
            if g.rng.gen_bool(0.4) {
                let who = g.pick(&["A", "B"]);
                let text = g.declarative();
                push(who, &text, &mut sentences);
            }
            let class = g.class();
            let (ant, nsu) = g.pair(class);
            let (sa, sn) = match (class, g.rng.gen_bool(0.5)) {
                (NsuClass::CheckQu, true) => ("A", "A"),
                (NsuClass::CheckQu, false) => ("B", "B"),
                (_, true) => ("A", "B"),
                (_, false) => ("B", "A"),
            };
            let antecedent_id = push(sa, &ant, &mut sentences);
            let sentence_id = push(sn, &nsu, &mut sentences);
            let label = if g.rng.gen_bool(params.noise) {
                g.confusable(class)
            } else {
                class
            };
            records.push(NsuRecord {
                file_id: file_id.clone(),
                sentence_id,
                antecedent_id,
                label,
            });
        }
        transcripts.insert(
            file_id.clone(),
            Transcript {
                file_id,
                party_count: PartyCount::Two,
                sentences,
            },
        );
    }
    Corpus { transcripts, records }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DetectConfig;
    use crate::corpus::{detect_nsu, select_antecedent};

    #[test]
    fn deterministic_and_sized() {
        let p = SynthParams::default();
        let a = generate(&p);
        let b = generate(&p);
        assert_eq!(a.records, b.records);
        assert!(a.transcripts.len() >= 50);
        assert!(a.records.len() >= 300);
        let classes: std::collections::HashSet<_> = a.records.iter().map(|r| r.label).collect();
        assert!(classes.len() >= 8);
        a.check_records().unwrap();
    }

    #[test]
    fn antecedents_are_selected() {
        let c = generate(&SynthParams::default());
        let cfg = DetectConfig::default();
        let mut detected = 0;
        for r in &c.records {
            let (nsu, ant) = c.pair(r).unwrap();
            let t = &c.transcripts[&r.file_id];
            assert_eq!(select_antecedent(nsu, t).map(|s| s.id), Some(ant.id), "{}:{}", r.file_id, nsu.id);
            detected += usize::from(detect_nsu(nsu, &cfg));
        }
        assert!(detected as f64 > 0.95 * c.records.len() as f64);
    }
}
