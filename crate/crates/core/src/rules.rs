//! The NSU resolution and context-update rule set.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Lexicon, RuleParams};
use crate::dialogue::{apply_rules, DialogueError, DialogueState, Firing, ProbRule, RuleContext, DEFAULT_SUPPORT_CAP};

const DEFAULT_RULES: &str = include_str!("../rules/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RuleFile {
    #[serde(default)]
    resolution: Vec<ProbRule>,
    #[serde(default)]
    update: Vec<ProbRule>,
}

/// Resolution rules, then update rules, with the lexicon and parameters
/// they consult.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub resolution: Vec<ProbRule>,
    pub update: Vec<ProbRule>,
    pub params: RuleParams,
    pub lexicon: Lexicon,
    pub support_cap: usize,
}

impl RuleSet {
    pub fn from_toml(text: &str, params: RuleParams, lexicon: Lexicon) -> Result<Self, DialogueError> {
        let file: RuleFile = toml::from_str(text)?;
        for r in file.resolution.iter().chain(&file.update) {
            r.validate()?;
        }
        Ok(RuleSet {
            resolution: file.resolution,
            update: file.update,
            params,
            lexicon,
            support_cap: DEFAULT_SUPPORT_CAP,
        })
    }

    pub fn load(path: &Path, params: RuleParams, lexicon: Lexicon) -> Result<Self, DialogueError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DialogueError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, params, lexicon)
    }

    /// The bundled rule set with default parameters.
    pub fn canonical() -> Self {
        Self::from_toml(DEFAULT_RULES, RuleParams::default(), Lexicon::default()).expect("bundled rules are valid")
    }

    pub fn default_toml() -> &'static str {
        DEFAULT_RULES
    }

    pub fn with_config(mut self, params: RuleParams, lexicon: Lexicon) -> Self {
        self.params = params;
        self.lexicon = lexicon;
        self
    }

    pub fn get(&self, name: &str) -> Option<&ProbRule> {
        self.resolution.iter().chain(&self.update).find(|r| r.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.resolution
            .iter()
            .chain(&self.update)
            .map(|r| r.name.as_str())
            .collect()
    }

    pub fn set_enabled(&mut self, name: &str, on: bool) -> Result<(), DialogueError> {
        let r = self
            .resolution
            .iter_mut()
            .chain(self.update.iter_mut())
            .find(|r| r.name == name)
            .ok_or_else(|| DialogueError::UnknownRule(name.to_string()))?;
        r.enabled = on;
        Ok(())
    }

    pub fn context(&self) -> RuleContext<'_> {
        RuleContext {
            lexicon: &self.lexicon,
            params: &self.params,
            support_cap: self.support_cap,
        }
    }

    pub fn resolve(&self, s: &DialogueState) -> Result<(DialogueState, Vec<Firing>), DialogueError> {
        apply_rules(s, &self.resolution, &self.context())
    }

    pub fn update(&self, s: &DialogueState) -> Result<(DialogueState, Vec<Firing>), DialogueError> {
        apply_rules(s, &self.update, &self.context())
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::canonical()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::DialogueAct;

    fn resolve(pre: &str) -> DialogueState {
        let s = DialogueState::from_text(pre).unwrap();
        RuleSet::canonical().resolve(&s).unwrap().0
    }

    fn a_a(s: &DialogueState) -> String {
        s.a_a.argmax().to_string()
    }

    #[test]
    fn canonical_order() {
        assert_eq!(
            RuleSet::canonical().names(),
            vec![
                "ack",
                "affAns",
                "reject",
                "propMod",
                "checkQu",
                "shortAns",
                "sluice_who",
                "sluice_when",
                "sluice_where",
                "ce_conf",
                "qud_increment",
                "fec_update",
                "qud_downdate",
                "max_qud_update",
                "facts_increment"
            ]
        );
    }

    #[test]
    fn empty_qud_silences_ack_and_check() {
        for class in ["Ack", "CheckQu"] {
            let s = resolve(&format!("nsu_a = {class}: 1.0\n"));
            assert_eq!(*s.a_a.argmax(), DialogueAct::None);
        }
    }

    #[test]
    fn negative_question_rejected_stays_negative() {
        let s = resolve("u_a = No.\nnsu_a = Reject: 1\nqud.size = 1\nqud[1].q = Neg(leave)(IND_1)\n");
        assert_eq!(a_a(&s), "Assert(Neg(leave)(IND_1))");
    }

    #[test]
    fn prop_mod_needs_polar_question() {
        let s = resolve("u_a = Clearly.\nnsu_a = PropMod: 1\nqud.size = 1\nqud[1].q = p(X_1)\n");
        assert_eq!(*s.a_a.argmax(), DialogueAct::None);
        let s = resolve("u_a = Clearly.\nnsu_a = PropMod: 1\nqud.size = 1\nqud[1].q = p(IND_1)\n");
        assert_eq!(a_a(&s), "Assert(PropRel_clearly(p)(IND_1))");
    }

    #[test]
    fn short_answer_keeps_unrelated_fec() {
        let s = resolve(
            "u_a = Paul.\nnsu_a = ShortAns: 1\nqud.size = 1\nqud[1].q = org(X_1)\nqud[1].fec = {friend(IND_2,X_1), venue(IND_3)}\n",
        );
        assert_eq!(a_a(&s), "Assert(org(Paul))");
        assert_eq!(
            crate::dialogue::semantics::format_set(&s.new_fec),
            "{friend(IND_2,Paul), venue(IND_3)}"
        );
    }

    #[test]
    fn sluice_without_variable_is_silent() {
        let s = resolve("u_a = Who?\nnsu_a = Sluice: 1\nqud.size = 1\nqud[1].q = p(IND_1)\n");
        assert_eq!(*s.a_a.argmax(), DialogueAct::None);
    }

    #[test]
    fn ce_matches_question_itself() {
        let s = resolve("u_a = Paul?\nnsu_a = CE: 1\nqud.size = 1\nqud[1].q = comingToParty(Paul)\n");
        assert_eq!(a_a(&s), "Ask(comingToParty(Paul))");
        let s = resolve("u_a = Mary?\nnsu_a = CE: 1\nqud.size = 1\nqud[1].q = comingToParty(Paul)\n");
        assert_eq!(*s.a_a.argmax(), DialogueAct::None);
    }

    #[test]
    fn disabled_rule_is_skipped() {
        let mut rs = RuleSet::canonical();
        rs.set_enabled("reject", false).unwrap();
        let s = DialogueState::from_text("nsu_a = Reject: 1\nqud.size = 1\nqud[1].q = p(IND_1)\n").unwrap();
        assert_eq!(*rs.resolve(&s).unwrap().0.a_a.argmax(), DialogueAct::None);
        assert!(rs.set_enabled("nope", false).is_err());
    }

    #[test]
    fn downdate_keeps_order() {
        let s = DialogueState::from_text(
            "a_b = Accept(c(IND_3)): 1\nqud.size = 3\nqud[1].q = a(IND_1)\nqud[2].q = b(IND_2)\nqud[3].q = c(IND_3)\n",
        )
        .unwrap();
        let (n, _) = RuleSet::canonical().update(&s).unwrap();
        let qs: Vec<String> = n.qud.iter().map(|e| e.q.to_string()).collect();
        assert_eq!(qs, vec!["a(IND_1)", "b(IND_2)"]);
        assert_eq!(*n.max_qud.argmax(), 2);
        assert!(n.facts.iter().any(|p| p.to_string() == "c(IND_3)"));
    }

    #[test]
    fn assert_insert_most_probable_branch_appends() {
        let s = DialogueState::from_text("u_b = It rains.\na_b = Assert(rain(IND_1)): 1\n").unwrap();
        let (n, firings) = RuleSet::canonical().update(&s).unwrap();
        assert_eq!(n.qud.len(), 1);
        let inc = firings.iter().find(|f| f.rule == "qud_increment").unwrap();
        assert!((inc.outcomes[0].1 - 0.75).abs() < 1e-12);
        assert!((inc.outcomes[1].1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn unlikely_accept_mostly_leaves_facts() {
        let s = DialogueState::from_text(
            "a_b = Accept(PropRel_unlikely(rain)(IND_1)): 1\nqud.size = 1\nqud[1].q = rain(IND_1)\n",
        )
        .unwrap();
        let (n, firings) = RuleSet::canonical().update(&s).unwrap();
        assert!(n.facts.is_empty());
        let f = firings.iter().find(|f| f.rule == "facts_increment").unwrap();
        assert!(f.outcomes.iter().any(|(_, p)| (p - 0.25).abs() < 1e-12));
        let probable = DialogueState::from_text(
            "a_b = Accept(PropRel_probably(rain)(IND_1)): 1\nqud.size = 1\nqud[1].q = rain(IND_1)\n",
        )
        .unwrap();
        let (n, _) = RuleSet::canonical().update(&probable).unwrap();
        assert_eq!(n.facts.iter().next().unwrap().to_string(), "rain(IND_1)");
    }
}
