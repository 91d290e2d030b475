//! Negotiation scenario: issues, options, favor table, role prompts and
//! protocol limits.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Role;
use crate::error::{Error, Result};
use crate::personality::IssueImportance;

const BUYER_TEMPLATE: &str = include_str!("../../data/prompts/buyer.txt");
const SELLER_TEMPLATE: &str = include_str!("../../data/prompts/seller.txt");

/// Share of an issue's points each role receives for one option.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoleShare {
    pub buyer: f64,
    pub seller: f64,
}

impl RoleShare {
    pub fn new(buyer: f64, seller: f64) -> Self {
        RoleShare { buyer, seller }
    }

    pub fn of(&self, role: Role) -> f64 {
        match role {
            Role::Buyer => self.buyer,
            Role::Seller => self.seller,
        }
    }
}

/// issue code -> option -> share per role.
pub type FavorTable = BTreeMap<String, BTreeMap<String, RoleShare>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    pub temperature: f64,
    pub top_p: f64,
}

impl Decoding {
    /// Provider defaults keyed on the model identifier.
    pub fn for_model(model: &str) -> Decoding {
        let m = model.to_ascii_lowercase();
        let top_p = if m.contains("claude") {
            0.99
        } else if m.contains("gemini") {
            0.95
        } else {
            1.0
        };
        Decoding {
            temperature: 1.0,
            top_p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.temperature) || !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::Config(format!(
                "decoding out of range: temperature {}, top_p {}",
                self.temperature, self.top_p
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegotiationConfig {
    pub issues: Vec<String>,
    /// Display names used in prompts; falls back to the code.
    pub issue_names: BTreeMap<String, String>,
    pub options: BTreeMap<String, Vec<String>>,
    pub favor: FavorTable,
    pub max_rounds: usize,
    pub role_prompts: BTreeMap<Role, String>,
    pub budget: u32,
    pub first_speaker: Role,
    /// Abort the session on malformed submissions or premature acceptance.
    pub strict: bool,
    /// Extra attempts after a failed backend call.
    pub max_retries: usize,
    /// Per-role decoding override; provider defaults otherwise.
    pub decoding: BTreeMap<Role, Decoding>,
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

impl Default for NegotiationConfig {
    fn default() -> Self {
        let issues = strings(&["REF", "SNR", "BNR", "SAP", "BAP"]);
        let issue_names = [
            ("REF", "Refund"),
            ("SNR", "Seller Negative Review"),
            ("BNR", "Buyer Negative Review"),
            ("SAP", "Seller Apology"),
            ("BAP", "Buyer Apology"),
        ]
        .into_iter()
        .map(|(c, n)| (c.to_string(), n.to_string()))
        .collect();
        let review = strings(&["remove", "keep"]);
        let apology = strings(&["apologize", "not apologize"]);
        let options = BTreeMap::from([
            ("REF".to_string(), strings(&["none", "partial", "full"])),
            ("SNR".to_string(), review.clone()),
            ("BNR".to_string(), review),
            ("SAP".to_string(), apology.clone()),
            ("BAP".to_string(), apology),
        ]);
        // the buyer wants money back, the seller's review gone and an
        // apology from the seller; the seller wants the opposite
        let table = |rows: &[(&str, f64, f64)]| -> BTreeMap<String, RoleShare> {
            rows.iter()
                .map(|(o, b, s)| (o.to_string(), RoleShare::new(*b, *s)))
                .collect()
        };
        let favor = BTreeMap::from([
            ("REF".to_string(), table(&[("full", 1.0, 0.0), ("partial", 0.5, 0.5), ("none", 0.0, 1.0)])),
            ("SNR".to_string(), table(&[("remove", 1.0, 0.0), ("keep", 0.0, 1.0)])),
            ("BNR".to_string(), table(&[("remove", 0.0, 1.0), ("keep", 1.0, 0.0)])),
            ("SAP".to_string(), table(&[("apologize", 1.0, 0.0), ("not apologize", 0.0, 1.0)])),
            ("BAP".to_string(), table(&[("apologize", 0.0, 1.0), ("not apologize", 1.0, 0.0)])),
        ]);
        NegotiationConfig {
            issues,
            issue_names,
            options,
            favor,
            max_rounds: 20,
            role_prompts: BTreeMap::from([
                (Role::Buyer, BUYER_TEMPLATE.to_string()),
                (Role::Seller, SELLER_TEMPLATE.to_string()),
            ]),
            budget: 100,
            first_speaker: Role::Buyer,
            strict: false,
            max_retries: 2,
            decoding: BTreeMap::new(),
        }
    }
}

impl NegotiationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.issues.is_empty() {
            return Err(Error::Config("at least one issue is required".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        if self.budget == 0 {
            return Err(Error::Config("importance budget must be positive".into()));
        }
        for (i, code) in self.issues.iter().enumerate() {
            if self.issues[..i].contains(code) {
                return Err(Error::Config(format!("issue `{code}` listed twice")));
            }
            let opts = self
                .options
                .get(code)
                .ok_or_else(|| Error::Config(format!("issue `{code}` has no options")))?;
            if opts.len() < 2 {
                return Err(Error::Config(format!("issue `{code}` needs at least 2 options")));
            }
            let favor = self.favor.get(code);
            for o in opts {
                let share = favor
                    .and_then(|f| f.get(o))
                    .ok_or_else(|| Error::Config(format!("no favor entry for {code}={o}")))?;
                for v in [share.buyer, share.seller] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::Config(format!("favor for {code}={o} outside [0,1]")));
                    }
                }
            }
        }
        for role in Role::BOTH {
            if !self.role_prompts.contains_key(&role) {
                return Err(Error::Config(format!("no prompt template for the {role}")));
            }
        }
        for d in self.decoding.values() {
            d.validate()?;
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: NegotiationConfig =
            serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn issue_name<'a>(&'a self, code: &'a str) -> &'a str {
        self.issue_names.get(code).map(String::as_str).unwrap_or(code)
    }

    /// Canonical spelling of `option` for `issue`, matched case-insensitively.
    pub fn canonical_option(&self, issue: &str, option: &str) -> Option<&str> {
        let wanted = option.trim();
        self.options
            .get(issue)?
            .iter()
            .find(|o| o.eq_ignore_ascii_case(wanted))
            .map(String::as_str)
    }

    pub fn decoding_for(&self, role: Role, model: &str) -> Decoding {
        self.decoding
            .get(&role)
            .copied()
            .unwrap_or_else(|| Decoding::for_model(model))
    }

    /// Fills a role template. Placeholders: `{personality}`, `{role}`,
    /// `{partner}`, `{issues}`, `{importance}`, `{budget}`,
    /// `{submission_example}`, `{max_rounds}`.
    pub fn render_system_prompt(&self, role: Role, personality: &[String], importance: &IssueImportance) -> String {
        let issues: Vec<String> = self
            .issues
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}. {} ({c}): {}", i + 1, self.issue_name(c), self.options[c].join(" | ")))
            .collect();
        let weights: Vec<String> = self
            .issues
            .iter()
            .map(|c| format!("- {} ({c}): {} points", self.issue_name(c), importance.weight(c)))
            .collect();
        let example: BTreeMap<&str, &str> = self
            .issues
            .iter()
            .map(|c| (c.as_str(), self.options[c][0].as_str()))
            .collect();
        let example = serde_json::to_string(&example).expect("string map serializes");
        self.role_prompts[&role]
            .replace("{personality}", &personality.join(", "))
            .replace("{role}", role.title())
            .replace("{partner}", role.other().title())
            .replace("{issues}", &issues.join("\n"))
            .replace("{importance}", &weights.join("\n"))
            .replace("{budget}", &self.budget.to_string())
            .replace("{submission_example}", &example)
            .replace("{max_rounds}", &self.max_rounds.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let c = NegotiationConfig::default();
        c.validate().unwrap();
        assert_eq!(c.issues, ["REF", "SNR", "BNR", "SAP", "BAP"]);
        assert_eq!(c.max_rounds, 20);
        assert_eq!(c.first_speaker, Role::Buyer);
        assert!(!c.strict);
    }

    #[test]
    fn decoding_defaults_by_provider() {
        assert_eq!(Decoding::for_model("gpt-4.1").top_p, 1.0);
        assert_eq!(Decoding::for_model("claude-3-7-sonnet").top_p, 0.99);
        assert_eq!(Decoding::for_model("gemini-2.0-flash").top_p, 0.95);
        assert_eq!(Decoding::for_model("gemini-2.0-flash").temperature, 1.0);
    }

    #[test]
    fn options_match_case_insensitively() {
        let c = NegotiationConfig::default();
        assert_eq!(c.canonical_option("REF", "None"), Some("none"));
        assert_eq!(c.canonical_option("SAP", "Not Apologize"), Some("not apologize"));
        assert_eq!(c.canonical_option("REF", "double"), None);
    }

    #[test]
    fn rejects_incomplete_config() {
        let mut c = NegotiationConfig::default();
        c.options.insert("REF".into(), vec!["full".into()]);
        assert!(c.validate().is_err());
        let mut c = NegotiationConfig::default();
        c.favor.get_mut("SNR").unwrap().remove("keep");
        assert!(c.validate().is_err());
        let mut c = NegotiationConfig::default();
        c.max_rounds = 0;
        assert!(c.validate().is_err());
        assert!(NegotiationConfig::from_json(r#"{"max_rounds": 3, "bogus": 1}"#).is_err());
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let c = NegotiationConfig::from_json(r#"{"max_rounds": 3}"#).unwrap();
        assert_eq!(c.max_rounds, 3);
        assert_eq!(c.issues.len(), 5);
    }

    #[test]
    fn prompt_placeholders_filled() {
        let c = NegotiationConfig::default();
        let imp = IssueImportance::even(100, &c.issues).unwrap();
        let p = c.render_system_prompt(Role::Buyer, &["very bold".into()], &imp);
        assert!(p.contains("very bold"));
        assert!(p.contains("Refund (REF): none | partial | full"));
        assert!(p.contains("(BAP): 20 points"));
        for ph in ["{personality}", "{role}", "{issues}", "{importance}", "{max_rounds}"] {
            assert!(!p.contains(ph), "{ph} left in prompt");
        }
    }
}
