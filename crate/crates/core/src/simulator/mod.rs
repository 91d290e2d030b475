//! Turn-by-turn buyer/seller negotiation over pluggable chat backends.
//!
//! A session alternates speakers starting with the configured first speaker.
//! It ends when a party accepts the other's standing submission, when either
//! party walks away, or after `max_rounds` rounds.

pub mod action;
pub mod backend;
pub mod config;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use action::{AgentAction, Submission, parse_action};
pub use backend::{BackendFactory, ChatBackend, ChatMessage, ChatRequest, ChatRole, ScriptedFactory, SessionScript};
pub use config::{Decoding, FavorTable, NegotiationConfig, RoleShare};

use crate::corpus::{Corpus, Dialogue, Outcome, OutcomeKind, Role};
use crate::error::{Error, Result};
use crate::personality::{
    AdjectiveBank, IssueImportance, PersonalityProfile, TargetDistribution, render_prompt, sample_importance,
    sample_profile,
};

/// Sum over issues of `weight(role, issue) * favor(issue, option, role)`.
pub fn score_deal(
    submission: &Submission,
    importance: &BTreeMap<Role, IssueImportance>,
    favor: &FavorTable,
) -> Result<BTreeMap<Role, f64>> {
    let mut scores = BTreeMap::new();
    for role in Role::BOTH {
        let weights = importance
            .get(&role)
            .ok_or_else(|| Error::Config(format!("no issue importance for the {role}")))?;
        let mut total = 0.0;
        for (issue, option) in submission {
            let share = favor
                .get(issue)
                .and_then(|f| f.get(option))
                .ok_or_else(|| Error::Config(format!("missing favor entry for {issue}={option}")))?;
            total += f64::from(weights.weight(issue)) * share.of(role);
        }
        scores.insert(role, total);
    }
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub personality: PersonalityProfile,
    pub importance: IssueImportance,
}

fn call_with_retries(
    backend: &dyn ChatBackend,
    request: &ChatRequest,
    retries: usize,
    attempts_used: &mut usize,
) -> Result<String> {
    let mut last = None;
    for _ in 0..=retries {
        *attempts_used += 1;
        match backend.complete(request) {
            Ok(text) if !text.trim().is_empty() => return Ok(text),
            Ok(_) => last = Some(Error::Backend("empty reply".into())),
            Err(e) => {
                log::warn!("{}: {e}", backend.model());
                last = Some(e);
            }
        }
    }
    Err(Error::Backend(format!(
        "{} failed after {} attempt(s): {}",
        backend.model(),
        retries + 1,
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// Runs one negotiation. `rng` drives the adjective draws of the
/// personality prompts.
pub fn run_session<R: Rng + ?Sized>(
    id: &str,
    config: &NegotiationConfig,
    bank: &AdjectiveBank,
    buyer: &dyn ChatBackend,
    seller: &dyn ChatBackend,
    agents: &BTreeMap<Role, AgentProfile>,
    rng: &mut R,
) -> Result<Dialogue> {
    config.validate()?;
    let backend = |r: Role| -> &dyn ChatBackend {
        match r {
            Role::Buyer => buyer,
            Role::Seller => seller,
        }
    };
    let mut prompts = BTreeMap::new();
    let mut phrases = BTreeMap::new();
    for role in Role::BOTH {
        let agent = agents
            .get(&role)
            .ok_or_else(|| Error::Config(format!("no profile for the {role}")))?;
        let p = render_prompt(&agent.personality, bank, rng)?;
        prompts.insert(role, config.render_system_prompt(role, &p, &agent.importance));
        phrases.insert(role, p);
    }

    let mut turns: Vec<(Role, String)> = Vec::new();
    let mut standing: Option<(Role, Submission)> = None;
    let mut warnings: Vec<String> = Vec::new();
    let mut attempts = 0usize;
    let mut speaker = config.first_speaker;
    let mut outcome = None;

    while turns.len() < 2 * config.max_rounds {
        let history = turns
            .iter()
            .map(|(r, text)| ChatMessage {
                role: if *r == speaker { ChatRole::Assistant } else { ChatRole::User },
                text: text.clone(),
            })
            .collect();
        let b = backend(speaker);
        let request = ChatRequest {
            model: b.model().to_string(),
            system_prompt: prompts[&speaker].clone(),
            history,
            decoding: config.decoding_for(speaker, b.model()),
        };
        let reply = call_with_retries(b, &request, config.max_retries, &mut attempts)
            .map_err(|e| Error::Backend(format!("session {id}, {speaker}: {e}")))?;
        let reply = reply.trim().to_string();
        let turn = turns.len();
        let action = match parse_action(&reply, config) {
            Ok(a) => a,
            Err(e) if config.strict => return Err(Error::Protocol(format!("session {id}, turn {turn}: {e}"))),
            Err(e) => {
                log::warn!("session {id}, turn {turn}: {e}; kept as a message");
                warnings.push(format!("turn {turn}: {e}"));
                AgentAction::Message { text: reply.clone() }
            }
        };
        turns.push((speaker, reply));
        match action {
            AgentAction::Message { .. } => {}
            AgentAction::Submission { bindings, .. } => standing = Some((speaker, bindings)),
            AgentAction::AcceptDeal => match standing.take() {
                Some((proposer, deal)) if proposer != speaker => {
                    outcome = Some(deal);
                    break;
                }
                other => {
                    let e = "ACCEPT-DEAL without a standing submission from the other party";
                    if config.strict {
                        return Err(Error::Protocol(format!("session {id}, turn {turn}: {e}")));
                    }
                    log::warn!("session {id}, turn {turn}: {e}");
                    warnings.push(format!("turn {turn}: {e}"));
                    standing = other;
                }
            },
            AgentAction::WalkAway => break,
        }
        speaker = speaker.other();
    }

    let walked = turns.last().is_some_and(|(_, t)| t == action::WALK_AWAY_TOKEN) && outcome.is_none();
    let importance: BTreeMap<Role, IssueImportance> =
        agents.iter().map(|(r, a)| (*r, a.importance.clone())).collect();
    let outcome = match outcome {
        Some(deal) => {
            let scores = score_deal(&deal, &importance, &config.favor)?;
            Outcome::new(OutcomeKind::Accepted, Some(deal), Some(scores))
        }
        None if walked => Outcome::walked_away(),
        None => Outcome::new(OutcomeKind::Exhausted, None, None),
    };

    let texts: Vec<String> = turns.iter().map(|(_, t)| t.clone()).collect();
    let mut dialogue = Dialogue::from_texts(id, config.first_speaker, &texts);
    dialogue.personality = Some(agents.iter().map(|(r, a)| (*r, a.personality.clone())).collect());
    dialogue.importance = Some(importance);
    dialogue.outcome = Some(outcome);
    let models: BTreeMap<&str, &str> = Role::BOTH.iter().map(|r| (r.as_str(), backend(*r).model())).collect();
    let decoding: BTreeMap<&str, Decoding> = Role::BOTH
        .iter()
        .map(|r| (r.as_str(), config.decoding_for(*r, backend(*r).model())))
        .collect();
    let phrases: BTreeMap<&str, &Vec<String>> = phrases.iter().map(|(r, p)| (r.as_str(), p)).collect();
    dialogue.metadata.insert("models".into(), json!(models));
    dialogue.metadata.insert("decoding".into(), json!(decoding));
    dialogue.metadata.insert("personality_prompt".into(), json!(phrases));
    dialogue.metadata.insert("max_rounds".into(), json!(config.max_rounds));
    dialogue.metadata.insert("backend_calls".into(), json!(attempts));
    if !warnings.is_empty() {
        dialogue.metadata.insert("protocol_warnings".into(), json!(warnings));
    }
    dialogue.validate()?;
    Ok(dialogue)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionFailure {
    pub session: usize,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub corpus: Corpus,
    pub failures: Vec<SessionFailure>,
}

/// Session `i` draws from ChaCha stream `i` of the master seed, so every
/// session is reproducible on its own and independent of scheduling.
pub fn session_rng(seed: u64, session: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(session as u64);
    rng
}

/// Runs `n` independent sessions (in parallel) with freshly sampled
/// profiles and importances. Failed sessions are excluded and listed.
pub fn simulate_batch(
    config: &NegotiationConfig,
    factory: &dyn BackendFactory,
    bank: &AdjectiveBank,
    target: &TargetDistribution,
    n: usize,
    seed: u64,
) -> Result<BatchResult> {
    if n == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    config.validate()?;
    let name = factory.name().to_string();
    let run = |i: usize| -> Result<Dialogue> {
        let mut rng = session_rng(seed, i);
        let mut agents = BTreeMap::new();
        for role in Role::BOTH {
            let personality = sample_profile(target, &mut rng);
            let importance = sample_importance(&mut rng, config.budget, &config.issues)?;
            agents.insert(role, AgentProfile { personality, importance });
        }
        let buyer = factory.create(i, Role::Buyer)?;
        let seller = factory.create(i, Role::Seller)?;
        let id = format!("{name}-{i:04}");
        let mut d = run_session(&id, config, bank, buyer.as_ref(), seller.as_ref(), &agents, &mut rng)?;
        d.metadata.insert("seed".into(), json!({"master": seed, "stream": i}));
        Ok(d)
    };
    let results: Vec<Result<Dialogue>> = (0..n).into_par_iter().map(run).collect();
    let mut dialogues = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(d) => dialogues.push(d),
            Err(e @ (Error::Backend(_) | Error::Protocol(_))) => {
                log::warn!("session {i} failed: {e}");
                failures.push(SessionFailure {
                    session: i,
                    error: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    if dialogues.is_empty() {
        return Err(Error::Backend(format!("all {n} sessions failed")));
    }
    Ok(BatchResult {
        corpus: Corpus::new(name, dialogues)?,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::descriptive_stats;
    use crate::personality::{Level, Polarity, TraitSpec};

    fn agents(config: &NegotiationConfig) -> BTreeMap<Role, AgentProfile> {
        let spec = TraitSpec {
            polarity: Polarity::Positive,
            level: Level::Medium,
        };
        Role::BOTH
            .iter()
            .map(|r| {
                (
                    *r,
                    AgentProfile {
                        personality: PersonalityProfile::uniform(spec),
                        importance: IssueImportance::even(config.budget, &config.issues).unwrap(),
                    },
                )
            })
            .collect()
    }

    fn run(script: SessionScript, config: &NegotiationConfig) -> Result<Dialogue> {
        let f = ScriptedFactory::new("mock", vec![script]).unwrap();
        let b = f.create(0, Role::Buyer).unwrap();
        let s = f.create(0, Role::Seller).unwrap();
        let mut rng = session_rng(1, 0);
        run_session("t", config, &AdjectiveBank::default(), b.as_ref(), s.as_ref(), &agents(config), &mut rng)
    }

    const DEAL: &str = r#"SUBMISSION: {"REF": "full", "SNR": "remove", "BNR": "keep", "SAP": "apologize", "BAP": "not apologize"}"#;

    #[test]
    fn score_single_issue_extremes() {
        let mut imp = BTreeMap::new();
        imp.insert(Role::Buyer, IssueImportance { weights: [("REF".to_string(), 100)].into() });
        imp.insert(Role::Seller, IssueImportance { weights: [("REF".to_string(), 100)].into() });
        let favor = NegotiationConfig::default().favor;
        let sub: Submission = [("REF".to_string(), "full".to_string())].into();
        let s = score_deal(&sub, &imp, &favor).unwrap();
        assert_eq!((s[&Role::Buyer], s[&Role::Seller]), (100.0, 0.0));
        let bad: Submission = [("REF".to_string(), "double".to_string())].into();
        assert!(score_deal(&bad, &imp, &favor).is_err());
    }

    #[test]
    fn immediate_walk_away() {
        let d = run(SessionScript::from_replies(&["I want a refund."], &["WALK-AWAY"]), &NegotiationConfig::default()).unwrap();
        assert_eq!(d.turns.len(), 2);
        assert_eq!(d.outcome.unwrap().kind, OutcomeKind::WalkedAway);
    }

    #[test]
    fn exhausted_after_max_rounds() {
        let config = NegotiationConfig {
            max_rounds: 3,
            ..Default::default()
        };
        let d = run(SessionScript::from_replies(&["a", "b", "c", "d"], &["e", "f", "g", "h"]), &config).unwrap();
        assert_eq!(d.turns.len(), 6);
        assert_eq!(d.rounds(), 3);
        assert_eq!(d.outcome.unwrap().kind, OutcomeKind::Exhausted);
    }

    #[test]
    fn accepted_deal_is_scored() {
        let d = run(SessionScript::from_replies(&[DEAL], &["ACCEPT-DEAL"]), &NegotiationConfig::default()).unwrap();
        let o = d.outcome.unwrap();
        assert_eq!(o.kind, OutcomeKind::Accepted);
        // every binding in DEAL favors the buyer
        assert_eq!(o.deal_score.as_ref().unwrap()[&Role::Buyer], 100.0);
        assert_eq!(o.deal_score.as_ref().unwrap()[&Role::Seller], 0.0);
        assert_eq!(o.score_gap, Some(100.0));
    }

    #[test]
    fn premature_accept_lenient_and_strict() {
        let script = SessionScript::from_replies(&["ACCEPT-DEAL", "WALK-AWAY"], &["no"]);
        let d = run(script.clone(), &NegotiationConfig::default()).unwrap();
        assert_eq!(d.outcome.unwrap().kind, OutcomeKind::WalkedAway);
        assert!(d.metadata.contains_key("protocol_warnings"));
        let strict = NegotiationConfig {
            strict: true,
            ..Default::default()
        };
        assert!(matches!(run(script, &strict), Err(Error::Protocol(_))));
    }

    #[test]
    fn own_submission_cannot_be_self_accepted() {
        let script = SessionScript::from_replies(&[DEAL], &["hmm", "ACCEPT-DEAL"]);
        let mut script = script;
        script.buyer.push(backend::ScriptEntry::Reply("ACCEPT-DEAL".into()));
        let d = run(script, &NegotiationConfig::default()).unwrap();
        // buyer's ACCEPT-DEAL at turn 2 refers to its own deal; seller accepts at turn 3
        assert_eq!(d.turns.len(), 4);
        assert_eq!(d.outcome.unwrap().kind, OutcomeKind::Accepted);
    }

    #[test]
    fn transport_failures_retried_then_fatal() {
        let flaky = SessionScript {
            buyer: vec![
                backend::ScriptEntry::Failure { error: "timeout".into() },
                backend::ScriptEntry::Reply("hello".into()),
            ],
            seller: vec![backend::ScriptEntry::Reply("WALK-AWAY".into())],
        };
        let d = run(flaky, &NegotiationConfig::default()).unwrap();
        assert_eq!(d.metadata["backend_calls"], json!(3));
        let dead = SessionScript {
            buyer: vec![backend::ScriptEntry::Failure { error: "down".into() }; 3],
            seller: vec![],
        };
        assert!(matches!(run(dead, &NegotiationConfig::default()), Err(Error::Backend(_))));
    }

    #[test]
    fn malformed_submission_degrades_to_message() {
        let d = run(
            SessionScript::from_replies(&["SUBMISSION: {\"REF\": \"full\"}"], &["ACCEPT-DEAL", "WALK-AWAY"]),
            &NegotiationConfig {
                max_rounds: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(d.outcome.unwrap().kind, OutcomeKind::Exhausted);
    }

    #[test]
    fn batch_counts_walkaways_and_is_reproducible() {
        let sessions: Vec<SessionScript> = (0..10)
            .map(|i| {
                if i == 3 || i == 7 {
                    SessionScript::from_replies(&["refund now"], &["WALK-AWAY"])
                } else {
                    SessionScript::from_replies(&[DEAL], &["ACCEPT-DEAL"])
                }
            })
            .collect();
        let f = ScriptedFactory::new("mock", sessions).unwrap();
        let cfg = NegotiationConfig::default();
        let bank = AdjectiveBank::default();
        let target = TargetDistribution::uniform();
        let a = simulate_batch(&cfg, &f, &bank, &target, 10, 7).unwrap();
        assert!(a.failures.is_empty());
        assert_eq!(descriptive_stats(&a.corpus).unwrap().walkaway_ratio, 0.2);
        let b = simulate_batch(&cfg, &f, &bank, &target, 10, 7).unwrap();
        assert_eq!(a.corpus.to_json_pretty().unwrap(), b.corpus.to_json_pretty().unwrap());
        let c = simulate_batch(&cfg, &f, &bank, &target, 10, 8).unwrap();
        assert_ne!(a.corpus.to_json_pretty().unwrap(), c.corpus.to_json_pretty().unwrap());
    }

    #[test]
    fn batch_reports_failures() {
        let f = ScriptedFactory::new(
            "mock",
            vec![
                SessionScript::from_replies(&["hi"], &["WALK-AWAY"]),
                SessionScript::default(),
            ],
        )
        .unwrap();
        let r = simulate_batch(
            &NegotiationConfig::default(),
            &f,
            &AdjectiveBank::default(),
            &TargetDistribution::uniform(),
            4,
            1,
        )
        .unwrap();
        assert_eq!(r.corpus.len(), 2);
        assert_eq!(r.failures.iter().map(|f| f.session).collect::<Vec<_>>(), [1, 3]);
    }
}
