//! Replays a scripted negotiation through the simulator and prints the
//! outcome, then runs a small batch.
//!
//!     cargo run --example simulate_mock

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dyad_align::corpus::{descriptive_stats, Role};
use dyad_align::personality::{sample_importance, sample_profile, AdjectiveBank, TargetDistribution};
use dyad_align::simulator::{run_session, simulate_batch, AgentProfile, BackendFactory, NegotiationConfig, ScriptedFactory};

fn main() -> dyad_align::error::Result<()> {
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/replay_script.json");
    let factory = ScriptedFactory::load(&script)?;
    let config = NegotiationConfig::default();
    let bank = AdjectiveBank::default();
    let target = TargetDistribution::uniform();

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut agents = BTreeMap::new();
    for role in Role::BOTH {
        let personality = sample_profile(&target, &mut rng);
        let importance = sample_importance(&mut rng, config.budget, &config.issues)?;
        agents.insert(role, AgentProfile { personality, importance });
    }
    let buyer = factory.create(0, Role::Buyer)?;
    let seller = factory.create(0, Role::Seller)?;
    let d = run_session("replay", &config, &bank, buyer.as_ref(), seller.as_ref(), &agents, &mut rng)?;
    for u in &d.turns {
        println!("[{}] {}: {}", u.round, u.speaker, u.text);
    }
    let o = d.outcome.as_ref().expect("sessions always record an outcome");
    println!("outcome {:?}, deal {:?}, scores {:?}", o.kind, o.submission, o.deal_score);

    let batch = simulate_batch(&config, &factory, &bank, &target, 4, 42)?;
    println!("{:?}", descriptive_stats(&batch.corpus)?);
    Ok(())
}
