//! Samples Big Five profiles and renders them as adjective phrases.
//!
//!     cargo run --example personality_prompt

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dyad_align::personality::{render_prompt, sample_importance, sample_profile, AdjectiveBank, TargetDistribution};
use dyad_align::simulator::NegotiationConfig;

fn main() -> dyad_align::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bank = AdjectiveBank::default();
    let target = TargetDistribution::uniform();
    let config = NegotiationConfig::default();
    for _ in 0..3 {
        let profile = sample_profile(&target, &mut rng);
        let states: Vec<String> = profile.iter().map(|(t, s)| format!("{}{}", t.code(), s.symbol())).collect();
        println!("{}", states.join(" "));
        println!("  {}", render_prompt(&profile, &bank, &mut rng)?.join(", "));
        let importance = sample_importance(&mut rng, config.budget, &config.issues)?;
        println!("  importance {:?}", importance.weights);
    }
    Ok(())
}
