//! Category-lexicon feature distributions and the linguistic gap between
//! two tiny corpora.
//!
//!     cargo run --example lexicon_features

use dyad_align::alignment::{lg, GapOptions};
use dyad_align::corpus::{Corpus, Dialogue, Role};
use dyad_align::lexicon::{feature_distribution, CategoryLexicon, FeatureGroup, FeatureOptions, GroupBinding};

fn dialogue(id: &str, texts: &[&str]) -> Dialogue {
    let t: Vec<String> = texts.iter().map(|s| s.to_string()).collect();
    Dialogue::from_texts(id, Role::Buyer, &t)
}

fn main() -> dyad_align::error::Result<()> {
    let lexicon = CategoryLexicon::demo();
    let binding = GroupBinding::default();
    let d = dialogue("one", &["I think we can agree, please help me", "I demand my money back, never again"]);
    for group in [FeatureGroup::Irp, FeatureGroup::Dispute] {
        let v = feature_distribution(&d, &lexicon, &binding, group, FeatureOptions::default())?;
        let cells: Vec<String> = v.values.iter().map(|(f, p)| format!("{f}={p:.3}")).collect();
        println!("{group:?}: {}", cells.join(" "));
    }

    let human = Corpus::new(
        "human",
        vec![
            dialogue("h1", &["we both want this fixed", "I understand, thank you"]),
            dialogue("h2", &["I think a partial refund is fair", "please consider it"]),
            dialogue("h3", &["I insist on a refund", "we can agree to that"]),
        ],
    )?;
    let llm = Corpus::new(
        "llm",
        vec![
            dialogue("l1", &["I demand a full refund now", "never, I will report you"]),
            dialogue("l2", &["you always lie", "I insist you pay"]),
        ],
    )?;
    let g = lg(&human, &llm, FeatureGroup::Irp, &lexicon, &binding, &GapOptions::default())?;
    println!("LG-IRP {:.3} (within-human {:.3}, cross {:.3}) p={:?}", g.value, g.human_baseline, g.llm_mean, g.p_value);
    Ok(())
}
