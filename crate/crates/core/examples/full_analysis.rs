//! Runs every gap metric on the bundled fixture corpora and prints the
//! single-report table and a merged comparison table.
//!
//!     cargo run --release --example full_analysis

use std::path::Path;

use dyad_align::analysis::{analyze, merge_reports, AnalysisConfig, Resources};
use dyad_align::corpus::{load_corpus, LoadOptions, SchemaVersion};
use dyad_align::dynamics::TrajectoryMode;
use dyad_align::lexicon::CategoryLexicon;
use dyad_align::textdist::EmbeddingStore;

fn main() -> dyad_align::error::Result<()> {
    let fx = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let human = load_corpus(&fx.join("human.json"), SchemaVersion::V1, LoadOptions::default())?.corpus;
    let llm = load_corpus(&fx.join("llm.json"), SchemaVersion::V1, LoadOptions::default())?.corpus;
    let store = EmbeddingStore::load(&fx.join("embeddings.txt"), None)?;
    let lexicon = CategoryLexicon::demo();
    let res = Resources {
        lexicon: Some(&lexicon),
        embeddings: Some(&store),
        ..Default::default()
    };

    let config = AnalysisConfig::default();
    let report = analyze(&human, &llm, res, &config, 7, 0)?;
    print!("{}", report.to_table());
    for note in &report.notes {
        println!("note: {note}");
    }

    // a second "model": the human corpus against itself
    let self_report = analyze(&human, &human.clone().with_label("human-copy"), res, &config, 7, 0)?;
    println!();
    print!("{}", merge_reports(&[report, self_report])?);

    let speaker = AnalysisConfig {
        trajectory_mode: TrajectoryMode::Speaker,
        ..Default::default()
    };
    let r = analyze(&human, &llm, res, &speaker, 7, 0)?;
    println!("\nspeaker-level trajectories:");
    print!("{}", r.to_table());
    Ok(())
}
