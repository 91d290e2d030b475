//! Builds the annotation prompt for an external IRP labeler and parses a
//! canned reply back into per-turn labels.
//!
//!     cargo run --example irp_prompt

use dyad_align::corpus::{Dialogue, Role};
use dyad_align::irp::{build_annotation_prompt, parse_annotation_response, Taxonomy};

fn main() -> dyad_align::error::Result<()> {
    let texts: Vec<String> = ["I want a full refund.", "The photos clearly showed the stain."]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let d = Dialogue::from_texts("demo", Role::Buyer, &texts);
    let prompt = build_annotation_prompt(&d, &Taxonomy::default(), &[])?;
    println!("{prompt}");

    let reply = r#"[{"id": "u1", "segments": [{"text": "I want a full refund.", "label": "Proposal"}]},
                    {"id": "u2", "segments": [{"text": "The photos clearly showed the stain.", "label": "Facts"}]}]"#;
    for (i, labels) in parse_annotation_response(reply, d.turns.len())?.iter().enumerate() {
        println!("u{}: {labels:?}", i + 1);
    }
    Ok(())
}
