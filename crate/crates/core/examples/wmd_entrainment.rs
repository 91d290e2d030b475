//! Word Mover's Distance between two utterances and the entrainment score
//! of a short dialogue over a toy embedding store.
//!
//!     cargo run --example wmd_entrainment

use dyad_align::corpus::{Dialogue, Role};
use dyad_align::textdist::{dyadic_le, nclid, wmd, EmbeddingStore, EntrainmentOptions, UtteranceBag};

fn main() -> dyad_align::error::Result<()> {
    let store = EmbeddingStore::from_pairs(
        2,
        [
            ("refund", vec![1.0, 0.0]),
            ("money", vec![0.9, 0.2]),
            ("review", vec![0.0, 1.0]),
            ("remove", vec![0.2, 0.8]),
            ("please", vec![0.5, 0.5]),
        ],
    )?;

    let a = UtteranceBag::from_text("Please refund my money", &store);
    let b = UtteranceBag::from_text("Remove the review please", &store);
    println!("tokens {:?} / {:?} (dropped {} out-of-vocabulary)", a.tokens(), b.tokens(), a.oov_count());
    println!("wmd {:.4}", wmd(&a, &b, &store)?);

    let texts: Vec<String> = [
        "refund please",
        "remove the review",
        "money back please",
        "review stays unless refund",
        "remove review and refund",
        "refund money",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let d = Dialogue::from_texts("toy", Role::Buyer, &texts);
    let opts = EntrainmentOptions::default();
    let t = nclid(&d, Role::Buyer, &store, opts)?;
    println!("buyer as anchor: d = {:?}, uclid {:.4}, alpha {:.4}, value {:.4}", t.d, t.uclid, t.alpha, t.value);
    let le = dyadic_le(&d, &store, opts, None)?;
    println!("dyadic {:.4} (buyer {:.4}, seller {:.4})", le.value, le.buyer_as_anchor, le.seller_as_anchor);
    Ok(())
}
