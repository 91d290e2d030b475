//! Jensen-Shannon distance between two feature distributions.
//!
//!     cargo run --example jsd

use dyad_align::alignment::{jsd, jsd_with, JsdMode};

fn main() -> dyad_align::error::Result<()> {
    let p = [1.0, 0.0];
    let q = [0.5, 0.5];
    println!("distance   {:.4}", jsd(&p, &q)?);
    println!("divergence {:.4}", jsd_with(&p, &q, JsdMode::Divergence)?);
    println!("disjoint   {:.4}", jsd(&[1.0, 0.0], &[0.0, 1.0])?);

    // mismatched supports are rejected rather than padded
    if let Err(e) = jsd(&[1.0], &[0.5, 0.5]) {
        println!("error: {e}");
    }
    Ok(())
}
