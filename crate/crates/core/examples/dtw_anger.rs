//! Anger trajectories of an annotated dialogue, their DTW distance and AUC.
//!
//!     cargo run --example dtw_anger

use dyad_align::corpus::{AnnotationSet, Dialogue, Role, TurnAnnotation};
use dyad_align::dynamics::{self, auc, dtw, dtw_with, DtwOptions, TrajectoryMode};

fn annotated(id: &str, angers: &[f64]) -> Dialogue {
    let texts: Vec<String> = (0..angers.len()).map(|i| format!("turn {i}")).collect();
    let mut d = Dialogue::from_texts(id, Role::Buyer, &texts);
    d.annotations = Some(AnnotationSet {
        dialogue_id: id.into(),
        per_turn: angers.iter().map(|a| TurnAnnotation { anger: *a, irp: vec![] }).collect(),
    });
    d
}

fn main() -> dyad_align::error::Result<()> {
    let heated = annotated("heated", &[0.93, 0.98, 0.89, 0.90, 0.30, 0.15, 0.87, 0.96]);
    let calm = annotated("calm", &[0.20, 0.35, 0.30, 0.10, 0.05, 0.05]);

    let a = dynamics::round_trajectory(&heated)?;
    let b = dynamics::round_trajectory(&calm)?;
    println!("heated rounds {:?}", a.values());
    println!("calm rounds   {:?}", b.values());
    println!("dtw {:.3}, normalized {:.3}", dtw(a.values(), b.values())?, dtw_with(a.values(), b.values(), DtwOptions { normalize: true })?);
    println!("auc heated {:.3}, calm {:.3}", auc(&a)?, auc(&b)?);

    let per_speaker = dynamics::trajectory(&heated, TrajectoryMode::Speaker)?;
    let mut csv = Vec::new();
    dynamics::write_csv(&per_speaker, &mut csv).expect("writing to memory");
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}
