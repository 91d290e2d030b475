//! Regenerates the synthetic fixture set under `fixtures/`:
//! 20 human-like and 20 LLM-like annotated dialogues, a 50-dimension toy
//! embedding store covering their vocabulary, and the golden gap report.
//!
//!     cargo run --example generate_fixtures [out_dir]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dyad_align::analysis::{analyze, AnalysisConfig, Resources};
use dyad_align::corpus::{AnnotationSet, Corpus, Dialogue, Outcome, OutcomeKind, Role, TurnAnnotation};
use dyad_align::irp::IrpLabel;
use dyad_align::lexicon::{tokenize, CategoryLexicon};
use dyad_align::personality::IssueImportance;
use dyad_align::simulator::config::NegotiationConfig;
use dyad_align::simulator::score_deal;
use dyad_align::textdist::EmbeddingStore;

const SEED: u64 = 7;
const DIMENSION: usize = 50;

const SHARED: &[&str] = &[
    "the jersey arrived with a torn sleeve",
    "i paid for a signed jersey and the signature is smudged",
    "the photos in the listing looked different",
    "shipping took three weeks",
    "can you tell me what happened with the package",
    "i packed the item carefully before sending it",
    "the review you left is hurting my shop",
    "your review said i was dishonest",
];

const CALM: &[&str] = &[
    "i understand this is frustrating for both of us",
    "we could agree on a partial refund and both remove our reviews",
    "i think a fair deal is possible if we work together",
    "thank you for explaining your side",
    "i am sorry the item was not what you expected",
    "please consider a partial refund so we can both move on",
    "we both want this settled kindly",
    "i believe we can share the cost of the damage",
];

const HEATED: &[&str] = &[
    "i demand a full refund right now",
    "i will report you to the platform if you refuse",
    "you never answer my messages and always make excuses",
    "this is completely unacceptable and i insist on my money back",
    "i will not remove my review unless you pay everything",
    "you have no right to keep my money",
    "the rules clearly say the seller must refund damaged goods",
    "i will force the platform to ban your account",
];

const CALM_LABELS: &[IrpLabel] = &[
    IrpLabel::Interests,
    IrpLabel::Proposal,
    IrpLabel::Concession,
    IrpLabel::PositiveExpectations,
    IrpLabel::Facts,
];
const HEATED_LABELS: &[IrpLabel] = &[IrpLabel::Power, IrpLabel::Rights, IrpLabel::Facts, IrpLabel::Procedural];

struct Style {
    label: &'static str,
    heat: f64,
    base_anger: f64,
    anger_slope: f64,
}

const HUMAN: Style = Style {
    label: "human-fixture",
    heat: 0.25,
    base_anger: 0.35,
    anger_slope: -0.02,
};

const LLM: Style = Style {
    label: "llm-fixture",
    heat: 0.6,
    base_anger: 0.6,
    anger_slope: -0.04,
};

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    &xs[rng.random_range(0..xs.len())]
}

fn dialogue(style: &Style, i: usize, rng: &mut ChaCha8Rng, config: &NegotiationConfig) -> Dialogue {
    let n = rng.random_range(6..=14);
    let mut texts = Vec::with_capacity(n);
    let mut turns = Vec::with_capacity(n);
    for t in 0..n {
        let heated = rng.random::<f64>() < style.heat;
        let mut text = pick(rng, SHARED).to_string();
        let extra = if heated { pick(rng, HEATED) } else { pick(rng, CALM) };
        text.push_str(". ");
        text.push_str(extra);
        texts.push(text);
        let drift = style.base_anger + style.anger_slope * t as f64 + if heated { 0.2 } else { 0.0 };
        let anger = (drift + rng.random_range(-0.1..0.1)).clamp(0.0, 1.0);
        let labels = if heated { HEATED_LABELS } else { CALM_LABELS };
        let k = rng.random_range(1..=2);
        turns.push(TurnAnnotation {
            anger: (anger * 1000.0).round() / 1000.0,
            irp: (0..k).map(|_| *pick(rng, labels)).collect(),
        });
    }
    let mut d = Dialogue::from_texts(&format!("{}-{i:02}", style.label), Role::Buyer, &texts);
    d.annotations = Some(AnnotationSet {
        dialogue_id: d.id.clone(),
        per_turn: turns,
    });
    let walk = rng.random::<f64>() < style.heat / 3.0;
    d.outcome = Some(if walk {
        Outcome::walked_away()
    } else {
        let submission: BTreeMap<String, String> = config
            .issues
            .iter()
            .map(|issue| (issue.clone(), pick(rng, &config.options[issue]).clone()))
            .collect();
        let even = IssueImportance::even(config.budget, &config.issues).expect("even split");
        let importance = BTreeMap::from([(Role::Buyer, even.clone()), (Role::Seller, even)]);
        let scores = score_deal(&submission, &importance, &config.favor).expect("valid submission");
        Outcome::new(OutcomeKind::Accepted, Some(submission), Some(scores))
    });
    d
}

fn corpus(style: &Style, rng: &mut ChaCha8Rng) -> Corpus {
    let config = NegotiationConfig::default();
    let dialogues = (0..20).map(|i| dialogue(style, i, rng, &config)).collect();
    Corpus::new(style.label, dialogues).expect("fixture corpus is valid")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&out)?;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let human = corpus(&HUMAN, &mut rng);
    let llm = corpus(&LLM, &mut rng);

    let vocab: BTreeSet<String> = [&human, &llm]
        .iter()
        .flat_map(|c| c.dialogues())
        .flat_map(|d| d.turns.iter())
        .flat_map(|u| tokenize(&u.text))
        .collect();
    let mut store = EmbeddingStore::new(DIMENSION)?;
    for token in &vocab {
        let v: Vec<f64> = (0..DIMENSION)
            .map(|_| (rng.random_range(-1.0..1.0f64) * 1e4).round() / 1e4)
            .collect();
        store.insert(token, &v)?;
    }

    std::fs::write(out.join("human.json"), human.to_json_pretty()?)?;
    std::fs::write(out.join("llm.json"), llm.to_json_pretty()?)?;
    let mut emb = Vec::new();
    store.write_text(&mut emb)?;
    std::fs::write(out.join("embeddings.txt"), emb)?;

    // reload from disk so the golden report sees exactly what the files hold
    let store = EmbeddingStore::load(&out.join("embeddings.txt"), None)?;
    let lexicon = CategoryLexicon::demo();
    let resources = Resources {
        lexicon: Some(&lexicon),
        embeddings: Some(&store),
        ..Default::default()
    };
    let report = analyze(&human, &llm, resources, &AnalysisConfig::default(), SEED, 1)?;
    std::fs::write(out.join("golden_report.json"), report.to_json()?)?;
    print!("{}", report.to_table());
    println!("wrote {} tokens of embeddings and fixtures to {}", store.len(), out.display());
    Ok(())
}
