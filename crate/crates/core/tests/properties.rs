mod support;

use proptest::collection::vec;
use proptest::prelude::*;

use dyad_align::alignment::{self, GapOptions, TTestKind};
use dyad_align::corpus::{self, AnnotationSet, Corpus, Dialogue, LoadOptions, Role, SchemaVersion, TurnAnnotation};
use dyad_align::dynamics::{auc_values, dtw, dtw_with, DtwOptions};
use dyad_align::irp::{usage_distribution, IrpLabel};
use dyad_align::prob::smooth_normalize;
use dyad_align::textdist::{nclid, EmbeddingStore, EntrainmentOptions, UtteranceBag, wmd};

fn distribution(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(0.0f64..1.0, dim).prop_filter_map("no mass", |raw| {
        let total: f64 = raw.iter().sum();
        (total > 1e-6).then(|| raw.iter().map(|x| x / total).collect())
    })
}

fn pair(max_dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2..=max_dim).prop_flat_map(|d| (distribution(d), distribution(d)))
}

fn label() -> impl Strategy<Value = IrpLabel> {
    (0..IrpLabel::ALL.len()).prop_map(|i| IrpLabel::ALL[i])
}

fn annotated(id: &str, angers: &[f64], labels: &[Vec<IrpLabel>]) -> Dialogue {
    let texts: Vec<String> = (0..angers.len()).map(|i| format!("turn {i}")).collect();
    let mut d = Dialogue::from_texts(id, Role::Buyer, &texts);
    d.annotations = Some(AnnotationSet {
        dialogue_id: id.into(),
        per_turn: angers
            .iter()
            .zip(labels)
            .map(|(a, l)| TurnAnnotation { anger: *a, irp: l.clone() })
            .collect(),
    });
    d
}

fn corpus_strategy(label_name: &'static str) -> impl Strategy<Value = Corpus> {
    vec((vec(0.0f64..1.0, 4..9), any::<u64>()), 2..5).prop_map(move |dialogues| {
        let ds = dialogues
            .iter()
            .enumerate()
            .map(|(i, (angers, seed))| {
                let labels: Vec<Vec<IrpLabel>> = (0..angers.len())
                    .map(|t| vec![IrpLabel::ALL[((seed >> (t % 16)) as usize + t) % 9]])
                    .collect();
                annotated(&format!("{label_name}{i}"), angers, &labels)
            })
            .collect();
        Corpus::new(label_name, ds).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jsd_symmetric_bounded_and_matches_oracle((p, q) in pair(12)) {
        let pq = alignment::jsd(&p, &q).unwrap();
        let qp = alignment::jsd(&q, &p).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!((pq - support::jsd_kl(&p, &q)).abs() <= 1e-12);
        prop_assert_eq!(alignment::jsd(&p, &p).unwrap(), 0.0);
        let div = alignment::js_divergence(&p, &q).unwrap();
        prop_assert!((div.sqrt() - pq).abs() <= 1e-12);
    }

    #[test]
    fn smoothing_yields_distribution(raw in vec(0.0f64..50.0, 1..12), eps in 0.0f64..0.01) {
        if let Some(p) = smooth_normalize(&raw, eps) {
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
        } else {
            prop_assert!(raw.iter().sum::<f64>() == 0.0 && eps == 0.0);
        }
    }

    #[test]
    fn dtw_symmetric_nonnegative_and_exact(a in vec(0.0f64..1.0, 1..6), b in vec(0.0f64..1.0, 1..6)) {
        let ab = dtw(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, support::dtw_exhaustive(&a, &b));
        prop_assert!((ab - dtw(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(dtw(&a, &a).unwrap(), 0.0);
        let norm = dtw_with(&a, &b, DtwOptions { normalize: true }).unwrap();
        prop_assert!(norm <= ab + 1e-12);
    }

    #[test]
    fn auc_between_extremes(v in vec(0.0f64..1.0, 2..40)) {
        let a = auc_values(&v).unwrap();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(a >= lo - 1e-12 && a <= hi + 1e-12);
    }

    #[test]
    fn auc_constant_exact(c in 0.0f64..1.0, t in 2usize..200) {
        prop_assert_eq!(auc_values(&vec![c; t]).unwrap(), c);
    }

    #[test]
    fn ttest_antisymmetric(a in vec(-5.0f64..5.0, 2..12), b in vec(-5.0f64..5.0, 2..12)) {
        for kind in [TTestKind::Welch, TTestKind::EqualVariance] {
            if let (Ok(x), Ok(y)) = (
                alignment::ttest_independent(&a, &b, kind),
                alignment::ttest_independent(&b, &a, kind),
            ) {
                prop_assert!((x.t + y.t).abs() <= 1e-9 * x.t.abs().max(1.0));
                prop_assert!((x.p - y.p).abs() <= 1e-12);
                prop_assert!((0.0..=1.0).contains(&x.p));
            }
        }
    }

    #[test]
    fn wmd_matches_vertex_enumeration(
        points in vec(vec(-3.0f64..3.0, 2), 6),
        wa in vec(0.05f64..1.0, 1..4),
        wb in vec(0.05f64..1.0, 1..4),
    ) {
        let names: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
        let store = EmbeddingStore::from_pairs(2, names.iter().cloned().zip(points.iter().cloned())).unwrap();
        // b starts at w2 so the two bags can share a token
        let a_pairs: Vec<(&str, f64)> = wa.iter().enumerate().map(|(i, w)| (names[i].as_str(), *w)).collect();
        let b_pairs: Vec<(&str, f64)> = wb.iter().enumerate().map(|(i, w)| (names[2 + i].as_str(), *w)).collect();
        let a = UtteranceBag::from_weights(&a_pairs, &store).unwrap();
        let b = UtteranceBag::from_weights(&b_pairs, &store).unwrap();
        let cost: Vec<Vec<f64>> = a.tokens().iter().map(|x| {
            b.tokens().iter().map(|y| support::euclid(store.get(x).unwrap(), store.get(y).unwrap())).collect()
        }).collect();
        let brute = support::transport_brute_force(a.weights(), b.weights(), &cost);
        let got = wmd(&a, &b, &store).unwrap();
        prop_assert!((got - brute).abs() <= 1e-9, "{} vs {}", got, brute);
    }

    #[test]
    fn entrainment_scale_invariant(
        points in vec(vec(-3.0f64..3.0, 3), 6),
        s in 0.01f64..100.0,
        k in 1usize..4,
    ) {
        let names: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
        let store = EmbeddingStore::from_pairs(3, names.iter().cloned().zip(points.iter().cloned())).unwrap();
        let texts: Vec<String> = vec![
            "w0 w1".into(), "w2".into(), "w3 w0".into(), "w4 w5".into(), "w1".into(), "w5 w2 w2".into(),
        ];
        let d = Dialogue::from_texts("p", Role::Buyer, &texts);
        let opts = EntrainmentOptions { k, ..Default::default() };
        let base = nclid(&d, Role::Buyer, &store, opts).unwrap();
        let scaled = nclid(&d, Role::Buyer, &store.scaled(s), opts).unwrap();
        prop_assert!((base.value - scaled.value).abs() <= 1e-9);
    }

    #[test]
    fn irp_usage_ignores_segment_order(mut labels in vec(label(), 1..20), seed in any::<u64>()) {
        let d1 = annotated("a", &[0.0], &[labels.clone()]);
        let n = labels.len();
        labels.rotate_left((seed as usize) % n);
        labels.reverse();
        let d2 = annotated("a", &[0.0], &[labels]);
        prop_assert_eq!(usage_distribution(&d1).unwrap(), usage_distribution(&d2).unwrap());
    }

    #[test]
    fn corpus_json_round_trip(c in corpus_strategy("rt")) {
        let json = c.to_json_pretty().unwrap();
        let back = corpus::parse_corpus(json.as_bytes(), SchemaVersion::V1, LoadOptions::default()).unwrap();
        prop_assert_eq!(back.corpus, c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaps_ignore_dialogue_order(h in corpus_strategy("h"), l in corpus_strategy("l"), rot in 0usize..4) {
        let opts = GapOptions::default();
        let mut hd = h.dialogues().to_vec();
        let r = rot % hd.len();
        hd.rotate_left(r);
        hd.reverse();
        let h2 = Corpus::new("h", hd).unwrap();
        for (x, y) in [
            (alignment::atg(&h, &l, &opts).unwrap(), alignment::atg(&h2, &l, &opts).unwrap()),
            (alignment::amg(&h, &l, &opts).unwrap(), alignment::amg(&h2, &l, &opts).unwrap()),
            (alignment::sbg(&h, &l, &opts).unwrap(), alignment::sbg(&h2, &l, &opts).unwrap()),
        ] {
            prop_assert!((x.value - y.value).abs() <= 1e-12);
            prop_assert!((x.human_baseline - y.human_baseline).abs() <= 1e-12);
        }
    }
}
