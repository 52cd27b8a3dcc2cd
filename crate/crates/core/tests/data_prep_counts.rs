use std::collections::BTreeMap;

use unirep_core::data_prep::{
    balanced_sample, filter_and_merge, make_entailment_examples, make_paraphrase_negatives,
    ExampleLabel, NegativePool, ParaphraseRecord, Relation,
};

const SIX: [Relation; 6] = [
    Relation::Equivalence,
    Relation::ForwardEntailment,
    Relation::ReverseEntailment,
    Relation::Independent,
    Relation::Exclusion,
    Relation::OtherRelated,
];

fn synthetic(per_label: usize) -> Vec<ParaphraseRecord> {
    SIX.iter()
        .flat_map(|&l| {
            (0..per_label).map(move |i| ParaphraseRecord::new(format!("{l} src {i}"), format!("{l} tgt {i}"), l).unwrap())
        })
        .collect()
}

fn histogram(records: &[ParaphraseRecord]) -> BTreeMap<Relation, usize> {
    let mut h = BTreeMap::new();
    for r in records {
        *h.entry(r.label).or_default() += 1;
    }
    h
}

#[test]
fn six_labels_by_one_hundred() {
    let merged = filter_and_merge(synthetic(100));
    assert_eq!(merged.len(), 400);
    assert_eq!(
        histogram(&merged),
        BTreeMap::from([(Relation::Equivalence, 100), (Relation::Entailment, 200), (Relation::Independent, 100)])
    );

    let sample = balanced_sample(&merged, 50, 2024);
    assert_eq!(sample.records.len(), 150);
    assert!(sample.shortfalls.is_empty());
    assert!(histogram(&sample.records).values().all(|&n| n == 50));

    let ex = make_paraphrase_negatives(&sample.records, 3, 2024, NegativePool::Targets).unwrap();
    let positives = ex.iter().filter(|e| e.label == ExampleLabel::Positive).count();
    let negatives = ex.iter().filter(|e| e.label == ExampleLabel::Negative).count();
    assert_eq!((positives, negatives), (150, 450));
    for group in ex.chunks(4) {
        assert_eq!(group[0].label, ExampleLabel::Positive);
        let mut partners: Vec<&str> = group[1..].iter().map(|e| e.seq_b.as_str()).collect();
        partners.sort_unstable();
        partners.dedup();
        assert_eq!(partners.len(), 3);
        for n in &group[1..] {
            assert_ne!(n.seq_b, group[0].seq_b);
            assert_ne!(n.seq_b, n.seq_a);
        }
    }

    assert_eq!(make_entailment_examples(&sample.records).unwrap().len(), 150);
}

#[test]
fn full_scale_count_arithmetic() {
    let per_label = 343_000usize;
    let total = per_label * Relation::MERGED.len();
    assert_eq!(total, 1_029_000);
    // reported as "1.03 million"
    assert_eq!((total as f64 / 1e6 * 100.0).round() / 100.0, 1.03);
}

#[test]
fn sampling_is_seed_deterministic_and_seed_sensitive() {
    let merged = filter_and_merge(synthetic(40));
    let a = balanced_sample(&merged, 10, 1);
    assert_eq!(a, balanced_sample(&merged, 10, 1));
    assert_ne!(a.records, balanced_sample(&merged, 10, 2).records);
}
