use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::provider::SEQ_PREFIX;
use super::AnalogyDataset;
use crate::composer::{Tokenizer, WhitespaceTokenizer};

/// Size of one category: distinct `(a, b)` pairs, questions, candidates per
/// question, and mean token count over every item (a, b, c and candidates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub category: String,
    pub pairs: usize,
    pub questions: usize,
    pub candidates: usize,
    /// `None` when items are sequence-table references with no text.
    pub mean_tokens: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub level: super::Level,
    pub categories: Vec<CategoryStats>,
    pub total_pairs: usize,
    pub total_questions: usize,
}

pub fn dataset_stats(ds: &AnalogyDataset) -> DatasetStats {
    let categories: Vec<CategoryStats> = ds
        .categories()
        .map(|(name, qs)| {
            let pairs: HashSet<(&str, &str)> =
                qs.iter().map(|q| (q.a.as_str(), q.b.as_str())).collect();
            let items = qs.iter().flat_map(|q| {
                [&q.a, &q.b, &q.c]
                    .into_iter()
                    .chain(q.candidates.iter())
                    .map(String::as_str)
            });
            let mut tokens = 0usize;
            let mut count = 0usize;
            let mut textual = true;
            for item in items {
                if item.starts_with(SEQ_PREFIX) {
                    textual = false;
                    break;
                }
                tokens += WhitespaceTokenizer.tokens(item).len();
                count += 1;
            }
            CategoryStats {
                category: name.to_string(),
                pairs: pairs.len(),
                questions: qs.len(),
                candidates: ds.candidate_count(name).unwrap_or(0),
                mean_tokens: (textual && count > 0).then(|| tokens as f64 / count as f64),
            }
        })
        .collect();
    DatasetStats {
        level: ds.level(),
        total_pairs: categories.iter().map(|c| c.pairs).sum(),
        total_questions: categories.iter().map(|c| c.questions).sum(),
        categories,
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::question;
    use super::super::{AnalogyQuestion, Level};
    use super::*;

    #[test]
    fn one_pair_two_questions() {
        let ds = AnalogyDataset::from_questions([
            question("1", "x", ["a", "b", "c"], &["d", "e"], 0),
            question("2", "x", ["a", "b", "f"], &["g", "e"], 0),
        ])
        .unwrap();
        let s = dataset_stats(&ds);
        let c = &s.categories[0];
        assert_eq!((c.pairs, c.questions, c.candidates), (1, 2, 2));
        assert_eq!(c.mean_tokens, Some(1.0));
    }

    /// 23 capital/country pairs, every ordered pair of distinct pairs.
    #[test]
    fn capital_common_shape() {
        let mut qs = Vec::new();
        for i in 0..23 {
            for j in 0..23 {
                if i == j {
                    continue;
                }
                let others: Vec<String> = (0..23)
                    .filter(|&k| k != i && k != j)
                    .take(4)
                    .map(|k| format!("country{k}"))
                    .collect();
                let mut cands = vec![format!("country{j}")];
                cands.extend(others);
                qs.push(AnalogyQuestion {
                    id: format!("{i}-{j}"),
                    level: Level::Word,
                    category: "capital-common".into(),
                    a: format!("capital{i}"),
                    b: format!("country{i}"),
                    c: format!("capital{j}"),
                    candidates: cands,
                    gold: 0,
                    word_parent: None,
                    degenerate: false,
                });
            }
        }
        let s = dataset_stats(&AnalogyDataset::from_questions(qs).unwrap());
        let c = &s.categories[0];
        assert_eq!((c.pairs, c.questions, c.candidates), (23, 506, 5));
    }

    #[test]
    fn sequence_references_have_no_length() {
        let ds = AnalogyDataset::from_questions([question(
            "1",
            "x",
            ["seq:1", "seq:2", "seq:3"],
            &["seq:4", "seq:5"],
            0,
        )])
        .unwrap();
        assert_eq!(dataset_stats(&ds).categories[0].mean_tokens, None);
    }

    #[test]
    fn phrase_lengths() {
        let mut q = question("1", "x", ["hired by Athens", "employed by Greece", "hired by Baghdad"], &["employed by Iraq", "employed by Iran"], 0);
        q.level = Level::Phrase;
        let s = dataset_stats(&AnalogyDataset::from_questions([q]).unwrap());
        assert_eq!(s.categories[0].mean_tokens, Some(3.0));
    }
}
