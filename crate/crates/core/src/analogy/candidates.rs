//! Closed-vocabulary candidate lists ranked by a reference word table.

use std::io::BufRead;

use rayon::prelude::*;

use super::{standard_candidate_count, AnalogyDataset, AnalogyQuestion, Level};
use crate::embed_store::{unit_normalize, WordEmbeddingTable};
use crate::error::{Error, Result};
use crate::vecmath;

/// Candidates for one question in rank order, gold guaranteed present.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    pub items: Vec<String>,
    pub gold: usize,
    /// True when gold was outside the top k and replaced the last candidate.
    pub injected: bool,
}

/// Ranks the whole vocabulary of a table against `ĉ + b̂ − â`.
///
/// Unit vectors are computed once; zero vectors are never ranked.
pub struct CandidateRanker<'a> {
    table: &'a WordEmbeddingTable,
    units: Vec<Option<Vec<f64>>>,
}

impl<'a> CandidateRanker<'a> {
    pub fn new(table: &'a WordEmbeddingTable) -> Self {
        let units = table
            .iter()
            .map(|(_, v)| unit_normalize(v).ok().map(|u| u.into_inner()))
            .collect();
        CandidateRanker { table, units }
    }

    fn resolve(&self, token: &str) -> Result<usize> {
        let idx = self
            .table
            .index_of(token)
            .ok_or_else(|| Error::Build(format!("{token:?} is not in the ranking vocabulary")))?;
        if self.units[idx].is_none() {
            return Err(Error::Build(format!("{token:?} has a zero vector")));
        }
        Ok(idx)
    }

    pub fn generate(&self, a: &str, b: &str, c: &str, gold: &str, k: usize) -> Result<CandidateList> {
        if k < 2 {
            return Err(Error::Build(format!("need at least 2 candidates, got k = {k}")));
        }
        if self.table.len() < k + 3 {
            return Err(Error::Build(format!(
                "vocabulary of {} tokens is smaller than k + 3 = {}",
                self.table.len(),
                k + 3
            )));
        }
        let ia = self.resolve(a)?;
        let ib = self.resolve(b)?;
        let ic = self.resolve(c)?;
        let ig = self
            .table
            .index_of(gold)
            .ok_or_else(|| Error::Build(format!("gold {gold:?} is not in the ranking vocabulary")))?;
        if [ia, ib, ic].contains(&ig) {
            return Err(Error::Build(format!("gold {gold:?} repeats a question term")));
        }
        let unit = |i: usize| self.units[i].as_deref().expect("resolved");
        let target = vecmath::weighted_sum(&[(1.0, unit(ic)), (1.0, unit(ib)), (-1.0, unit(ia))])?;
        let tnorm = vecmath::norm(&target);
        if tnorm == 0.0 {
            return Err(Error::DegenerateTarget);
        }

        let mut scored: Vec<(f64, usize)> = self
            .units
            .iter()
            .enumerate()
            .filter(|(i, _)| ![ia, ib, ic].contains(i))
            .filter_map(|(i, u)| u.as_ref().map(|u| (vecmath::dot(&target, u) / tnorm, i)))
            .collect();
        if scored.len() < k {
            return Err(Error::Build(format!(
                "only {} rankable tokens for k = {k}",
                scored.len()
            )));
        }
        // descending score, then file order
        let by_rank = |x: &(f64, usize), y: &(f64, usize)| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1));
        scored.select_nth_unstable_by(k - 1, by_rank);
        scored.truncate(k);
        scored.sort_unstable_by(by_rank);

        let mut indices: Vec<usize> = scored.into_iter().map(|(_, i)| i).collect();
        let (gold_pos, injected) = match indices.iter().position(|&i| i == ig) {
            Some(p) => (p, false),
            None => {
                indices[k - 1] = ig;
                (k - 1, true)
            }
        };
        let items = indices
            .into_iter()
            .map(|i| self.table.get_index(i).expect("in range").0.to_string())
            .collect();
        Ok(CandidateList {
            items,
            gold: gold_pos,
            injected,
        })
    }
}

/// Top-`k` candidates for `a : b :: c : ?` from `ranker_table`, with `gold`
/// substituted for the last candidate when it does not rank in the top `k`.
pub fn generate_candidates(
    ranker_table: &WordEmbeddingTable,
    a: &str,
    b: &str,
    c: &str,
    gold: &str,
    k: usize,
) -> Result<CandidateList> {
    CandidateRanker::new(ranker_table).generate(a, b, c, gold, k)
}

/// One `a b c d` line of a word-analogy question file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordTuple {
    pub category: String,
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
}

/// Parses the classic question-words layout: `: category` headers followed by
/// `a b c d` lines.
pub fn parse_question_words<R: BufRead>(reader: R) -> Result<Vec<WordTuple>> {
    let mut category: Option<String> = None;
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<questions>", e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix(':') {
            category = Some(name.trim().to_string());
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, b, c, d] = fields.as_slice() else {
            return Err(Error::format(i + 1, format!("expected 4 words, found {}", fields.len())));
        };
        let category = category
            .clone()
            .ok_or_else(|| Error::format(i + 1, "question before any ': category' header"))?;
        out.push(WordTuple {
            category,
            a: a.to_string(),
            b: b.to_string(),
            c: c.to_string(),
            d: d.to_string(),
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("no analogy questions".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordBuildSummary {
    pub questions: usize,
    pub injected: usize,
    /// Tuples dropped because a term was missing from the ranking table.
    pub skipped: Vec<(usize, String)>,
}

/// Builds a word-level dataset from analogy tuples.
///
/// `k` overrides the per-category candidate count; when `None`, the reference
/// counts are used (5 semantic, 2 syntactic, 5 otherwise).
pub fn build_word_dataset(
    ranker: &CandidateRanker<'_>,
    tuples: &[WordTuple],
    k: Option<usize>,
) -> Result<(AnalogyDataset, WordBuildSummary)> {
    let mut counters: std::collections::HashMap<&str, usize> = Default::default();
    let ids: Vec<String> = tuples
        .iter()
        .map(|t| {
            let n = counters.entry(t.category.as_str()).or_default();
            *n += 1;
            format!("{}-{:05}", t.category, n)
        })
        .collect();

    let results: Vec<Result<CandidateList>> = tuples
        .par_iter()
        .map(|t| {
            let k = k.unwrap_or_else(|| standard_candidate_count(&t.category).unwrap_or(5));
            ranker.generate(&t.a, &t.b, &t.c, &t.d, k)
        })
        .collect();

    let mut ds = AnalogyDataset::new(Level::Word);
    let mut summary = WordBuildSummary::default();
    for (i, (t, res)) in tuples.iter().zip(results).enumerate() {
        match res {
            Ok(list) => {
                summary.injected += usize::from(list.injected);
                ds.push(AnalogyQuestion {
                    id: ids[i].clone(),
                    level: Level::Word,
                    category: t.category.clone(),
                    a: t.a.clone(),
                    b: t.b.clone(),
                    c: t.c.clone(),
                    candidates: list.items,
                    gold: list.gold,
                    word_parent: None,
                    degenerate: false,
                })?;
                summary.questions += 1;
            }
            Err(Error::Build(msg)) | Err(Error::Unanswerable(msg)) => {
                summary.skipped.push((i, msg));
            }
            Err(e) => return Err(e),
        }
    }
    if ds.is_empty() {
        return Err(Error::Build("no question could be built".into()));
    }
    Ok((ds, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force rank of every non-query token, written independently of the ranker.
    fn brute_rank(t: &WordEmbeddingTable, a: &str, b: &str, c: &str) -> Vec<String> {
        let unit = |w: &str| {
            let v = t.lookup(w).unwrap();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / n).collect::<Vec<_>>()
        };
        let (ua, ub, uc) = (unit(a), unit(b), unit(c));
        let target: Vec<f64> = (0..t.dim()).map(|i| uc[i] + ub[i] - ua[i]).collect();
        let mut scored: Vec<(f64, String)> = t
            .iter()
            .filter(|(w, _)| ![a, b, c].contains(w))
            .map(|(w, _)| {
                let u = unit(w);
                let dot: f64 = u.iter().zip(&target).map(|(x, y)| x * y).sum();
                (dot, w.to_string())
            })
            .collect();
        scored.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        scored.into_iter().map(|(_, w)| w).collect()
    }

    fn toy() -> WordEmbeddingTable {
        WordEmbeddingTable::from_entries(
            "toy",
            [
                ("man", vec![1.0, 0.0, 0.0]),
                ("woman", vec![1.0, 1.0, 0.0]),
                ("king", vec![0.0, 0.0, 1.0]),
                ("queen", vec![0.0, 0.8, 1.0]),
                ("prince", vec![0.1, 0.2, 1.0]),
                ("apple", vec![0.3, -1.0, 0.2]),
                ("duke", vec![-0.2, 0.1, 0.9]),
                ("pear", vec![0.4, -0.9, 0.0]),
                ("throne", vec![0.0, 1.0, 1.3]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn gold_ranked_second_keeps_top_five() {
        let t = toy();
        let order = brute_rank(&t, "man", "woman", "king");
        assert_eq!(order, ["throne", "queen", "duke", "prince", "apple", "pear"]);
        let list = generate_candidates(&t, "man", "woman", "king", "queen", 5).unwrap();
        assert_eq!(list.items, order[..5]);
        assert_eq!(list.gold, 1);
        assert!(!list.injected);
    }

    #[test]
    fn gold_outside_top_k_replaces_last() {
        let t = toy();
        let order = brute_rank(&t, "man", "woman", "king");
        let last = order.last().unwrap().clone();
        let list = generate_candidates(&t, "man", "woman", "king", &last, 3).unwrap();
        assert_eq!(list.items[..2], order[..2]);
        assert_eq!(list.items[2], last);
        assert_eq!(list.gold, 2);
        assert!(list.injected);
    }

    #[test]
    fn build_errors() {
        let t = toy();
        assert!(matches!(
            generate_candidates(&t, "man", "woman", "king", "nobody", 5),
            Err(Error::Build(_))
        ));
        assert!(matches!(
            generate_candidates(&t, "man", "woman", "king", "queen", 7),
            Err(Error::Build(_))
        ));
        assert!(matches!(
            generate_candidates(&t, "man", "woman", "nobody", "queen", 5),
            Err(Error::Build(_))
        ));
        assert!(matches!(
            generate_candidates(&t, "man", "woman", "king", "man", 5),
            Err(Error::Build(_))
        ));
    }

    #[test]
    fn parse_question_file() {
        let text = ": capital-common\nAthens Greece Baghdad Iraq\n\n: gram3-comparative\nbad worse big bigger\n";
        let tuples = parse_question_words(text.as_bytes()).unwrap();
        assert_eq!(tuples.len(), 2);
        assert_eq!(tuples[0].category, "capital-common");
        assert_eq!(tuples[1].d, "bigger");
        assert!(matches!(
            parse_question_words("a b c d\n".as_bytes()),
            Err(Error::Format { line: 1, .. })
        ));
        assert!(matches!(
            parse_question_words(": x\na b c\n".as_bytes()),
            Err(Error::Format { line: 2, .. })
        ));
    }

    #[test]
    fn word_dataset_skips_oov_tuples() {
        let t = toy();
        let tuples = parse_question_words(
            ": male-female\nman woman king queen\nman woman king nobody\n".as_bytes(),
        )
        .unwrap();
        let ranker = CandidateRanker::new(&t);
        let (ds, summary) = build_word_dataset(&ranker, &tuples, None).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(summary.skipped.len(), 1);
        assert_eq!(ds.candidate_count("male-female"), Some(5));
        let q = ds.questions().next().unwrap();
        assert_eq!(q.id, "male-female-00001");
        assert_eq!(q.gold_item(), "queen");
    }

    proptest! {
        #[test]
        fn candidate_lists_are_well_formed(seed in 0u64..300, k in 2usize..6, gold_idx in 3usize..12) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let t = WordEmbeddingTable::from_entries(
                "r",
                (0..12).map(|i| (format!("w{i}"), (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())),
            ).unwrap();
            let gold = format!("w{gold_idx}");
            let list = generate_candidates(&t, "w0", "w1", "w2", &gold, k).unwrap();
            prop_assert_eq!(list.items.len(), k);
            prop_assert_eq!(&list.items[list.gold], &gold);
            let distinct: std::collections::HashSet<_> = list.items.iter().collect();
            prop_assert_eq!(distinct.len(), k);
            for w in ["w0", "w1", "w2"] {
                prop_assert!(!list.items.iter().any(|x| x == w));
            }
            let brute = brute_rank(&t, "w0", "w1", "w2");
            let expected_top: Vec<String> = brute[..k].to_vec();
            if expected_top.contains(&gold) {
                prop_assert_eq!(&list.items, &expected_top);
            } else {
                prop_assert_eq!(&list.items[..k - 1], &expected_top[..k - 1]);
            }
        }
    }
}
