//! FAQ retrieval: rank question-answer pairs by query–question similarity.
//!
//! Three backends share the [`Ranker`] trait: cosine TF-IDF, Okapi BM25 and
//! dense cosine over precomputed sequence vectors. Rankings order pairs by
//! descending score with ties broken by ascending `qa_id`, so every ranking
//! is a deterministic function of its scores.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::composer::{Tokenizer, WhitespaceTokenizer};
use crate::embed_store::SequenceEmbeddingTable;
use crate::error::{Error, Result};
use crate::vecmath;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaPair {
    pub qa_id: String,
    pub question: String,
    pub answer: String,
}

/// A non-empty list of QA pairs with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaCollection {
    pairs: Vec<QaPair>,
}

impl QaCollection {
    pub fn new(pairs: Vec<QaPair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("QA collection has no pairs".into()));
        }
        let mut seen = HashSet::new();
        for p in &pairs {
            if !seen.insert(p.qa_id.as_str()) {
                return Err(Error::format(0, format!("duplicate qa_id {:?}", p.qa_id)));
            }
        }
        Ok(QaCollection { pairs })
    }

    /// Reads `qa_id<TAB>question<TAB>answer` lines; a leading `qa_id` header is skipped.
    pub fn from_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<qa collection>", e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.splitn(3, '\t').collect();
            let [id, question, answer] = fields.as_slice() else {
                return Err(Error::format(i + 1, "expected qa_id<TAB>question<TAB>answer"));
            };
            if i == 0 && *id == "qa_id" {
                continue;
            }
            pairs.push(QaPair {
                qa_id: id.to_string(),
                question: question.to_string(),
                answer: answer.to_string(),
            });
        }
        Self::new(pairs)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[QaPair] {
        &self.pairs
    }

    pub fn get(&self, qa_id: &str) -> Option<&QaPair> {
        self.pairs.iter().find(|p| p.qa_id == qa_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub query_id: String,
    pub text: String,
    pub gold_qa_id: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySet {
    queries: Vec<Query>,
}

impl QuerySet {
    /// Validates that query ids are unique and every gold exists in `collection`.
    pub fn new(queries: Vec<Query>, collection: &QaCollection) -> Result<Self> {
        let mut seen = HashSet::new();
        for q in &queries {
            if !seen.insert(q.query_id.as_str()) {
                return Err(Error::format(0, format!("duplicate query_id {:?}", q.query_id)));
            }
            if collection.get(&q.gold_qa_id).is_none() {
                return Err(Error::Coverage(format!(
                    "query {} names unknown gold {}",
                    q.query_id, q.gold_qa_id
                )));
            }
        }
        Ok(QuerySet { queries })
    }

    /// Reads `query_id<TAB>text<TAB>gold_qa_id<TAB>split` lines.
    pub fn from_tsv<R: BufRead>(reader: R, collection: &QaCollection) -> Result<Self> {
        let mut queries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<queries>", e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [id, text, gold, split] = fields.as_slice() else {
                return Err(Error::format(
                    i + 1,
                    "expected query_id<TAB>text<TAB>gold_qa_id<TAB>split",
                ));
            };
            if i == 0 && *id == "query_id" {
                continue;
            }
            queries.push(Query {
                query_id: id.to_string(),
                text: text.to_string(),
                gold_qa_id: gold.to_string(),
                split: split.trim().parse().map_err(|e: String| Error::format(i + 1, e))?,
            });
        }
        Self::new(queries, collection)
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn split(&self, split: Split) -> QuerySet {
        QuerySet {
            queries: self.queries.iter().filter(|q| q.split == split).cloned().collect(),
        }
    }
}

/// QA pairs for one query, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub query_id: String,
    pub entries: Vec<(String, f64)>,
}

impl Ranking {
    /// Sorts by descending score, then ascending id.
    pub fn from_scores(query_id: impl Into<String>, scored: Vec<(String, f64)>) -> Self {
        let mut entries = scored;
        entries.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        Ranking {
            query_id: query_id.into(),
            entries,
        }
    }

    /// 1-based rank of `qa_id`.
    pub fn rank_of(&self, qa_id: &str) -> Option<usize> {
        self.entries.iter().position(|(id, _)| id == qa_id).map(|p| p + 1)
    }

    pub fn top(&self) -> Option<&str> {
        self.entries.first().map(|(id, _)| id.as_str())
    }

    pub fn truncated(mut self, m: usize) -> Self {
        self.entries.truncate(m);
        self
    }
}

pub trait Ranker: Send + Sync {
    fn name(&self) -> &str;
    fn rank(&self, query: &Query) -> Result<Ranking>;
}

// Ordered maps keep floating-point sums identical from run to run.
fn term_counts(tokens: &[String]) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    counts
}

fn document_frequencies(docs: &[Vec<String>]) -> HashMap<String, usize> {
    let mut df: HashMap<String, usize> = HashMap::new();
    for doc in docs {
        let distinct: HashSet<&String> = doc.iter().collect();
        for t in distinct {
            *df.entry(t.clone()).or_insert(0) += 1;
        }
    }
    df
}

/// Cosine TF-IDF over question text with `idf = ln(N / df)` and raw term counts.
pub struct TfIdfIndex {
    ids: Vec<String>,
    idf: HashMap<String, f64>,
    docs: Vec<(BTreeMap<String, f64>, f64)>,
    tokenizer: Arc<dyn Tokenizer>,
}

pub fn build_tfidf(corpus: &QaCollection) -> Result<TfIdfIndex> {
    TfIdfIndex::build(corpus, Arc::new(WhitespaceTokenizer))
}

impl TfIdfIndex {
    pub fn build(corpus: &QaCollection, tokenizer: Arc<dyn Tokenizer>) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyInput("QA collection has no pairs".into()));
        }
        let tokenized: Vec<Vec<String>> = corpus
            .pairs()
            .iter()
            .map(|p| tokenizer.tokens(&p.question))
            .collect();
        let n = corpus.len() as f64;
        let idf: HashMap<String, f64> = document_frequencies(&tokenized)
            .into_iter()
            .map(|(t, df)| (t, (n / df as f64).ln()))
            .collect();
        let docs = tokenized
            .iter()
            .map(|tokens| {
                let weights: BTreeMap<String, f64> = term_counts(tokens)
                    .into_iter()
                    .map(|(t, tf)| (t.to_string(), tf as f64 * idf[t]))
                    .collect();
                let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
                (weights, norm)
            })
            .collect();
        Ok(TfIdfIndex {
            ids: corpus.pairs().iter().map(|p| p.qa_id.clone()).collect(),
            idf,
            docs,
            tokenizer,
        })
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.idf.get(term).copied()
    }

    /// Scores in collection order; zero when either vector is empty.
    pub fn scores(&self, text: &str) -> Vec<f64> {
        let tokens = self.tokenizer.tokens(text);
        let query: Vec<(&str, f64)> = term_counts(&tokens)
            .into_iter()
            .filter_map(|(t, tf)| self.idf.get(t).map(|idf| (t, tf as f64 * idf)))
            .collect();
        let qnorm = query.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        self.docs
            .iter()
            .map(|(weights, dnorm)| {
                if qnorm == 0.0 || *dnorm == 0.0 {
                    return 0.0;
                }
                let dot: f64 = query
                    .iter()
                    .filter_map(|(t, w)| weights.get(*t).map(|d| d * w))
                    .sum();
                dot / (qnorm * dnorm)
            })
            .collect()
    }
}

impl Ranker for TfIdfIndex {
    fn name(&self) -> &str {
        "TF-IDF"
    }

    fn rank(&self, query: &Query) -> Result<Ranking> {
        let scored = self.ids.iter().cloned().zip(self.scores(&query.text)).collect();
        Ok(Ranking::from_scores(&query.query_id, scored))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

/// Okapi BM25 over question text.
///
/// `score(q, D) = Σ idf(t)·tf(t,D)(k1+1) / (tf(t,D) + k1(1 − b + b|D|/avgdl))`
/// with `idf(t) = ln(1 + (N − df + 0.5)/(df + 0.5))`, summed over the
/// distinct terms of the query.
pub struct Bm25Index {
    ids: Vec<String>,
    params: Bm25Params,
    n: usize,
    df: HashMap<String, usize>,
    tfs: Vec<HashMap<String, usize>>,
    lens: Vec<usize>,
    avgdl: f64,
    tokenizer: Arc<dyn Tokenizer>,
}

pub fn build_bm25(corpus: &QaCollection, params: Bm25Params) -> Result<Bm25Index> {
    Bm25Index::build(corpus, params, Arc::new(WhitespaceTokenizer))
}

impl Bm25Index {
    pub fn build(corpus: &QaCollection, params: Bm25Params, tokenizer: Arc<dyn Tokenizer>) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyInput("QA collection has no pairs".into()));
        }
        let tokenized: Vec<Vec<String>> = corpus
            .pairs()
            .iter()
            .map(|p| tokenizer.tokens(&p.question))
            .collect();
        let lens: Vec<usize> = tokenized.iter().map(Vec::len).collect();
        let avgdl = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
        let tfs = tokenized
            .iter()
            .map(|t| {
                term_counts(t)
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect()
            })
            .collect();
        Ok(Bm25Index {
            ids: corpus.pairs().iter().map(|p| p.qa_id.clone()).collect(),
            params,
            n: corpus.len(),
            df: document_frequencies(&tokenized),
            tfs,
            lens,
            avgdl,
            tokenizer,
        })
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(0) as f64;
        (1.0 + (self.n as f64 - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn scores(&self, text: &str) -> Vec<f64> {
        let tokens = self.tokenizer.tokens(text);
        let terms: Vec<&str> = term_counts(&tokens).into_keys().collect();
        let Bm25Params { k1, b } = self.params;
        let avgdl = if self.avgdl > 0.0 { self.avgdl } else { 1.0 };
        self.tfs
            .iter()
            .zip(&self.lens)
            .map(|(tf, &len)| {
                let norm = k1 * (1.0 - b + b * len as f64 / avgdl);
                terms
                    .iter()
                    .filter_map(|t| tf.get(*t).map(|&f| (t, f as f64)))
                    .map(|(t, f)| self.idf(t) * f * (k1 + 1.0) / (f + norm))
                    .sum()
            })
            .collect()
    }
}

impl Ranker for Bm25Index {
    fn name(&self) -> &str {
        "BM25"
    }

    fn rank(&self, query: &Query) -> Result<Ranking> {
        let scored = self.ids.iter().cloned().zip(self.scores(&query.text)).collect();
        Ok(Ranking::from_scores(&query.query_id, scored))
    }
}

/// Cosine of `query_vec` against every vector of `doc_table`. Zero document
/// vectors score 0.
pub fn dense_rank(
    query_id: &str,
    query_vec: &[f64],
    doc_table: &SequenceEmbeddingTable,
) -> Result<Ranking> {
    if query_vec.len() != doc_table.dim() {
        return Err(Error::Shape {
            expected: doc_table.dim(),
            actual: query_vec.len(),
        });
    }
    if vecmath::norm(query_vec) == 0.0 {
        return Err(Error::DegenerateVector(format!("query {query_id} has a zero vector")));
    }
    let scored = doc_table
        .iter()
        .map(|(id, v)| {
            let s = vecmath::cosine(query_vec, v).unwrap_or(0.0);
            (id.to_string(), s)
        })
        .collect();
    Ok(Ranking::from_scores(query_id, scored))
}

/// Dense ranking with question vectors keyed by `qa_id` and query vectors
/// keyed by `query_id`, both read from sequence tables.
pub struct DenseRanker {
    docs: SequenceEmbeddingTable,
    queries: SequenceEmbeddingTable,
}

impl DenseRanker {
    pub fn new(corpus: &QaCollection, vectors: &SequenceEmbeddingTable) -> Result<Self> {
        Self::with_query_table(corpus, vectors, vectors.clone())
    }

    pub fn with_query_table(
        corpus: &QaCollection,
        doc_vectors: &SequenceEmbeddingTable,
        query_vectors: SequenceEmbeddingTable,
    ) -> Result<Self> {
        let mut docs = SequenceEmbeddingTable::new(doc_vectors.dim(), doc_vectors.pooling_tag());
        for p in corpus.pairs() {
            let v = doc_vectors
                .get(&p.qa_id)
                .ok_or_else(|| Error::Coverage(format!("no vector for question {}", p.qa_id)))?;
            docs.insert(p.qa_id.clone(), v.to_vec())?;
        }
        Ok(DenseRanker {
            docs,
            queries: query_vectors,
        })
    }
}

impl Ranker for DenseRanker {
    fn name(&self) -> &str {
        "dense"
    }

    fn rank(&self, query: &Query) -> Result<Ranking> {
        let v = self
            .queries
            .get(&query.query_id)
            .ok_or_else(|| Error::Coverage(format!("no vector for query {}", query.query_id)))?;
        dense_rank(&query.query_id, v, &self.docs)
    }
}

/// Ranks every query, optionally on a dedicated thread pool. Output order
/// follows `queries`.
pub fn rank_all(ranker: &dyn Ranker, queries: &QuerySet, threads: usize) -> Result<Vec<Ranking>> {
    if threads <= 1 {
        return queries.queries().iter().map(|q| ranker.rank(q)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Build(format!("thread pool: {e}")))?;
    pool.install(|| queries.queries().par_iter().map(|q| ranker.rank(q)).collect())
}

fn gold_ranks(rankings: &[Ranking], golds: &QuerySet) -> Result<Vec<Option<usize>>> {
    if golds.is_empty() {
        return Err(Error::EmptyInput("no queries".into()));
    }
    let by_id: HashMap<&str, &Ranking> = rankings.iter().map(|r| (r.query_id.as_str(), r)).collect();
    golds
        .queries()
        .iter()
        .map(|q| {
            by_id
                .get(q.query_id.as_str())
                .map(|r| r.rank_of(&q.gold_qa_id))
                .ok_or_else(|| Error::Coverage(format!("no ranking for query {}", q.query_id)))
        })
        .collect()
}

/// Fraction of queries whose top-ranked pair is the gold pair.
pub fn top1_accuracy(rankings: &[Ranking], golds: &QuerySet) -> Result<f64> {
    let ranks = gold_ranks(rankings, golds)?;
    Ok(ranks.iter().filter(|r| **r == Some(1)).count() as f64 / ranks.len() as f64)
}

/// Mean of `1 / rank(gold)`. Every ranking must contain its gold pair.
pub fn mrr(rankings: &[Ranking], golds: &QuerySet) -> Result<f64> {
    let ranks = gold_ranks(rankings, golds)?;
    let mut total = 0.0;
    for (rank, q) in ranks.iter().zip(golds.queries()) {
        let rank = rank.ok_or_else(|| {
            Error::Coverage(format!("gold {} missing from ranking of {}", q.gold_qa_id, q.query_id))
        })?;
        total += 1.0 / rank as f64;
    }
    Ok(total / ranks.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeSample {
    pub query: String,
    pub qa_id: String,
    pub label: u8,
}

/// The `m` best-ranked non-gold pairs for `query`, labelled negative.
pub fn faq_negative_samples(ranker: &dyn Ranker, query: &Query, m: usize) -> Result<Vec<NegativeSample>> {
    if m == 0 {
        return Err(Error::Sampling("m must be at least 1".into()));
    }
    let ranking = ranker.rank(query)?;
    let negatives: Vec<NegativeSample> = ranking
        .entries
        .iter()
        .filter(|(id, _)| *id != query.gold_qa_id)
        .take(m)
        .map(|(id, _)| NegativeSample {
            query: query.text.clone(),
            qa_id: id.clone(),
            label: 0,
        })
        .collect();
    if negatives.len() < m {
        return Err(Error::Sampling(format!(
            "only {} non-gold pairs available for {} negatives",
            negatives.len(),
            m
        )));
    }
    Ok(negatives)
}

pub fn write_negatives_jsonl<W: Write>(samples: &[NegativeSample], mut w: W) -> std::io::Result<()> {
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn collection(questions: &[&str]) -> QaCollection {
        QaCollection::new(
            questions
                .iter()
                .enumerate()
                .map(|(i, q)| QaPair {
                    qa_id: format!("qa{i}"),
                    question: q.to_string(),
                    answer: format!("answer {i}"),
                })
                .collect(),
        )
        .unwrap()
    }

    fn query(id: &str, text: &str, gold: &str) -> Query {
        Query {
            query_id: id.into(),
            text: text.into(),
            gold_qa_id: gold.into(),
            split: Split::Test,
        }
    }

    fn ranking(id: &str, order: &[&str]) -> Ranking {
        Ranking {
            query_id: id.into(),
            entries: order
                .iter()
                .enumerate()
                .map(|(i, q)| (q.to_string(), 1.0 / (i + 1) as f64))
                .collect(),
        }
    }

    #[test]
    fn tfidf_disjoint_vocabulary() {
        let c = collection(&["red apple pie", "blue car engine"]);
        let idx = build_tfidf(&c).unwrap();
        let r = idx.rank(&query("q", "red apple pie", "qa0")).unwrap();
        assert_eq!(r.top(), Some("qa0"));
        assert!(r.entries[0].1 > 0.0);
        assert_eq!(r.entries[1].1, 0.0);
    }

    #[test]
    fn tfidf_term_in_every_document_has_zero_idf() {
        let c = collection(&["insurance for cars", "insurance for pets", "insurance claims"]);
        let idx = build_tfidf(&c).unwrap();
        assert_eq!(idx.idf("insurance"), Some(0.0));
        assert_eq!(idx.scores("insurance"), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn tfidf_three_document_corpus() {
        // d0 = {a:2, b:1}, d1 = {b:1, c:1}, d2 = {c:1, d:1}; N = 3
        // idf: a = ln 3, b = ln 1.5, c = ln 1.5, d = ln 3
        let c = collection(&["a a b", "b c", "c d"]);
        let idx = build_tfidf(&c).unwrap();
        let (l3, l15) = (3f64.ln(), 1.5f64.ln());
        let q = [l3, l15]; // query "a b"
        let docs = [vec![(2.0 * l3, 0), (l15, 1)], vec![(l15, 1), (l15, 2)], vec![(l15, 2), (l3, 3)]];
        let expected: Vec<f64> = docs
            .iter()
            .map(|d| {
                let dot: f64 = d.iter().filter(|(_, t)| *t < 2).map(|(w, t)| w * q[*t]).sum();
                let dn = d.iter().map(|(w, _)| w * w).sum::<f64>().sqrt();
                let qn = (q[0] * q[0] + q[1] * q[1]).sqrt();
                dot / (dn * qn)
            })
            .collect();
        let got = idx.scores("a b");
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-12, "{got:?} vs {expected:?}");
        }
        assert_eq!(got[2], 0.0);
    }

    #[test]
    fn bm25_single_document() {
        let c = collection(&["cheap car insurance"]);
        let idx = build_bm25(&c, Bm25Params::default()).unwrap();
        let s = idx.scores("cheap car insurance")[0];
        // N = 1, df = 1: idf = ln(1 + 0.5/1.5); |D| = avgdl, so each term gives idf·(2.2)/(1 + 1.2)
        let per_term = (1.0f64 + 0.5 / 1.5).ln() * 2.2 / 2.2;
        assert!(s > 0.0);
        assert!((s - 3.0 * per_term).abs() < 1e-12);
    }

    #[test]
    fn bm25_absent_terms_and_rarity() {
        let c = collection(&["alpha common", "beta common", "gamma common", "alpha delta"]);
        let idx = build_bm25(&c, Bm25Params::default()).unwrap();
        assert_eq!(idx.scores("zeta")[0], 0.0);
        // docs 1 and 2 have equal length and tf; "beta" (df 1) is rarer than "alpha" (df 2)
        assert!(idx.idf("beta") > idx.idf("alpha"));
        assert!(idx.scores("beta")[1] > idx.scores("alpha")[0]);
    }

    #[test]
    fn bm25_without_length_normalization() {
        let params = Bm25Params { k1: 1.2, b: 0.0 };
        let c = collection(&["x y", "x y x y", "z"]);
        let idx = build_bm25(&c, params).unwrap();
        let s = idx.scores("x");
        let idf = idx.idf("x");
        // b = 0: only tf saturation differs, tf = 1 vs tf = 2
        assert!((s[0] - idf * 1.0 * 2.2 / (1.0 + 1.2)).abs() < 1e-12);
        assert!((s[1] - idf * 2.0 * 2.2 / (2.0 + 1.2)).abs() < 1e-12);
    }

    #[test]
    fn dense_examples() {
        let t = SequenceEmbeddingTable::from_entries(
            "mean",
            [("qa2", vec![1.0, 0.0]), ("qa1", vec![0.0, 1.0]), ("qa3", vec![1.0, 1.0])],
        )
        .unwrap();
        let r = dense_rank("q", &[0.0, 1.0], &t).unwrap();
        assert_eq!(r.entries[0], ("qa1".to_string(), 1.0));
        // cos 45° for qa3, 0 for qa2
        assert_eq!(r.entries[1].0, "qa3");
        assert!((r.entries[1].1 - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.entries[2], ("qa2".to_string(), 0.0));

        let t = SequenceEmbeddingTable::from_entries(
            "mean",
            [("b", vec![1.0, 0.0, 0.0]), ("a", vec![0.0, 1.0, 0.0])],
        )
        .unwrap();
        let r = dense_rank("q", &[0.0, 0.0, 1.0], &t).unwrap();
        assert_eq!(r.entries, vec![("a".to_string(), 0.0), ("b".to_string(), 0.0)]);
        assert!(matches!(dense_rank("q", &[1.0], &t), Err(Error::Shape { .. })));
    }

    #[test]
    fn metric_examples() {
        let c = collection(&["a", "b", "c", "d"]);
        let qs = QuerySet::new(
            vec![query("1", "", "qa0"), query("2", "", "qa1"), query("3", "", "qa3")],
            &c,
        )
        .unwrap();
        let rankings = vec![
            ranking("1", &["qa0", "qa1", "qa2", "qa3"]),
            ranking("2", &["qa0", "qa1", "qa2", "qa3"]),
            ranking("3", &["qa0", "qa1", "qa2", "qa3"]),
        ];
        let m = mrr(&rankings, &qs).unwrap();
        assert!((m - 1.75 / 3.0).abs() < 1e-12);
        assert!((top1_accuracy(&rankings, &qs).unwrap() - 1.0 / 3.0).abs() < 1e-12);

        let two = QuerySet::new(vec![query("1", "", "qa0"), query("2", "", "qa1")], &c).unwrap();
        assert_eq!(top1_accuracy(&rankings[..2], &two).unwrap(), 0.5);
    }

    #[test]
    fn metric_coverage_errors() {
        let c = collection(&["a", "b"]);
        let qs = QuerySet::new(vec![query("1", "", "qa1")], &c).unwrap();
        assert!(matches!(top1_accuracy(&[], &qs), Err(Error::Coverage(_))));
        let truncated = vec![ranking("1", &["qa0"])];
        assert!(matches!(mrr(&truncated, &qs), Err(Error::Coverage(_))));
        assert_eq!(top1_accuracy(&truncated, &qs).unwrap(), 0.0);
        assert!(QuerySet::new(vec![query("1", "", "nope")], &c).is_err());
    }

    struct Fixed(Vec<String>);

    impl Ranker for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn rank(&self, q: &Query) -> Result<Ranking> {
            let order: Vec<&str> = self.0.iter().map(String::as_str).collect();
            Ok(ranking(&q.query_id, &order))
        }
    }

    #[test]
    fn negatives() {
        let order: Vec<String> = (0..12).map(|i| format!("qa{i:02}")).collect();
        let ranker = Fixed(order.clone());
        let n = faq_negative_samples(&ranker, &query("q", "text", "qa00"), 4).unwrap();
        assert_eq!(n.iter().map(|s| s.qa_id.as_str()).collect::<Vec<_>>(), &order[1..5]);
        let n = faq_negative_samples(&ranker, &query("q", "text", "qa09"), 4).unwrap();
        assert_eq!(n.iter().map(|s| s.qa_id.as_str()).collect::<Vec<_>>(), &order[0..4]);
        assert!(n.iter().all(|s| s.label == 0 && s.query == "text"));

        let small = Fixed(vec!["a".into(), "b".into(), "c".into()]);
        assert!(matches!(
            faq_negative_samples(&small, &query("q", "t", "a"), 3),
            Err(Error::Sampling(_))
        ));

        let mut buf = Vec::new();
        write_negatives_jsonl(&n[..1], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "{\"query\":\"text\",\"qa_id\":\"qa00\",\"label\":0}\n");
    }

    #[test]
    fn tsv_parsing() {
        let c = QaCollection::from_tsv("qa_id\tquestion\tanswer\n1\tWhat?\tThis\tand that\n2\tWhy?\tBecause\n".as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.pairs()[0].answer, "This\tand that");
        let q = QuerySet::from_tsv("a\tsome text\t1\ttrain\nb\tother\t2\ttest\n".as_bytes(), &c).unwrap();
        assert_eq!(q.split(Split::Train).len(), 1);
        assert!(QuerySet::from_tsv("a\tsome text\t1\tdev\n".as_bytes(), &c).is_err());
        assert!(matches!(QaCollection::from_tsv("".as_bytes()), Err(Error::EmptyInput(_))));
        assert!(QaCollection::from_tsv("1\tx\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn top1_never_exceeds_mrr(ranks in prop::collection::vec(1usize..20, 1..30)) {
            let c = collection(&(0..20).map(|_| "q").collect::<Vec<_>>());
            let ids: Vec<String> = (0..20).map(|i| format!("qa{i}")).collect();
            let queries: Vec<Query> = ranks.iter().enumerate()
                .map(|(i, r)| query(&i.to_string(), "", &ids[r - 1]))
                .collect();
            let rankings: Vec<Ranking> = (0..ranks.len())
                .map(|i| Ranking { query_id: i.to_string(), entries: ids.iter().map(|id| (id.clone(), 0.0)).collect() })
                .collect();
            let qs = QuerySet::new(queries, &c).unwrap();
            let t = top1_accuracy(&rankings, &qs).unwrap();
            let m = mrr(&rankings, &qs).unwrap();
            prop_assert!(t <= m && m <= 1.0);
        }

        #[test]
        fn scores_ignore_corpus_order(perm_seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let questions = ["cheap car insurance", "pet insurance claim", "car accident claim", "travel cover", "senior accident insurance"];
            let pairs: Vec<QaPair> = questions.iter().enumerate()
                .map(|(i, q)| QaPair { qa_id: format!("qa{i}"), question: q.to_string(), answer: String::new() })
                .collect();
            let mut shuffled = pairs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
            let a = QaCollection::new(pairs).unwrap();
            let b = QaCollection::new(shuffled).unwrap();
            let q = query("q", "car insurance claim", "qa0");
            for (ra, rb) in [
                (build_bm25(&a, Bm25Params::default()).unwrap().rank(&q).unwrap(), build_bm25(&b, Bm25Params::default()).unwrap().rank(&q).unwrap()),
                (build_tfidf(&a).unwrap().rank(&q).unwrap(), build_tfidf(&b).unwrap().rank(&q).unwrap()),
            ] {
                prop_assert_eq!(ra.entries.len(), rb.entries.len());
                for (x, y) in ra.entries.iter().zip(&rb.entries) {
                    prop_assert_eq!(&x.0, &y.0);
                    prop_assert!((x.1 - y.1).abs() < 1e-12);
                }
            }
        }
    }
}
