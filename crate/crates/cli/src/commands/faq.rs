use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use unirep_core::composer::WhitespaceTokenizer;
use unirep_core::embed_store::load_sequence_vectors;
use unirep_core::retrieval::{
    faq_negative_samples, mrr, rank_all, top1_accuracy, write_negatives_jsonl, Bm25Index,
    Bm25Params, DenseRanker, QaCollection, QuerySet, Ranker, Split, TfIdfIndex,
};

use crate::common::{
    csv_bytes, emit, json_bytes, markdown_table, open_reader, require_positive, Format, Provenance,
};
use crate::{FaqEvalArgs, FaqNegativesArgs, RankerKind, SplitArg};

fn load_inputs(collection: &Path, queries: &Path) -> Result<(QaCollection, QuerySet)> {
    let c = QaCollection::from_tsv(open_reader(collection)?)
        .with_context(|| format!("reading collection {}", collection.display()))?;
    let q = QuerySet::from_tsv(open_reader(queries)?, &c)
        .with_context(|| format!("reading queries {}", queries.display()))?;
    Ok((c, q))
}

fn select(queries: &QuerySet, split: SplitArg) -> Result<QuerySet> {
    let q = match split {
        SplitArg::All => queries.clone(),
        SplitArg::Train => queries.split(Split::Train),
        SplitArg::Test => queries.split(Split::Test),
    };
    if q.is_empty() {
        bail!("no queries in the {split:?} split");
    }
    Ok(q)
}

fn make_ranker(kind: RankerKind, corpus: &QaCollection, seq_vectors: Option<&Path>) -> Result<Box<dyn Ranker>> {
    Ok(match kind {
        RankerKind::Tfidf => Box::new(TfIdfIndex::build(corpus, Arc::new(WhitespaceTokenizer))?),
        RankerKind::Bm25 => Box::new(Bm25Index::build(
            corpus,
            Bm25Params::default(),
            Arc::new(WhitespaceTokenizer),
        )?),
        RankerKind::Dense => {
            let path = seq_vectors.context("the dense ranker needs --seq-vectors")?;
            let table = load_sequence_vectors(path)?;
            Box::new(DenseRanker::new(corpus, &table)?)
        }
    })
}

fn input_paths<'a>(collection: &'a Path, queries: &'a Path, seq: Option<&'a Path>, dense: bool) -> Vec<&'a Path> {
    let mut v = vec![collection, queries];
    if dense {
        v.extend(seq);
    }
    v
}

#[derive(Serialize)]
struct FaqRow {
    ranker: RankerKind,
    queries: usize,
    accuracy: f64,
    mrr: f64,
}

#[derive(Serialize)]
struct FaqReport {
    #[serde(flatten)]
    provenance: Provenance,
    split: SplitArg,
    results: Vec<FaqRow>,
}

#[derive(Serialize)]
struct RankLine<'a> {
    ranker: RankerKind,
    query_id: &'a str,
    gold_qa_id: &'a str,
    gold_rank: Option<usize>,
    top: Option<&'a str>,
}

pub fn eval(args: FaqEvalArgs) -> Result<()> {
    require_positive("threads", args.common.threads)?;
    let dense = args.ranker.contains(&RankerKind::Dense);
    let inputs = input_paths(&args.collection, &args.queries, args.seq_vectors.as_deref(), dense);
    let provenance = Provenance::new("faq-eval", &args, &inputs)?;
    let (corpus, all) = load_inputs(&args.collection, &args.queries)?;
    let queries = select(&all, args.split)?;

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for &kind in &args.ranker {
        let ranker = make_ranker(kind, &corpus, args.seq_vectors.as_deref())?;
        let rankings = rank_all(ranker.as_ref(), &queries, args.common.threads)?;
        rows.push(FaqRow {
            ranker: kind,
            queries: queries.len(),
            accuracy: top1_accuracy(&rankings, &queries)?,
            mrr: mrr(&rankings, &queries)?,
        });
        if args.rankings.is_some() {
            for (r, q) in rankings.iter().zip(queries.queries()) {
                serde_json::to_writer(
                    &mut lines,
                    &RankLine {
                        ranker: kind,
                        query_id: &q.query_id,
                        gold_qa_id: &q.gold_qa_id,
                        gold_rank: r.rank_of(&q.gold_qa_id),
                        top: r.top(),
                    },
                )?;
                lines.push(b'\n');
            }
        }
    }
    if let Some(p) = &args.rankings {
        emit(Some(p), &lines)?;
    }

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{:?}", r.ranker).to_lowercase(),
                r.queries.to_string(),
                r.accuracy.to_string(),
                r.mrr.to_string(),
            ]
        })
        .collect();
    let bytes = match args.common.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&FaqReport {
            provenance,
            split: args.split,
            results: rows,
        })?,
        Format::Csv => csv_bytes(&["ranker", "queries", "accuracy", "mrr"], &table)?,
        Format::Markdown => {
            let md: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        format!("{:?}", r.ranker).to_lowercase(),
                        format!("{:.1}", r.accuracy * 100.0),
                        format!("{:.3}", r.mrr),
                    ]
                })
                .collect();
            let mut s = markdown_table(&["Model", "Acc.", "MRR"], &md);
            s.push_str(&provenance.markdown_footer());
            s.into_bytes()
        }
    };
    emit(args.common.out.as_deref(), &bytes)
}

pub fn negatives(args: FaqNegativesArgs) -> Result<()> {
    require_positive("m", args.m)?;
    let (corpus, all) = load_inputs(&args.collection, &args.queries)?;
    let queries = select(&all, args.split)?;
    let ranker = make_ranker(args.ranker, &corpus, args.seq_vectors.as_deref())?;
    let mut samples = Vec::new();
    for q in queries.queries() {
        samples.extend(
            faq_negative_samples(ranker.as_ref(), q, args.m)
                .with_context(|| format!("query {}", q.query_id))?,
        );
    }
    let mut buf = Vec::new();
    write_negatives_jsonl(&samples, &mut buf)?;
    emit(args.common.out.as_deref(), &buf)
}
