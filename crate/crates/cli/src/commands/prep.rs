use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use unirep_core::data_prep::{
    balanced_sample, dedup_pairs, filter_and_merge, make_entailment_examples,
    make_paraphrase_negatives, parse_ppdb, read_nli_jsonl, write_examples_jsonl, NegativePool,
    Relation, TrainingExample,
};

use crate::common::{emit, json_bytes, open_reader, require_positive, Provenance};
use crate::PrepPpdbArgs;

#[derive(Serialize)]
struct PrepReport {
    #[serde(flatten)]
    provenance: Provenance,
    parsed: usize,
    malformed: usize,
    raw_histogram: BTreeMap<Relation, usize>,
    after_filter: usize,
    duplicates_removed: usize,
    merged_histogram: BTreeMap<Relation, usize>,
    sampled: usize,
    shortfalls: BTreeMap<Relation, usize>,
    paraphrase_examples: usize,
    entailment_examples: usize,
    nli_examples: usize,
    nli_skipped: usize,
}

fn histogram<'a>(labels: impl Iterator<Item = &'a Relation>) -> BTreeMap<Relation, usize> {
    let mut h = BTreeMap::new();
    for l in labels {
        *h.entry(*l).or_default() += 1;
    }
    h
}

fn write(dir: &Path, name: &str, examples: &[TrainingExample]) -> Result<()> {
    let mut buf = Vec::new();
    write_examples_jsonl(examples, &mut buf)?;
    emit(Some(&dir.join(name)), &buf)
}

pub fn ppdb(args: PrepPpdbArgs) -> Result<()> {
    require_positive("per-label", args.per_label)?;
    require_positive("k", args.k)?;
    let Some(dir) = args.common.out.clone() else {
        bail!("prep-ppdb needs --out DIR");
    };
    let mut inputs = vec![args.input.as_path()];
    inputs.extend(args.nli.iter().map(|p| p.as_path()));
    let provenance = Provenance::new("prep-ppdb", &args, &inputs)?;

    let parsed = parse_ppdb(open_reader(&args.input)?)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    let raw_histogram = histogram(parsed.records.iter().map(|r| &r.label));
    let n_parsed = parsed.records.len();
    let merged = filter_and_merge(parsed.records);
    let after_filter = merged.len();
    let (merged, duplicates_removed) = if args.no_dedup { (merged, 0) } else { dedup_pairs(merged) };
    let sample = balanced_sample(&merged, args.per_label, args.seed);
    for (label, available) in &sample.shortfalls {
        eprintln!(
            "warning: only {available} {label} pairs available, fewer than --per-label {}",
            args.per_label
        );
    }
    let pool = if args.pool_sources {
        NegativePool::SourcesAndTargets
    } else {
        NegativePool::Targets
    };
    let paraphrase = make_paraphrase_negatives(&sample.records, args.k, args.seed, pool)?;
    let entailment = make_entailment_examples(&sample.records)?;
    let mut nli = Vec::new();
    let mut nli_skipped = 0;
    for p in &args.nli {
        let parsed = read_nli_jsonl(open_reader(p)?).with_context(|| format!("reading {}", p.display()))?;
        nli.extend(parsed.examples);
        nli_skipped += parsed.skipped;
    }

    write(&dir, "paraphrase_id.jsonl", &paraphrase)?;
    write(&dir, "entailment.jsonl", &entailment)?;
    if !args.nli.is_empty() {
        write(&dir, "nli.jsonl", &nli)?;
    }
    let report = PrepReport {
        provenance,
        parsed: n_parsed,
        malformed: parsed.malformed,
        raw_histogram,
        after_filter,
        duplicates_removed,
        merged_histogram: histogram(merged.iter().map(|r| &r.label)),
        sampled: sample.records.len(),
        shortfalls: sample.shortfalls.into_iter().collect(),
        paraphrase_examples: paraphrase.len(),
        entailment_examples: entailment.len(),
        nli_examples: nli.len(),
        nli_skipped,
    };
    emit(Some(&dir.join("report.json")), &json_bytes(&report)?)
}
