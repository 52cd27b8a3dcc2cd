use std::io::BufRead;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use unirep_core::analogy::EmbeddingProvider;
use unirep_core::projection::{
    difference_coherence, pair_differences, pca2_labeled, pca2_normalized, write_differences_csv,
    Coherence, ItemPair, PairDifference, ProjectionResult,
};

use crate::common::{
    emit, json_bytes, open_reader, LoadedProvider, ProviderKind, ProviderSpec, Format, Provenance,
};
use crate::ProjectArgs;

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in open_reader(path)?.lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() {
            out.push(t.to_string());
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct PcaReport<'a> {
    #[serde(flatten)]
    provenance: Provenance,
    normalized: bool,
    projection: &'a ProjectionResult,
}

#[derive(Serialize)]
struct DiffReport<'a> {
    #[serde(flatten)]
    provenance: Provenance,
    coherence: Coherence,
    differences: &'a [PairDifference],
}

pub fn run(args: ProjectArgs) -> Result<()> {
    let spec = match (&args.provider, &args.word_vectors) {
        (Some(p), _) => p.clone(),
        (None, Some(w)) => ProviderSpec {
            name: "word-bow".into(),
            kind: ProviderKind::WordBow,
            path: w.clone(),
        },
        (None, None) => bail!("project needs --provider or --word-vectors"),
    };
    let input = args.items.as_ref().or(args.pairs.as_ref()).context("project needs --items or --pairs")?;
    let provenance = Provenance::new("project", &args, &[input.as_path(), spec.path.as_path()])?;
    let loaded = LoadedProvider::load(&spec, args.common.case_fold)?;
    let provider = loaded.provider();
    let format = args.common.format.unwrap_or(Format::Csv);

    let bytes = if let Some(items) = &args.items {
        let labels = read_lines(items)?;
        let vectors = embed_all(&provider, &labels)?;
        let labeled: Vec<(&str, &[f64])> = labels.iter().map(String::as_str).zip(vectors.iter().map(Vec::as_slice)).collect();
        let result = if args.raw { pca2_labeled(&labeled)? } else { pca2_normalized(&labeled)? };
        match format {
            Format::Csv => {
                let mut buf = Vec::new();
                result.write_csv(&mut buf)?;
                buf
            }
            Format::Json => json_bytes(&PcaReport {
                provenance,
                normalized: !args.raw,
                projection: &result,
            })?,
            Format::Markdown => bail!("project supports csv and json output"),
        }
    } else {
        let pairs_path = args.pairs.as_ref().expect("checked above");
        let mut pairs = Vec::new();
        for (i, line) in read_lines(pairs_path)?.iter().enumerate() {
            let f: Vec<&str> = line.split('\t').collect();
            let [cat, a, b] = f.as_slice() else {
                bail!("{} entry {}: expected category<TAB>a<TAB>b", pairs_path.display(), i + 1);
            };
            pairs.push(ItemPair::new(*cat, *a, *b));
        }
        let diffs = pair_differences(&provider, &pairs)?;
        match format {
            Format::Csv => {
                let mut buf = Vec::new();
                write_differences_csv(&diffs, &mut buf)?;
                buf
            }
            Format::Json => json_bytes(&DiffReport {
                provenance,
                coherence: difference_coherence(&diffs),
                differences: &diffs,
            })?,
            Format::Markdown => bail!("project supports csv and json output"),
        }
    };
    emit(args.common.out.as_deref(), &bytes)
}

fn embed_all(provider: &EmbeddingProvider<'_>, items: &[String]) -> Result<Vec<Vec<f64>>> {
    items
        .iter()
        .map(|i| Ok(provider.embed(i).with_context(|| format!("embedding {i:?}"))?.into_owned()))
        .collect()
}
