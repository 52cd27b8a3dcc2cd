use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use unirep_core::analogy::{
    build_contextual_dataset, build_word_dataset, dataset_stats, evaluate_with, load_dataset,
    parse_question_words, ppr_pnr, AnalogyDataset, CandidateRanker, CategoryAccuracy, CategoryReport,
    DatasetStats, EvalOptions, Level, ParaphraseMap, QuestionOutcome, TemplateRecord,
};
use unirep_core::embed_store::{load_word_vectors, LoadOptions};

use super::provider_specs;
use crate::common::{
    csv_bytes, emit, json_bytes, load_providers, markdown_table, open_reader, opt_num, pct,
    require_positive, Format, LoadedProvider, Provenance,
};
use crate::{BuildDatasetArgs, CrosslevelArgs, EvalAnalogyArgs, StatsArgs};

fn load_datasets(paths: &[impl AsRef<Path>]) -> Result<Vec<AnalogyDataset>> {
    let mut seen = std::collections::HashSet::new();
    paths
        .iter()
        .map(|p| {
            let ds = load_dataset(p.as_ref()).with_context(|| format!("loading dataset {}", p.as_ref().display()))?;
            if !seen.insert(ds.level()) {
                bail!("two datasets at the {} level", ds.level());
            }
            Ok(ds)
        })
        .collect()
}

fn provider_paths(providers: &[crate::common::ProviderSpec]) -> Vec<&Path> {
    providers.iter().map(|p| p.path.as_path()).collect()
}

#[derive(Serialize)]
struct EvalRow<'a> {
    provider: &'a str,
    level: Level,
    semantic: Option<f64>,
    syntactic: Option<f64>,
    all: Option<f64>,
    question_weighted: f64,
    correct: usize,
    total: usize,
    unanswerable: usize,
    categories: &'a [CategoryAccuracy],
}

#[derive(Serialize)]
struct EvalReport<'a> {
    #[serde(flatten)]
    provenance: Provenance,
    results: Vec<EvalRow<'a>>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct OutcomeLine<'a> {
    provider: &'a str,
    level: Level,
    #[serde(flatten)]
    outcome: &'a QuestionOutcome,
}

fn evaluate_all(
    providers: &[LoadedProvider],
    datasets: &[AnalogyDataset],
    threads: usize,
) -> Result<Vec<(usize, CategoryReport)>> {
    let mut out = Vec::new();
    for (pi, p) in providers.iter().enumerate() {
        for ds in datasets {
            let report = evaluate_with(&p.provider(), ds, EvalOptions { threads })
                .with_context(|| format!("evaluating {} at the {} level", p.name, ds.level()))?;
            out.push((pi, report));
        }
    }
    Ok(out)
}

pub fn eval(args: EvalAnalogyArgs) -> Result<()> {
    require_positive("threads", args.common.threads)?;
    let specs = provider_specs(&args.provider, args.word_vectors.as_ref())?;
    let mut inputs: Vec<&Path> = args.dataset.iter().map(|p| p.as_path()).collect();
    inputs.extend(provider_paths(&specs));
    let provenance = Provenance::new("eval-analogy", &args, &inputs)?;

    let datasets = load_datasets(&args.dataset)?;
    let providers = load_providers(&specs, args.common.case_fold)?;
    let reports = evaluate_all(&providers, &datasets, args.common.threads)?;

    let mut warnings = Vec::new();
    for ds in &datasets {
        for (cat, found, expected) in ds.nonstandard_counts() {
            warnings.push(format!(
                "{} level, {cat}: {found} candidates per question (reference datasets use {expected})",
                ds.level()
            ));
        }
    }

    if let Some(path) = &args.outcomes {
        let mut buf = Vec::new();
        for (pi, r) in &reports {
            for o in &r.outcomes {
                serde_json::to_writer(
                    &mut buf,
                    &OutcomeLine {
                        provider: &providers[*pi].name,
                        level: r.level,
                        outcome: o,
                    },
                )?;
                buf.push(b'\n');
            }
        }
        emit(Some(path), &buf)?;
    }

    let rows: Vec<EvalRow> = reports
        .iter()
        .map(|(pi, r)| EvalRow {
            provider: &providers[*pi].name,
            level: r.level,
            semantic: r.semantic_avg,
            syntactic: r.syntactic_avg,
            all: r.overall_avg,
            question_weighted: r.question_weighted,
            correct: r.correct,
            total: r.total,
            unanswerable: r.unanswerable,
            categories: &r.categories,
        })
        .collect();

    let bytes = match args.common.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&EvalReport {
            provenance,
            results: rows,
            warnings,
        })?,
        Format::Csv => {
            let mut lines = Vec::new();
            for r in &rows {
                for c in r.categories {
                    lines.push(vec![
                        r.provider.to_string(),
                        r.level.to_string(),
                        c.category.clone(),
                        c.correct.to_string(),
                        c.total.to_string(),
                        c.unanswerable.to_string(),
                        c.accuracy.to_string(),
                    ]);
                }
                for (name, v) in [
                    ("semantic", r.semantic),
                    ("syntactic", r.syntactic),
                    ("all", r.all),
                    ("question-weighted", Some(r.question_weighted)),
                ] {
                    lines.push(vec![
                        r.provider.to_string(),
                        r.level.to_string(),
                        format!("[{name}]"),
                        String::new(),
                        String::new(),
                        String::new(),
                        opt_num(v),
                    ]);
                }
            }
            csv_bytes(
                &["provider", "level", "category", "correct", "total", "unanswerable", "accuracy"],
                &lines,
            )?
        }
        Format::Markdown => {
            let levels: Vec<Level> = datasets.iter().map(|d| d.level()).collect();
            let mut headers = vec!["Model".to_string()];
            for l in &levels {
                let cap = format!("{}{}", l.as_str()[..1].to_uppercase(), &l.as_str()[1..]);
                headers.extend([format!("{cap} Sem."), format!("{cap} Syn."), format!("{cap} All"), format!("{cap} Weighted")]);
            }
            let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
            let table: Vec<Vec<String>> = providers
                .iter()
                .map(|p| {
                    let mut row = vec![p.name.clone()];
                    for r in rows.iter().filter(|r| r.provider == p.name) {
                        row.extend([pct(r.semantic), pct(r.syntactic), pct(r.all), pct(Some(r.question_weighted))]);
                    }
                    row
                })
                .collect();
            let mut s = markdown_table(&header_refs, &table);
            for w in &warnings {
                s.push_str(&format!("\nwarning: {w}\n"));
            }
            s.push_str(&provenance.markdown_footer());
            s.into_bytes()
        }
    };
    emit(args.common.out.as_deref(), &bytes)
}

#[derive(Serialize)]
struct CrossRow<'a> {
    provider: &'a str,
    level: Level,
    word_accuracy: f64,
    higher_accuracy: f64,
    p: usize,
    n: usize,
    pp: usize,
    pn: usize,
    ppr: Option<f64>,
    pnr: Option<f64>,
    reconstructed_accuracy: Option<f64>,
}

#[derive(Serialize)]
struct CrossReport<'a> {
    #[serde(flatten)]
    provenance: Provenance,
    results: Vec<CrossRow<'a>>,
}

pub fn crosslevel(args: CrosslevelArgs) -> Result<()> {
    require_positive("threads", args.common.threads)?;
    let specs = provider_specs(&args.provider, args.word_vectors.as_ref())?;
    let mut inputs: Vec<&Path> = vec![args.word_dataset.as_path()];
    inputs.extend(args.dataset.iter().map(|p| p.as_path()));
    inputs.extend(provider_paths(&specs));
    let provenance = Provenance::new("crosslevel", &args, &inputs)?;

    let word = load_dataset(&args.word_dataset)
        .with_context(|| format!("loading word dataset {}", args.word_dataset.display()))?;
    if word.level() != Level::Word {
        bail!("--word-dataset holds {}-level questions", word.level());
    }
    let higher = load_datasets(&args.dataset)?;
    if let Some(d) = higher.iter().find(|d| d.level() == Level::Word) {
        bail!("--dataset must be phrase or sentence level, got {}", d.level());
    }
    let providers = load_providers(&specs, args.common.case_fold)?;
    let opts = EvalOptions {
        threads: args.common.threads,
    };

    let mut rows = Vec::new();
    for p in &providers {
        let word_report = evaluate_with(&p.provider(), &word, opts)?;
        for ds in &higher {
            let r = evaluate_with(&p.provider(), ds, opts)?;
            let x = ppr_pnr(&word_report, &r)
                .with_context(|| format!("linking {} questions to word parents", ds.level()))?;
            rows.push(CrossRow {
                provider: &p.name,
                level: ds.level(),
                word_accuracy: word_report.question_weighted,
                higher_accuracy: r.question_weighted,
                p: x.p,
                n: x.n,
                pp: x.pp,
                pn: x.pn,
                ppr: x.ppr,
                pnr: x.pnr,
                reconstructed_accuracy: x.reconstructed_accuracy(),
            });
        }
    }

    let bytes = match args.common.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&CrossReport {
            provenance,
            results: rows,
        })?,
        Format::Csv => csv_bytes(
            &["provider", "level", "p", "n", "pp", "pn", "ppr", "pnr", "accuracy"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.provider.to_string(),
                        r.level.to_string(),
                        r.p.to_string(),
                        r.n.to_string(),
                        r.pp.to_string(),
                        r.pn.to_string(),
                        opt_num(r.ppr),
                        opt_num(r.pnr),
                        r.higher_accuracy.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Markdown => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.provider.to_string(),
                        r.level.to_string(),
                        pct(r.ppr),
                        pct(r.pnr),
                        format!("{}/{}", r.p, r.n),
                    ]
                })
                .collect();
            let mut s = markdown_table(&["Model", "Level", "PPR", "PNR", "|P|/|N|"], &table);
            s.push_str(&provenance.markdown_footer());
            s.into_bytes()
        }
    };
    emit(args.common.out.as_deref(), &bytes)
}

#[derive(Serialize)]
struct BuildReport {
    #[serde(flatten)]
    provenance: Provenance,
    level: Level,
    questions: usize,
    injected_gold: Option<usize>,
    skipped: Vec<String>,
    degenerate: Option<usize>,
    untemplated_categories: Vec<String>,
}

pub fn build(args: BuildDatasetArgs) -> Result<()> {
    let Some(out) = args.common.out.clone() else {
        bail!("build-dataset needs --out for the dataset file");
    };
    if let Some(k) = args.k {
        require_positive("k", k)?;
    }
    let (ds, report) = if let Some(questions) = &args.questions {
        let vectors = args.word_vectors.as_ref().context("--questions needs --word-vectors")?;
        let provenance = Provenance::new("build-dataset", &args, &[questions.as_path(), vectors.as_path()])?;
        let table = load_word_vectors(
            vectors,
            LoadOptions {
                expected_dim: None,
                case_fold: args.common.case_fold,
            },
        )?;
        let tuples = parse_question_words(open_reader(questions)?)?;
        let (ds, s) = build_word_dataset(&CandidateRanker::new(&table), &tuples, args.k)?;
        let report = BuildReport {
            provenance,
            level: Level::Word,
            questions: s.questions,
            injected_gold: Some(s.injected),
            skipped: s.skipped.iter().map(|(i, m)| format!("tuple {}: {m}", i + 1)).collect(),
            degenerate: None,
            untemplated_categories: Vec::new(),
        };
        (ds, report)
    } else if let Some(dataset) = &args.dataset {
        let templates_path = args.templates.as_ref().context("--dataset needs --templates")?;
        let level = args.level.context("--dataset needs --level")?;
        if level == Level::Word {
            bail!("--level must be phrase or sentence");
        }
        let mut inputs = vec![dataset.as_path(), templates_path.as_path()];
        if let Some(p) = &args.paraphrases {
            inputs.push(p);
        }
        let provenance = Provenance::new("build-dataset", &args, &inputs)?;
        let word = load_dataset(dataset)?;
        let mut templates = Vec::new();
        for (i, line) in std::io::BufRead::lines(open_reader(templates_path)?).enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let t: TemplateRecord = serde_json::from_str(&line)
                .with_context(|| format!("template file line {}", i + 1))?;
            templates.push(t);
        }
        let paraphrases = match &args.paraphrases {
            Some(p) => ParaphraseMap::from_tsv(open_reader(p)?)?,
            None => ParaphraseMap::new(),
        };
        let (ds, s) = build_contextual_dataset(&word, &templates, &paraphrases, level)?;
        let report = BuildReport {
            provenance,
            level,
            questions: s.questions,
            injected_gold: None,
            skipped: Vec::new(),
            degenerate: Some(s.degenerate),
            untemplated_categories: s.untemplated_categories,
        };
        (ds, report)
    } else {
        bail!("build-dataset needs either --questions with --word-vectors, or --dataset with --templates and --level");
    };

    let mut buf = Vec::new();
    ds.write_jsonl(&mut buf)?;
    emit(Some(&out), &buf)?;
    emit(args.report.as_deref(), &json_bytes(&report)?)
}

#[derive(Serialize)]
struct StatsReport {
    #[serde(flatten)]
    provenance: Provenance,
    datasets: Vec<DatasetStats>,
}

pub fn stats(args: StatsArgs) -> Result<()> {
    let inputs: Vec<&Path> = args.dataset.iter().map(|p| p.as_path()).collect();
    let provenance = Provenance::new("stats", &args, &inputs)?;
    let stats: Vec<DatasetStats> = load_datasets(&args.dataset)?.iter().map(dataset_stats).collect();
    let rows: Vec<Vec<String>> = stats
        .iter()
        .flat_map(|s| {
            s.categories.iter().map(move |c| {
                vec![
                    s.level.to_string(),
                    c.category.clone(),
                    c.pairs.to_string(),
                    c.questions.to_string(),
                    c.candidates.to_string(),
                    c.mean_tokens.map_or_else(String::new, |t| format!("{t:.2}")),
                ]
            })
        })
        .collect();
    let bytes = match args.common.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&StatsReport {
            provenance,
            datasets: stats,
        })?,
        Format::Csv => csv_bytes(&["level", "category", "pairs", "questions", "candidates", "mean_tokens"], &rows)?,
        Format::Markdown => {
            let mut s = markdown_table(&["Level", "Category", "Pairs", "Questions", "Candidates", "Mean tokens"], &rows);
            s.push_str(&provenance.markdown_footer());
            s.into_bytes()
        }
    };
    emit(args.common.out.as_deref(), &bytes)
}
