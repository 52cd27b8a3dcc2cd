//! Training-data preparation from paraphrase-database dumps and NLI files.
//!
//! Pipeline: parse `|||`-delimited lines, drop Exclusion/OtherRelated, merge
//! both entailment directions into `Entailment`, optionally deduplicate,
//! sample an equal number of pairs per label, then emit paraphrase
//! identification examples (one positive plus `k` random negatives per pair)
//! and 3-way entailment examples. All randomness comes from a seeded ChaCha
//! generator.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    Equivalence,
    ForwardEntailment,
    ReverseEntailment,
    /// Either entailment direction after merging.
    Entailment,
    Independent,
    Exclusion,
    OtherRelated,
}

impl Relation {
    /// Labels kept after filtering, in sampling order.
    pub const MERGED: [Relation; 3] = [Relation::Equivalence, Relation::Entailment, Relation::Independent];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Equivalence => "Equivalence",
            Relation::ForwardEntailment => "ForwardEntailment",
            Relation::ReverseEntailment => "ReverseEntailment",
            Relation::Entailment => "Entailment",
            Relation::Independent => "Independent",
            Relation::Exclusion => "Exclusion",
            Relation::OtherRelated => "OtherRelated",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Equivalence" => Relation::Equivalence,
            "ForwardEntailment" => Relation::ForwardEntailment,
            "ReverseEntailment" => Relation::ReverseEntailment,
            "Entailment" => Relation::Entailment,
            "Independent" => Relation::Independent,
            "Exclusion" => Relation::Exclusion,
            "OtherRelated" => Relation::OtherRelated,
            other => return Err(Error::format(0, format!("unknown relation label {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParaphraseRecord {
    pub source: String,
    pub target: String,
    pub label: Relation,
}

impl ParaphraseRecord {
    pub fn new(source: impl Into<String>, target: impl Into<String>, label: Relation) -> Result<Self> {
        let (source, target) = (source.into(), target.into());
        if source.is_empty() || target.is_empty() {
            return Err(Error::format(0, "paraphrase record with empty side"));
        }
        Ok(ParaphraseRecord { source, target, label })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PpdbParse {
    pub records: Vec<ParaphraseRecord>,
    /// Lines skipped because fields or the relation tag could not be read.
    pub malformed: usize,
}

/// Reads `|||`-delimited lines.
///
/// With four or more fields the layout is `LHS ||| phrase ||| paraphrase |||
/// ... ||| relation`; with exactly three it is `phrase ||| paraphrase |||
/// relation`. The relation is always the last field.
pub fn parse_ppdb<R: BufRead>(reader: R) -> Result<PpdbParse> {
    let mut out = PpdbParse::default();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<ppdb>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split("|||").map(str::trim).collect();
        let (source, target) = match fields.len() {
            0..=2 => {
                out.malformed += 1;
                continue;
            }
            3 => (fields[0], fields[1]),
            _ => (fields[1], fields[2]),
        };
        let parsed = fields[fields.len() - 1]
            .parse::<Relation>()
            .and_then(|label| ParaphraseRecord::new(source, target, label));
        match parsed {
            Ok(r) => out.records.push(r),
            Err(_) => out.malformed += 1,
        }
    }
    Ok(out)
}

/// Drops Exclusion and OtherRelated; relabels both entailment directions as
/// Entailment.
pub fn filter_and_merge(records: impl IntoIterator<Item = ParaphraseRecord>) -> Vec<ParaphraseRecord> {
    records
        .into_iter()
        .filter_map(|mut r| {
            r.label = match r.label {
                Relation::Exclusion | Relation::OtherRelated => return None,
                Relation::ForwardEntailment | Relation::ReverseEntailment => Relation::Entailment,
                other => other,
            };
            Some(r)
        })
        .collect()
}

/// Keeps the first record of every exact `(source, target)` pair.
pub fn dedup_pairs(records: Vec<ParaphraseRecord>) -> (Vec<ParaphraseRecord>, usize) {
    let before = records.len();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let kept: Vec<ParaphraseRecord> = records
        .into_iter()
        .filter(|r| seen.insert((r.source.clone(), r.target.clone())))
        .collect();
    let removed = before - kept.len();
    (kept, removed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedSample {
    pub records: Vec<ParaphraseRecord>,
    /// Labels with fewer than `per_label` records, with the number available.
    pub shortfalls: Vec<(Relation, usize)>,
    /// Records whose label is not one of the merged three.
    pub ignored: usize,
}

/// Uniformly samples `per_label` records of each merged label (all of them
/// when fewer are available). Sampled records keep their input order within
/// a label; labels are concatenated Equivalence, Entailment, Independent.
pub fn balanced_sample(records: &[ParaphraseRecord], per_label: usize, seed: u64) -> BalancedSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut shortfalls = Vec::new();
    for label in Relation::MERGED {
        let members: Vec<usize> = (0..records.len()).filter(|&i| records[i].label == label).collect();
        if members.len() <= per_label {
            if members.len() < per_label {
                shortfalls.push((label, members.len()));
            }
            out.extend(members.iter().map(|&i| records[i].clone()));
            continue;
        }
        let mut picked = index::sample(&mut rng, members.len(), per_label).into_vec();
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|p| records[members[p]].clone()));
    }
    let ignored = records
        .iter()
        .filter(|r| !Relation::MERGED.contains(&r.label))
        .count();
    BalancedSample {
        records: out,
        shortfalls,
        ignored,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "paraphrase-id")]
    ParaphraseId,
    #[serde(rename = "entailment-3way")]
    Entailment3Way,
    #[serde(rename = "nli")]
    Nli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExampleLabel {
    Equivalence,
    Entailment,
    Independent,
    #[serde(rename = "positive")]
    Positive,
    #[serde(rename = "negative")]
    Negative,
    #[serde(rename = "entailment")]
    NliEntailment,
    #[serde(rename = "contradiction")]
    NliContradiction,
    #[serde(rename = "neutral")]
    NliNeutral,
}

impl ExampleLabel {
    pub fn task(self) -> Task {
        match self {
            ExampleLabel::Equivalence | ExampleLabel::Entailment | ExampleLabel::Independent => {
                Task::Entailment3Way
            }
            ExampleLabel::Positive | ExampleLabel::Negative => Task::ParaphraseId,
            ExampleLabel::NliEntailment | ExampleLabel::NliContradiction | ExampleLabel::NliNeutral => {
                Task::Nli
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub seq_a: String,
    pub seq_b: String,
    pub label: ExampleLabel,
    pub task: Task,
}

impl TrainingExample {
    fn new(seq_a: &str, seq_b: &str, label: ExampleLabel) -> Self {
        TrainingExample {
            seq_a: seq_a.to_string(),
            seq_b: seq_b.to_string(),
            label,
            task: label.task(),
        }
    }
}

/// Where negative partners are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativePool {
    #[default]
    Targets,
    SourcesAndTargets,
}

/// For every record: `(source, target, positive)` followed by `k` pairs
/// `(source, s, negative)` with `s` drawn uniformly without replacement from
/// the distinct pool strings other than the record's own source and target.
pub fn make_paraphrase_negatives(
    records: &[ParaphraseRecord],
    k: usize,
    seed: u64,
    pool: NegativePool,
) -> Result<Vec<TrainingExample>> {
    if k == 0 {
        return Err(Error::Sampling("k must be at least 1".into()));
    }
    let mut seen = HashSet::new();
    let mut strings: Vec<&str> = Vec::new();
    for r in records {
        if pool == NegativePool::SourcesAndTargets && seen.insert(r.source.as_str()) {
            strings.push(&r.source);
        }
        if seen.insert(r.target.as_str()) {
            strings.push(&r.target);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(records.len() * (k + 1));
    for r in records {
        let excluded = [r.source.as_str(), r.target.as_str()];
        let available = strings.len()
            - excluded
                .iter()
                .collect::<HashSet<_>>()
                .into_iter()
                .filter(|s| seen.contains(**s))
                .count();
        if available < k {
            return Err(Error::Sampling(format!(
                "only {available} candidate sequences for {k} negatives of {:?}",
                r.source
            )));
        }
        out.push(TrainingExample::new(&r.source, &r.target, ExampleLabel::Positive));
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        while chosen.len() < k {
            let i = rng.gen_range(0..strings.len());
            if excluded.contains(&strings[i]) || chosen.contains(&i) {
                continue;
            }
            chosen.push(i);
        }
        out.extend(
            chosen
                .into_iter()
                .map(|i| TrainingExample::new(&r.source, strings[i], ExampleLabel::Negative)),
        );
    }
    Ok(out)
}

/// One 3-way example per merged record.
pub fn make_entailment_examples(records: &[ParaphraseRecord]) -> Result<Vec<TrainingExample>> {
    records
        .iter()
        .map(|r| {
            let label = match r.label {
                Relation::Equivalence => ExampleLabel::Equivalence,
                Relation::Entailment => ExampleLabel::Entailment,
                Relation::Independent => ExampleLabel::Independent,
                other => {
                    return Err(Error::format(
                        0,
                        format!("label {other} is not allowed after merging"),
                    ))
                }
            };
            Ok(TrainingExample::new(&r.source, &r.target, label))
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct NliLine {
    sentence1: String,
    sentence2: String,
    gold_label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NliParse {
    pub examples: Vec<TrainingExample>,
    /// Lines without a consensus label (for example `-`).
    pub skipped: usize,
}

/// Reads SNLI/MultiNLI JSONL (`sentence1`, `sentence2`, `gold_label`).
pub fn read_nli_jsonl<R: BufRead>(reader: R) -> Result<NliParse> {
    let mut out = NliParse::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<nli>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: NliLine = serde_json::from_str(&line).map_err(|source| Error::Json { line: i + 1, source })?;
        let label = match rec.gold_label.as_str() {
            "entailment" => ExampleLabel::NliEntailment,
            "contradiction" => ExampleLabel::NliContradiction,
            "neutral" => ExampleLabel::NliNeutral,
            _ => {
                out.skipped += 1;
                continue;
            }
        };
        out.examples.push(TrainingExample::new(&rec.sentence1, &rec.sentence2, label));
    }
    Ok(out)
}

pub fn write_examples_jsonl<W: Write>(examples: &[TrainingExample], mut w: W) -> std::io::Result<()> {
    for e in examples {
        serde_json::to_writer(&mut w, e)?;
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn rec(s: &str, t: &str, label: Relation) -> ParaphraseRecord {
        ParaphraseRecord::new(s, t, label).unwrap()
    }

    const SIX: [Relation; 6] = [
        Relation::Equivalence,
        Relation::ForwardEntailment,
        Relation::ReverseEntailment,
        Relation::Independent,
        Relation::Exclusion,
        Relation::OtherRelated,
    ];

    #[test]
    fn filter_examples() {
        let out = filter_and_merge([
            rec("a", "b", Relation::Equivalence),
            rec("c", "d", Relation::Exclusion),
            rec("e", "f", Relation::ReverseEntailment),
        ]);
        assert_eq!(
            out.iter().map(|r| r.label).collect::<Vec<_>>(),
            [Relation::Equivalence, Relation::Entailment]
        );
        assert!(filter_and_merge(Vec::new()).is_empty());
        let all = filter_and_merge(SIX.iter().enumerate().map(|(i, &l)| rec(&format!("s{i}"), "t", l)));
        assert_eq!(
            all.iter().map(|r| r.label).collect::<Vec<_>>(),
            [Relation::Equivalence, Relation::Entailment, Relation::Entailment, Relation::Independent]
        );
    }

    #[test]
    fn unknown_label_is_a_format_error() {
        assert!(matches!("Synonym".parse::<Relation>(), Err(Error::Format { .. })));
        assert!(ParaphraseRecord::new("", "x", Relation::Equivalence).is_err());
    }

    #[test]
    fn ppdb_lines() {
        let text = "\
[NP] ||| the united states ||| the us ||| PPDB2.0Score=3.1 ||| 0-0 ||| Equivalence
[VP] ||| was hired ||| was employed ||| x=1 ||| ||| ForwardEntailment
a lot ||| many ||| Independent
broken line
[X] ||| a ||| b ||| f ||| ||| Unrelated
";
        let p = parse_ppdb(text.as_bytes()).unwrap();
        assert_eq!(p.records.len(), 3);
        assert_eq!(p.malformed, 2);
        assert_eq!(p.records[0], rec("the united states", "the us", Relation::Equivalence));
        assert_eq!(p.records[2], rec("a lot", "many", Relation::Independent));
    }

    #[test]
    fn balanced_examples() {
        let mut records = Vec::new();
        for l in Relation::MERGED {
            for i in 0..3 {
                records.push(rec(&format!("{l}{i}"), "t", l));
            }
        }
        let s = balanced_sample(&records, 2, 7);
        assert_eq!(s.records.len(), 6);
        assert!(s.shortfalls.is_empty());
        let again = balanced_sample(&records, 2, 7);
        assert_eq!(s, again);
        let short = balanced_sample(&records[..4], 2, 7);
        assert_eq!(short.records.len(), 3);
        assert_eq!(
            short.shortfalls,
            [(Relation::Entailment, 1), (Relation::Independent, 0)]
        );
    }

    #[test]
    fn paraphrase_negative_counts() {
        let records: Vec<_> = (0..5)
            .map(|i| rec(&format!("src{i}"), &format!("tgt{i}"), Relation::Equivalence))
            .collect();
        let ex = make_paraphrase_negatives(&records, 3, 11, NegativePool::Targets).unwrap();
        assert_eq!(ex.iter().filter(|e| e.label == ExampleLabel::Positive).count(), 5);
        assert_eq!(ex.iter().filter(|e| e.label == ExampleLabel::Negative).count(), 15);
        for chunk in ex.chunks(4) {
            let pos = &chunk[0];
            for neg in &chunk[1..] {
                assert_eq!(neg.seq_a, pos.seq_a);
                assert_ne!(neg.seq_b, pos.seq_b);
                assert_ne!(neg.seq_b, neg.seq_a);
                assert_eq!(neg.task, Task::ParaphraseId);
            }
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_examples_jsonl(&ex, &mut a).unwrap();
        write_examples_jsonl(&make_paraphrase_negatives(&records, 3, 11, NegativePool::Targets).unwrap(), &mut b)
            .unwrap();
        assert_eq!(a, b);
        assert!(String::from_utf8(a)
            .unwrap()
            .starts_with(r#"{"seq_a":"src0","seq_b":"tgt0","label":"positive","task":"paraphrase-id"}"#));
    }

    #[test]
    fn paraphrase_negative_pool_too_small() {
        let records: Vec<_> = (0..3)
            .map(|i| rec(&format!("s{i}"), &format!("t{i}"), Relation::Equivalence))
            .collect();
        assert!(matches!(
            make_paraphrase_negatives(&records, 3, 1, NegativePool::Targets),
            Err(Error::Sampling(_))
        ));
        assert!(make_paraphrase_negatives(&records, 3, 1, NegativePool::SourcesAndTargets).is_ok());
    }

    #[test]
    fn self_pairs_are_excluded_even_when_source_is_a_target() {
        // record 0's source equals record 1's target
        let records = vec![
            rec("x", "y", Relation::Equivalence),
            rec("z", "x", Relation::Equivalence),
            rec("p", "q", Relation::Equivalence),
            rec("r", "s", Relation::Equivalence),
        ];
        for seed in 0..50 {
            let ex = make_paraphrase_negatives(&records, 2, seed, NegativePool::Targets).unwrap();
            for e in ex.iter().filter(|e| e.label == ExampleLabel::Negative) {
                assert_ne!(e.seq_a, e.seq_b);
            }
        }
    }

    #[test]
    fn entailment_examples() {
        let ex = make_entailment_examples(&[
            rec("a", "b", Relation::Equivalence),
            rec("c", "d", Relation::Entailment),
            rec("e", "f", Relation::Independent),
        ])
        .unwrap();
        assert_eq!(
            ex.iter().map(|e| e.label).collect::<Vec<_>>(),
            [ExampleLabel::Equivalence, ExampleLabel::Entailment, ExampleLabel::Independent]
        );
        assert!(ex.iter().all(|e| e.task == Task::Entailment3Way));
        assert!(make_entailment_examples(&[rec("a", "b", Relation::ForwardEntailment)]).is_err());
    }

    #[test]
    fn nli_pass_through() {
        let text = r#"{"sentence1":"A man sleeps.","sentence2":"A person rests.","gold_label":"entailment","pairID":"1"}
{"sentence1":"A","sentence2":"B","gold_label":"-"}
{"sentence1":"C","sentence2":"D","gold_label":"neutral"}
"#;
        let p = read_nli_jsonl(text.as_bytes()).unwrap();
        assert_eq!(p.examples.len(), 2);
        assert_eq!(p.skipped, 1);
        assert_eq!(p.examples[0].task, Task::Nli);
        let mut buf = Vec::new();
        write_examples_jsonl(&p.examples[1..], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"seq_a\":\"C\",\"seq_b\":\"D\",\"label\":\"neutral\",\"task\":\"nli\"}\n"
        );
    }

    #[test]
    fn histogram_after_pipeline() {
        let records: Vec<_> = SIX
            .iter()
            .flat_map(|&l| (0..10).map(move |i| rec(&format!("{l}-{i}"), "t", l)))
            .collect();
        let merged = filter_and_merge(records);
        assert!(merged.len() <= 60);
        let mut hist: HashMap<Relation, usize> = HashMap::new();
        for r in &merged {
            *hist.entry(r.label).or_default() += 1;
        }
        assert_eq!(hist[&Relation::Entailment], 20);
        let s = balanced_sample(&merged, 15, 3);
        let mut hist: HashMap<Relation, usize> = HashMap::new();
        for r in &s.records {
            *hist.entry(r.label).or_default() += 1;
        }
        assert_eq!(hist[&Relation::Equivalence], 10);
        assert_eq!(hist[&Relation::Entailment], 15);
        assert_eq!(hist[&Relation::Independent], 10);
    }
}
