//! Analogy questions at the word, phrase and sentence level.
//!
//! A question `A : B :: C : ?` comes with a closed candidate list; the solver
//! picks the candidate closest (by cosine) to `ĉ + b̂ − â`, where hats denote
//! unit-normalized embeddings. Datasets are stored as JSONL, one question per
//! line.

mod candidates;
mod crosslevel;
mod evaluate;
mod provider;
mod solver;
mod stats;
mod templates;

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::vecmath::cosine;
pub use candidates::{
    build_word_dataset, generate_candidates, parse_question_words, CandidateList, CandidateRanker,
    WordBuildSummary, WordTuple,
};
pub use crosslevel::{ppr_pnr, CrossLevel};
pub use evaluate::{
    evaluate, evaluate_with, CategoryAccuracy, CategoryReport, EvalOptions, QuestionOutcome,
};
pub use provider::EmbeddingProvider;
pub use solver::{solve, solve_scored};
pub use stats::{dataset_stats, CategoryStats, DatasetStats};
pub use templates::{
    build_contextual_dataset, build_contextual_question, ContextualBuildSummary,
    ContextualQuestion, ParaphraseMap, TemplatePair, TemplateRecord, SLOT,
};

/// Categories averaged into the semantic score.
pub const SEMANTIC_CATEGORIES: [&str; 4] =
    ["capital-common", "capital-world", "city-state", "male-female"];

/// Categories averaged into the syntactic score.
pub const SYNTACTIC_CATEGORIES: [&str; 3] =
    ["present-participle", "positive-comparative", "positive-negative"];

/// Candidate-list length used by the reference datasets for a known category.
pub fn standard_candidate_count(category: &str) -> Option<usize> {
    if SEMANTIC_CATEGORIES.contains(&category) {
        Some(5)
    } else if SYNTACTIC_CATEGORIES.contains(&category) {
        Some(2)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Word,
    Phrase,
    Sentence,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Word, Level::Phrase, Level::Sentence];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Word => "word",
            Level::Phrase => "phrase",
            Level::Sentence => "sentence",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "word" => Ok(Level::Word),
            "phrase" => Ok(Level::Phrase),
            "sentence" => Ok(Level::Sentence),
            other => Err(format!("unknown level {other:?}")),
        }
    }
}

/// `a : b :: c : candidates[gold]`.
///
/// Items are raw text, or `seq:<id>` references into a sequence table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyQuestion {
    pub id: String,
    pub level: Level,
    pub category: String,
    pub a: String,
    pub b: String,
    pub c: String,
    pub candidates: Vec<String>,
    pub gold: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_parent: Option<String>,
    /// Set by the contextual builder when both template sides are lexically identical.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl AnalogyQuestion {
    pub fn gold_item(&self) -> &str {
        &self.candidates[self.gold]
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::InvalidQuestion {
                id: self.id.clone(),
                message,
            })
        };
        if self.candidates.len() < 2 {
            return fail(format!("needs at least 2 candidates, has {}", self.candidates.len()));
        }
        if self.gold >= self.candidates.len() {
            return fail(format!(
                "gold index {} out of range for {} candidates",
                self.gold,
                self.candidates.len()
            ));
        }
        let mut seen = HashSet::new();
        for cand in &self.candidates {
            if !seen.insert(cand.as_str()) {
                return fail(format!("duplicate candidate {cand:?}"));
            }
        }
        for (name, item) in [("a", &self.a), ("b", &self.b), ("c", &self.c)] {
            if seen.contains(item.as_str()) {
                return fail(format!("{name} = {item:?} appears among the candidates"));
            }
        }
        Ok(())
    }
}

/// Questions of one linguistic level grouped by category.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyDataset {
    level: Level,
    categories: IndexMap<String, Vec<AnalogyQuestion>>,
    candidate_count: IndexMap<String, usize>,
    ids: HashSet<String>,
}

impl AnalogyDataset {
    pub fn new(level: Level) -> Self {
        AnalogyDataset {
            level,
            categories: IndexMap::new(),
            candidate_count: IndexMap::new(),
            ids: HashSet::new(),
        }
    }

    /// Validates and adds a question. Categories keep first-seen order.
    pub fn push(&mut self, q: AnalogyQuestion) -> Result<()> {
        q.validate()?;
        let invalid = |message: String| Error::InvalidQuestion {
            id: q.id.clone(),
            message,
        };
        if q.level != self.level {
            return Err(invalid(format!(
                "level {} in a {} dataset",
                q.level, self.level
            )));
        }
        if self.ids.contains(&q.id) {
            return Err(invalid("duplicate question id".into()));
        }
        let count = *self
            .candidate_count
            .entry(q.category.clone())
            .or_insert(q.candidates.len());
        if count != q.candidates.len() {
            return Err(invalid(format!(
                "category {} uses {} candidates, question has {}",
                q.category,
                count,
                q.candidates.len()
            )));
        }
        self.ids.insert(q.id.clone());
        self.categories
            .entry(q.category.clone())
            .or_default()
            .push(q);
        Ok(())
    }

    pub fn from_questions(questions: impl IntoIterator<Item = AnalogyQuestion>) -> Result<Self> {
        let mut iter = questions.into_iter().peekable();
        let level = iter
            .peek()
            .map(|q| q.level)
            .ok_or_else(|| Error::EmptyInput("analogy dataset has no questions".into()))?;
        let mut ds = AnalogyDataset::new(level);
        for q in iter {
            ds.push(q)?;
        }
        Ok(ds)
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn categories(&self) -> impl Iterator<Item = (&str, &[AnalogyQuestion])> {
        self.categories
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn candidate_count(&self, category: &str) -> Option<usize> {
        self.candidate_count.get(category).copied()
    }

    /// All questions, category by category.
    pub fn questions(&self) -> impl Iterator<Item = &AnalogyQuestion> {
        self.categories.values().flatten()
    }

    /// Categories whose candidate count differs from the reference datasets
    /// (5 for semantic, 2 for syntactic categories).
    pub fn nonstandard_counts(&self) -> Vec<(String, usize, usize)> {
        self.candidate_count
            .iter()
            .filter_map(|(cat, &n)| {
                standard_candidate_count(cat)
                    .filter(|&want| want != n)
                    .map(|want| (cat.clone(), n, want))
            })
            .collect()
    }

    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut questions = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<jsonl>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let q: AnalogyQuestion =
                serde_json::from_str(&line).map_err(|source| Error::Json { line: i + 1, source })?;
            questions.push(q);
        }
        Self::from_questions(questions)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for q in self.questions() {
            serde_json::to_writer(&mut w, q)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<AnalogyDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    AnalogyDataset::from_jsonl(BufReader::new(file))
}
