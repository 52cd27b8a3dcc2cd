//! Lifting word questions into phrase and sentence questions.
//!
//! Each word is placed into a context template. The A and C terms use the
//! A-side template; B and every candidate use the B-side template after the
//! paraphrase map has been applied, so that the two sides of the analogy do
//! not share their context words verbatim.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{AnalogyDataset, AnalogyQuestion, Level};
use crate::composer::{Tokenizer, WhitespaceTokenizer};
use crate::error::{Error, Result};

/// Slot marker replaced by the word being contextualized.
pub const SLOT: &str = "{X}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplatePair {
    pub a_side: String,
    pub b_side: String,
}

impl TemplatePair {
    pub fn new(a_side: impl Into<String>, b_side: impl Into<String>) -> Self {
        TemplatePair {
            a_side: a_side.into(),
            b_side: b_side.into(),
        }
    }
}

/// One line of a template file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateRecord {
    pub category: String,
    pub level: Level,
    pub a_side: String,
    pub b_side: String,
}

impl TemplateRecord {
    pub fn pair(&self) -> TemplatePair {
        TemplatePair::new(self.a_side.clone(), self.b_side.clone())
    }
}

/// Phrase-level substitutions applied to B-side templates.
///
/// Matching is on whitespace-separated words, left to right, longest source
/// phrase first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParaphraseMap {
    entries: Vec<(Vec<String>, String)>,
}

impl ParaphraseMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, from: &str, to: &str) {
        let words: Vec<String> = from.split_whitespace().map(str::to_string).collect();
        if words.is_empty() {
            return;
        }
        self.entries.retain(|(w, _)| *w != words);
        self.entries.push((words, to.to_string()));
        // longest first, ties by insertion order
        self.entries.sort_by_key(|(w, _)| std::cmp::Reverse(w.len()));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `phrase<TAB>paraphrase` lines.
    pub fn from_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut map = ParaphraseMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<paraphrases>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let Some((from, to)) = line.split_once('\t') else {
                return Err(Error::format(i + 1, "expected phrase<TAB>paraphrase"));
            };
            map.insert(from.trim(), to.trim());
        }
        Ok(map)
    }

    pub fn apply(&self, text: &str) -> String {
        let words: Vec<&str> = text.split_whitespace().collect();
        let mut out: Vec<&str> = Vec::with_capacity(words.len());
        let mut i = 0;
        'outer: while i < words.len() {
            for (from, to) in &self.entries {
                let n = from.len();
                if i + n <= words.len() && words[i..i + n].iter().zip(from).all(|(w, f)| w == f) {
                    out.extend(to.split_whitespace());
                    i += n;
                    continue 'outer;
                }
            }
            out.push(words[i]);
            i += 1;
        }
        out.join(" ")
    }
}

fn check_slot(template: &str) -> Result<()> {
    match template.matches(SLOT).count() {
        1 => Ok(()),
        n => Err(Error::Template(format!(
            "template {template:?} has {n} slot markers, expected exactly one {SLOT}"
        ))),
    }
}

fn context_tokens(template: &str) -> Vec<String> {
    WhitespaceTokenizer.tokens(&template.replace(SLOT, " "))
}

fn fill(template: &str, word: &str) -> String {
    template.replace(SLOT, word)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextualQuestion {
    pub question: AnalogyQuestion,
    /// Both sides carry the same context words, so bag-of-words models see
    /// the word-level question unchanged.
    pub degenerate: bool,
}

/// Instantiates `word_q` at `level` with the given templates.
pub fn build_contextual_question(
    word_q: &AnalogyQuestion,
    templates: &TemplatePair,
    paraphrases: &ParaphraseMap,
    level: Level,
) -> Result<ContextualQuestion> {
    if word_q.level != Level::Word {
        return Err(Error::Template(format!(
            "question {} is {}-level, expected word-level",
            word_q.id, word_q.level
        )));
    }
    if level == Level::Word {
        return Err(Error::Template("target level must be phrase or sentence".into()));
    }
    check_slot(&templates.a_side)?;
    check_slot(&templates.b_side)?;
    let b_side = paraphrases.apply(&templates.b_side);
    check_slot(&b_side)?;

    let degenerate = context_tokens(&templates.a_side) == context_tokens(&b_side);
    let question = AnalogyQuestion {
        id: format!("{}@{}", word_q.id, level),
        level,
        category: word_q.category.clone(),
        a: fill(&templates.a_side, &word_q.a),
        b: fill(&b_side, &word_q.b),
        c: fill(&templates.a_side, &word_q.c),
        candidates: word_q.candidates.iter().map(|d| fill(&b_side, d)).collect(),
        gold: word_q.gold,
        word_parent: Some(word_q.id.clone()),
        degenerate,
    };
    question.validate()?;
    Ok(ContextualQuestion {
        question,
        degenerate,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextualBuildSummary {
    pub questions: usize,
    pub degenerate: usize,
    /// Categories of the word dataset with no template at the target level.
    pub untemplated_categories: Vec<String>,
}

/// Lifts every word question whose category has templates at `level`.
///
/// Within a category, templates are assigned round-robin in file order, so
/// each word question yields exactly one derived question.
pub fn build_contextual_dataset(
    word_ds: &AnalogyDataset,
    templates: &[TemplateRecord],
    paraphrases: &ParaphraseMap,
    level: Level,
) -> Result<(AnalogyDataset, ContextualBuildSummary)> {
    let mut by_category: HashMap<&str, Vec<TemplatePair>> = HashMap::new();
    for t in templates.iter().filter(|t| t.level == level) {
        by_category.entry(&t.category).or_default().push(t.pair());
    }
    let mut ds = AnalogyDataset::new(level);
    let mut summary = ContextualBuildSummary::default();
    for (category, questions) in word_ds.categories() {
        let Some(pairs) = by_category.get(category) else {
            summary.untemplated_categories.push(category.to_string());
            continue;
        };
        for (i, q) in questions.iter().enumerate() {
            let built = build_contextual_question(q, &pairs[i % pairs.len()], paraphrases, level)?;
            summary.degenerate += usize::from(built.degenerate);
            ds.push(built.question)?;
            summary.questions += 1;
        }
    }
    if ds.is_empty() {
        return Err(Error::Build(format!("no templates matched at {level} level")));
    }
    Ok((ds, summary))
}
