use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::solve_scored;
use super::{AnalogyDataset, AnalogyQuestion, EmbeddingProvider, Level};
use super::{SEMANTIC_CATEGORIES, SYNTACTIC_CATEGORIES};
use crate::error::{Error, Result};

/// Result of solving one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionOutcome {
    pub id: String,
    pub category: String,
    pub gold: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_parent: Option<String>,
    /// `None` when the question was unanswerable.
    pub predicted: Option<usize>,
    pub correct: bool,
    /// 1-based rank of the gold candidate under the solver's tie rule.
    pub gold_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAccuracy {
    pub category: String,
    pub correct: usize,
    pub total: usize,
    pub unanswerable: usize,
    pub accuracy: f64,
}

/// Per-category accuracies and level averages for one dataset.
///
/// `semantic_avg` and `syntactic_avg` average the accuracies of the member
/// categories present in the dataset; `overall_avg` is the mean of the two.
/// `question_weighted` is plain correct/total over every question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub level: Level,
    pub categories: Vec<CategoryAccuracy>,
    pub semantic_avg: Option<f64>,
    pub syntactic_avg: Option<f64>,
    pub overall_avg: Option<f64>,
    pub question_weighted: f64,
    pub correct: usize,
    pub total: usize,
    pub unanswerable: usize,
    pub outcomes: Vec<QuestionOutcome>,
}

impl CategoryReport {
    pub fn category(&self, name: &str) -> Option<&CategoryAccuracy> {
        self.categories.iter().find(|c| c.category == name)
    }

    pub fn outcome(&self, id: &str) -> Option<&QuestionOutcome> {
        self.outcomes.iter().find(|o| o.id == id)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    /// Worker threads; 1 evaluates on the calling thread.
    pub threads: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { threads: 1 }
    }
}

fn outcome(provider: &EmbeddingProvider<'_>, q: &AnalogyQuestion) -> QuestionOutcome {
    let mut out = QuestionOutcome {
        id: q.id.clone(),
        category: q.category.clone(),
        gold: q.gold,
        word_parent: q.word_parent.clone(),
        predicted: None,
        correct: false,
        gold_rank: None,
        error: None,
    };
    match solve_scored(provider, q) {
        Ok(scores) => {
            let g = scores[q.gold];
            let ahead = scores
                .iter()
                .enumerate()
                .filter(|&(j, &s)| s > g || (s == g && j < q.gold))
                .count();
            out.predicted = Some(super::solver::argmax_first(&scores));
            out.gold_rank = Some(ahead + 1);
            out.correct = ahead == 0;
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn evaluate(provider: &EmbeddingProvider<'_>, ds: &AnalogyDataset) -> Result<CategoryReport> {
    evaluate_with(provider, ds, EvalOptions::default())
}

/// Solves every question and aggregates. The report does not depend on
/// `opts.threads`.
pub fn evaluate_with(
    provider: &EmbeddingProvider<'_>,
    ds: &AnalogyDataset,
    opts: EvalOptions,
) -> Result<CategoryReport> {
    if ds.is_empty() {
        return Err(Error::EmptyInput("analogy dataset has no questions".into()));
    }
    let questions: Vec<&AnalogyQuestion> = ds.questions().collect();
    let outcomes: Vec<QuestionOutcome> = if opts.threads <= 1 {
        questions.iter().map(|q| outcome(provider, q)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::Build(format!("thread pool: {e}")))?;
        pool.install(|| questions.par_iter().map(|q| outcome(provider, q)).collect())
    };

    let mut categories = Vec::new();
    for (name, qs) in ds.categories() {
        let mine = outcomes.iter().filter(|o| o.category == name);
        let (mut correct, mut unanswerable) = (0, 0);
        for o in mine {
            correct += usize::from(o.correct);
            unanswerable += usize::from(o.predicted.is_none());
        }
        categories.push(CategoryAccuracy {
            category: name.to_string(),
            correct,
            total: qs.len(),
            unanswerable,
            accuracy: correct as f64 / qs.len() as f64,
        });
    }
    let group = |members: &[&str]| {
        let accs: Vec<f64> = categories
            .iter()
            .filter(|c| members.contains(&c.category.as_str()))
            .map(|c| c.accuracy)
            .collect();
        mean(&accs)
    };
    let semantic_avg = group(&SEMANTIC_CATEGORIES);
    let syntactic_avg = group(&SYNTACTIC_CATEGORIES);
    let overall_avg = match (semantic_avg, syntactic_avg) {
        (Some(s), Some(y)) => Some((s + y) / 2.0),
        (s, y) => s.or(y),
    };
    let correct = categories.iter().map(|c| c.correct).sum();
    let total = outcomes.len();
    Ok(CategoryReport {
        level: ds.level(),
        semantic_avg,
        syntactic_avg,
        overall_avg,
        question_weighted: correct as f64 / total as f64,
        correct,
        total,
        unanswerable: categories.iter().map(|c| c.unanswerable).sum(),
        categories,
        outcomes,
    })
}
