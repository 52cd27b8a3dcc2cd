use super::{AnalogyQuestion, EmbeddingProvider};
use crate::embed_store::unit_normalize;
use crate::error::{Error, Result};
use crate::vecmath::{self, cosine};

fn embed_unit(provider: &EmbeddingProvider<'_>, item: &str) -> Result<Vec<f64>> {
    let v = provider.embed(item)?;
    unit_normalize(&v)
        .map(|u| u.into_inner())
        .map_err(|_| Error::Unanswerable(item.to_string()))
}

/// Cosine between `ĉ + b̂ − â` and every unit-normalized candidate, in candidate order.
pub fn solve_scored(provider: &EmbeddingProvider<'_>, q: &AnalogyQuestion) -> Result<Vec<f64>> {
    let a = embed_unit(provider, &q.a)?;
    let b = embed_unit(provider, &q.b)?;
    let c = embed_unit(provider, &q.c)?;
    let target = vecmath::weighted_sum(&[(1.0, &c), (1.0, &b), (-1.0, &a)])?;
    if vecmath::norm(&target) == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    q.candidates
        .iter()
        .map(|d| cosine(&target, &embed_unit(provider, d)?))
        .collect()
}

/// Index of the best-scoring candidate; equal scores resolve to the lowest index.
pub fn solve(provider: &EmbeddingProvider<'_>, q: &AnalogyQuestion) -> Result<usize> {
    let scores = solve_scored(provider, q)?;
    Ok(argmax_first(&scores))
}

pub(crate) fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
