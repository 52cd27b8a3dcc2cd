//! Tokenization and mean-pooled bag-of-words composition.

use crate::embed_store::WordEmbeddingTable;
use crate::error::{Error, Result};

/// Raw text together with its normalized token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    pub raw: String,
    pub tokens: Vec<String>,
}

/// Splits text into normalized tokens. Implementations may return no tokens.
pub trait Tokenizer: Send + Sync {
    fn tokens(&self, text: &str) -> Vec<String>;
}

/// Lowercases, splits on whitespace and strips leading/trailing ASCII
/// punctuation from each token. Tokens that become empty are dropped.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn tokens(&self, text: &str) -> Vec<String> {
        text.split_whitespace()
            .map(|t| t.trim_matches(|c: char| c.is_ascii_punctuation()))
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect()
    }
}

pub fn tokenize(text: &str) -> Result<TokenizedText> {
    let tokens = WhitespaceTokenizer.tokens(text);
    if tokens.is_empty() {
        return Err(Error::EmptyText(text.to_string()));
    }
    Ok(TokenizedText {
        raw: text.to_string(),
        tokens,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// Drop unknown tokens from the mean.
    #[default]
    Skip,
    /// Fail on the first unknown token.
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composed {
    pub vector: Vec<f64>,
    pub oov: usize,
}

/// Arithmetic mean of the token vectors of `text`. Repeated tokens count
/// once per occurrence.
pub fn compose_mean(table: &WordEmbeddingTable, text: &str, policy: OovPolicy) -> Result<Composed> {
    let tokenized = tokenize(text)?;
    let mut sum = vec![0.0; table.dim()];
    let mut found = 0usize;
    let mut oov = 0usize;
    for token in &tokenized.tokens {
        match table.get(token) {
            Some(v) => {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                found += 1;
            }
            None if policy == OovPolicy::Skip => oov += 1,
            None => return Err(Error::Oov(token.clone())),
        }
    }
    if found == 0 {
        return Err(Error::NoContent {
            text: text.to_string(),
            oov,
        });
    }
    let n = found as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(Composed { vector: sum, oov })
}
