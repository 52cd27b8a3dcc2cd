use std::borrow::Cow;

use crate::composer::{compose_mean, OovPolicy};
use crate::embed_store::{SequenceEmbeddingTable, WordEmbeddingTable};
use crate::error::{Error, Result};

/// Prefix marking an item as a reference into a sequence table.
pub const SEQ_PREFIX: &str = "seq:";

/// Source of item embeddings for the solver.
#[derive(Debug, Clone, Copy)]
pub enum EmbeddingProvider<'a> {
    /// Bag-of-words: an item that is itself a table token is looked up
    /// directly, anything else is mean-pooled over its tokens.
    WordBow {
        table: &'a WordEmbeddingTable,
        oov: OovPolicy,
    },
    /// Precomputed vectors keyed by id; items may carry a `seq:` prefix.
    Sequence(&'a SequenceEmbeddingTable),
}

impl<'a> EmbeddingProvider<'a> {
    pub fn word_bow(table: &'a WordEmbeddingTable) -> Self {
        EmbeddingProvider::WordBow {
            table,
            oov: OovPolicy::Skip,
        }
    }

    pub fn sequence(table: &'a SequenceEmbeddingTable) -> Self {
        EmbeddingProvider::Sequence(table)
    }

    pub fn dim(&self) -> usize {
        match self {
            EmbeddingProvider::WordBow { table, .. } => table.dim(),
            EmbeddingProvider::Sequence(table) => table.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EmbeddingProvider::WordBow { .. } => "word-bow",
            EmbeddingProvider::Sequence(_) => "sequence-table",
        }
    }

    /// Embeds one item. Any lookup or composition failure becomes
    /// [`Error::Unanswerable`] carrying the item.
    pub fn embed(&self, item: &str) -> Result<Cow<'a, [f64]>> {
        let unanswerable = || Error::Unanswerable(item.to_string());
        match *self {
            EmbeddingProvider::WordBow { table, oov } => {
                if item.starts_with(SEQ_PREFIX) {
                    return Err(unanswerable());
                }
                if let Some(v) = table.get(item) {
                    return Ok(Cow::Borrowed(v));
                }
                compose_mean(table, item, oov)
                    .map(|c| Cow::Owned(c.vector))
                    .map_err(|_| unanswerable())
            }
            EmbeddingProvider::Sequence(table) => {
                let id = item.strip_prefix(SEQ_PREFIX).unwrap_or(item);
                table.get(id).map(Cow::Borrowed).ok_or_else(unanswerable)
            }
        }
    }
}
