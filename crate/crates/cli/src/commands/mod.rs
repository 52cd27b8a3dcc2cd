pub mod analogy;
pub mod faq;
pub mod prep;
pub mod project;

use std::path::PathBuf;

use anyhow::{bail, Result};

use crate::common::{ProviderKind, ProviderSpec};

/// `--provider` list plus the `--word-vectors` shortcut.
pub(crate) fn provider_specs(providers: &[ProviderSpec], word_vectors: Option<&PathBuf>) -> Result<Vec<ProviderSpec>> {
    let mut specs = providers.to_vec();
    if let Some(p) = word_vectors {
        specs.push(ProviderSpec {
            name: "word-bow".into(),
            kind: ProviderKind::WordBow,
            path: p.clone(),
        });
    }
    if specs.is_empty() {
        bail!("at least one --provider or --word-vectors is required");
    }
    Ok(specs)
}
