//! Shared plumbing: provider specs, provenance, output sinks and tables.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use sha2::{Digest, Sha256};
use unirep_core::analogy::EmbeddingProvider;
use unirep_core::embed_store::{
    load_sequence_vectors, load_word_vectors, LoadOptions, SequenceEmbeddingTable, WordEmbeddingTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Markdown,
    Csv,
}

/// `NAME=word-bow:PATH`, `NAME=seq:PATH`, or either without `NAME=`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProviderSpec {
    pub name: String,
    pub kind: ProviderKind,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    WordBow,
    Seq,
}

impl FromStr for ProviderSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (name, rest) = match s.split_once('=') {
            Some((n, r)) if !n.is_empty() && !n.contains(':') => (Some(n), r),
            _ => (None, s),
        };
        let (kind, path) = if let Some(p) = rest.strip_prefix("word-bow:") {
            (ProviderKind::WordBow, p)
        } else if let Some(p) = rest.strip_prefix("seq:") {
            (ProviderKind::Seq, p)
        } else {
            return Err(format!("provider {s:?} must look like NAME=word-bow:PATH or NAME=seq:PATH"));
        };
        if path.is_empty() {
            return Err(format!("provider {s:?} has an empty path"));
        }
        let path = PathBuf::from(path);
        let name = match name {
            Some(n) => n.to_string(),
            None => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "provider".into()),
        };
        Ok(ProviderSpec { name, kind, path })
    }
}

pub enum Table {
    Word(WordEmbeddingTable),
    Seq(SequenceEmbeddingTable),
}

pub struct LoadedProvider {
    pub name: String,
    pub table: Table,
}

impl LoadedProvider {
    pub fn load(spec: &ProviderSpec, case_fold: bool) -> Result<Self> {
        let table = match spec.kind {
            ProviderKind::WordBow => Table::Word(
                load_word_vectors(
                    &spec.path,
                    LoadOptions {
                        expected_dim: None,
                        case_fold,
                    },
                )
                .with_context(|| format!("loading word vectors for provider {}", spec.name))?,
            ),
            ProviderKind::Seq => Table::Seq(
                load_sequence_vectors(&spec.path)
                    .with_context(|| format!("loading sequence vectors for provider {}", spec.name))?,
            ),
        };
        Ok(LoadedProvider {
            name: spec.name.clone(),
            table,
        })
    }

    pub fn provider(&self) -> EmbeddingProvider<'_> {
        match &self.table {
            Table::Word(t) => EmbeddingProvider::word_bow(t),
            Table::Seq(t) => EmbeddingProvider::sequence(t),
        }
    }
}

pub fn load_providers(specs: &[ProviderSpec], case_fold: bool) -> Result<Vec<LoadedProvider>> {
    let mut names = std::collections::HashSet::new();
    for s in specs {
        if !names.insert(&s.name) {
            bail!("provider name {:?} given twice", s.name);
        }
    }
    specs.iter().map(|s| LoadedProvider::load(s, case_fold)).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Config fingerprint and input checksums carried by every report.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: &'static str,
    pub config_fingerprint: String,
    pub inputs: BTreeMap<String, String>,
}

impl Provenance {
    /// `config` must leave out parallelism and output destinations.
    pub fn new<C: Serialize>(command: &'static str, config: &C, inputs: &[&Path]) -> Result<Self> {
        let canonical = serde_json::to_string(&serde_json::json!({
            "command": command,
            "config": config,
        }))?;
        let mut sums = BTreeMap::new();
        for p in inputs {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            sums.insert(p.display().to_string(), sha256_hex(&bytes));
        }
        Ok(Provenance {
            command,
            config_fingerprint: sha256_hex(canonical.as_bytes()),
            inputs: sums,
        })
    }

    pub fn markdown_footer(&self) -> String {
        let mut s = format!("\nconfig fingerprint: `{}`\n", self.config_fingerprint);
        for (p, h) in &self.inputs {
            s.push_str(&format!("- `{p}` sha256 `{h}`\n"));
        }
        s
    }
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

pub fn open_reader(path: &Path) -> Result<std::io::BufReader<fs::File>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(std::io::BufReader::new(f))
}

pub fn markdown_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("| {} |\n", headers.join(" | "));
    s.push_str(&format!("|{}\n", headers.iter().map(|_| "---|").collect::<String>()));
    for r in rows {
        s.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    s
}

pub fn csv_bytes(headers: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

/// Accuracy as a percentage with one decimal, `-` when absent.
pub fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{:.1}", v * 100.0))
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub fn require_positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        bail!("--{name} must be at least 1");
    }
    Ok(())
}
