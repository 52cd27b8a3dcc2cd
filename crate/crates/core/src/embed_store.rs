//! Word- and sequence-level embedding tables.
//!
//! Word vectors use the plain-text layout shared by most pretrained releases:
//! one `token c1 c2 ... cd` record per line, optionally preceded by a
//! `count dim` header. Sequence vectors are tab separated, `id\tc1\t...\tcd`,
//! and hold the output of an external encoder keyed by opaque ids.
//!
//! Tables are immutable once loaded and store every component as `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use indexmap::map::Entry;
use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::vecmath;

/// A vector with Euclidean norm 1 (within 1e-6).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Scales `v` to unit Euclidean length.
pub fn unit_normalize(v: &[f64]) -> Result<UnitVector> {
    let n = vecmath::norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::DegenerateVector(format!(
            "cannot normalize vector with norm {n}"
        )));
    }
    Ok(UnitVector(v.iter().map(|x| x / n).collect()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Reject the file unless its dimension equals this.
    pub expected_dim: Option<usize>,
    /// Lowercase tokens on load and on lookup.
    pub case_fold: bool,
}

/// Shared storage for both table kinds: keys in file order, first occurrence wins.
#[derive(Debug, Clone, PartialEq)]
struct VectorStore {
    dim: usize,
    entries: IndexMap<String, Vec<f64>>,
    duplicates: usize,
}

impl VectorStore {
    fn new(dim: usize) -> Self {
        VectorStore {
            dim,
            entries: IndexMap::new(),
            duplicates: 0,
        }
    }

    fn insert(&mut self, key: String, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if let Some(x) = vector.iter().find(|x| !x.is_finite()) {
            return Err(Error::DegenerateVector(format!(
                "non-finite component {x} for {key:?}"
            )));
        }
        match self.entries.entry(key) {
            Entry::Occupied(_) => {
                self.duplicates += 1;
                Ok(false)
            }
            Entry::Vacant(slot) => {
                slot.insert(vector);
                Ok(true)
            }
        }
    }
}

fn parse_components<'a>(
    fields: impl Iterator<Item = &'a str>,
    line_no: usize,
) -> Result<Vec<f64>> {
    fields
        .map(|f| {
            let x: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::format(line_no, format!("cannot parse component {f:?}")))?;
            if !x.is_finite() {
                return Err(Error::format(line_no, format!("non-finite component {f:?}")));
            }
            Ok(x)
        })
        .collect()
}

/// Parses `key<sep>c1<sep>...` records, enforcing a single dimension.
fn read_records<R: BufRead>(
    reader: R,
    source: &str,
    split: fn(&str) -> Vec<&str>,
    detect_header: bool,
    key_map: impl Fn(&str) -> String,
) -> Result<VectorStore> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        lines.push((i + 1, line));
    }
    let mut records = lines
        .iter()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| (*n, split(l)))
        .peekable();

    let mut first = records.next();
    if detect_header {
        if let Some((_, fields)) = &first {
            let header_dim = match fields.as_slice() {
                [count, dim] if count.parse::<u64>().is_ok() => dim.parse::<usize>().ok(),
                _ => None,
            };
            if let Some(dim) = header_dim {
                let next_fits = records
                    .peek()
                    .is_none_or(|(_, f)| f.len() == dim + 1);
                if next_fits {
                    first = records.next();
                }
            }
        }
    }

    let Some(first) = first else {
        return Err(Error::EmptyInput(format!("{source} contains no vectors")));
    };

    let mut store: Option<VectorStore> = None;
    for (line_no, fields) in std::iter::once(first).chain(records) {
        let (key, comps) = fields
            .split_first()
            .ok_or_else(|| Error::format(line_no, "empty record"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::format(line_no, "empty key"));
        }
        if comps.is_empty() {
            return Err(Error::format(line_no, format!("{key:?} has no components")));
        }
        let vector = parse_components(comps.iter().copied(), line_no)?;
        let store = store.get_or_insert_with(|| VectorStore::new(vector.len()));
        if vector.len() != store.dim {
            return Err(Error::format(
                line_no,
                format!(
                    "dimension mismatch: expected {}, found {}",
                    store.dim,
                    vector.len()
                ),
            ));
        }
        store.insert(key_map(key), vector)?;
    }
    Ok(store.expect("at least one record"))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Token → vector map for word-level embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct WordEmbeddingTable {
    name: String,
    case_fold: bool,
    store: VectorStore,
}

impl WordEmbeddingTable {
    /// Creates an empty table; mostly useful for fixtures.
    pub fn new(name: impl Into<String>, dim: usize, case_fold: bool) -> Self {
        WordEmbeddingTable {
            name: name.into(),
            case_fold,
            store: VectorStore::new(dim),
        }
    }

    /// Builds a table from `(token, vector)` pairs, first occurrence winning.
    pub fn from_entries<S, I>(name: impl Into<String>, entries: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Vec<f64>)>,
    {
        let mut iter = entries.into_iter().peekable();
        let dim = iter
            .peek()
            .map(|(_, v)| v.len())
            .ok_or_else(|| Error::EmptyInput("no entries".into()))?;
        let mut table = WordEmbeddingTable::new(name, dim, false);
        for (token, vector) in iter {
            table.insert(token, vector)?;
        }
        Ok(table)
    }

    /// Adds a token. Returns `false` when the token was already present.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<bool> {
        let token = token.into();
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::Format {
                line: 0,
                message: format!("invalid token {token:?}"),
            });
        }
        let token = if self.case_fold {
            token.to_lowercase()
        } else {
            token
        };
        self.store.insert(token, vector)
    }

    pub fn from_reader<R: BufRead>(reader: R, name: &str, opts: LoadOptions) -> Result<Self> {
        let case_fold = opts.case_fold;
        let store = read_records(
            reader,
            name,
            |l| l.split_whitespace().collect(),
            true,
            |k| {
                if case_fold {
                    k.to_lowercase()
                } else {
                    k.to_string()
                }
            },
        )?;
        if let Some(expected) = opts.expected_dim {
            if expected != store.dim {
                return Err(Error::Shape {
                    expected,
                    actual: store.dim,
                });
            }
        }
        Ok(WordEmbeddingTable {
            name: name.to_string(),
            case_fold,
            store,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.store.dim
    }

    pub fn len(&self) -> usize {
        self.store.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.entries.is_empty()
    }

    pub fn case_fold(&self) -> bool {
        self.case_fold
    }

    /// Number of records dropped because their token was already present.
    pub fn duplicates(&self) -> usize {
        self.store.duplicates
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        if self.case_fold {
            self.store.entries.get(&token.to_lowercase())
        } else {
            self.store.entries.get(token)
        }
        .map(Vec::as_slice)
    }

    pub fn lookup(&self, token: &str) -> Result<&[f64]> {
        self.get(token).ok_or_else(|| Error::Oov(token.to_string()))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.get(token).is_some()
    }

    /// Position of `token` in file order, honoring case folding.
    pub fn index_of(&self, token: &str) -> Option<usize> {
        if self.case_fold {
            self.store.entries.get_index_of(&token.to_lowercase())
        } else {
            self.store.entries.get_index_of(token)
        }
    }

    pub fn get_index(&self, index: usize) -> Option<(&str, &[f64])> {
        self.store
            .entries
            .get_index(index)
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Entries in file order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.store
            .entries
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Returns a copy with every vector transformed by `f`.
    pub fn map_vectors(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut out = WordEmbeddingTable::new(self.name.clone(), self.dim(), self.case_fold);
        for (k, v) in self.iter() {
            out.insert(k, f(v))?;
        }
        Ok(out)
    }

    /// Writes the header-less text layout; `{}` formatting round-trips `f64` exactly.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (token, v) in self.iter() {
            write!(w, "{token}")?;
            for x in v {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Loads a plain-text word-vector file.
pub fn load_word_vectors(path: impl AsRef<Path>, opts: LoadOptions) -> Result<WordEmbeddingTable> {
    let path = path.as_ref();
    WordEmbeddingTable::from_reader(open(path)?, &path.display().to_string(), opts)
}

/// Sequence-id → vector map holding externally pooled encoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEmbeddingTable {
    pooling_tag: String,
    store: VectorStore,
}

impl SequenceEmbeddingTable {
    pub fn new(dim: usize, pooling_tag: impl Into<String>) -> Self {
        SequenceEmbeddingTable {
            pooling_tag: pooling_tag.into(),
            store: VectorStore::new(dim),
        }
    }

    pub fn from_entries<S, I>(pooling_tag: impl Into<String>, entries: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Vec<f64>)>,
    {
        let mut iter = entries.into_iter().peekable();
        let dim = iter
            .peek()
            .map(|(_, v)| v.len())
            .ok_or_else(|| Error::EmptyInput("no entries".into()))?;
        let mut table = SequenceEmbeddingTable::new(dim, pooling_tag);
        for (id, vector) in iter {
            table.insert(id, vector)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<bool> {
        let id = id.into();
        if id.is_empty() || id.contains('\t') || id.contains('\n') {
            return Err(Error::Format {
                line: 0,
                message: format!("invalid sequence id {id:?}"),
            });
        }
        self.store.insert(id, vector)
    }

    pub fn from_reader<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let store = read_records(
            reader,
            source,
            |l| l.trim_end_matches('\r').split('\t').collect(),
            false,
            str::to_string,
        )?;
        Ok(SequenceEmbeddingTable {
            pooling_tag: String::from("unspecified"),
            store,
        })
    }

    pub fn with_pooling_tag(mut self, tag: impl Into<String>) -> Self {
        self.pooling_tag = tag.into();
        self
    }

    pub fn pooling_tag(&self) -> &str {
        &self.pooling_tag
    }

    pub fn dim(&self) -> usize {
        self.store.dim
    }

    pub fn len(&self) -> usize {
        self.store.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.entries.is_empty()
    }

    pub fn duplicates(&self) -> usize {
        self.store.duplicates
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.store.entries.get(id).map(Vec::as_slice)
    }

    pub fn lookup(&self, id: &str) -> Result<&[f64]> {
        self.get(id).ok_or_else(|| Error::Oov(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.store
            .entries
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn map_vectors(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut out = SequenceEmbeddingTable::new(self.dim(), self.pooling_tag.clone());
        for (k, v) in self.iter() {
            out.insert(k, f(v))?;
        }
        Ok(out)
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (id, v) in self.iter() {
            write!(w, "{id}")?;
            for x in v {
                write!(w, "\t{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Loads a tab-separated sequence-vector file.
pub fn load_sequence_vectors(path: impl AsRef<Path>) -> Result<SequenceEmbeddingTable> {
    let path = path.as_ref();
    SequenceEmbeddingTable::from_reader(open(path)?, &path.display().to_string())
}
