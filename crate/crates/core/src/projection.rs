//! 2-D PCA and pair-difference vectors.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::analogy::EmbeddingProvider;
use crate::embed_store::unit_normalize;
use crate::error::{Error, Result};
use crate::vecmath;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedItem {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub items: Vec<ProjectedItem>,
    pub components: [Vec<f64>; 2],
    /// Sample variances (1/(n−1)) along the two components, descending.
    pub explained_variance: [f64; 2],
    /// Trace of the sample covariance.
    pub total_variance: f64,
}

impl ProjectionResult {
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["label", "x", "y"])?;
        for it in &self.items {
            out.write_record([it.label.as_str(), &it.x.to_string(), &it.y.to_string()])?;
        }
        out.flush()
    }
}

/// PCA of unlabeled vectors; items are labeled by their index.
pub fn pca2<V: AsRef<[f64]>>(vectors: &[V]) -> Result<ProjectionResult> {
    let labeled: Vec<(String, &[f64])> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| (i.to_string(), v.as_ref()))
        .collect();
    pca2_labeled(&labeled)
}

/// Mean-centers, eigen-decomposes the sample covariance and projects onto
/// the top two directions. Each direction is signed so that its
/// largest-magnitude entry (first one on ties) is positive.
pub fn pca2_labeled<L: AsRef<str>, V: AsRef<[f64]>>(items: &[(L, V)]) -> Result<ProjectionResult> {
    let n = items.len();
    if n < 3 {
        return Err(Error::DegenerateData(format!("PCA needs at least 3 vectors, got {n}")));
    }
    let d = items[0].1.as_ref().len();
    if d == 0 {
        return Err(Error::DegenerateData("vectors have dimension 0".into()));
    }
    for (_, v) in items {
        if v.as_ref().len() != d {
            return Err(Error::Shape {
                expected: d,
                actual: v.as_ref().len(),
            });
        }
    }

    let mut mean = vec![0.0; d];
    for (_, v) in items {
        for (m, x) in mean.iter_mut().zip(v.as_ref()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| items[i].1.as_ref()[j] - mean[j]);
    if centered.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateData("all vectors are identical".into()));
    }

    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let total_variance = cov.trace();
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let component = |k: usize| -> Vec<f64> {
        let Some(&idx) = order.get(k) else {
            return vec![0.0; d];
        };
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let pivot = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    };
    let components = [component(0), component(1)];
    let variance = |k: usize| order.get(k).map_or(0.0, |&i| eig.eigenvalues[i].max(0.0));
    let explained_variance = [variance(0), variance(1)];

    let projected = items
        .iter()
        .enumerate()
        .map(|(i, (label, _))| {
            let row: Vec<f64> = centered.row(i).iter().copied().collect();
            ProjectedItem {
                label: label.as_ref().to_string(),
                x: vecmath::dot(&row, &components[0]),
                y: vecmath::dot(&row, &components[1]),
            }
        })
        .collect();

    Ok(ProjectionResult {
        items: projected,
        components,
        explained_variance,
        total_variance,
    })
}

/// Unit-normalizes every vector first; zero vectors are rejected.
pub fn pca2_normalized<L: AsRef<str>, V: AsRef<[f64]>>(items: &[(L, V)]) -> Result<ProjectionResult> {
    let units = items
        .iter()
        .map(|(l, v)| {
            unit_normalize(v.as_ref())
                .map(|u| (l.as_ref().to_string(), u.into_inner()))
                .map_err(|_| Error::DegenerateVector(l.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    pca2_labeled(&units)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDifference {
    pub category: String,
    pub pair_id: String,
    pub delta: Vec<f64>,
}

/// Input row for [`pair_differences`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemPair {
    pub category: String,
    pub a: String,
    pub b: String,
}

impl ItemPair {
    pub fn new(category: impl Into<String>, a: impl Into<String>, b: impl Into<String>) -> Self {
        ItemPair {
            category: category.into(),
            a: a.into(),
            b: b.into(),
        }
    }

    pub fn id(&self) -> String {
        format!("{}|{}", self.a, self.b)
    }
}

/// `unit(embed(b)) − unit(embed(a))` for every pair.
pub fn pair_differences(provider: &EmbeddingProvider<'_>, pairs: &[ItemPair]) -> Result<Vec<PairDifference>> {
    let unit = |item: &str| -> Result<Vec<f64>> {
        let v = provider.embed(item)?;
        unit_normalize(&v)
            .map(|u| u.into_inner())
            .map_err(|_| Error::Unanswerable(item.to_string()))
    };
    pairs
        .iter()
        .map(|p| {
            let (a, b) = (unit(&p.a)?, unit(&p.b)?);
            Ok(PairDifference {
                category: p.category.clone(),
                pair_id: p.id(),
                delta: vecmath::sub(&b, &a)?,
            })
        })
        .collect()
}

pub fn write_differences_csv<W: Write>(diffs: &[PairDifference], w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let dim = diffs.first().map_or(0, |d| d.delta.len());
    let mut header = vec!["category".to_string(), "pair_id".to_string()];
    header.extend((1..=dim).map(|i| format!("c{i}")));
    out.write_record(&header)?;
    for d in diffs {
        let mut row = vec![d.category.clone(), d.pair_id.clone()];
        row.extend(d.delta.iter().map(f64::to_string));
        out.write_record(&row)?;
    }
    out.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryCoherence {
    pub category: String,
    pub pairs: usize,
    /// Mean cosine over distinct difference pairs in the category.
    pub mean_cosine: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coherence {
    pub categories: Vec<CategoryCoherence>,
    pub intra_mean: Option<f64>,
    pub inter_mean: Option<f64>,
    /// Differences with zero norm, left out of every mean.
    pub zero_deltas: usize,
}

/// Mean pairwise cosine of difference vectors within and across categories.
pub fn difference_coherence(diffs: &[PairDifference]) -> Coherence {
    let usable: Vec<&PairDifference> = diffs.iter().filter(|d| vecmath::norm(&d.delta) > 0.0).collect();
    let mut cats: indexmap::IndexMap<&str, (usize, f64, usize)> = indexmap::IndexMap::new();
    let (mut intra, mut n_intra, mut inter, mut n_inter) = (0.0, 0usize, 0.0, 0usize);
    for d in &usable {
        cats.entry(d.category.as_str()).or_insert((0, 0.0, 0)).0 += 1;
    }
    for (i, x) in usable.iter().enumerate() {
        for y in &usable[i + 1..] {
            let c = vecmath::cosine(&x.delta, &y.delta).unwrap_or(0.0);
            if x.category == y.category {
                intra += c;
                n_intra += 1;
                let e = cats.get_mut(x.category.as_str()).expect("category counted");
                e.1 += c;
                e.2 += 1;
            } else {
                inter += c;
                n_inter += 1;
            }
        }
    }
    let mean = |s: f64, n: usize| (n > 0).then(|| s / n as f64);
    Coherence {
        categories: cats
            .into_iter()
            .map(|(c, (pairs, s, n))| CategoryCoherence {
                category: c.to_string(),
                pairs,
                mean_cosine: mean(s, n),
            })
            .collect(),
        intra_mean: mean(intra, n_intra),
        inter_mean: mean(inter, n_inter),
        zero_deltas: diffs.len() - usable.len(),
    }
}
