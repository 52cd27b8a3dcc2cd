//! Small dense-vector helpers shared by the solver, rankers and projection.

use crate::error::{Error, Result};

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn check_dims(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::Shape {
            expected: u.len(),
            actual: v.len(),
        });
    }
    Ok(())
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    check_dims(u, v)?;
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateVector(
            "cosine of a zero vector is undefined".into(),
        ));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// `Σ weight_i · v_i` over equal-length vectors.
pub fn weighted_sum(terms: &[(f64, &[f64])]) -> Result<Vec<f64>> {
    let dim = terms.first().map_or(0, |(_, v)| v.len());
    let mut out = vec![0.0; dim];
    for (w, v) in terms {
        if v.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                actual: v.len(),
            });
        }
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += w * x;
        }
    }
    Ok(out)
}

pub fn sub(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_dims(u, v)?;
    Ok(u.iter().zip(v).map(|(x, y)| x - y).collect())
}
