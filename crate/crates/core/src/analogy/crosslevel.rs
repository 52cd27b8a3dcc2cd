use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::CategoryReport;
use crate::error::{Error, Result};

/// Preservation ratios between a word-level run and a derived higher-level run.
///
/// Counts are over higher-level questions: `p` of them derive from a
/// word question answered correctly, `n` from one answered wrongly; `pp`
/// and `pn` are those answered correctly at the higher level. A ratio is
/// `None` when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossLevel {
    pub p: usize,
    pub n: usize,
    pub pp: usize,
    pub pn: usize,
    pub ppr: Option<f64>,
    pub pnr: Option<f64>,
}

impl CrossLevel {
    /// `(PPR·|P| + PNR·|N|) / (|P| + |N|)`, the higher-level accuracy.
    ///
    /// Each product is an integer count, so it is rounded before summing;
    /// the result is then bit-identical to `correct / total`.
    pub fn reconstructed_accuracy(&self) -> Option<f64> {
        let total = self.p + self.n;
        (total > 0).then(|| {
            let pos = self.ppr.map_or(0.0, |r| (r * self.p as f64).round());
            let neg = self.pnr.map_or(0.0, |r| (r * self.n as f64).round());
            (pos + neg) / total as f64
        })
    }
}

/// Links each higher-level outcome to its word-level parent through `word_parent`.
pub fn ppr_pnr(word_report: &CategoryReport, higher_report: &CategoryReport) -> Result<CrossLevel> {
    let word: HashMap<&str, bool> = word_report
        .outcomes
        .iter()
        .map(|o| (o.id.as_str(), o.correct))
        .collect();
    let mut out = CrossLevel {
        p: 0,
        n: 0,
        pp: 0,
        pn: 0,
        ppr: None,
        pnr: None,
    };
    for o in &higher_report.outcomes {
        let parent = o
            .word_parent
            .as_ref()
            .ok_or_else(|| Error::Linkage(format!("question {} has no word_parent", o.id)))?;
        let parent_correct = *word.get(parent.as_str()).ok_or_else(|| {
            Error::Linkage(format!(
                "question {} links to unknown word question {parent}",
                o.id
            ))
        })?;
        if parent_correct {
            out.p += 1;
            out.pp += usize::from(o.correct);
        } else {
            out.n += 1;
            out.pn += usize::from(o.correct);
        }
    }
    out.ppr = (out.p > 0).then(|| out.pp as f64 / out.p as f64);
    out.pnr = (out.n > 0).then(|| out.pn as f64 / out.n as f64);
    Ok(out)
}
