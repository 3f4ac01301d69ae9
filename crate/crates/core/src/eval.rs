//! Hamming-space retrieval and its evaluation protocol: mAP over the top-R
//! returns and precision–recall curves over full rankings.

use rayon::prelude::*;

use crate::data::{BinaryCodeSet, LabelSet};
use crate::error::{Error, Result};

/// Number of differing bits between two packed codes of equal length.
/// Padding bits are zero by construction and never counted.
pub fn hamming_distance(a: &[u8], b: &[u8]) -> Result<u32> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "codes of {} and {} bytes",
            a.len(),
            b.len()
        )));
    }
    Ok(hamming_unchecked(a, b))
}

#[inline]
fn hamming_unchecked(a: &[u8], b: &[u8]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// Per-query ranked database ids, ascending Hamming distance, ties broken by
/// ascending index, truncated at the cutoff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalResult {
    cutoff: usize,
    rankings: Vec<Vec<u32>>,
}

impl RetrievalResult {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_queries(&self) -> usize {
        self.rankings.len()
    }

    pub fn ranking(&self, q: usize) -> &[u32] {
        &self.rankings[q]
    }

    pub fn rankings(&self) -> &[Vec<u32>] {
        &self.rankings
    }
}

/// Exhaustive scan of `database` for every query code.
///
/// With `exclude_self` set, database row q is skipped for query q (the
/// self-retrieval protocol where queries are drawn from the database).
pub fn retrieve(
    queries: &BinaryCodeSet,
    database: &BinaryCodeSet,
    r: usize,
    exclude_self: bool,
) -> Result<RetrievalResult> {
    if queries.code_len() != database.code_len() {
        return Err(Error::Shape(format!(
            "query codes have {} bits, database {}",
            queries.code_len(),
            database.code_len()
        )));
    }
    if r == 0 {
        return Err(Error::Config("retrieval cutoff must be at least 1".into()));
    }
    let rankings: Vec<Vec<u32>> = (0..queries.n_items())
        .into_par_iter()
        .map(|q| {
            let qrow = queries.row(q);
            let mut scored: Vec<(u32, u32)> = (0..database.n_items())
                .filter(|&d| !(exclude_self && d == q))
                .map(|d| (hamming_unchecked(qrow, database.row(d)), d as u32))
                .collect();
            scored.sort_unstable();
            scored.truncate(r);
            scored.into_iter().map(|(_, d)| d).collect()
        })
        .collect();
    Ok(RetrievalResult {
        cutoff: r,
        rankings,
    })
}

/// Truncated mean average precision.
///
/// Per query, AP = (Σ over relevant ranks k ≤ r of precision@k) divided by
/// `min(r, total relevant in the database)`; the mean runs over queries with
/// at least one relevant database item. Relevance is label equality.
pub fn mean_average_precision(
    result: &RetrievalResult,
    query_labels: &LabelSet,
    db_labels: &LabelSet,
    r: usize,
) -> Result<f64> {
    if query_labels.n_items() != result.n_queries() {
        return Err(Error::Shape(format!(
            "{} query labels for {} queries",
            query_labels.n_items(),
            result.n_queries()
        )));
    }
    let mut ap_sum = 0.0;
    let mut counted = 0usize;
    for q in 0..result.n_queries() {
        let want = query_labels.label(q);
        let total_relevant = db_labels.labels().iter().filter(|&&l| l == want).count();
        if total_relevant == 0 {
            continue;
        }
        let mut hits = 0usize;
        let mut precision_sum = 0.0;
        for (k, &d) in result.ranking(q).iter().take(r).enumerate() {
            if db_labels.label(d as usize) == want {
                hits += 1;
                precision_sum += hits as f64 / (k + 1) as f64;
            }
        }
        ap_sum += precision_sum / r.min(total_relevant) as f64;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::Domain(
            "no query has a relevant item in the database".into(),
        ));
    }
    Ok(ap_sum / counted as f64)
}

/// Precision–recall curve over a full ranking: one (recall, precision)
/// sample per rank position, averaged over queries with at least one
/// relevant item in their ranking. Recall is measured against the relevant
/// items present in the ranking, so it reaches 1.0 at the final rank.
pub fn precision_recall_curve(
    result: &RetrievalResult,
    query_labels: &LabelSet,
    db_labels: &LabelSet,
) -> Result<Vec<(f64, f64)>> {
    if query_labels.n_items() != result.n_queries() {
        return Err(Error::Shape(format!(
            "{} query labels for {} queries",
            query_labels.n_items(),
            result.n_queries()
        )));
    }
    let depth = result
        .rankings()
        .iter()
        .map(Vec::len)
        .min()
        .unwrap_or(0);
    if depth == 0 {
        return Err(Error::Domain("empty ranking".into()));
    }

    let mut precision_acc = vec![0.0f64; depth];
    let mut recall_acc = vec![0.0f64; depth];
    let mut counted = 0usize;
    for q in 0..result.n_queries() {
        let want = query_labels.label(q);
        let ranking = result.ranking(q);
        let total_in_list = ranking
            .iter()
            .filter(|&&d| db_labels.label(d as usize) == want)
            .count();
        if total_in_list == 0 {
            continue;
        }
        let mut hits = 0usize;
        for k in 0..depth {
            if db_labels.label(ranking[k] as usize) == want {
                hits += 1;
            }
            precision_acc[k] += hits as f64 / (k + 1) as f64;
            recall_acc[k] += hits as f64 / total_in_list as f64;
        }
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::Domain(
            "no query has a relevant item in its ranking".into(),
        ));
    }
    Ok((0..depth)
        .map(|k| (recall_acc[k] / counted as f64, precision_acc[k] / counted as f64))
        .collect())
}
