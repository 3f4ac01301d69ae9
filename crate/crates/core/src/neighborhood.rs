//! Self-supervised pairwise label construction.
//!
//! Two-stage KNN over cosine similarity: per-item ranking lists of the K1
//! most similar items, then an expansion step that merges the lists of the
//! K2 items whose ranking lists overlap one's own the most. Pairs covered
//! by the expanded lists (symmetrized, diagonal removed) become positives;
//! every other pair is an implicit negative.
//!
//! Everything here is deterministic: ties always break by ascending index,
//! and the structure is computed once and frozen for training.

use rayon::prelude::*;

use crate::data::{FeatureMatrix, LabelSet};
use crate::error::{Error, Result};

/// Per-item ranking lists `L_i`: the `min(k1, n_items - 1)` other items with
/// the highest cosine similarity, in descending similarity order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingLists {
    k1: usize,
    lists: Vec<Vec<u32>>,
}

impl RankingLists {
    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn n_items(&self) -> usize {
        self.lists.len()
    }

    pub fn list(&self, i: usize) -> &[u32] {
        &self.lists[i]
    }

    pub fn lists(&self) -> &[Vec<u32>] {
        &self.lists
    }
}

/// Symmetric positive-pair adjacency. `j ∈ positives(i) ⇔ i ∈ positives(j)`,
/// never containing the diagonal; rows are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    n_items: usize,
    positives: Vec<Vec<u32>>,
}

impl PairSet {
    /// Validates an adjacency as loaded from disk.
    pub fn from_adjacency(n_items: usize, positives: Vec<Vec<u32>>) -> Result<Self> {
        if positives.len() != n_items {
            return Err(Error::Shape(format!(
                "adjacency has {} rows for {n_items} items",
                positives.len()
            )));
        }
        for (i, row) in positives.iter().enumerate() {
            for &j in row {
                let j = j as usize;
                if j >= n_items {
                    return Err(Error::Data(format!(
                        "item {i} lists neighbor {j} outside 0..{n_items}"
                    )));
                }
                if j == i {
                    return Err(Error::Data(format!("item {i} lists itself as positive")));
                }
                if positives[j].binary_search(&(i as u32)).is_err() {
                    return Err(Error::Data(format!(
                        "pair ({i},{j}) present only in one direction"
                    )));
                }
            }
        }
        Ok(Self { n_items, positives })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn positives(&self, i: usize) -> &[u32] {
        &self.positives[i]
    }

    pub fn is_positive(&self, i: usize, j: usize) -> bool {
        i != j && self.positives[i].binary_search(&(j as u32)).is_ok()
    }

    /// Number of unordered positive pairs.
    pub fn n_positive_pairs(&self) -> usize {
        self.positives.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Builds the K1-NN ranking lists under cosine similarity.
///
/// Ordering within a list is by descending similarity with ties broken by
/// ascending index, so duplicated points rank by index. Fails with a data
/// error naming the first zero-norm row.
pub fn build_ranking_lists(features: &FeatureMatrix, k1: usize) -> Result<RankingLists> {
    if k1 == 0 {
        return Err(Error::Config("k1 must be at least 1".into()));
    }
    let n = features.n_items();
    let norms: Vec<f64> = (0..n)
        .map(|i| features.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if let Some(i) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::Data(format!("feature row {i} has zero norm")));
    }

    let keep = k1.min(n - 1);
    let lists: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = features.row(i);
            let mut scored: Vec<(f64, u32)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let dot: f64 = xi
                        .iter()
                        .zip(features.row(j))
                        .map(|(a, b)| a * b)
                        .sum();
                    (dot / (norms[i] * norms[j]), j as u32)
                })
                .collect();
            scored.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            scored.truncate(keep);
            scored.into_iter().map(|(_, j)| j).collect()
        })
        .collect();

    Ok(RankingLists { k1, lists })
}

/// Expands each item's neighborhood through the items with the most similar
/// ranking lists.
///
/// For item i, every j is scored by `|L_i ∩ L_j|` (j = i included); the k2
/// best-scoring items (ties by ascending index) contribute the union of
/// their lists as the expanded list `L'_i`, returned sorted ascending.
pub fn expand_neighbors(rankings: &RankingLists, k2: usize) -> Result<Vec<Vec<u32>>> {
    if k2 == 0 {
        return Err(Error::Config("k2 must be at least 1".into()));
    }
    let n = rankings.n_items();
    let keep = k2.min(n);

    let expanded: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut member = vec![false; n];
            for &j in rankings.list(i) {
                member[j as usize] = true;
            }
            let mut overlaps: Vec<(u32, u32)> = (0..n)
                .map(|j| {
                    let count = rankings
                        .list(j)
                        .iter()
                        .filter(|&&x| member[x as usize])
                        .count();
                    (count as u32, j as u32)
                })
                .collect();
            overlaps.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

            let mut union: Vec<u32> = overlaps[..keep]
                .iter()
                .flat_map(|&(_, j)| rankings.list(j as usize).iter().copied())
                .collect();
            union.sort_unstable();
            union.dedup();
            union
        })
        .collect();

    Ok(expanded)
}

/// Turns expanded lists into the symmetric positive-pair set.
///
/// `s_ij = +1` iff `j ∈ L'_i` or `i ∈ L'_j`; the diagonal is dropped. Pairs
/// absent from the set are negatives.
pub fn build_pair_set(expanded: &[Vec<u32>], n_items: usize) -> Result<PairSet> {
    if expanded.len() != n_items {
        return Err(Error::Shape(format!(
            "{} expanded lists for {n_items} items",
            expanded.len()
        )));
    }
    let mut positives: Vec<Vec<u32>> = vec![Vec::new(); n_items];
    for (i, list) in expanded.iter().enumerate() {
        for &j in list {
            let j = j as usize;
            if j >= n_items {
                return Err(Error::Data(format!(
                    "expanded list of item {i} contains {j}, outside 0..{n_items}"
                )));
            }
            if j != i {
                positives[i].push(j as u32);
                positives[j].push(i as u32);
            }
        }
    }
    for row in &mut positives {
        row.sort_unstable();
        row.dedup();
    }
    Ok(PairSet { n_items, positives })
}

/// Convenience composition of the full label-construction pipeline.
pub fn build_pairs(features: &FeatureMatrix, k1: usize, k2: usize) -> Result<PairSet> {
    let rankings = build_ranking_lists(features, k1)?;
    let expanded = expand_neighbors(&rankings, k2)?;
    build_pair_set(&expanded, features.n_items())
}

/// Fraction of positive pairs whose endpoints share a ground-truth label.
/// Diagnostic only; the truth never feeds back into construction.
pub fn label_precision(pairs: &PairSet, truth: &LabelSet) -> Result<f64> {
    if truth.n_items() != pairs.n_items() {
        return Err(Error::Shape(format!(
            "{} labels for {} items",
            truth.n_items(),
            pairs.n_items()
        )));
    }
    let mut total = 0usize;
    let mut matched = 0usize;
    for i in 0..pairs.n_items() {
        for &j in pairs.positives(i) {
            let j = j as usize;
            if j > i {
                total += 1;
                if truth.label(i) == truth.label(j) {
                    matched += 1;
                }
            }
        }
    }
    if total == 0 {
        return Err(Error::Domain("pair set has no positive pairs".into()));
    }
    Ok(matched as f64 / total as f64)
}
