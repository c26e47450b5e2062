//! Neighborhood selection: top-k by raw similarity (KNN) or by TOPSIS
//! closeness over (similarity, uncertainty, dissimilarity) criteria.
//!
//! Both selectors consider only users who rated the target item in the
//! matrix they are given, order by descending key and break ties by
//! ascending user id.

use crate::dataset::{ItemId, RatingMatrix, UserId};
use crate::error::{Error, Result};
use crate::similarity::SimilarityTable;

/// TOPSIS criterion weights and the uncertainty constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopsisParams {
    pub w_s: f64,
    pub w_u: f64,
    pub w_sbar: f64,
    /// Uncertainty mass: U = w / (w + co_count).
    pub w: f64,
}

impl Default for TopsisParams {
    fn default() -> Self {
        Self {
            w_s: 1.0 / 3.0,
            w_u: 1.0 / 3.0,
            w_sbar: 1.0 / 3.0,
            w: 2.0,
        }
    }
}

impl TopsisParams {
    pub fn new(w_s: f64, w_u: f64, w_sbar: f64, w: f64) -> Result<Self> {
        if !(w_s > 0.0 && w_u > 0.0 && w_sbar > 0.0) {
            return Err(Error::InvalidParam {
                name: "topsis_weights",
                msg: "criterion weights must all be positive".into(),
            });
        }
        if (w_s + w_u + w_sbar - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParam {
                name: "topsis_weights",
                msg: format!("criterion weights must sum to 1, got {}", w_s + w_u + w_sbar),
            });
        }
        if !(w > 0.0) {
            return Err(Error::InvalidParam {
                name: "topsis_w",
                msg: format!("must be positive, got {w}"),
            });
        }
        Ok(Self { w_s, w_u, w_sbar, w })
    }
}

/// Closeness coefficient from raw criterion values: similarity `s` (clamped
/// to [0, 1] first) and uncertainty `u`. The dissimilarity criterion is
/// derived as max(1 - s - u, 0).
pub fn closeness(s: f64, u: f64, p: &TopsisParams) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let sbar = (1.0 - s - u).max(0.0);
    let d_plus = (p.w_s * (s - 1.0) * (s - 1.0) + p.w_u * u * u + p.w_sbar * sbar * sbar).sqrt();
    let d_minus = (p.w_s * s * s
        + p.w_u * (u - 1.0) * (u - 1.0)
        + p.w_sbar * (sbar - 1.0) * (sbar - 1.0))
        .sqrt();
    let denom = d_plus + d_minus;
    if denom == 0.0 {
        // equidistant from both ideals; unreachable for valid weights
        0.5
    } else {
        d_minus / denom
    }
}

fn closeness_idx(table: &SimilarityTable, i: usize, j: usize, p: &TopsisParams) -> f64 {
    let uncertainty = p.w / (p.w + table.co_count(i, j) as f64);
    closeness(table.score(i, j), uncertainty, p)
}

/// Closeness between two users from their cached table entry. Unknown users
/// behave as a no-evidence pair (S = 0, U = 1).
pub fn topsis_closeness(u: UserId, v: UserId, table: &SimilarityTable, p: &TopsisParams) -> f64 {
    match (table.user_index(u), table.user_index(v)) {
        (Some(i), Some(j)) if i != j => closeness_idx(table, i, j, p),
        _ => closeness(0.0, 1.0, p),
    }
}

/// Descending by key, ties by ascending index, truncated to k.
fn rank_top_k(mut candidates: Vec<(usize, f64)>, k: usize) -> Vec<usize> {
    candidates.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    candidates.truncate(k);
    candidates.into_iter().map(|(idx, _)| idx).collect()
}

pub(crate) fn knn_neighbors_idx(
    m: &RatingMatrix,
    table: &SimilarityTable,
    user_idx: usize,
    item_idx: usize,
    k: usize,
) -> Vec<usize> {
    let candidates = m
        .item_users(item_idx)
        .iter()
        .filter(|&&(vi, _)| vi != user_idx)
        .map(|&(vi, _)| (vi, table.score(user_idx, vi)))
        .collect();
    rank_top_k(candidates, k)
}

pub(crate) fn topsis_neighbors_idx(
    m: &RatingMatrix,
    table: &SimilarityTable,
    user_idx: usize,
    item_idx: usize,
    k: usize,
    p: &TopsisParams,
) -> Vec<usize> {
    let candidates = m
        .item_users(item_idx)
        .iter()
        .filter(|&&(vi, _)| vi != user_idx)
        .map(|&(vi, _)| (vi, closeness_idx(table, user_idx, vi, p)))
        .collect();
    rank_top_k(candidates, k)
}

/// Up to k raters of `i` (excluding `u`), by descending similarity.
pub fn knn_neighbors(
    u: UserId,
    i: ItemId,
    k: usize,
    table: &SimilarityTable,
    m: &RatingMatrix,
) -> Vec<UserId> {
    let (Some(ui), Some(ii)) = (m.user_index(u), m.item_index(i)) else {
        return Vec::new();
    };
    knn_neighbors_idx(m, table, ui, ii, k)
        .into_iter()
        .map(|vi| m.users()[vi])
        .collect()
}

/// Up to k raters of `i` (excluding `u`), by descending TOPSIS closeness.
pub fn topsis_neighbors(
    u: UserId,
    i: ItemId,
    k: usize,
    table: &SimilarityTable,
    m: &RatingMatrix,
    p: &TopsisParams,
) -> Vec<UserId> {
    let (Some(ui), Some(ii)) = (m.user_index(u), m.item_index(i)) else {
        return Vec::new();
    };
    topsis_neighbors_idx(m, table, ui, ii, k, p)
        .into_iter()
        .map(|vi| m.users()[vi])
        .collect()
}
