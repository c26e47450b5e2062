//! Mean-centered neighborhood prediction and the per-group prediction
//! matrix of observed-else-predicted ratings.

use std::io::Write;

use rayon::prelude::*;

use crate::dataset::{GroupSpec, ItemId, RatingMatrix, UserId};
use crate::error::{Error, Result};
use crate::neighbors::{knn_neighbors_idx, topsis_neighbors_idx, TopsisParams};
use crate::similarity::SimilarityTable;

/// How a prediction-matrix cell was filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Training rating, copied verbatim.
    Observed,
    /// Neighborhood CF estimate.
    Predicted,
    /// No usable neighborhood.
    Missing,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Observed => "observed",
            Provenance::Predicted => "predicted",
            Provenance::Missing => "missing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeighborStrategy {
    Knn,
    Topsis(TopsisParams),
}

impl NeighborStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            NeighborStrategy::Knn => "knn",
            NeighborStrategy::Topsis(_) => "topsis",
        }
    }
}

/// Dense member x item table of effective ratings with per-cell provenance.
#[derive(Debug, Clone)]
pub struct PredictionMatrix {
    members: Vec<UserId>,
    items: Vec<ItemId>,
    /// Row-major member x item values; NaN marks missing cells.
    values: Vec<f64>,
    provenance: Vec<Provenance>,
}

impl PredictionMatrix {
    pub fn members(&self) -> &[UserId] {
        &self.members
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn member_pos(&self, u: UserId) -> Option<usize> {
        self.members.binary_search(&u).ok()
    }

    pub fn item_pos(&self, i: ItemId) -> Option<usize> {
        self.items.binary_search(&i).ok()
    }

    /// Effective rating of the cell, `None` when missing.
    pub fn value(&self, member_pos: usize, item_pos: usize) -> Option<f64> {
        let v = self.values[member_pos * self.items.len() + item_pos];
        (!v.is_nan()).then_some(v)
    }

    pub fn provenance(&self, member_pos: usize, item_pos: usize) -> Provenance {
        self.provenance[member_pos * self.items.len() + item_pos]
    }

    pub fn value_ids(&self, u: UserId, i: ItemId) -> Option<f64> {
        self.value(self.member_pos(u)?, self.item_pos(i)?)
    }

    /// (observed, predicted, missing) cell totals.
    pub fn provenance_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for p in &self.provenance {
            match p {
                Provenance::Observed => counts.0 += 1,
                Provenance::Predicted => counts.1 += 1,
                Provenance::Missing => counts.2 += 1,
            }
        }
        counts
    }

    /// Dumps `user,item,value,provenance` rows; missing cells have an empty
    /// value field.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "user,item,value,provenance")?;
        for (mp, &user) in self.members.iter().enumerate() {
            for (ip, &item) in self.items.iter().enumerate() {
                match self.value(mp, ip) {
                    Some(v) => writeln!(
                        out,
                        "{user},{item},{v},{}",
                        self.provenance(mp, ip).name()
                    )?,
                    None => writeln!(out, "{user},{item},,missing")?,
                }
            }
        }
        Ok(())
    }
}

/// Observed rating if the user rated the item in the matrix behind `pm`,
/// else the prediction, else `None`.
pub fn effective_rating(u: UserId, i: ItemId, pm: &PredictionMatrix) -> Option<f64> {
    pm.value_ids(u, i)
}

pub(crate) fn predict_idx(
    m: &RatingMatrix,
    table: &SimilarityTable,
    user_idx: usize,
    item_idx: usize,
    neighbors: &[usize],
) -> Option<f64> {
    if neighbors.is_empty() {
        return None;
    }
    let mut weighted = 0.0;
    let mut mass = 0.0;
    for &vi in neighbors {
        let Some(r) = m.rating(vi, item_idx) else {
            continue;
        };
        let sim = table.score(user_idx, vi);
        weighted += sim * (r - m.user_mean(vi));
        mass += sim.abs();
    }
    if mass == 0.0 {
        return None;
    }
    let raw = m.user_mean(user_idx) + weighted / mass;
    Some(raw.clamp(m.r_min(), m.r_max()))
}

/// Signed-similarity weighted deviation from neighbor means, anchored at the
/// user's own mean and clamped to the rating scale. `None` when the
/// neighborhood is empty or carries zero similarity mass. Neighbors that did
/// not rate the item are skipped.
pub fn predict_rating(
    u: UserId,
    i: ItemId,
    neighbors: &[UserId],
    table: &SimilarityTable,
    m: &RatingMatrix,
) -> Option<f64> {
    let ui = m.user_index(u)?;
    let ii = m.item_index(i)?;
    let idx: Vec<usize> = neighbors.iter().filter_map(|&v| m.user_index(v)).collect();
    predict_idx(m, table, ui, ii, &idx)
}

/// Fills the full member x item table for a group: training ratings are
/// copied as observed, everything else is predicted from the chosen
/// neighborhood. Rows are independent, so filling parallelizes without
/// changing the result.
pub fn predict_matrix(
    g: &GroupSpec,
    k: usize,
    strategy: &NeighborStrategy,
    table: &SimilarityTable,
    train: &RatingMatrix,
) -> Result<PredictionMatrix> {
    let member_idx: Vec<usize> = g
        .members
        .iter()
        .map(|&u| train.user_index(u).ok_or(Error::UnknownUser(u)))
        .collect::<Result<_>>()?;
    let n_items = train.n_items();
    let mut values = vec![f64::NAN; g.members.len() * n_items];
    let mut provenance = vec![Provenance::Missing; g.members.len() * n_items];

    values
        .par_chunks_mut(n_items)
        .zip(provenance.par_chunks_mut(n_items))
        .zip(member_idx.par_iter())
        .for_each(|((val_row, prov_row), &ui)| {
            for ii in 0..n_items {
                if let Some(r) = train.rating(ui, ii) {
                    val_row[ii] = r;
                    prov_row[ii] = Provenance::Observed;
                    continue;
                }
                let nbrs = match strategy {
                    NeighborStrategy::Knn => knn_neighbors_idx(train, table, ui, ii, k),
                    NeighborStrategy::Topsis(p) => {
                        topsis_neighbors_idx(train, table, ui, ii, k, p)
                    }
                };
                if let Some(v) = predict_idx(train, table, ui, ii, &nbrs) {
                    val_row[ii] = v;
                    prov_row[ii] = Provenance::Predicted;
                }
            }
        });

    Ok(PredictionMatrix {
        members: g.members.clone(),
        items: train.items().to_vec(),
        values,
        provenance,
    })
}
