//! Evaluation metrics: prediction accuracy on held-out cells, group
//! satisfaction/consensus/fairness, and popularity- and trust-based novelty.
//!
//! Missing cells are skipped pairwise in every mean; counts of skipped cells
//! are surfaced where a report needs them.

use std::io::Write;

use crate::dataset::{GroupSpec, ItemId, RatingMatrix, Split, TrustGraph, UserId};
use crate::error::{Error, Result};
use crate::group::{choquet, FuzzyCapacity};
use crate::neighbors::{knn_neighbors_idx, topsis_neighbors_idx};
use crate::predictor::{predict_idx, NeighborStrategy, PredictionMatrix};
use crate::similarity::SimilarityTable;

/// Test-set prediction accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyReport {
    pub mae: f64,
    pub rmse: f64,
    /// Test cells with a usable prediction.
    pub evaluated: usize,
    /// Test cells skipped for lack of one.
    pub skipped: usize,
}

/// MAE and RMSE over the split's test cells belonging to the matrix's
/// members, skipping cells without a prediction.
pub fn mae_rmse(pm: &PredictionMatrix, split: &Split) -> AccuracyReport {
    let mut abs = 0.0;
    let mut sq = 0.0;
    let mut evaluated = 0;
    let mut skipped = 0;
    for rec in &split.test {
        let Some(mp) = pm.member_pos(rec.user) else {
            continue;
        };
        let pred = pm.item_pos(rec.item).and_then(|ip| pm.value(mp, ip));
        match pred {
            Some(p) => {
                let e = p - rec.rating;
                abs += e.abs();
                sq += e * e;
                evaluated += 1;
            }
            None => skipped += 1,
        }
    }
    finish_accuracy(abs, sq, evaluated, skipped)
}

/// Predicts exactly the split's test cells with the given neighborhood
/// configuration and scores them. Equivalent to building a prediction matrix
/// for all users and calling [`mae_rmse`], but only touches test cells.
pub fn evaluate_split(
    split: &Split,
    table: &SimilarityTable,
    k: usize,
    strategy: &NeighborStrategy,
) -> AccuracyReport {
    use rayon::prelude::*;
    let train = &split.train;
    let errors: Vec<Option<f64>> = split
        .test
        .par_iter()
        .map(|rec| {
            let ui = train.user_index(rec.user)?;
            let ii = train.item_index(rec.item)?;
            let nbrs = match strategy {
                NeighborStrategy::Knn => knn_neighbors_idx(train, table, ui, ii, k),
                NeighborStrategy::Topsis(p) => topsis_neighbors_idx(train, table, ui, ii, k, p),
            };
            predict_idx(train, table, ui, ii, &nbrs).map(|p| p - rec.rating)
        })
        .collect();
    let mut abs = 0.0;
    let mut sq = 0.0;
    let mut evaluated = 0;
    let mut skipped = 0;
    for e in errors {
        match e {
            Some(e) => {
                abs += e.abs();
                sq += e * e;
                evaluated += 1;
            }
            None => skipped += 1,
        }
    }
    finish_accuracy(abs, sq, evaluated, skipped)
}

fn finish_accuracy(abs: f64, sq: f64, evaluated: usize, skipped: usize) -> AccuracyReport {
    let (mae, rmse) = if evaluated == 0 {
        (f64::NAN, f64::NAN)
    } else {
        (abs / evaluated as f64, (sq / evaluated as f64).sqrt())
    };
    AccuracyReport {
        mae,
        rmse,
        evaluated,
        skipped,
    }
}

/// Mean over the recommended items of the members' mean effective rating.
/// Items nobody can rate are skipped; NaN when nothing is computable.
pub fn group_pref(pm: &PredictionMatrix, rec_items: &[ItemId]) -> f64 {
    let mut total = 0.0;
    let mut items = 0;
    for &i in rec_items {
        let Some(ip) = pm.item_pos(i) else {
            continue;
        };
        let mut sum = 0.0;
        let mut n = 0;
        for mp in 0..pm.n_members() {
            if let Some(v) = pm.value(mp, ip) {
                sum += v;
                n += 1;
            }
        }
        if n > 0 {
            total += sum / n as f64;
            items += 1;
        }
    }
    if items == 0 {
        f64::NAN
    } else {
        total / items as f64
    }
}

fn member_mean(pm: &PredictionMatrix, item_pos: usize) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0;
    for mp in 0..pm.n_members() {
        if let Some(v) = pm.value(mp, item_pos) {
            sum += v;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Mean absolute gap between the aggregated group score and the members'
/// mean rating over the recommended items.
pub fn mae_g(g: &GroupSpec, rec_items: &[ItemId], pm: &PredictionMatrix, cap: &FuzzyCapacity) -> f64 {
    agg_deviation(g, rec_items, pm, cap, false)
}

/// Root mean square version of [`mae_g`].
pub fn rmse_g(g: &GroupSpec, rec_items: &[ItemId], pm: &PredictionMatrix, cap: &FuzzyCapacity) -> f64 {
    agg_deviation(g, rec_items, pm, cap, true)
}

fn agg_deviation(
    g: &GroupSpec,
    rec_items: &[ItemId],
    pm: &PredictionMatrix,
    cap: &FuzzyCapacity,
    squared: bool,
) -> f64 {
    let mut total = 0.0;
    let mut n = 0;
    for &i in rec_items {
        let Some(ip) = pm.item_pos(i) else {
            continue;
        };
        let (Some(score), Some(mean)) = (choquet(i, g, pm, cap), member_mean(pm, ip)) else {
            continue;
        };
        let d = score - mean;
        total += if squared { d * d } else { d.abs() };
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else if squared {
        (total / n as f64).sqrt()
    } else {
        total / n as f64
    }
}

/// Per-member satisfaction: mean effective rating over the recommended
/// items. Members with no computable cell are excluded.
pub fn member_satisfaction(pm: &PredictionMatrix, rec_items: &[ItemId]) -> Vec<(UserId, f64)> {
    let mut out = Vec::with_capacity(pm.n_members());
    for mp in 0..pm.n_members() {
        let mut sum = 0.0;
        let mut n = 0;
        for &i in rec_items {
            if let Some(v) = pm.item_pos(i).and_then(|ip| pm.value(mp, ip)) {
                sum += v;
                n += 1;
            }
        }
        if n > 0 {
            out.push((pm.members()[mp], sum / n as f64));
        }
    }
    out
}

/// Jain's index over member satisfactions: 1 when everyone is equally
/// satisfied, down to 1/|g| in the most lopsided case.
pub fn fairness_jain(pm: &PredictionMatrix, rec_items: &[ItemId]) -> f64 {
    let s: Vec<f64> = member_satisfaction(pm, rec_items)
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    if s.is_empty() {
        return f64::NAN;
    }
    let sum: f64 = s.iter().sum();
    let sq: f64 = s.iter().map(|v| v * v).sum();
    if sq == 0.0 {
        // all satisfactions zero counts as perfectly even
        return 1.0;
    }
    sum * sum / (s.len() as f64 * sq)
}

/// One minus the population variance of member satisfactions.
pub fn fairness_var(pm: &PredictionMatrix, rec_items: &[ItemId]) -> f64 {
    let s: Vec<f64> = member_satisfaction(pm, rec_items)
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    if s.is_empty() {
        return f64::NAN;
    }
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let var = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / s.len() as f64;
    1.0 - var
}

/// Popularity novelty: mean of -log2(|U_i| / |U|) / log2(|U|) over the
/// recommended items, using the full rating matrix.
pub fn novelty(rec_items: &[ItemId], m: &RatingMatrix) -> f64 {
    novelty_mean(rec_items, m, |ii| m.item_users(ii).len())
}

/// Trust-count novelty: like [`novelty`] but counting only raters that are
/// the target of some trust edge; zero counts are floored at 1 so a fully
/// untrusted item contributes maximal novelty.
pub fn ntc(rec_items: &[ItemId], m: &RatingMatrix, trust: &TrustGraph) -> f64 {
    let trusted = trust.trusted_users();
    let trusted_idx: Vec<bool> = m
        .users()
        .iter()
        .map(|u| trusted.binary_search(u).is_ok())
        .collect();
    novelty_mean(rec_items, m, |ii| {
        m.item_users(ii)
            .iter()
            .filter(|&&(vi, _)| trusted_idx[vi])
            .count()
            .max(1)
    })
}

fn novelty_mean(rec_items: &[ItemId], m: &RatingMatrix, count: impl Fn(usize) -> usize) -> f64 {
    let n_users = m.n_users() as f64;
    if m.n_users() < 2 || rec_items.is_empty() {
        return f64::NAN;
    }
    let log_u = n_users.log2();
    let mut total = 0.0;
    let mut n = 0;
    for &i in rec_items {
        let Some(ii) = m.item_index(i) else {
            continue;
        };
        let c = count(ii) as f64;
        total += -(c / n_users).log2() / log_u;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        total / n as f64
    }
}

/// Trust-rating novelty: 1 minus the mean (over recommended items) total of
/// trust-weighted similarity over directed trust edges whose both endpoints
/// rated the item. Values below 0 are possible when an item carries more
/// than unit trust-similarity mass and are reported as-is.
pub fn ntr(
    rec_items: &[ItemId],
    m: &RatingMatrix,
    trust: &TrustGraph,
    table: &SimilarityTable,
) -> f64 {
    if rec_items.is_empty() {
        return f64::NAN;
    }
    let mut total = 0.0;
    for &i in rec_items {
        let Some(ii) = m.item_index(i) else {
            continue;
        };
        let raters = m.item_users(ii);
        for e in trust.edges() {
            let both_rated = m
                .user_index(e.from)
                .and_then(|fi| raters.binary_search_by_key(&fi, |r| r.0).ok())
                .is_some()
                && m.user_index(e.to)
                    .and_then(|ti| raters.binary_search_by_key(&ti, |r| r.0).ok())
                    .is_some();
            if both_rated {
                total += e.weight * table.score_ids(e.from, e.to).unwrap_or(0.0);
            }
        }
    }
    1.0 - total / rec_items.len() as f64
}

/// One evaluation row: a dataset/method/strategy/list-length cell with all
/// group metrics. Optional metrics stay empty in the CSV when unavailable.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub dataset: String,
    pub method: String,
    pub strategy: String,
    pub n_top: usize,
    pub satisfaction: f64,
    pub rmse_g: f64,
    pub mae_g: f64,
    pub fairness1: f64,
    pub fairness2: f64,
    pub novelty: Option<f64>,
    pub ntc: Option<f64>,
    pub ntr: Option<f64>,
    pub skipped: usize,
}

pub const METRIC_CSV_HEADER: &str =
    "dataset,method,strategy,n_top,satisfaction,rmse_g,mae_g,fairness1,fairness2,novelty,ntc,ntr,skipped";

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl MetricReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{}",
            self.dataset,
            self.method,
            self.strategy,
            self.n_top,
            self.satisfaction,
            self.rmse_g,
            self.mae_g,
            self.fairness1,
            self.fairness2,
            opt_cell(self.novelty),
            opt_cell(self.ntc),
            opt_cell(self.ntr),
            self.skipped
        )
    }

    pub fn write_csv(out: &mut impl Write, rows: &[MetricReport]) -> std::io::Result<()> {
        writeln!(out, "{METRIC_CSV_HEADER}")?;
        for r in rows {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }

    /// Parses one [`csv_row`](Self::csv_row) line back.
    pub fn parse_csv_row(row: &str) -> Result<Self> {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 13 {
            return Err(Error::TableParse {
                line: 0,
                msg: format!("expected 13 metric fields, found {}", fields.len()),
            });
        }
        let num = |idx: usize| -> Result<f64> {
            fields[idx].parse().map_err(|_| Error::TableParse {
                line: 0,
                msg: format!("invalid number {:?}", fields[idx]),
            })
        };
        let opt = |idx: usize| -> Result<Option<f64>> {
            if fields[idx].is_empty() {
                Ok(None)
            } else {
                num(idx).map(Some)
            }
        };
        Ok(Self {
            dataset: fields[0].to_string(),
            method: fields[1].to_string(),
            strategy: fields[2].to_string(),
            n_top: fields[3].parse().map_err(|_| Error::TableParse {
                line: 0,
                msg: format!("invalid n_top {:?}", fields[3]),
            })?,
            satisfaction: num(4)?,
            rmse_g: num(5)?,
            mae_g: num(6)?,
            fairness1: num(7)?,
            fairness2: num(8)?,
            novelty: opt(9)?,
            ntc: opt(10)?,
            ntr: opt(11)?,
            skipped: fields[12].parse().map_err(|_| Error::TableParse {
                line: 0,
                msg: format!("invalid skipped count {:?}", fields[12]),
            })?,
        })
    }
}
