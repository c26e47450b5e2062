//! Group candidate construction and Choquet aggregation.
//!
//! Candidates are the union of per-member top-N effective ratings, enriched
//! with the highest group Borda-count items. Each candidate is scored with a
//! Choquet integral over a fuzzy capacity derived from training-set activity
//! and rating skew; the top-N scores form the group recommendation.

use std::collections::BTreeSet;
use std::io::Write;

use crate::dataset::{GroupSpec, ItemId, RatingMatrix, UserId};
use crate::predictor::PredictionMatrix;

/// Candidate-set and list-length parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateConfig {
    /// Per-member top-N list length feeding the candidate union.
    pub n_filter: usize,
    /// Number of Borda-ranked items added on top (0 disables enrichment).
    pub n_borda: usize,
    /// Final recommendation list length.
    pub n_top: usize,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        Self {
            n_filter: 40,
            n_borda: 50,
            n_top: 40,
        }
    }
}

fn top_items_for_pos(pm: &PredictionMatrix, member_pos: usize, n: usize) -> Vec<usize> {
    let mut cands: Vec<(usize, f64)> = (0..pm.n_items())
        .filter_map(|ip| pm.value(member_pos, ip).map(|v| (ip, v)))
        .collect();
    cands.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    cands.truncate(n);
    cands.into_iter().map(|(ip, _)| ip).collect()
}

/// The member's n highest effective ratings; missing cells are excluded and
/// ties break by ascending item id.
pub fn top_n_items(u: UserId, n: usize, pm: &PredictionMatrix) -> Vec<ItemId> {
    let Some(mp) = pm.member_pos(u) else {
        return Vec::new();
    };
    top_items_for_pos(pm, mp, n)
        .into_iter()
        .map(|ip| pm.items()[ip])
        .collect()
}

/// Borda scores over the full item set, aligned with `pm.items()`.
///
/// Every member contributes a complete ranking: items with an effective
/// rating come first (descending value), missing items rank last, and all
/// ties break by ascending item id so ranks form a permutation. An item at
/// rank p (1 = best) earns n - p + 1 points.
pub fn borda_scores(pm: &PredictionMatrix) -> Vec<u64> {
    let n_items = pm.n_items();
    let mut scores = vec![0u64; n_items];
    let mut order: Vec<usize> = (0..n_items).collect();
    for mp in 0..pm.n_members() {
        order.sort_unstable_by(|&a, &b| match (pm.value(mp, a), pm.value(mp, b)) {
            (Some(x), Some(y)) => y.total_cmp(&x).then(a.cmp(&b)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.cmp(&b),
        });
        for (rank0, &ip) in order.iter().enumerate() {
            scores[ip] += (n_items - rank0) as u64;
        }
    }
    scores
}

/// Union of per-member top-`n_filter` lists with the `n_borda` highest Borda
/// items, ascending by item id.
pub fn extended_candidates(pm: &PredictionMatrix, cfg: &CandidateConfig) -> Vec<ItemId> {
    let mut set: BTreeSet<usize> = BTreeSet::new();
    for mp in 0..pm.n_members() {
        set.extend(top_items_for_pos(pm, mp, cfg.n_filter));
    }
    if cfg.n_borda > 0 {
        let scores = borda_scores(pm);
        let mut ranked: Vec<(usize, u64)> = scores.into_iter().enumerate().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        set.extend(ranked.into_iter().take(cfg.n_borda).map(|(ip, _)| ip));
    }
    set.into_iter().map(|ip| pm.items()[ip]).collect()
}

/// Per-member capacity ingredients: a global activity weight (share of the
/// item universe the member rated) and a rating-skew bias (signed fraction
/// of ratings above vs below the member's median).
#[derive(Debug, Clone)]
pub struct FuzzyCapacity {
    global_weight: Vec<f64>,
    median_bias: Vec<f64>,
}

/// Member weights for a (possibly reduced) group: activity weights are
/// normalized when they sum below 1, the bias is added, and the result is
/// floored at 0 so capacities stay monotone.
fn positive_member_weights(omega: &[f64], bias: &[f64], keep: &[usize]) -> Vec<f64> {
    let sum: f64 = keep.iter().map(|&j| omega[j]).sum();
    keep.iter()
        .map(|&j| {
            let w = if sum > 0.0 && sum < 1.0 {
                omega[j] / sum
            } else {
                omega[j]
            };
            (w + bias[j]).max(0.0)
        })
        .collect()
}

impl FuzzyCapacity {
    /// Derives the capacity from training data. Members missing from the
    /// matrix contribute zero weight and zero bias.
    pub fn build(g: &GroupSpec, train: &RatingMatrix) -> Self {
        let n_items = train.n_items() as f64;
        let mut global_weight = Vec::with_capacity(g.members.len());
        let mut median_bias = Vec::with_capacity(g.members.len());
        for &u in &g.members {
            match train.user_index(u) {
                Some(ui) => {
                    let row = train.user_items(ui);
                    let median = train.user_median(ui);
                    let above = row.iter().filter(|&&(_, r)| r > median).count();
                    let below = row.iter().filter(|&&(_, r)| r < median).count();
                    global_weight.push(row.len() as f64 / n_items);
                    median_bias.push((above as f64 - below as f64) / row.len() as f64);
                }
                None => {
                    global_weight.push(0.0);
                    median_bias.push(0.0);
                }
            }
        }
        Self {
            global_weight,
            median_bias,
        }
    }

    pub fn n_members(&self) -> usize {
        self.global_weight.len()
    }

    /// Capacity of the member subset given as a bit mask over the group's
    /// member order: 0 for the empty set, 1 for the whole group, otherwise
    /// the clamped positive-weight mass.
    pub fn subset_value(&self, mask: u64) -> f64 {
        let n = self.n_members();
        debug_assert!(n <= 64);
        let full = full_mask(n);
        debug_assert_eq!(mask & !full, 0, "mask selects unknown members");
        if mask == 0 {
            return 0.0;
        }
        if mask == full {
            return 1.0;
        }
        let keep: Vec<usize> = (0..n).collect();
        let w = positive_member_weights(&self.global_weight, &self.median_bias, &keep);
        let total: f64 = (0..n).filter(|&j| mask & (1 << j) != 0).map(|j| w[j]).sum();
        total.min(1.0)
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Capacity of `subset` within group `g` from training data.
pub fn capacity(subset: &[UserId], g: &GroupSpec, train: &RatingMatrix) -> f64 {
    let cap = FuzzyCapacity::build(g, train);
    let mut mask = 0u64;
    for u in subset {
        if let Ok(j) = g.members.binary_search(u) {
            mask |= 1 << j;
        }
    }
    cap.subset_value(mask)
}

/// Choquet integral of `values` against an arbitrary capacity over bit
/// masks: members are sorted by ascending value and each increment is
/// weighted by the capacity of the members at or above it.
pub fn choquet_with<F: Fn(u64) -> f64>(values: &[f64], capacity: F) -> f64 {
    assert!(!values.is_empty(), "choquet of an empty member set");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut mask = full_mask(values.len());
    let mut score = values[order[0]];
    for k in 1..order.len() {
        mask &= !(1 << order[k - 1]);
        score += (values[order[k]] - values[order[k - 1]]) * capacity(mask);
    }
    score
}

/// Group score of an item: the Choquet integral of the members' effective
/// ratings. Members without a value for the item are dropped and the
/// capacity re-normalized over the reduced group; `None` when nobody has a
/// value.
pub fn choquet(
    i: ItemId,
    g: &GroupSpec,
    pm: &PredictionMatrix,
    cap: &FuzzyCapacity,
) -> Option<f64> {
    debug_assert_eq!(g.members, pm.members(), "prediction matrix must cover g");
    debug_assert_eq!(cap.n_members(), g.members.len());
    let ip = pm.item_pos(i)?;
    choquet_at(pm, ip, cap)
}

pub(crate) fn choquet_at(
    pm: &PredictionMatrix,
    item_pos: usize,
    cap: &FuzzyCapacity,
) -> Option<f64> {
    let mut keep = Vec::with_capacity(pm.n_members());
    let mut values = Vec::with_capacity(pm.n_members());
    for mp in 0..pm.n_members() {
        if let Some(v) = pm.value(mp, item_pos) {
            keep.push(mp);
            values.push(v);
        }
    }
    if values.is_empty() {
        return None;
    }
    let w = positive_member_weights(&cap.global_weight, &cap.median_bias, &keep);
    let full = full_mask(values.len());
    Some(choquet_with(&values, |mask| {
        if mask == 0 {
            0.0
        } else if mask == full {
            1.0
        } else {
            let total: f64 = (0..values.len())
                .filter(|&j| mask & (1 << j) != 0)
                .map(|j| w[j])
                .sum();
            total.min(1.0)
        }
    }))
}

/// A group's scored candidates and final list.
#[derive(Debug, Clone)]
pub struct GroupRecommendation {
    pub group_id: u32,
    /// The extended candidate set, ascending by item id.
    pub candidates: Vec<ItemId>,
    /// Choquet score per scorable candidate, ascending by item id.
    pub scores: Vec<(ItemId, f64)>,
    /// Top candidates by score (ties by ascending item id), length <= n_top.
    pub top: Vec<(ItemId, f64)>,
}

impl GroupRecommendation {
    /// The item ids of the best `n` entries.
    pub fn top_items(&self, n: usize) -> Vec<ItemId> {
        self.top.iter().take(n).map(|&(i, _)| i).collect()
    }

    /// Dumps `group_id,rank,item,choquet_score` rows.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "group_id,rank,item,choquet_score")?;
        for (rank0, &(item, score)) in self.top.iter().enumerate() {
            writeln!(out, "{},{},{},{score:.6}", self.group_id, rank0 + 1, item)?;
        }
        Ok(())
    }
}

/// Builds the candidate set, scores every candidate with the Choquet
/// integral, and keeps the best `n_top`.
pub fn recommend(
    g: &GroupSpec,
    pm: &PredictionMatrix,
    cfg: &CandidateConfig,
    cap: &FuzzyCapacity,
) -> GroupRecommendation {
    let candidates = extended_candidates(pm, cfg);
    let scores: Vec<(ItemId, f64)> = candidates
        .iter()
        .filter_map(|&i| choquet(i, g, pm, cap).map(|s| (i, s)))
        .collect();
    let mut top = scores.clone();
    top.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    top.truncate(cfg.n_top);
    GroupRecommendation {
        group_id: g.id,
        candidates,
        scores,
        top,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::RatingRecord;
    use crate::predictor::{predict_matrix, NeighborStrategy};
    use crate::similarity::{build_similarity_table, Measure};
    use proptest::prelude::*;

    fn matrix(records: &[(UserId, ItemId, f64)]) -> RatingMatrix {
        RatingMatrix::from_records(records.iter().map(|&(user, item, rating)| RatingRecord {
            user,
            item,
            rating,
        }))
        .unwrap()
    }

    /// Prediction matrix over a fully observed toy matrix (no CF involved).
    fn observed_pm(records: &[(UserId, ItemId, f64)], members: Vec<UserId>) -> PredictionMatrix {
        let m = matrix(records);
        let t = build_similarity_table(&m, &Measure::Cosine).unwrap();
        let g = GroupSpec::new(0, members);
        predict_matrix(&g, 1, &NeighborStrategy::Knn, &t, &m).unwrap()
    }

    #[test]
    fn top_n_orders_and_breaks_ties_by_item_id() {
        let pm = observed_pm(
            &[(1, 10, 5.0), (1, 20, 3.0), (1, 30, 4.0)],
            vec![1],
        );
        assert_eq!(top_n_items(1, 2, &pm), vec![10, 30]);
        assert_eq!(top_n_items(1, 9, &pm), vec![10, 30, 20]);
        let tied = observed_pm(&[(1, 10, 5.0), (1, 20, 5.0)], vec![1]);
        assert_eq!(top_n_items(1, 1, &tied), vec![10]);
    }

    #[test]
    fn borda_hand_example() {
        // rankings i1 > i2 > i3 and i2 > i1 > i3 over three items
        let pm = observed_pm(
            &[
                (1, 1, 5.0),
                (1, 2, 4.0),
                (1, 3, 1.0),
                (2, 1, 4.0),
                (2, 2, 5.0),
                (2, 3, 1.0),
            ],
            vec![1, 2],
        );
        assert_eq!(borda_scores(&pm), vec![5, 5, 2]);
    }

    #[test]
    fn borda_single_member_top_item_scores_item_count() {
        let pm = observed_pm(&[(1, 1, 5.0), (1, 2, 3.0), (1, 3, 4.0), (1, 4, 1.0)], vec![1]);
        let scores = borda_scores(&pm);
        assert_eq!(scores[0], 4);
    }

    #[test]
    fn borda_ranks_missing_cells_last() {
        // the member rates items 2 and 3; item 1 is rated only by an
        // unrelated user, so the member's cell stays missing and takes the
        // worst rank
        let m = matrix(&[(1, 2, 2.0), (1, 3, 5.0), (4, 1, 3.0)]);
        let t = build_similarity_table(&m, &Measure::Cosine).unwrap();
        let g = GroupSpec::new(0, vec![1]);
        let pm = predict_matrix(&g, 2, &NeighborStrategy::Knn, &t, &m).unwrap();
        assert_eq!(pm.value(0, pm.item_pos(1).unwrap()), None);
        // items ascending [1, 2, 3]: ranks 3, 2, 1 -> scores 1, 2, 3
        assert_eq!(borda_scores(&pm), vec![1, 2, 3]);
    }

    #[test]
    fn borda_preserves_a_shared_ranking() {
        let pm = observed_pm(
            &[
                (1, 1, 5.0),
                (1, 2, 4.0),
                (1, 3, 3.0),
                (2, 1, 4.9),
                (2, 2, 3.9),
                (2, 3, 2.9),
            ],
            vec![1, 2],
        );
        let scores = borda_scores(&pm);
        assert!(scores[0] > scores[1] && scores[1] > scores[2]);
    }

    #[test]
    fn candidates_union_and_enrichment() {
        let pm = observed_pm(
            &[
                (1, 1, 5.0),
                (1, 2, 4.0),
                (1, 3, 1.0),
                (2, 1, 4.0),
                (2, 2, 5.0),
                (2, 3, 1.0),
            ],
            vec![1, 2],
        );
        // no enrichment: plain union of top lists
        let no_borda = CandidateConfig { n_filter: 1, n_borda: 0, n_top: 5 };
        assert_eq!(extended_candidates(&pm, &no_borda), vec![1, 2]);
        // borda top-k inside the union leaves it unchanged
        let absorbed = CandidateConfig { n_filter: 2, n_borda: 2, n_top: 5 };
        assert_eq!(extended_candidates(&pm, &absorbed), vec![1, 2]);
        // borda top-k can add items beyond every member's top list
        let enriched = CandidateConfig { n_filter: 1, n_borda: 3, n_top: 5 };
        assert_eq!(extended_candidates(&pm, &enriched), vec![1, 2, 3]);
    }

    /// Two members rating 3 of 15 items each with a symmetric (2,3,4)
    /// profile: omega = 0.2 per member (normalized to 0.5 since the sum is
    /// below 1) and zero median bias (median 3, one above, one below).
    fn balanced_pair() -> (RatingMatrix, GroupSpec) {
        let mut records = vec![
            (1, 1, 2.0),
            (1, 2, 3.0),
            (1, 3, 4.0),
            (2, 4, 2.0),
            (2, 5, 3.0),
            (2, 6, 4.0),
        ];
        for i in 7..=15 {
            records.push((3, i, 3.0));
        }
        let m = matrix(&records);
        assert_eq!(m.n_items(), 15);
        (m, GroupSpec::new(0, vec![1, 2]))
    }

    #[test]
    fn capacity_endpoints_are_forced() {
        let (m, g) = balanced_pair();
        assert_eq!(capacity(&[], &g, &m), 0.0);
        assert_eq!(capacity(&[1, 2], &g, &m), 1.0);
    }

    #[test]
    fn capacity_normalizes_small_weights() {
        let (m, g) = balanced_pair();
        assert!((capacity(&[1], &g, &m) - 0.5).abs() < 1e-12);
        assert!((capacity(&[2], &g, &m) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn median_bias_hand_count() {
        // 12 ratings: two 1s, four 3s, six 5s; lower median is 3 ->
        // 6 above, 2 below -> bias (6 - 2) / 12 = 1/3
        let mut records: Vec<(UserId, ItemId, f64)> = Vec::new();
        let values = [1.0, 1.0, 3.0, 3.0, 3.0, 3.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0];
        for (i, &v) in values.iter().enumerate() {
            records.push((1, i as ItemId + 1, v));
        }
        let m = matrix(&records);
        let cap = FuzzyCapacity::build(&GroupSpec::new(0, vec![1]), &m);
        assert!((cap.median_bias[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn choquet_constant_ratings_return_the_constant() {
        let mut records = vec![(1, 1, 4.0), (2, 1, 4.0), (3, 1, 4.0)];
        for i in 2..=20 {
            records.push((1, i, 3.0));
            records.push((2, i, 2.0));
        }
        let m = matrix(&records);
        let g = GroupSpec::new(0, vec![1, 2, 3]);
        let t = build_similarity_table(&m, &Measure::Cosine).unwrap();
        let pm = predict_matrix(&g, 2, &NeighborStrategy::Knn, &t, &m).unwrap();
        let cap = FuzzyCapacity::build(&g, &m);
        let got = choquet(1, &g, &pm, &cap).unwrap();
        assert!((got - 4.0).abs() < 1e-12);
    }

    #[test]
    fn choquet_two_member_hand_value() {
        // Members rate item 1 as (2, 4); both carry normalized weight 0.5
        // and zero bias, so C({higher member}) = 0.5 and the integral is
        // 2 + (4 - 2) * 0.5 = 3.
        let mut records = vec![
            (1, 1, 2.0),
            (1, 2, 3.0),
            (1, 3, 4.0),
            (2, 1, 4.0),
            (2, 4, 2.0),
            (2, 5, 3.0),
        ];
        for i in 6..=15 {
            records.push((3, i, 3.0));
        }
        let m = matrix(&records);
        assert_eq!(m.n_items(), 15);
        let g = GroupSpec::new(0, vec![1, 2]);
        // profiles (2,3,4) and (4,2,3): lower median 3, one above, one below
        assert!((capacity(&[2], &g, &m) - 0.5).abs() < 1e-12);
        let t = build_similarity_table(&m, &Measure::Cosine).unwrap();
        let pm = predict_matrix(&g, 2, &NeighborStrategy::Knn, &t, &m).unwrap();
        let cap = FuzzyCapacity::build(&g, &m);
        let got = choquet(1, &g, &pm, &cap).unwrap();
        assert!((got - 3.0).abs() < 1e-12);
    }

    #[test]
    fn choquet_drops_missing_members_and_renormalizes() {
        // Member 3 shares no items with the raters of item 9, so its cell is
        // missing and the capacity renormalizes over the remaining pair,
        // whose weights land at 0.5 each with zero bias: 2 + 2 * 0.5 = 3.
        let mut records = vec![
            (1, 1, 3.0),
            (1, 2, 4.0),
            (1, 9, 2.0),
            (2, 1, 3.0),
            (2, 3, 2.0),
            (2, 9, 4.0),
            (3, 5, 3.0),
        ];
        for i in 10..=20 {
            records.push((4, i, 3.0));
        }
        let m = matrix(&records);
        assert_eq!(m.n_items(), 16);
        let g = GroupSpec::new(0, vec![1, 2, 3]);
        let t = build_similarity_table(&m, &Measure::Cosine).unwrap();
        let pm = predict_matrix(&g, 2, &NeighborStrategy::Knn, &t, &m).unwrap();
        let cap = FuzzyCapacity::build(&g, &m);
        let mp3 = pm.member_pos(3).unwrap();
        let ip9 = pm.item_pos(9).unwrap();
        assert_eq!(pm.value(mp3, ip9), None);
        let got = choquet(9, &g, &pm, &cap).unwrap();
        assert!((got - 3.0).abs() < 1e-12);
    }

    #[test]
    fn recommend_small_candidate_set_keeps_everything_sorted() {
        let pm = observed_pm(
            &[
                (1, 1, 5.0),
                (1, 2, 4.0),
                (1, 3, 1.0),
                (2, 1, 4.0),
                (2, 2, 5.0),
                (2, 3, 1.0),
            ],
            vec![1, 2],
        );
        let m = matrix(&[
            (1, 1, 5.0),
            (1, 2, 4.0),
            (1, 3, 1.0),
            (2, 1, 4.0),
            (2, 2, 5.0),
            (2, 3, 1.0),
        ]);
        let g = GroupSpec::new(0, vec![1, 2]);
        let cap = FuzzyCapacity::build(&g, &m);
        let cfg = CandidateConfig { n_filter: 2, n_borda: 0, n_top: 10 };
        let rec = recommend(&g, &pm, &cfg, &cap);
        assert_eq!(rec.candidates, vec![1, 2]);
        assert_eq!(rec.top.len(), 2);
        assert!(rec.top[0].1 >= rec.top[1].1);
    }

    #[test]
    fn recommend_singleton_group_is_the_member_top_list() {
        let pm = observed_pm(
            &[(1, 10, 5.0), (1, 20, 3.0), (1, 30, 4.0), (1, 40, 2.0)],
            vec![1],
        );
        let m = matrix(&[(1, 10, 5.0), (1, 20, 3.0), (1, 30, 4.0), (1, 40, 2.0)]);
        let g = GroupSpec::new(0, vec![1]);
        let cap = FuzzyCapacity::build(&g, &m);
        let cfg = CandidateConfig { n_filter: 3, n_borda: 0, n_top: 2 };
        let rec = recommend(&g, &pm, &cfg, &cap);
        assert_eq!(rec.top_items(2), vec![10, 30]);
        // singleton choquet equals the member's own rating
        assert_eq!(rec.top[0].1, 5.0);
    }

    #[test]
    fn csv_export_shape() {
        let pm = observed_pm(&[(1, 10, 5.0), (1, 20, 3.0)], vec![1]);
        let m = matrix(&[(1, 10, 5.0), (1, 20, 3.0)]);
        let g = GroupSpec::new(0, vec![1]);
        let cap = FuzzyCapacity::build(&g, &m);
        let rec = recommend(&g, &pm, &CandidateConfig::default(), &cap);
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "group_id,rank,item,choquet_score");
        assert!(lines[1].starts_with("0,1,10,"));
    }

    prop_compose! {
        fn arb_group_matrix()(n_members in 1usize..6, n_items in 1usize..12, seed in 0u64..1000)
            -> (RatingMatrix, GroupSpec)
        {
            use rand::{RngExt, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let mut records = Vec::new();
            for u in 1..=n_members as u32 {
                for i in 1..=n_items as u32 {
                    if rng.random_range(0..100) < 70 {
                        records.push(RatingRecord {
                            user: u,
                            item: i,
                            rating: rng.random_range(1..=5) as f64,
                        });
                    }
                }
                // every member needs at least one rating to exist
                records.push(RatingRecord { user: u, item: 1, rating: rng.random_range(1..=5) as f64 });
            }
            let m = RatingMatrix::from_records(records).unwrap();
            let g = GroupSpec::new(0, (1..=n_members as u32).collect());
            (m, g)
        }
    }

    proptest! {
        #[test]
        fn capacity_laws_hold((m, g) in arb_group_matrix()) {
            let cap = FuzzyCapacity::build(&g, &m);
            let n = g.members.len();
            let full = full_mask(n);
            prop_assert_eq!(cap.subset_value(0), 0.0);
            prop_assert_eq!(cap.subset_value(full), 1.0);
            for mask in 0..=full {
                let v = cap.subset_value(mask);
                prop_assert!((0.0..=1.0).contains(&v));
                // monotone: adding any member never decreases the value
                for j in 0..n {
                    let sup = mask | (1 << j);
                    prop_assert!(cap.subset_value(sup) + 1e-15 >= v);
                }
            }
        }

        #[test]
        fn choquet_stays_inside_member_range((m, g) in arb_group_matrix()) {
            let t = build_similarity_table(&m, &Measure::Cosine).unwrap();
            let pm = predict_matrix(&g, 3, &NeighborStrategy::Knn, &t, &m).unwrap();
            let cap = FuzzyCapacity::build(&g, &m);
            for &item in m.items() {
                let vals: Vec<f64> = (0..pm.n_members())
                    .filter_map(|mp| pm.value(mp, pm.item_pos(item).unwrap()))
                    .collect();
                let got = choquet(item, &g, &pm, &cap);
                match got {
                    None => prop_assert!(vals.is_empty()),
                    Some(s) => {
                        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        prop_assert!(s >= lo - 1e-12 && s <= hi + 1e-12);
                    }
                }
            }
        }

        #[test]
        fn borda_total_identity((m, g) in arb_group_matrix()) {
            let t = build_similarity_table(&m, &Measure::Cosine).unwrap();
            let pm = predict_matrix(&g, 3, &NeighborStrategy::Knn, &t, &m).unwrap();
            let scores = borda_scores(&pm);
            let n = pm.n_items() as u64;
            let total: u64 = scores.iter().sum();
            prop_assert_eq!(total, g.members.len() as u64 * n * (n + 1) / 2);
        }
    }

    #[test]
    fn ignored_item_outside_top_lists_and_borda_does_not_change_the_list() {
        let base = vec![
            (1, 1, 5.0),
            (1, 2, 4.0),
            (1, 3, 3.0),
            (2, 1, 4.0),
            (2, 2, 5.0),
            (2, 3, 3.0),
        ];
        let with_extra = {
            let mut r = base.clone();
            r.push((1, 9, 1.0));
            r.push((2, 9, 1.0));
            r
        };
        let cfg = CandidateConfig { n_filter: 2, n_borda: 2, n_top: 3 };
        let rec_a = {
            let m = matrix(&base);
            let g = GroupSpec::new(0, vec![1, 2]);
            let pm = observed_pm(&base, vec![1, 2]);
            recommend(&g, &pm, &cfg, &FuzzyCapacity::build(&g, &m))
        };
        let rec_b = {
            let m = matrix(&with_extra);
            let g = GroupSpec::new(0, vec![1, 2]);
            let pm = observed_pm(&with_extra, vec![1, 2]);
            recommend(&g, &pm, &cfg, &FuzzyCapacity::build(&g, &m))
        };
        let items_a: Vec<ItemId> = rec_a.top.iter().map(|&(i, _)| i).collect();
        let items_b: Vec<ItemId> = rec_b.top.iter().map(|&(i, _)| i).collect();
        assert_eq!(items_a, items_b);
    }
}
