//! User-user similarity measures and the full pairwise table.
//!
//! All measures are evaluated on co-rated items of the (training) matrix
//! they are given. Degenerate cases (no overlap, zero norms) return 0 for
//! the geometric measures; the belief/uncertainty measure has a nonzero
//! floor by construction.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::dataset::{RatingMatrix, UserId};
use crate::error::{Error, Result};

/// Parameters of the belief/uncertainty similarity (UASim).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UASimParams {
    /// Uncertainty mass; shrinks with the co-rating count.
    pub w: f64,
    /// Fraction of the uncertainty credited as similarity.
    pub beta: f64,
}

impl Default for UASimParams {
    fn default() -> Self {
        Self { w: 2.0, beta: 0.5 }
    }
}

impl UASimParams {
    pub fn new(w: f64, beta: f64) -> Result<Self> {
        if !(w > 0.0) {
            return Err(Error::InvalidParam {
                name: "uasim_w",
                msg: format!("must be positive, got {w}"),
            });
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParam {
                name: "uasim_beta",
                msg: format!("must be in [0, 1], got {beta}"),
            });
        }
        Ok(Self { w, beta })
    }
}

/// Which measure leads the CBS blend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbsDominant {
    Uasimj,
    Taj,
}

/// Combined similarity: below the reliability threshold `th` the dominant
/// measure is blended with its secondary (`a` on the dominant side), at or
/// above it the dominant value is used as-is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbsParams {
    pub dominant: CbsDominant,
    pub a: f64,
    pub th: f64,
}

impl CbsParams {
    /// UASIMJ-led blend with TAJ as the corrective term; suited to balanced
    /// rating distributions.
    pub fn uasimj_dominant() -> Self {
        Self {
            dominant: CbsDominant::Uasimj,
            a: 0.8,
            th: 0.2,
        }
    }

    /// TAJ-led blend with UASim as the corrective term; suited to
    /// right-skewed rating distributions.
    pub fn taj_dominant() -> Self {
        Self {
            dominant: CbsDominant::Taj,
            a: 0.6,
            th: 0.8,
        }
    }

    pub fn new(dominant: CbsDominant, a: f64, th: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidParam {
                name: "cbs_a",
                msg: format!("must be in [0, 1], got {a}"),
            });
        }
        Ok(Self { dominant, a, th })
    }
}

/// A similarity measure plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Cosine,
    Jaccard,
    Taj,
    Uasim(UASimParams),
    Uasimj(UASimParams),
    Cbs(UASimParams, CbsParams),
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::Cosine => "cosine",
            Measure::Jaccard => "jaccard",
            Measure::Taj => "taj",
            Measure::Uasim(_) => "uasim",
            Measure::Uasimj(_) => "uasimj",
            Measure::Cbs(..) => "cbs",
        }
    }

    /// Measures built on min/max rating ratios need strictly positive
    /// ratings on every co-rated item.
    fn requires_positive_ratings(&self) -> bool {
        matches!(self, Measure::Uasim(_) | Measure::Uasimj(_) | Measure::Cbs(..))
    }
}

/// Accumulators over one pair's co-rated items.
#[derive(Debug, Default, Clone, Copy)]
struct PairStats {
    dot: f64,
    sq_u: f64,
    sq_v: f64,
    dot_c: f64,
    sq_uc: f64,
    sq_vc: f64,
    /// Sum of min/max rating ratios over co-rated items.
    ratio_sum: f64,
    non_positive: bool,
    co: usize,
    items_u: usize,
    items_v: usize,
}

impl PairStats {
    fn union(&self) -> usize {
        self.items_u + self.items_v - self.co
    }
}

fn pair_stats(m: &RatingMatrix, ui: usize, vi: usize) -> PairStats {
    let a = m.user_items(ui);
    let b = m.user_items(vi);
    let mean_u = m.user_mean(ui);
    let mean_v = m.user_mean(vi);
    let mut s = PairStats {
        items_u: a.len(),
        items_v: b.len(),
        ..PairStats::default()
    };
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].0.cmp(&b[y].0) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                let (ru, rv) = (a[x].1, b[y].1);
                s.dot += ru * rv;
                s.sq_u += ru * ru;
                s.sq_v += rv * rv;
                let (cu, cv) = (ru - mean_u, rv - mean_v);
                s.dot_c += cu * cv;
                s.sq_uc += cu * cu;
                s.sq_vc += cv * cv;
                if ru <= 0.0 || rv <= 0.0 {
                    s.non_positive = true;
                } else {
                    s.ratio_sum += ru.min(rv) / ru.max(rv);
                }
                s.co += 1;
                x += 1;
                y += 1;
            }
        }
    }
    s
}

/// Stats for a pair given by external ids; users missing from the matrix
/// behave as empty profiles.
fn stats_by_ids(m: &RatingMatrix, u: UserId, v: UserId) -> PairStats {
    match (m.user_index(u), m.user_index(v)) {
        (Some(ui), Some(vi)) if ui != vi => pair_stats(m, ui, vi),
        (Some(ui), _) => PairStats {
            items_u: m.user_items(ui).len(),
            ..PairStats::default()
        },
        (_, Some(vi)) => PairStats {
            items_v: m.user_items(vi).len(),
            ..PairStats::default()
        },
        _ => PairStats::default(),
    }
}

fn cosine_from(s: &PairStats) -> f64 {
    if s.co == 0 || s.sq_u == 0.0 || s.sq_v == 0.0 {
        return 0.0;
    }
    s.dot / (s.sq_u.sqrt() * s.sq_v.sqrt())
}

fn jaccard_from(s: &PairStats) -> f64 {
    let union = s.union();
    if union == 0 {
        0.0
    } else {
        s.co as f64 / union as f64
    }
}

fn taj_from(s: &PairStats) -> f64 {
    if s.co == 0 {
        return 0.0;
    }
    let nu = s.sq_uc.sqrt();
    let nv = s.sq_vc.sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let (lo, hi) = if nu <= nv { (nu, nv) } else { (nv, nu) };
    let coverage = s.co as f64 / s.union() as f64;
    if s.dot_c >= 0.0 {
        s.dot_c * s.dot_c * coverage / (lo * hi.powi(3))
    } else {
        s.dot_c * coverage / (hi * hi)
    }
}

fn uasim_from(s: &PairStats, p: &UASimParams) -> f64 {
    let denom = s.co as f64 + p.w;
    let belief = s.ratio_sum / denom;
    let uncertainty = p.w / denom;
    belief + p.beta * uncertainty
}

fn cbs_from(s: &PairStats, up: &UASimParams, cp: &CbsParams) -> f64 {
    let (dominant, secondary) = match cp.dominant {
        CbsDominant::Uasimj => (uasim_from(s, up) * jaccard_from(s), taj_from(s)),
        CbsDominant::Taj => (taj_from(s), uasim_from(s, up)),
    };
    if dominant < cp.th {
        cp.a * dominant + (1.0 - cp.a) * secondary
    } else {
        dominant
    }
}

fn measure_from(s: &PairStats, measure: &Measure) -> f64 {
    match measure {
        Measure::Cosine => cosine_from(s),
        Measure::Jaccard => jaccard_from(s),
        Measure::Taj => taj_from(s),
        Measure::Uasim(p) => uasim_from(s, p),
        Measure::Uasimj(p) => uasim_from(s, p) * jaccard_from(s),
        Measure::Cbs(up, cp) => cbs_from(s, up, cp),
    }
}

fn check_positive(s: &PairStats, u: UserId, v: UserId) -> Result<()> {
    if s.non_positive {
        Err(Error::NonPositiveRating { u, v })
    } else {
        Ok(())
    }
}

/// Cosine of the raw co-rated rating vectors; 0 without overlap or with a
/// zero-norm vector.
pub fn cosine(u: UserId, v: UserId, m: &RatingMatrix) -> f64 {
    cosine_from(&stats_by_ids(m, u, v))
}

/// Overlap of the users' rated item sets; 0 when the union is empty.
pub fn jaccard(u: UserId, v: UserId, m: &RatingMatrix) -> f64 {
    jaccard_from(&stats_by_ids(m, u, v))
}

/// Geometric similarity of the mean-centered co-rated vectors, scaled by
/// rated-set overlap. Means are taken over all of each user's items.
pub fn taj(u: UserId, v: UserId, m: &RatingMatrix) -> f64 {
    taj_from(&stats_by_ids(m, u, v))
}

/// Belief + beta * uncertainty over min/max rating ratios. Requires strictly
/// positive co-rated ratings.
pub fn uasim(u: UserId, v: UserId, m: &RatingMatrix, p: &UASimParams) -> Result<f64> {
    let s = stats_by_ids(m, u, v);
    check_positive(&s, u, v)?;
    Ok(uasim_from(&s, p))
}

/// [`uasim`] scaled by the Jaccard overlap of the rated item sets.
pub fn uasimj(u: UserId, v: UserId, m: &RatingMatrix, p: &UASimParams) -> Result<f64> {
    let s = stats_by_ids(m, u, v);
    check_positive(&s, u, v)?;
    Ok(uasim_from(&s, p) * jaccard_from(&s))
}

/// Combined similarity: the dominant measure, blended with its secondary
/// below the reliability threshold.
pub fn cbs(
    u: UserId,
    v: UserId,
    m: &RatingMatrix,
    up: &UASimParams,
    cp: &CbsParams,
) -> Result<f64> {
    let s = stats_by_ids(m, u, v);
    check_positive(&s, u, v)?;
    Ok(cbs_from(&s, up, cp))
}

/// Symmetric score table over all user pairs of one matrix, with co-rating
/// and union counts cached per pair. Upper-triangular storage.
#[derive(Debug, Clone)]
pub struct SimilarityTable {
    users: Vec<UserId>,
    scores: Vec<f64>,
    co_counts: Vec<u32>,
    union_counts: Vec<u32>,
}

fn slot(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl SimilarityTable {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    /// User ids, ascending; positions match the source matrix's user indexes.
    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn user_index(&self, u: UserId) -> Option<usize> {
        self.users.binary_search(&u).ok()
    }

    pub fn n_pairs(&self) -> usize {
        self.scores.len()
    }

    pub fn score(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.scores[slot(a, b, self.users.len())]
    }

    pub fn co_count(&self, i: usize, j: usize) -> u32 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.co_counts[slot(a, b, self.users.len())]
    }

    pub fn union_count(&self, i: usize, j: usize) -> u32 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.union_counts[slot(a, b, self.users.len())]
    }

    pub fn score_ids(&self, u: UserId, v: UserId) -> Option<f64> {
        let i = self.user_index(u)?;
        let j = self.user_index(v)?;
        if i == j {
            return None;
        }
        Some(self.score(i, j))
    }

    /// Dumps `u,v,score,co_count,union_count` rows for every pair, ordered
    /// by (u, v). Scores use the shortest round-trippable float form, so a
    /// reload reproduces the table exactly.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "u,v,score,co_count,union_count")?;
        let n = self.users.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let s = slot(i, j, n);
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    self.users[i], self.users[j], self.scores[s], self.co_counts[s], self.union_counts[s]
                )?;
            }
        }
        Ok(())
    }

    /// Reloads a [`write_csv`](Self::write_csv) dump; the pair set must be
    /// complete.
    pub fn read_csv(reader: impl BufRead) -> Result<Self> {
        let mut rows: Vec<(UserId, UserId, f64, u32, u32)> = Vec::new();
        for (no, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::TableParse {
                line: no + 1,
                msg: e.to_string(),
            })?;
            if no == 0 {
                if line.trim() != "u,v,score,co_count,union_count" {
                    return Err(Error::TableParse {
                        line: 1,
                        msg: format!("unexpected header {line:?}"),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::TableParse {
                    line: no + 1,
                    msg: format!("expected 5 fields, found {}", fields.len()),
                });
            }
            let parse_err = |what: &str| Error::TableParse {
                line: no + 1,
                msg: format!("invalid {what}"),
            };
            rows.push((
                fields[0].parse().map_err(|_| parse_err("user id"))?,
                fields[1].parse().map_err(|_| parse_err("user id"))?,
                fields[2].parse().map_err(|_| parse_err("score"))?,
                fields[3].parse().map_err(|_| parse_err("co_count"))?,
                fields[4].parse().map_err(|_| parse_err("union_count"))?,
            ));
        }
        let mut users: Vec<UserId> = rows.iter().flat_map(|r| [r.0, r.1]).collect();
        users.sort_unstable();
        users.dedup();
        let n = users.len();
        let pairs = n * (n - 1) / 2;
        if rows.len() != pairs {
            return Err(Error::TableParse {
                line: 0,
                msg: format!("expected {pairs} pair rows for {n} users, found {}", rows.len()),
            });
        }
        let mut scores = vec![f64::NAN; pairs];
        let mut co_counts = vec![u32::MAX; pairs];
        let mut union_counts = vec![u32::MAX; pairs];
        for (u, v, score, co, union) in rows {
            let i = users.binary_search(&u).expect("present");
            let j = users.binary_search(&v).expect("present");
            if i == j {
                return Err(Error::TableParse {
                    line: 0,
                    msg: format!("diagonal entry for user {u}"),
                });
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            let s = slot(a, b, n);
            if co_counts[s] != u32::MAX {
                return Err(Error::TableParse {
                    line: 0,
                    msg: format!("duplicate pair ({u}, {v})"),
                });
            }
            scores[s] = score;
            co_counts[s] = co;
            union_counts[s] = union;
        }
        Ok(Self {
            users,
            scores,
            co_counts,
            union_counts,
        })
    }
}

/// Scores every unordered user pair of the matrix. Pairs are independent, so
/// the build parallelizes over rows and is bit-identical for any thread
/// count.
pub fn build_similarity_table(m: &RatingMatrix, measure: &Measure) -> Result<SimilarityTable> {
    let n = m.n_users();
    let pair_total = n.saturating_sub(1) * n / 2;
    let mut scores = vec![0.0f64; pair_total];
    let mut co_counts = vec![0u32; pair_total];
    let mut union_counts = vec![0u32; pair_total];

    // Carve the flat triangular buffers into per-row slices so rows can be
    // filled in parallel without locking.
    let mut score_rows: Vec<&mut [f64]> = Vec::with_capacity(n);
    let mut co_rows: Vec<&mut [u32]> = Vec::with_capacity(n);
    let mut union_rows: Vec<&mut [u32]> = Vec::with_capacity(n);
    {
        let (mut s, mut c, mut u): (&mut [f64], &mut [u32], &mut [u32]) =
            (&mut scores, &mut co_counts, &mut union_counts);
        for i in 0..n {
            let w = n - 1 - i;
            let (sh, st) = s.split_at_mut(w);
            let (ch, ct) = c.split_at_mut(w);
            let (uh, ut) = u.split_at_mut(w);
            score_rows.push(sh);
            co_rows.push(ch);
            union_rows.push(uh);
            s = st;
            c = ct;
            u = ut;
        }
    }

    let needs_positive = measure.requires_positive_ratings();
    score_rows
        .par_iter_mut()
        .zip(co_rows.par_iter_mut().zip(union_rows.par_iter_mut()))
        .enumerate()
        .try_for_each(|(i, (srow, (crow, urow)))| {
            for j in (i + 1)..n {
                let s = pair_stats(m, i, j);
                if needs_positive && s.non_positive {
                    return Err(Error::NonPositiveRating {
                        u: m.users()[i],
                        v: m.users()[j],
                    });
                }
                let slot = j - i - 1;
                srow[slot] = measure_from(&s, measure);
                crow[slot] = s.co as u32;
                urow[slot] = s.union() as u32;
            }
            Ok(())
        })?;

    Ok(SimilarityTable {
        users: m.users().to_vec(),
        scores,
        co_counts,
        union_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ItemId, RatingRecord};
    use proptest::prelude::*;

    fn matrix(records: &[(UserId, ItemId, f64)]) -> RatingMatrix {
        RatingMatrix::from_records(records.iter().map(|&(user, item, rating)| RatingRecord {
            user,
            item,
            rating,
        }))
        .unwrap()
    }

    #[test]
    fn cosine_hand_values() {
        // u:(4,2), v:(2,1) on the same two items -> 10 / (sqrt(20)*sqrt(5)) = 1
        let m = matrix(&[(1, 1, 4.0), (1, 2, 2.0), (2, 1, 2.0), (2, 2, 1.0)]);
        assert!((cosine(1, 2, &m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_is_one_on_a_single_co_rated_item() {
        let m = matrix(&[(1, 1, 5.0), (2, 1, 1.0)]);
        assert_eq!(cosine(1, 2, &m), 1.0);
    }

    #[test]
    fn cosine_without_overlap_is_zero() {
        let m = matrix(&[(1, 1, 5.0), (2, 2, 4.0)]);
        assert_eq!(cosine(1, 2, &m), 0.0);
    }

    #[test]
    fn jaccard_hand_values() {
        let m = matrix(&[
            (1, 1, 3.0),
            (1, 2, 3.0),
            (1, 3, 3.0),
            (2, 2, 3.0),
            (2, 3, 3.0),
            (2, 4, 3.0),
        ]);
        assert_eq!(jaccard(1, 2, &m), 0.5);
        let same = matrix(&[(1, 1, 1.0), (1, 2, 2.0), (2, 1, 5.0), (2, 2, 4.0)]);
        assert_eq!(jaccard(1, 2, &same), 1.0);
        let disjoint = matrix(&[(1, 1, 3.0), (2, 2, 3.0)]);
        assert_eq!(jaccard(1, 2, &disjoint), 0.0);
    }

    #[test]
    fn taj_aligned_centered_vectors() {
        // both users rate only items 1,2 as (4,2): centered (1,-1) each,
        // full overlap -> 4 * 2 / (sqrt2 * sqrt2^3 * 2) = 1
        let m = matrix(&[(1, 1, 4.0), (1, 2, 2.0), (2, 1, 4.0), (2, 2, 2.0)]);
        assert!((taj(1, 2, &m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn taj_opposed_centered_vectors() {
        // centered (1,-1) vs (-1,1): dot -2, equal norms -> -2*2/(2*2) = -1
        let m = matrix(&[(1, 1, 4.0), (1, 2, 2.0), (2, 1, 2.0), (2, 2, 4.0)]);
        assert!((taj(1, 2, &m) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn taj_zero_centered_vector_is_zero() {
        // user 2 rates every co-rated item at its own mean
        let m = matrix(&[(1, 1, 4.0), (1, 2, 2.0), (2, 1, 3.0), (2, 2, 3.0)]);
        assert_eq!(taj(1, 2, &m), 0.0);
    }

    #[test]
    fn uasim_hand_values() {
        let p = UASimParams::default();
        // one co-rated item, equal ratings: belief 1/3, uncertainty 2/3
        let m = matrix(&[(1, 1, 4.0), (2, 1, 4.0)]);
        assert!((uasim(1, 2, &m, &p).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        // no co-rated items: belief 0, uncertainty 1 -> beta
        let d = matrix(&[(1, 1, 4.0), (2, 2, 4.0)]);
        assert!((uasim(1, 2, &d, &p).unwrap() - 0.5).abs() < 1e-12);
        // (4,4) vs (2,4): ratio sum 1.5 -> 0.375 + 0.25
        let two = matrix(&[(1, 1, 4.0), (1, 2, 4.0), (2, 1, 2.0), (2, 2, 4.0)]);
        assert!((uasim(1, 2, &two, &p).unwrap() - 0.625).abs() < 1e-12);
    }

    #[test]
    fn uasimj_is_uasim_times_jaccard() {
        let p = UASimParams::default();
        let m = matrix(&[(1, 1, 4.0), (2, 1, 4.0)]);
        // full overlap: jaccard 1
        assert!((uasimj(1, 2, &m, &p).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let d = matrix(&[(1, 1, 4.0), (2, 2, 4.0)]);
        assert_eq!(uasimj(1, 2, &d, &p).unwrap(), 0.0);
        // (4,4) vs (2,4) on items 1,2 with two extra solo items -> jaccard 1/2
        let half = matrix(&[
            (1, 1, 4.0),
            (1, 2, 4.0),
            (1, 3, 3.0),
            (2, 1, 2.0),
            (2, 2, 4.0),
            (2, 4, 3.0),
        ]);
        assert!((uasimj(1, 2, &half, &p).unwrap() - 0.3125).abs() < 1e-12);
    }

    #[test]
    fn uasim_rejects_non_positive_ratings() {
        let p = UASimParams::default();
        let m = matrix(&[(1, 1, 0.0), (2, 1, 4.0)]);
        assert!(matches!(
            uasim(1, 2, &m, &p),
            Err(Error::NonPositiveRating { u: 1, v: 2 })
        ));
    }

    #[test]
    fn cbs_branches() {
        let up = UASimParams::default();
        let cp = CbsParams::uasimj_dominant();
        // dominant above threshold is returned untouched: identical users
        // with full overlap give uasimj = uasim >= 0.2
        let m = matrix(&[(1, 1, 4.0), (1, 2, 4.0), (2, 1, 4.0), (2, 2, 4.0)]);
        let d = uasimj(1, 2, &m, &up).unwrap();
        assert!(d >= cp.th);
        assert_eq!(cbs(1, 2, &m, &up, &cp).unwrap(), d);

        // below threshold the secondary mixes in
        let sparse = matrix(&[
            (1, 1, 4.0),
            (1, 2, 2.0),
            (1, 3, 3.0),
            (1, 4, 1.0),
            (1, 5, 5.0),
            (1, 6, 2.0),
            (1, 7, 4.0),
            (1, 8, 3.0),
            (2, 1, 4.0),
            (2, 2, 2.0),
            (2, 9, 1.0),
            (2, 10, 5.0),
            (2, 11, 2.0),
            (2, 12, 3.0),
            (2, 13, 2.0),
            (2, 14, 4.0),
        ]);
        let d = uasimj(1, 2, &sparse, &up).unwrap();
        let s2 = taj(1, 2, &sparse);
        assert!(d < cp.th);
        let expect = cp.a * d + (1.0 - cp.a) * s2;
        assert!((cbs(1, 2, &sparse, &up, &cp).unwrap() - expect).abs() < 1e-15);

        // taj-dominant preset takes uasim as secondary
        let cp2 = CbsParams::taj_dominant();
        let d2 = taj(1, 2, &sparse);
        let expect2 = if d2 < cp2.th {
            cp2.a * d2 + (1.0 - cp2.a) * uasim(1, 2, &sparse, &up).unwrap()
        } else {
            d2
        };
        assert!((cbs(1, 2, &sparse, &up, &cp2).unwrap() - expect2).abs() < 1e-15);
    }

    #[test]
    fn cbs_blend_arithmetic() {
        // frozen from the definition: 0.8 * 0.1 + 0.2 * 0.3 = 0.14
        let cp = CbsParams::uasimj_dominant();
        let blended = cp.a * 0.1 + (1.0 - cp.a) * 0.3;
        assert!((blended - 0.14).abs() < 1e-12);
        // taj-dominant preset above threshold returns the dominant
        let cp2 = CbsParams::taj_dominant();
        assert!(0.9 >= cp2.th);
    }

    #[test]
    fn table_has_all_pairs_and_cached_counts() {
        let m = matrix(&[
            (1, 1, 4.0),
            (1, 2, 2.0),
            (2, 1, 4.0),
            (2, 3, 1.0),
            (3, 2, 5.0),
        ]);
        let t = build_similarity_table(&m, &Measure::Cosine).unwrap();
        assert_eq!(t.n_pairs(), 3);
        let (i, j, k) = (0, 1, 2);
        assert_eq!(t.co_count(i, j), 1);
        assert_eq!(t.union_count(i, j), 3);
        assert_eq!(t.co_count(i, k), 1);
        assert_eq!(t.co_count(j, k), 0);
        assert_eq!(t.union_count(j, k), 3);
        // symmetric lookup
        assert_eq!(t.score(i, j), t.score(j, i));
    }

    #[test]
    fn table_propagates_pair_errors() {
        let m = matrix(&[(1, 1, 0.5), (2, 1, 4.0), (1, 2, -1.0), (3, 2, 2.0)]);
        let err =
            build_similarity_table(&m, &Measure::Uasim(UASimParams::default())).unwrap_err();
        assert!(matches!(err, Error::NonPositiveRating { .. }));
    }

    #[test]
    fn table_csv_round_trip() {
        let m = matrix(&[
            (1, 1, 4.0),
            (1, 2, 2.0),
            (2, 1, 4.0),
            (2, 2, 3.0),
            (3, 2, 5.0),
            (3, 3, 1.0),
        ]);
        let t = build_similarity_table(&m, &Measure::Taj).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = SimilarityTable::read_csv(&buf[..]).unwrap();
        assert_eq!(t.users(), back.users());
        for i in 0..t.n_users() {
            for j in (i + 1)..t.n_users() {
                assert_eq!(t.score(i, j), back.score(i, j));
                assert_eq!(t.co_count(i, j), back.co_count(i, j));
                assert_eq!(t.union_count(i, j), back.union_count(i, j));
            }
        }
    }

    /// Random small matrices: two users with ratings in {1..5}, plus noise
    /// users so means are not degenerate.
    fn arb_matrix() -> impl Strategy<Value = RatingMatrix> {
        proptest::collection::vec(
            ((1u32..=6), (1u32..=10), (1u32..=5)),
            2..40,
        )
        .prop_filter_map("needs two users with items", |cells| {
            let m = RatingMatrix::from_records(cells.iter().map(|&(u, i, r)| RatingRecord {
                user: u,
                item: i,
                rating: r as f64,
            }))
            .ok()?;
            (m.n_users() >= 2).then_some(m)
        })
    }

    proptest! {
        #[test]
        fn uasim_bounds_hold(m in arb_matrix()) {
            let p = UASimParams::default();
            let users = m.users().to_vec();
            for (a, &u) in users.iter().enumerate() {
                for &v in &users[a + 1..] {
                    let s = uasim(u, v, &m, &p).unwrap();
                    let ui = m.user_index(u).unwrap();
                    let vi = m.user_index(v).unwrap();
                    let co = pair_stats(&m, ui, vi).co as f64;
                    let floor = p.beta * p.w / (co + p.w);
                    prop_assert!(s >= floor - 1e-12);
                    prop_assert!(s <= 1.0 + 1e-12);
                }
            }
        }

        #[test]
        fn uasimj_is_dominated_pointwise(m in arb_matrix()) {
            let p = UASimParams::default();
            let users = m.users().to_vec();
            for (a, &u) in users.iter().enumerate() {
                for &v in &users[a + 1..] {
                    let uj = uasimj(u, v, &m, &p).unwrap();
                    prop_assert!(uj <= uasim(u, v, &m, &p).unwrap() + 1e-12);
                    prop_assert!(uj <= jaccard(u, v, &m) + 1e-12);
                }
            }
        }

        #[test]
        fn measures_are_symmetric(m in arb_matrix()) {
            let up = UASimParams::default();
            let users = m.users().to_vec();
            for (a, &u) in users.iter().enumerate() {
                for &v in &users[a + 1..] {
                    prop_assert_eq!(cosine(u, v, &m), cosine(v, u, &m));
                    prop_assert_eq!(jaccard(u, v, &m), jaccard(v, u, &m));
                    prop_assert_eq!(taj(u, v, &m), taj(v, u, &m));
                    prop_assert_eq!(uasim(u, v, &m, &up).unwrap(), uasim(v, u, &m, &up).unwrap());
                    for cp in [CbsParams::uasimj_dominant(), CbsParams::taj_dominant()] {
                        prop_assert_eq!(
                            cbs(u, v, &m, &up, &cp).unwrap(),
                            cbs(v, u, &m, &up, &cp).unwrap()
                        );
                    }
                }
            }
        }

        #[test]
        fn pair_counts_are_consistent(m in arb_matrix()) {
            let t = build_similarity_table(&m, &Measure::Jaccard).unwrap();
            for i in 0..m.n_users() {
                for j in (i + 1)..m.n_users() {
                    let co = t.co_count(i, j) as usize;
                    let union = t.union_count(i, j) as usize;
                    let (nu, nv) = (m.user_items(i).len(), m.user_items(j).len());
                    prop_assert!(co <= nu.min(nv));
                    prop_assert_eq!(union, nu + nv - co);
                }
            }
        }

        #[test]
        fn cosine_scale_invariant_taj_shift_invariant(m in arb_matrix(), lambda in 0.5f64..3.0, shift in 0.0f64..2.0) {
            let users = m.users().to_vec();
            let (u, v) = (users[0], users[1]);
            // scale every rating of both users by lambda
            let scaled = RatingMatrix::from_records(m.records().map(|mut r| {
                if r.user == u || r.user == v { r.rating *= lambda; }
                r
            })).unwrap();
            prop_assert!((cosine(u, v, &m) - cosine(u, v, &scaled)).abs() < 1e-9);
            // add a constant to every rating of user u
            let shifted = RatingMatrix::from_records(m.records().map(|mut r| {
                if r.user == u { r.rating += shift; }
                r
            })).unwrap();
            prop_assert!((taj(u, v, &m) - taj(u, v, &shifted)).abs() < 1e-9);
        }
    }
}
