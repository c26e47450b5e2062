//! Rating data: loading, indexing, scale normalization, per-user splitting,
//! and random group generation.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub mod groups;
pub mod split;
pub mod trust;

pub use groups::{generate_groups, GroupSpec};
pub use split::{split_per_user, Split};
pub use trust::{TrustEdge, TrustGraph};

pub type UserId = u32;
pub type ItemId = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingRecord {
    pub user: UserId,
    pub item: ItemId,
    pub rating: f64,
}

/// On-disk layouts for rating files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatingFormat {
    /// `user \t item \t rating \t timestamp`; the timestamp is ignored.
    MovielensTab,
    /// `user item rating`, whitespace separated.
    FilmtrustSpace,
}

/// Sparse user-item rating store with both user->items and item->users
/// indexes, the observed rating scale, and cached per-user means/medians.
///
/// Immutable once built; all mutating operations return a new matrix.
#[derive(Debug, Clone)]
pub struct RatingMatrix {
    users: Vec<UserId>,
    items: Vec<ItemId>,
    /// Per user index: (item index, rating), sorted by item index.
    by_user: Vec<Vec<(usize, f64)>>,
    /// Per item index: (user index, rating), sorted by user index.
    by_item: Vec<Vec<(usize, f64)>>,
    user_means: Vec<f64>,
    user_medians: Vec<f64>,
    r_min: f64,
    r_max: f64,
    len: usize,
}

impl RatingMatrix {
    /// Builds a matrix from records. Duplicate (user, item) pairs resolve
    /// last-write-wins in input order.
    pub fn from_records<I>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = RatingRecord>,
    {
        let mut cells: BTreeMap<(UserId, ItemId), f64> = BTreeMap::new();
        for r in records {
            cells.insert((r.user, r.item), r.rating);
        }
        if cells.is_empty() {
            return Err(Error::NoRecords);
        }

        let mut users: Vec<UserId> = cells.keys().map(|&(u, _)| u).collect();
        users.dedup();
        let mut items: Vec<ItemId> = cells.keys().map(|&(_, i)| i).collect();
        items.sort_unstable();
        items.dedup();

        let mut by_user: Vec<Vec<(usize, f64)>> = vec![Vec::new(); users.len()];
        let mut by_item: Vec<Vec<(usize, f64)>> = vec![Vec::new(); items.len()];
        let mut r_min = f64::INFINITY;
        let mut r_max = f64::NEG_INFINITY;
        for (&(u, i), &r) in &cells {
            let ui = users.binary_search(&u).expect("user present");
            let ii = items.binary_search(&i).expect("item present");
            by_user[ui].push((ii, r));
            by_item[ii].push((ui, r));
            r_min = r_min.min(r);
            r_max = r_max.max(r);
        }

        let user_means = by_user
            .iter()
            .map(|row| row.iter().map(|&(_, r)| r).sum::<f64>() / row.len() as f64)
            .collect();
        // Lower median: for even counts this is the smaller of the two middle
        // values, which keeps the above/below bias counts of the group
        // capacities well defined when several ratings equal the median.
        let user_medians = by_user
            .iter()
            .map(|row| {
                let mut vals: Vec<f64> = row.iter().map(|&(_, r)| r).collect();
                vals.sort_by(f64::total_cmp);
                vals[(vals.len() - 1) / 2]
            })
            .collect();

        Ok(Self {
            len: cells.len(),
            users,
            items,
            by_user,
            by_item,
            user_means,
            user_medians,
            r_min,
            r_max,
        })
    }

    /// Loads a rating file, dropping duplicate (user, item) lines
    /// last-write-wins.
    pub fn load(path: impl AsRef<Path>, format: RatingFormat) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        let mut records = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let rec = parse_rating_line(line, format).map_err(|msg| Error::Parse {
                path: path.into(),
                line: no + 1,
                msg,
            })?;
            records.push(rec);
        }
        if records.is_empty() {
            return Err(Error::EmptyDataset { path: path.into() });
        }
        Self::from_records(records)
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_ratings(&self) -> usize {
        self.len
    }

    /// All user ids, ascending. Positions in this slice are the user indexes
    /// used throughout the crate.
    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    /// All item ids, ascending; positions are item indexes.
    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn user_index(&self, user: UserId) -> Option<usize> {
        self.users.binary_search(&user).ok()
    }

    pub fn item_index(&self, item: ItemId) -> Option<usize> {
        self.items.binary_search(&item).ok()
    }

    /// Items rated by the user: (item index, rating), ascending by item.
    pub fn user_items(&self, user_idx: usize) -> &[(usize, f64)] {
        &self.by_user[user_idx]
    }

    /// Users who rated the item: (user index, rating), ascending by user.
    pub fn item_users(&self, item_idx: usize) -> &[(usize, f64)] {
        &self.by_item[item_idx]
    }

    pub fn rating(&self, user_idx: usize, item_idx: usize) -> Option<f64> {
        let row = &self.by_user[user_idx];
        row.binary_search_by_key(&item_idx, |e| e.0)
            .ok()
            .map(|p| row[p].1)
    }

    pub fn rating_ids(&self, user: UserId, item: ItemId) -> Option<f64> {
        let ui = self.user_index(user)?;
        let ii = self.item_index(item)?;
        self.rating(ui, ii)
    }

    pub fn user_mean(&self, user_idx: usize) -> f64 {
        self.user_means[user_idx]
    }

    pub fn user_median(&self, user_idx: usize) -> f64 {
        self.user_medians[user_idx]
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// All records, ordered by (user, item).
    pub fn records(&self) -> impl Iterator<Item = RatingRecord> + '_ {
        self.users.iter().enumerate().flat_map(move |(ui, &u)| {
            self.by_user[ui].iter().map(move |&(ii, r)| RatingRecord {
                user: u,
                item: self.items[ii],
                rating: r,
            })
        })
    }

    /// Affine endpoint map of every rating onto `[lo, hi]`; the new scale is
    /// exactly `[lo, hi]`.
    pub fn normalize_scale(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidParam {
                name: "scale",
                msg: format!("target interval [{lo}, {hi}] is empty"),
            });
        }
        if self.r_max == self.r_min {
            return Err(Error::DegenerateScale { value: self.r_min });
        }
        let span = self.r_max - self.r_min;
        let width = hi - lo;
        let mapped = self.records().map(|r| RatingRecord {
            rating: (lo + (r.rating - self.r_min) * width / span).clamp(lo, hi),
            ..r
        });
        let mut out = Self::from_records(mapped)?;
        out.r_min = lo;
        out.r_max = hi;
        Ok(out)
    }

    pub fn write_to(&self, out: &mut impl Write, format: RatingFormat) -> std::io::Result<()> {
        for r in self.records() {
            match format {
                RatingFormat::MovielensTab => {
                    writeln!(out, "{}\t{}\t{}\t0", r.user, r.item, r.rating)?
                }
                RatingFormat::FilmtrustSpace => {
                    writeln!(out, "{} {} {}", r.user, r.item, r.rating)?
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>, format: RatingFormat) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_to(&mut buf, format).expect("vec write");
        fs::write(path, buf).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }
}

fn parse_rating_line(line: &str, format: RatingFormat) -> std::result::Result<RatingRecord, String> {
    let fields: Vec<&str> = match format {
        RatingFormat::MovielensTab => line.split('\t').collect(),
        RatingFormat::FilmtrustSpace => line.split_whitespace().collect(),
    };
    match format {
        RatingFormat::MovielensTab if fields.len() < 3 || fields.len() > 4 => {
            return Err(format!(
                "expected 4 tab-separated fields (user, item, rating, timestamp), found {}",
                fields.len()
            ));
        }
        RatingFormat::FilmtrustSpace if fields.len() != 3 => {
            return Err(format!(
                "expected 3 whitespace-separated fields (user, item, rating), found {}",
                fields.len()
            ));
        }
        _ => {}
    }
    let user: UserId = fields[0]
        .parse()
        .map_err(|_| format!("invalid user id {:?}", fields[0]))?;
    let item: ItemId = fields[1]
        .parse()
        .map_err(|_| format!("invalid item id {:?}", fields[1]))?;
    let rating: f64 = fields[2]
        .parse()
        .map_err(|_| format!("invalid rating {:?}", fields[2]))?;
    if !rating.is_finite() {
        return Err(format!("non-finite rating {:?}", fields[2]));
    }
    Ok(RatingRecord { user, item, rating })
}
