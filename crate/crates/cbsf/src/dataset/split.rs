use std::io::Write;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

use super::{RatingMatrix, RatingRecord};

/// Minimum number of ratings every user keeps in the training side.
pub const MIN_TRAIN_RATINGS: usize = 5;

/// A per-user train/test partition of a rating matrix.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: RatingMatrix,
    /// Held-out records, ordered by (user, item).
    pub test: Vec<RatingRecord>,
    pub seed: u64,
    /// Test records returned to training so every test item keeps at least
    /// one training occurrence.
    pub moved_back: usize,
}

impl Split {
    /// Writes a `user,item,set` audit manifest ordered by (user, item).
    pub fn write_manifest(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "user,item,set")?;
        let mut test = self.test.iter().peekable();
        for rec in self.train.records() {
            while let Some(t) = test.peek() {
                if (t.user, t.item) < (rec.user, rec.item) {
                    writeln!(out, "{},{},test", t.user, t.item)?;
                    test.next();
                } else {
                    break;
                }
            }
            writeln!(out, "{},{},train", rec.user, rec.item)?;
        }
        for t in test {
            writeln!(out, "{},{},test", t.user, t.item)?;
        }
        Ok(())
    }
}

/// Randomly holds out `floor(test_ratio * |I_u|)` items per user, except that
/// users with at most [`MIN_TRAIN_RATINGS`] ratings keep everything and no
/// user drops below that floor. Afterwards, any test item that lost all of
/// its training occurrences has its smallest-user test cell moved back.
///
/// Selection depends only on the seed and each user's item list, never on
/// rating values, so a fixed seed reproduces the same partition.
pub fn split_per_user(m: &RatingMatrix, test_ratio: f64, seed: u64) -> Result<Split> {
    if !(test_ratio > 0.0 && test_ratio < 1.0) {
        return Err(Error::InvalidParam {
            name: "test_ratio",
            msg: format!("must be in (0, 1), got {test_ratio}"),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n_users = m.n_users();
    let n_items = m.n_items();

    let mut test_marks: Vec<Vec<bool>> = (0..n_users)
        .map(|ui| vec![false; m.user_items(ui).len()])
        .collect();
    let mut train_count = vec![0usize; n_items];
    // Smallest user index holding each item in test, for the repair pass.
    let mut first_test_holder = vec![usize::MAX; n_items];

    for ui in 0..n_users {
        let row = m.user_items(ui);
        let n = row.len();
        let quota = if n <= MIN_TRAIN_RATINGS {
            0
        } else {
            (((n as f64) * test_ratio).floor() as usize).min(n - MIN_TRAIN_RATINGS)
        };
        let mut pos: Vec<usize> = (0..n).collect();
        for j in 0..quota {
            let pick = j + rng.random_range(0..n - j);
            pos.swap(j, pick);
        }
        for &p in &pos[..quota] {
            test_marks[ui][p] = true;
        }
        for (p, &(ii, _)) in row.iter().enumerate() {
            if test_marks[ui][p] {
                if first_test_holder[ii] == usize::MAX {
                    first_test_holder[ii] = ui;
                }
            } else {
                train_count[ii] += 1;
            }
        }
    }

    let mut moved_back = 0;
    for ii in 0..n_items {
        if train_count[ii] > 0 {
            continue;
        }
        let ui = first_test_holder[ii];
        debug_assert_ne!(ui, usize::MAX, "matrix items always have a rater");
        let row = m.user_items(ui);
        let p = row
            .binary_search_by_key(&ii, |e| e.0)
            .expect("holder rated the item");
        test_marks[ui][p] = false;
        train_count[ii] += 1;
        moved_back += 1;
    }

    let mut train_records = Vec::with_capacity(m.n_ratings());
    let mut test = Vec::new();
    for ui in 0..n_users {
        let user = m.users()[ui];
        for (p, &(ii, rating)) in m.user_items(ui).iter().enumerate() {
            let rec = RatingRecord {
                user,
                item: m.items()[ii],
                rating,
            };
            if test_marks[ui][p] {
                test.push(rec);
            } else {
                train_records.push(rec);
            }
        }
    }
    let train = RatingMatrix::from_records(train_records)?;
    Ok(Split {
        train,
        test,
        seed,
        moved_back,
    })
}
