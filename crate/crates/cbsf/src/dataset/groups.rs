use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

use super::{RatingMatrix, UserId};

/// A group of users to recommend for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    pub id: u32,
    /// Member user ids, ascending and distinct.
    pub members: Vec<UserId>,
}

impl GroupSpec {
    pub fn new(id: u32, mut members: Vec<UserId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { id, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Draws `n_groups` random groups: sizes uniform on `[min_size, max_size]`,
/// members uniform without replacement from the matrix users. Deterministic
/// for a fixed seed.
pub fn generate_groups(
    m: &RatingMatrix,
    n_groups: usize,
    min_size: usize,
    max_size: usize,
    seed: u64,
) -> Result<Vec<GroupSpec>> {
    if min_size < 1 {
        return Err(Error::InvalidParam {
            name: "min_size",
            msg: "must be at least 1".into(),
        });
    }
    if max_size < min_size {
        return Err(Error::InvalidParam {
            name: "max_size",
            msg: format!("must be at least min_size ({min_size})"),
        });
    }
    if max_size > m.n_users() {
        return Err(Error::InvalidParam {
            name: "max_size",
            msg: format!(
                "asks for groups of up to {max_size} members but the dataset has {} users",
                m.n_users()
            ),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut pool: Vec<UserId> = m.users().to_vec();
    let mut out = Vec::with_capacity(n_groups);
    for id in 0..n_groups {
        let size = rng.random_range(min_size..=max_size);
        for j in 0..size {
            let pick = j + rng.random_range(0..pool.len() - j);
            pool.swap(j, pick);
        }
        let mut members = pool[..size].to_vec();
        members.sort_unstable();
        out.push(GroupSpec {
            id: id as u32,
            members,
        });
    }
    Ok(out)
}
