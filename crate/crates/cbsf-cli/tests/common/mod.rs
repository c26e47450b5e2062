#![allow(dead_code)]

//! Synthetic dataset generation shared by the CLI and acceptance tests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub struct Synthetic {
    pub ratings: PathBuf,
    pub trust: PathBuf,
    pub config: PathBuf,
}

/// Whitespace-format rating lines for `n_users` x `n_items`. User 1 anchors
/// the 1..5 scale with a five-rating profile (which the splitter keeps fully
/// in train); everyone else rates a seeded random subset.
pub fn synthetic_ratings(n_users: u32, n_items: u32, seed: u64) -> String {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = String::new();
    writeln!(out, "1 1 1").unwrap();
    writeln!(out, "1 2 5").unwrap();
    writeln!(out, "1 3 3").unwrap();
    writeln!(out, "1 4 2").unwrap();
    writeln!(out, "1 5 4").unwrap();
    for u in 2..=n_users {
        let count = rng.random_range(8..=20.min(n_items as usize));
        let mut pool: Vec<u32> = (1..=n_items).collect();
        for j in 0..count {
            let pick = j + rng.random_range(0..pool.len() - j);
            pool.swap(j, pick);
        }
        let mut items = pool[..count].to_vec();
        items.sort_unstable();
        for i in items {
            writeln!(out, "{u} {i} {}", rng.random_range(1..=5)).unwrap();
        }
    }
    out
}

/// Random directed trust edges with weights in (0, 1].
pub fn synthetic_trust(n_users: u32, n_edges: usize, seed: u64) -> String {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = String::new();
    let mut made = 0;
    while made < n_edges {
        let a = rng.random_range(1..=n_users);
        let b = rng.random_range(1..=n_users);
        if a == b {
            continue;
        }
        let w = (rng.random_range(1..=10) as f64) / 10.0;
        writeln!(out, "{a} {b} {w}").unwrap();
        made += 1;
    }
    out
}

/// Writes ratings, trust, and a small config into `dir`.
pub fn write_dataset(dir: &Path, n_users: u32, n_items: u32, seed: u64) -> Synthetic {
    let ratings = dir.join("ratings.txt");
    let trust = dir.join("trust.txt");
    let config = dir.join("config.toml");
    std::fs::write(&ratings, synthetic_ratings(n_users, n_items, seed)).unwrap();
    std::fs::write(&trust, synthetic_trust(n_users, n_users as usize * 2, seed + 1)).unwrap();
    std::fs::write(&config, config_toml(&ratings, Some(&trust))).unwrap();
    Synthetic {
        ratings,
        trust,
        config,
    }
}

/// A small, fast configuration pointing at the given files.
pub fn config_toml(ratings: &Path, trust: Option<&Path>) -> String {
    let trust_line = trust
        .map(|t| format!("trust = {:?}\n", t.display().to_string()))
        .unwrap_or_default();
    format!(
        r#"
[dataset]
name = "synthetic"
ratings = {ratings:?}
format = "filmtrust-space"
{trust_line}
[split]
test_ratio = 0.2
seed = 11

[similarity]
measure = "cbs"
cbs_dominant = "uasimj"
cbs_a = 0.8
cbs_th = 0.2

[neighbors]
strategy = "topsis"
k = 10

[groups]
count = 8
min_size = 3
max_size = 6
seed = 12

[candidates]
n_filter = 10
n_borda = 10
n_top = 10

[eval]
n_top = [3, 5]
"#,
        ratings = ratings.display().to_string(),
    )
}
