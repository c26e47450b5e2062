use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::UserId;

/// A directed trust statement `from -> to` with weight in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustEdge {
    pub from: UserId,
    pub to: UserId,
    pub weight: f64,
}

/// Directed, weighted trust relations between users.
///
/// Self-loops are dropped and out-of-range weights clamped to [0, 1]; both
/// are counted so callers can surface a warning.
#[derive(Debug, Clone, Default)]
pub struct TrustGraph {
    edges: Vec<TrustEdge>,
    pub self_loops_dropped: usize,
    pub clamped: usize,
}

impl TrustGraph {
    /// Builds a graph from raw triples; duplicate (from, to) pairs resolve
    /// last-write-wins, matching the rating loader convention.
    pub fn from_edges<I>(edges: I) -> Self
    where
        I: IntoIterator<Item = (UserId, UserId, f64)>,
    {
        let mut map: BTreeMap<(UserId, UserId), f64> = BTreeMap::new();
        let mut self_loops_dropped = 0;
        let mut clamped = 0;
        for (from, to, weight) in edges {
            if from == to {
                self_loops_dropped += 1;
                continue;
            }
            let w = if (0.0..=1.0).contains(&weight) {
                weight
            } else {
                clamped += 1;
                weight.clamp(0.0, 1.0)
            };
            map.insert((from, to), w);
        }
        let edges = map
            .into_iter()
            .map(|((from, to), weight)| TrustEdge { from, to, weight })
            .collect();
        Self {
            edges,
            self_loops_dropped,
            clamped,
        }
    }

    /// Loads `user user trust` triples, whitespace separated.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        let mut triples = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            triples.push(parse_trust_line(line).map_err(|msg| Error::Parse {
                path: path.into(),
                line: no + 1,
                msg,
            })?);
        }
        Ok(Self::from_edges(triples))
    }

    /// Edges ordered by (from, to).
    pub fn edges(&self) -> &[TrustEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Users that are the target of at least one trust edge, ascending.
    pub fn trusted_users(&self) -> Vec<UserId> {
        let mut targets: Vec<UserId> = self.edges.iter().map(|e| e.to).collect();
        targets.sort_unstable();
        targets.dedup();
        targets
    }
}

fn parse_trust_line(line: &str) -> std::result::Result<(UserId, UserId, f64), String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(format!(
            "expected 3 whitespace-separated fields (user, user, trust), found {}",
            fields.len()
        ));
    }
    let from: UserId = fields[0]
        .parse()
        .map_err(|_| format!("invalid user id {:?}", fields[0]))?;
    let to: UserId = fields[1]
        .parse()
        .map_err(|_| format!("invalid user id {:?}", fields[1]))?;
    let weight: f64 = fields[2]
        .parse()
        .map_err(|_| format!("invalid trust value {:?}", fields[2]))?;
    if !weight.is_finite() {
        return Err(format!("non-finite trust value {:?}", fields[2]));
    }
    Ok((from, to, weight))
}
