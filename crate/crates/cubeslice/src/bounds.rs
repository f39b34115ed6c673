//! Upper bounds on `S(n)` via subadditivity over the base cases
//! `S(n)=n` for `n<=5`, `S(6)<=5`, and `S(10)<=8`, plus the best-known
//! `S(n,k)` lower-bound tables as queryable data.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Known `S(n)` values used as chain parts: `S(1)=1`, `S(6)<=5`, `S(10)<=8`.
const PART_BOUNDS: [(u32, u32); 3] = [(1, 1), (6, 5), (10, 8)];

/// Best upper bound on `S(n)`: `ceil(4n/5)`, except `4n/5 + 1` when `n` is an
/// odd multiple of 5; exact (`S(n) = n`) for `n <= 5`.
pub fn upper_bound(n: u32) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if n <= 5 {
        return Ok(n);
    }
    if n % 10 == 5 {
        // odd multiple of 5: 4n/5 is an integer and the bound sits one higher
        Ok(4 * n / 5 + 1)
    } else {
        Ok((4 * n).div_ceil(5))
    }
}

/// A witness decomposition `n = sum(parts)` with `sum(bounds) =
/// upper_bound(n)`, parts drawn from `{10, 6, 1}`.
pub fn subadditive_chain(n: u32) -> Result<Vec<(u32, u32)>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let mut chain = Vec::new();
    let mut rest = n;
    // peel tens, close out with a six when it fits, pad with unit parts
    while rest >= 10 {
        chain.push((10, 8));
        rest -= 10;
    }
    if rest >= 6 {
        chain.push((6, 5));
        rest -= 6;
    }
    for _ in 0..rest {
        chain.push((1, 1));
    }
    Ok(chain)
}

/// Where a table value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Compiled-in published value.
    PaperTable,
    /// Recorded at runtime from a verified local search result.
    LocallyDiscovered,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::PaperTable => "paper-table",
            Provenance::LocallyDiscovered => "locally-discovered",
        }
    }
}

/// A best-known `S(n,k)` entry.
#[derive(Debug, Clone, Copy)]
pub struct SnkEntry {
    pub n: u32,
    pub k: u32,
    pub value: u64,
    pub provenance: Provenance,
    /// Where the published value sits in the literature.
    pub origin: &'static str,
}

const THIS_WORK: &str = "best construction";
const PRIOR_WORK: &str = "prior published bound";
const TABU_BASELINE: &str = "tabu-search baseline";

/// Best published lower bounds on S(n,k), the strongest value per (n,k)
/// across the published tables.
const PUBLISHED: &[(u32, u32, u64, &str)] = &[
    // exhaustive and prior published results for small n
    (3, 1, 6, PRIOR_WORK),
    (3, 2, 10, PRIOR_WORK),
    (3, 3, 12, PRIOR_WORK),
    (4, 1, 12, PRIOR_WORK),
    (4, 2, 24, PRIOR_WORK),
    (4, 3, 30, PRIOR_WORK),
    (4, 4, 32, PRIOR_WORK),
    (5, 1, 30, PRIOR_WORK),
    (5, 2, 54, PRIOR_WORK),
    (5, 3, 70, PRIOR_WORK),
    (5, 4, 78, PRIOR_WORK),
    (5, 5, 80, PRIOR_WORK),
    (6, 1, 60, PRIOR_WORK),
    (6, 2, 120, PRIOR_WORK),
    (6, 3, 160, PRIOR_WORK),
    (6, 4, 184, PRIOR_WORK),
    (6, 5, 192, PRIOR_WORK),
    (6, 6, 192, PRIOR_WORK),
    (7, 1, 140, PRIOR_WORK),
    (7, 2, 260, PRIOR_WORK),
    (7, 3, 350, PRIOR_WORK),
    (7, 4, 410, PRIOR_WORK),
    (7, 5, 440, THIS_WORK), // prior best 434
    (7, 6, 448, PRIOR_WORK),
    (7, 7, 448, PRIOR_WORK),
    (8, 1, 280, PRIOR_WORK),
    (8, 2, 560, PRIOR_WORK),
    (8, 3, 770, PRIOR_WORK),
    (8, 4, 920, THIS_WORK), // prior best 908
    (8, 5, 980, PRIOR_WORK),
    (8, 6, 1018, THIS_WORK), // prior best 1008, tabu baseline 1016
    (8, 7, 1024, PRIOR_WORK),
    (8, 8, 1024, PRIOR_WORK),
    (9, 4, 1974, THIS_WORK),
    (9, 5, 2184, THIS_WORK),
    (9, 6, 2266, THIS_WORK), // tabu baseline 2254
    (9, 7, 2298, THIS_WORK),
    (9, 8, 2304, THIS_WORK),
    (9, 9, 2304, THIS_WORK),
    (10, 4, 4312, THIS_WORK),
    (10, 5, 4704, THIS_WORK),
    (10, 6, 4998, THIS_WORK), // tabu baseline 4984
    (10, 7, 5088, THIS_WORK), // tabu baseline 5064
    (10, 8, 5120, THIS_WORK), // tabu baseline 5114; full slicing
    (10, 9, 5120, THIS_WORK),
    (10, 10, 5120, THIS_WORK),
    (11, 4, 9072, THIS_WORK),
    (11, 5, 10248, THIS_WORK), // tabu baseline 10052
    (11, 6, 10816, THIS_WORK), // tabu baseline 10536
    (11, 7, 11128, THIS_WORK), // tabu baseline 10844
    (11, 8, 11240, THIS_WORK), // tabu baseline 11042
    (11, 9, 11264, THIS_WORK), // tabu baseline 11258; full slicing
    (11, 10, 11264, THIS_WORK),
    (11, 11, 11264, TABU_BASELINE),
    // n = k + 3 results for larger instances
    (12, 9, 24552, THIS_WORK),
    (13, 10, 53224, THIS_WORK), // tabu baseline 53008
    (14, 11, 114666, THIS_WORK), // tabu baseline 114286
    (15, 12, 245748, THIS_WORK), // tabu baseline 245252
    (16, 13, 523430, TABU_BASELINE),
    (17, 14, 1114088, TABU_BASELINE),
];

/// Queryable `S(n,k)` data: a compiled-in published layer plus a mutable
/// locally-discovered layer that never shadows the published one downward.
#[derive(Debug)]
pub struct BoundTable {
    published: BTreeMap<(u32, u32), (u64, &'static str)>,
    local: BTreeMap<(u32, u32), u64>,
}

impl Default for BoundTable {
    fn default() -> Self {
        Self::new()
    }
}

impl BoundTable {
    pub fn new() -> Self {
        let mut published = BTreeMap::new();
        for &(n, k, value, origin) in PUBLISHED {
            published.insert((n, k), (value, origin));
        }
        BoundTable {
            published,
            local: BTreeMap::new(),
        }
    }

    /// Best known lower bound for `S(n,k)`, preferring a strictly better
    /// locally-discovered value over the published layer.
    pub fn lookup_snk(&self, n: u32, k: u32) -> Result<SnkEntry> {
        let published = self.published.get(&(n, k)).copied();
        let local = self.local.get(&(n, k)).copied();
        match (published, local) {
            (Some((value, _)), Some(loc)) if loc > value => Ok(SnkEntry {
                n,
                k,
                value: loc,
                provenance: Provenance::LocallyDiscovered,
                origin: "local search",
            }),
            (Some((value, origin)), _) => Ok(SnkEntry {
                n,
                k,
                value,
                provenance: Provenance::PaperTable,
                origin,
            }),
            (None, Some(loc)) => Ok(SnkEntry {
                n,
                k,
                value: loc,
                provenance: Provenance::LocallyDiscovered,
                origin: "local search",
            }),
            (None, None) => Err(Error::NotFound { n, k }),
        }
    }

    /// Records a verified local result; kept only when it beats everything
    /// stored so far. Returns whether the local layer changed.
    pub fn record_local(&mut self, n: u32, k: u32, sliced: u64) -> bool {
        let current_best = self.lookup_snk(n, k).map(|e| e.value).unwrap_or(0);
        if sliced > current_best {
            self.local.insert((n, k), sliced);
            true
        } else {
            false
        }
    }

    /// All known entries for a dimension, ascending in `k`.
    pub fn entries_for(&self, n: u32) -> Vec<SnkEntry> {
        let mut ks: Vec<u32> = self
            .published
            .keys()
            .chain(self.local.keys())
            .filter(|&&(en, _)| en == n)
            .map(|&(_, k)| k)
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks.into_iter()
            .filter_map(|k| self.lookup_snk(n, k).ok())
            .collect()
    }

    /// Known `S(n)` base values: exact for `n<=5`, plus the 6- and 10-dim
    /// slicing witnesses.
    pub fn base_value(&self, n: u32) -> Option<u32> {
        match n {
            1..=5 => Some(n),
            6 => Some(5),
            10 => Some(8),
            _ => None,
        }
    }
}

/// Bound contributed by a chain part.
pub fn part_bound(part: u32) -> Option<u32> {
    PART_BOUNDS
        .iter()
        .find(|&&(p, _)| p == part)
        .map(|&(_, b)| b)
}
