//! Tabu search over the reduced grid.
//!
//! Best-first exploration: a frontier of unexplored solutions ordered by
//! sliced-edge count, expanded one at a time into all Hamming-1 neighbors
//! (one coefficient nudged by at most `d`). Solutions are deduplicated by a
//! digest of their plane-edge incidence matrix rather than their
//! coefficients, so sign-equivalent solutions are explored once. A restart
//! triggers once the seen set grows more than `R` past the last improvement.

use std::collections::HashSet;
use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::cube::{Bias, PlaneSet};
use crate::error::{Error, Result};
use crate::reduced::{reduce_plane, ReducedGrid};
use crate::rng::Rng;
use crate::search::engine::{
    add_coord_multiple, bitset_words, build_bits, fnv64, GridState, FNV64_SEED,
};
use crate::search::SearchOutcome;

/// Digest of the `k x |E|` plane-edge incidence matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IncidenceHash(pub u128);

const FNV128_SEED: u128 = 0x6c62_272e_07bb_0142_62b8_2175_6295_c58d;
const FNV128_PRIME: u128 = 0x0000_0000_0100_0000_0000_0000_0000_013B;

/// FNV-style fold at u64 granularity; hashing sits on the hot path of every
/// neighbor expansion.
fn fnv128(hash: u128, value: u64) -> u128 {
    (hash ^ value as u128).wrapping_mul(FNV128_PRIME)
}

fn hash_rows(k: usize, edge_count: usize, rows: impl Iterator<Item = u64>) -> IncidenceHash {
    let mut h = FNV128_SEED;
    h = fnv128(h, k as u64);
    h = fnv128(h, edge_count as u64);
    for word in rows {
        h = fnv128(h, word);
    }
    IncidenceHash(h)
}

/// Digest of the incidence matrix of a plane set on a grid; equal whenever
/// two sets slice the same per-plane edge sets.
pub fn incidence_hash(planes: &PlaneSet, grid: &ReducedGrid) -> Result<IncidenceHash> {
    if planes.dimension() != grid.dimension() {
        return Err(Error::DimensionMismatch {
            expected: grid.dimension(),
            got: planes.dimension(),
        });
    }
    let words = bitset_words(grid.edge_count());
    let mut all = Vec::with_capacity(planes.len() * words);
    let vcount = grid.vertex_count() as usize;
    let mut dots = vec![0i64; vcount];
    let mut bits = vec![0u64; words];
    for plane in planes.planes() {
        let rplane = reduce_plane(plane, grid.composition())?;
        dots.fill(0);
        for (j, &c) in rplane.coeffs().iter().enumerate() {
            add_coord_multiple(grid, &mut dots, j, c);
        }
        build_bits(grid, &dots, rplane.bias().twice(), &mut bits);
        all.extend_from_slice(&bits);
    }
    Ok(hash_rows(
        planes.len(),
        grid.edge_count(),
        all.into_iter(),
    ))
}

/// Configuration for [`run_tabu`].
#[derive(Debug, Clone)]
pub struct TabuConfig {
    pub n: usize,
    pub k: usize,
    pub composition: crate::reduced::Composition,
    pub coeff_bound: i64,
    pub neighbor_delta: i64,
    /// Restart once the seen set grows more than this past the last
    /// improvement.
    pub stagnation_limit: u64,
    /// Frontier size bound; overflow evicts the lowest-count entries.
    pub frontier_capacity: usize,
    pub seed: u64,
    pub time_limit: Duration,
    pub freeze_block: Option<i64>,
    pub workers: usize,
    pub max_restarts: Option<u64>,
    pub target_weighted: Option<u64>,
    /// Optional warm start for the first restart of worker 0.
    pub initial: Option<PlaneSet>,
}

impl TabuConfig {
    pub fn for_grid(grid: &ReducedGrid, k: usize) -> Self {
        TabuConfig {
            n: grid.dimension(),
            k,
            composition: grid.composition().clone(),
            coeff_bound: 40,
            neighbor_delta: 3,
            stagnation_limit: 20_000,
            frontier_capacity: 100_000,
            seed: 0,
            time_limit: Duration::from_secs(60),
            freeze_block: None,
            workers: 1,
            max_restarts: None,
            target_weighted: None,
            initial: None,
        }
    }

    pub fn validate(&self, grid: &ReducedGrid) -> Result<()> {
        if self.composition != *grid.composition() {
            return Err(Error::InvalidInput(
                "config composition does not match the grid".into(),
            ));
        }
        if self.n != grid.dimension() {
            return Err(Error::InvalidInput(format!(
                "n = {} but composition sums to {}",
                self.n,
                grid.dimension()
            )));
        }
        if self.time_limit.is_zero() {
            return Err(Error::InvalidInput("time limit must be positive".into()));
        }
        if self.stagnation_limit < 1 {
            return Err(Error::InvalidInput(
                "stagnation limit must be positive".into(),
            ));
        }
        if self.frontier_capacity < 1 {
            return Err(Error::InvalidInput(
                "frontier capacity must be positive".into(),
            ));
        }
        if self.k > 1024 {
            return Err(Error::InvalidInput("k must be at most 1024".into()));
        }
        if self.k == 0 {
            return Ok(());
        }
        if self.coeff_bound < 1 {
            return Err(Error::DegenerateConfig(
                "coefficient bound 0 leaves no moves".into(),
            ));
        }
        if self.neighbor_delta < 1 || self.neighbor_delta > 2 * self.coeff_bound {
            return Err(Error::InvalidInput(
                "neighbor delta must satisfy 1 <= d <= 2C".into(),
            ));
        }
        if self.workers < 1 {
            return Err(Error::InvalidInput("workers must be positive".into()));
        }
        if let Some(set) = &self.initial {
            if set.len() != self.k || set.dimension() != self.n {
                return Err(Error::InvalidInput(
                    "warm start must match n and k".into(),
                ));
            }
            for plane in set.planes() {
                let r = reduce_plane(plane, &self.composition)?;
                if r.coeffs().iter().any(|&c| c.abs() > self.coeff_bound) {
                    return Err(Error::InvalidInput(
                        "warm start exceeds the coefficient bound".into(),
                    ));
                }
            }
        }
        if let Some(frozen) = self.freeze_block {
            if frozen.abs() > self.coeff_bound {
                return Err(Error::InvalidInput(format!(
                    "frozen coefficient {frozen} outside [-{c}, {c}]",
                    c = self.coeff_bound
                )));
            }
            if self.composition.len() < 2 {
                return Err(Error::DegenerateConfig(
                    "freezing the only block leaves no moves".into(),
                ));
            }
        }
        Ok(())
    }

    fn free_coords(&self) -> Vec<usize> {
        let start = usize::from(self.freeze_block.is_some());
        (start..self.composition.len()).collect()
    }
}

/// Hooks into a single-worker tabu run.
pub trait TabuObserver {
    fn on_restart(&mut self, _restart_index: u64) {}
    /// A solution is popped from the frontier and expanded.
    fn on_expand(&mut self, _hash: IncidenceHash, _covered: usize) {}
    /// The run-best improved.
    fn on_improve(&mut self, _covered: usize) {}
}

struct NoopObserver;

impl TabuObserver for NoopObserver {}

/// Frontier of unexplored solutions bucketed by sliced-edge count; pops the
/// highest count, oldest first, and evicts the worst on overflow.
struct Frontier {
    buckets: Vec<VecDeque<Box<[i64]>>>,
    len: usize,
    capacity: usize,
}

impl Frontier {
    fn new(edge_count: usize, capacity: usize) -> Self {
        Frontier {
            buckets: vec![VecDeque::new(); edge_count + 1],
            len: 0,
            capacity,
        }
    }

    fn clear(&mut self) {
        for bucket in &mut self.buckets {
            bucket.clear();
        }
        self.len = 0;
    }

    fn push(&mut self, covered: usize, rows: Box<[i64]>) {
        self.buckets[covered].push_back(rows);
        self.len += 1;
        if self.len > self.capacity {
            self.evict_worst();
        }
    }

    fn evict_worst(&mut self) {
        for bucket in &mut self.buckets {
            if !bucket.is_empty() {
                bucket.pop_back();
                self.len -= 1;
                return;
            }
        }
    }

    fn pop_best(&mut self) -> Option<(usize, Box<[i64]>)> {
        for covered in (0..self.buckets.len()).rev() {
            if let Some(rows) = self.buckets[covered].pop_front() {
                self.len -= 1;
                return Some((covered, rows));
            }
        }
        None
    }
}

#[derive(Clone)]
struct Best {
    covered: usize,
    full_covered: u128,
    rows: Vec<i64>,
}

impl Best {
    fn empty() -> Self {
        Best {
            covered: 0,
            full_covered: 0,
            rows: Vec::new(),
        }
    }

    fn consider(&mut self, covered: usize, full_covered: u128, rows: &[i64]) -> bool {
        if covered > self.covered || (covered == self.covered && full_covered > self.full_covered)
        {
            self.covered = covered;
            self.full_covered = full_covered;
            self.rows = rows.to_vec();
            true
        } else {
            false
        }
    }
}

struct WorkerResult {
    best: Best,
    expansions: u64,
    restarts: u64,
    digest: u64,
}

struct SharedStop<'a> {
    deadline: Instant,
    stop: &'a AtomicBool,
    restarts_done: &'a AtomicU64,
    max_restarts: Option<u64>,
}

fn run_worker(
    config: &TabuConfig,
    grid: &ReducedGrid,
    seed: u64,
    warm_start: Option<&[i64]>,
    shared: &SharedStop<'_>,
    observer: &mut dyn TabuObserver,
) -> WorkerResult {
    let mut rng = Rng::seed_from_u64(seed);
    let ell = grid.block_count();
    let vcount = grid.vertex_count() as usize;
    let ecount = grid.edge_count();
    let words = bitset_words(ecount);
    let free = config.free_coords();
    let mults = grid.edge_mults();

    let mut state = GridState::new(grid, config.k, Bias::HALF.twice());
    let mut scratch_dots = vec![0i64; vcount];
    let mut scratch_bits = vec![0u64; words];
    let mut seen: HashSet<u128> = HashSet::new();
    let mut frontier = Frontier::new(ecount, config.frontier_capacity);

    let mut best = Best::empty();
    let mut digest = FNV64_SEED;
    let mut expansions: u64 = 0;
    let mut restarts: u64 = 0;
    let mut first_restart = true;

    let target_met = |best: &Best| -> bool {
        best.covered == ecount
            || config
                .target_weighted
                .is_some_and(|t| best.full_covered >= t as u128)
    };

    'outer: loop {
        if shared.stop.load(Ordering::Relaxed) || Instant::now() >= shared.deadline {
            break;
        }
        if let Some(max) = shared.max_restarts {
            if shared.restarts_done.fetch_add(1, Ordering::Relaxed) >= max {
                break;
            }
        }
        restarts += 1;
        digest = fnv64(digest, 0xF00D ^ restarts);
        observer.on_restart(restarts);

        // starting solution: warm start on the first restart when given,
        // otherwise random valid rows
        if first_restart && warm_start.is_some() {
            state.rows.copy_from_slice(warm_start.unwrap());
        } else {
            for p in 0..config.k {
                for j in 0..ell {
                    state.rows[p * ell + j] = if j == 0 && config.freeze_block.is_some() {
                        config.freeze_block.unwrap()
                    } else {
                        rng.range_i64(-config.coeff_bound, config.coeff_bound)
                    };
                }
            }
        }
        first_restart = false;
        state.rebuild(grid);

        seen.clear();
        frontier.clear();
        let start_hash = hash_rows(
            config.k,
            ecount,
            (0..config.k * words).map(|i| state.bits[i]),
        );
        seen.insert(start_hash.0);
        frontier.push(state.covered, state.rows.clone().into_boxed_slice());

        // run-best; stagnation measures seen-set growth past its last improvement
        let mut run_best_covered = state.covered;
        let mut run_best_rows = state.rows.clone();
        let mut run_best_full = state.full_covered;
        let mut seen_at_improvement = seen.len() as u64;

        if best.consider(state.covered, state.full_covered, &state.rows) && target_met(&best) {
            shared.stop.store(true, Ordering::Relaxed);
            break 'outer;
        }

        while (seen.len() as u64).saturating_sub(seen_at_improvement) < config.stagnation_limit {
            if shared.stop.load(Ordering::Relaxed) || Instant::now() >= shared.deadline {
                break 'outer;
            }
            let Some((popped_covered, popped_rows)) = frontier.pop_best() else {
                break;
            };
            expansions += 1;
            digest = fnv64(digest, 0xE0 ^ popped_covered as u64);

            // rebuild caches for the popped solution
            state.rows.copy_from_slice(&popped_rows);
            state.rebuild(grid);
            debug_assert_eq!(state.covered, popped_covered);
            observer.on_expand(
                hash_rows(
                    config.k,
                    ecount,
                    (0..config.k * words).map(|i| state.bits[i]),
                ),
                popped_covered,
            );

            // expand every Hamming-1 neighbor within the delta bound
            for plane in 0..config.k {
                for &coord in &free {
                    let current = state.rows[plane * ell + coord];
                    for delta in -config.neighbor_delta..=config.neighbor_delta {
                        if delta == 0 || (current + delta).abs() > config.coeff_bound {
                            continue;
                        }
                        scratch_dots
                            .copy_from_slice(&state.dots[plane * vcount..(plane + 1) * vcount]);
                        add_coord_multiple(grid, &mut scratch_dots, coord, delta);
                        build_bits(grid, &scratch_dots, state.bias_twice, &mut scratch_bits);

                        // hash with row `plane` replaced by the scratch bits
                        let hash = hash_rows(
                            config.k,
                            ecount,
                            (0..config.k).flat_map(|p| {
                                let row = if p == plane {
                                    &scratch_bits[..]
                                } else {
                                    &state.bits[p * words..(p + 1) * words]
                                };
                                row.iter().copied()
                            }),
                        );
                        if !seen.insert(hash.0) {
                            continue;
                        }

                        // covered count of the neighbor from the cover diff
                        let old_bits = &state.bits[plane * words..(plane + 1) * words];
                        let mut d_covered: i64 = 0;
                        let mut d_full: i128 = 0;
                        for w in 0..words {
                            let mut x = old_bits[w] ^ scratch_bits[w];
                            while x != 0 {
                                let e = (w << 6) + x.trailing_zeros() as usize;
                                x &= x - 1;
                                let now_set = scratch_bits[w] >> (e & 63) & 1 == 1;
                                if now_set {
                                    if state.cover[e] == 0 {
                                        d_covered += 1;
                                        d_full += mults[e] as i128;
                                    }
                                } else if state.cover[e] == 1 {
                                    d_covered -= 1;
                                    d_full -= mults[e] as i128;
                                }
                            }
                        }
                        let neighbor_covered = (state.covered as i64 + d_covered) as usize;
                        let neighbor_full = (state.full_covered as i128 + d_full) as u128;

                        let mut rows = popped_rows.clone();
                        rows[plane * ell + coord] += delta;
                        frontier.push(neighbor_covered, rows.clone());

                        if neighbor_covered > run_best_covered {
                            run_best_covered = neighbor_covered;
                            run_best_full = neighbor_full;
                            run_best_rows.copy_from_slice(&rows);
                            seen_at_improvement = seen.len() as u64;
                            digest = fnv64(digest, 0xA110 ^ neighbor_covered as u64);
                            observer.on_improve(neighbor_covered);
                            if best.consider(neighbor_covered, neighbor_full, &rows)
                                && target_met(&best)
                            {
                                shared.stop.store(true, Ordering::Relaxed);
                                break 'outer;
                            }
                        } else if neighbor_covered == run_best_covered
                            && neighbor_full > run_best_full
                        {
                            run_best_full = neighbor_full;
                            run_best_rows.copy_from_slice(&rows);
                            best.consider(neighbor_covered, neighbor_full, &rows);
                        }
                    }
                }
            }
        }

        // copy the run best into the overall best after stagnation
        best.consider(run_best_covered, run_best_full, &run_best_rows);
        if target_met(&best) {
            shared.stop.store(true, Ordering::Relaxed);
            break 'outer;
        }
    }

    WorkerResult {
        best,
        expansions,
        restarts,
        digest,
    }
}

/// Runs the tabu search, restarting on stagnation until the time limit, and
/// returns the best set seen.
pub fn run_tabu(config: &TabuConfig, grid: &ReducedGrid) -> Result<SearchOutcome> {
    config.validate(grid)?;
    if config.workers == 1 {
        return run_tabu_observed(config, grid, &mut NoopObserver);
    }
    if config.k == 0 {
        return Ok(empty_outcome(config, grid));
    }
    let warm_rows = warm_rows(config, grid)?;
    let started = Instant::now();
    let stop = AtomicBool::new(false);
    let restarts_done = AtomicU64::new(0);
    let shared = SharedStop {
        deadline: started + config.time_limit,
        stop: &stop,
        restarts_done: &restarts_done,
        max_restarts: config.max_restarts,
    };
    let collector: Mutex<Option<WorkerResult>> = Mutex::new(None);
    let totals = (AtomicU64::new(0), AtomicU64::new(0));

    std::thread::scope(|scope| {
        for worker_id in 0..config.workers {
            let shared = &shared;
            let collector = &collector;
            let totals = &totals;
            let warm = if worker_id == 0 {
                warm_rows.as_deref()
            } else {
                None
            };
            scope.spawn(move || {
                let seed = config.seed ^ worker_id as u64;
                let result = run_worker(config, grid, seed, warm, shared, &mut NoopObserver);
                totals.0.fetch_add(result.expansions, Ordering::Relaxed);
                totals.1.fetch_add(result.restarts, Ordering::Relaxed);
                let mut slot = collector.lock().unwrap();
                let replace = match slot.as_ref() {
                    None => true,
                    Some(held) => {
                        result.best.covered > held.best.covered
                            || (result.best.covered == held.best.covered
                                && result.best.full_covered > held.best.full_covered)
                    }
                };
                if replace {
                    *slot = Some(result);
                }
            });
        }
    });

    let winner = collector
        .into_inner()
        .unwrap()
        .expect("at least one worker ran");
    Ok(outcome_from(
        config,
        grid,
        winner.best,
        totals.0.load(Ordering::Relaxed),
        totals.1.load(Ordering::Relaxed),
        winner.digest,
        started.elapsed(),
    ))
}

/// Single-worker tabu run with observer hooks.
pub fn run_tabu_observed(
    config: &TabuConfig,
    grid: &ReducedGrid,
    observer: &mut dyn TabuObserver,
) -> Result<SearchOutcome> {
    config.validate(grid)?;
    if config.workers != 1 {
        return Err(Error::InvalidInput(
            "observed runs are single-worker".into(),
        ));
    }
    if config.k == 0 {
        return Ok(empty_outcome(config, grid));
    }
    let warm = warm_rows(config, grid)?;
    let started = Instant::now();
    let stop = AtomicBool::new(false);
    let restarts_done = AtomicU64::new(0);
    let shared = SharedStop {
        deadline: started + config.time_limit,
        stop: &stop,
        restarts_done: &restarts_done,
        max_restarts: config.max_restarts,
    };
    let result = run_worker(config, grid, config.seed, warm.as_deref(), &shared, observer);
    Ok(outcome_from(
        config,
        grid,
        result.best,
        result.expansions,
        result.restarts,
        result.digest,
        started.elapsed(),
    ))
}

fn warm_rows(config: &TabuConfig, grid: &ReducedGrid) -> Result<Option<Vec<i64>>> {
    let Some(set) = &config.initial else {
        return Ok(None);
    };
    let ell = grid.block_count();
    let mut rows = vec![0i64; config.k * ell];
    for (p, plane) in set.planes().iter().enumerate() {
        let r = reduce_plane(plane, grid.composition())?;
        rows[p * ell..(p + 1) * ell].copy_from_slice(r.coeffs());
    }
    Ok(Some(rows))
}

fn empty_outcome(config: &TabuConfig, grid: &ReducedGrid) -> SearchOutcome {
    SearchOutcome {
        best: PlaneSet::empty(config.n)
            .expect("valid dimension")
            .with_composition(config.composition.clone())
            .expect("empty set satisfies any composition"),
        reduced_sliced: 0,
        reduced_total: grid.edge_count(),
        full_sliced: 0,
        full_total: grid.full_edge_total(),
        iterations: 0,
        restarts: 0,
        wall: Duration::ZERO,
        seed: config.seed,
        trace_digest: FNV64_SEED,
    }
}

fn outcome_from(
    config: &TabuConfig,
    grid: &ReducedGrid,
    best: Best,
    expansions: u64,
    restarts: u64,
    digest: u64,
    wall: Duration,
) -> SearchOutcome {
    let rows = if best.rows.is_empty() {
        vec![0; config.k * grid.block_count()]
    } else {
        best.rows.clone()
    };
    let planes: Vec<crate::cube::Hyperplane> = (0..config.k)
        .map(|p| {
            crate::reduced::lift_plane(
                &crate::reduced::ReducedHyperplane::new(
                    rows[p * grid.block_count()..(p + 1) * grid.block_count()].to_vec(),
                    Bias::HALF,
                ),
                grid.composition(),
            )
            .expect("rows lift within bounds")
        })
        .collect();
    let best_set = PlaneSet::new(config.n, planes)
        .expect("dimensions agree")
        .with_composition(grid.composition().clone())
        .expect("rows satisfy the composition");
    SearchOutcome {
        best: best_set,
        reduced_sliced: best.covered,
        reduced_total: grid.edge_count(),
        full_sliced: best.full_covered as u64,
        full_total: grid.full_edge_total(),
        iterations: expansions,
        restarts,
        wall,
        seed: config.seed,
        trace_digest: digest,
    }
}
