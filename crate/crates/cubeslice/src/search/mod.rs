//! Adaptive edge-weighted hill climbing on the reduced hypercube.
//!
//! Each restart draws a random valid plane set and unit edge weights, then
//! hill-climbs: a neighbor (one plane, at most two reduced coordinates
//! nudged by at most `d`) is accepted when the weighted fitness does not
//! drop. Two timers drive the dynamics: `t` counts iterations since the
//! sliced-edge count last strictly improved and ends the restart at
//! `max_iterations`; `t_w` counts iterations since the weighted fitness last
//! strictly improved and, past `weight_period`, bumps the weight of every
//! currently unsliced edge so the climb can escape local optima.
//!
//! All fitness comparisons are exact: the variance penalty is evaluated in
//! integers scaled by `k^2`.

pub(crate) mod engine;

use engine::{add_coord_multiple, bitset_words, build_bits, fnv64, psi_scaled, GridState, FNV64_SEED};

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::cube::{Bias, Hyperplane, PlaneSet};
use crate::error::{Error, Result};
use crate::reduced::{lift_plane, reduce_plane, ReducedGrid, ReducedHyperplane};
use crate::rng::Rng;

/// How often the inner loop polls the deadline and the stop flag.
const POLL_MASK: u64 = 0xFFF;

/// Which weighted sum the fitness uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessMode {
    /// Sum of weights over sliced reduced edges.
    PlainReduced,
    /// Sum of `weight * multiplicity`, tracking the unreduced hypercube.
    MultiplicityWeighted,
}

/// Positive per-edge weights, one per reduced-edge index.
#[derive(Debug, Clone)]
pub struct WeightMap {
    weights: Vec<u32>,
    limit: u32,
}

impl WeightMap {
    /// Unit weights for a grid.
    pub fn unit(edge_count: usize, limit: u32) -> Self {
        WeightMap {
            weights: vec![1; edge_count],
            limit: limit.max(1),
        }
    }

    pub fn from_weights(weights: Vec<u32>, limit: u32) -> Result<Self> {
        if weights.iter().any(|&w| w < 1 || w > limit) {
            return Err(Error::InvalidInput(format!(
                "weights must lie in [1, {limit}]"
            )));
        }
        Ok(WeightMap { weights, limit })
    }

    pub fn get(&self, edge_index: usize) -> u32 {
        self.weights[edge_index]
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.weights
    }
}

/// Everything a hill-climbing run needs.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub n: usize,
    pub k: usize,
    pub composition: crate::reduced::Composition,
    /// Coefficient bound `C`: reduced coefficients stay in `[-C, C]`.
    pub coeff_bound: i64,
    /// Neighbor step bound `d`: per-coordinate change magnitude.
    pub neighbor_delta: i64,
    pub max_iterations: u64,
    pub weight_period: u64,
    pub weight_limit: u32,
    pub fitness_mode: FitnessMode,
    pub variance_penalty: bool,
    pub seed: u64,
    pub time_limit: Duration,
    /// Pin the first block's reduced coefficient to this value.
    pub freeze_block: Option<i64>,
    pub workers: usize,
    /// Stop after this many restarts (all workers combined may overshoot by
    /// one per worker); `None` runs until the time limit.
    pub max_restarts: Option<u64>,
    /// Stop as soon as the best multiplicity-weighted count reaches this.
    pub target_weighted: Option<u64>,
}

impl SearchConfig {
    /// Defaults scaled to the grid: `max_iterations = 50|E|`,
    /// `weight_period = 2|E|`, `weight_limit = 32`, `d = 3`, `C = 40`.
    pub fn for_grid(grid: &ReducedGrid, k: usize) -> Self {
        let edges = grid.edge_count() as u64;
        SearchConfig {
            n: grid.dimension(),
            k,
            composition: grid.composition().clone(),
            coeff_bound: 40,
            neighbor_delta: 3,
            max_iterations: 50 * edges.max(1),
            weight_period: 2 * edges.max(1),
            weight_limit: 32,
            fitness_mode: FitnessMode::PlainReduced,
            variance_penalty: true,
            seed: 0,
            time_limit: Duration::from_secs(60),
            freeze_block: None,
            workers: 1,
            max_restarts: None,
            target_weighted: None,
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
        if self.weight_limit < 1 || self.max_iterations < 1 || self.weight_period < 1 {
            return Err(Error::InvalidInput(
                "iteration, period, and weight limits must be positive".into(),
            ));
        }
        if self.workers < 1 {
            return Err(Error::InvalidInput("workers must be positive".into()));
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

/// Variance-penalized fitness: weighted sum over sliced reduced edges minus
/// the population variance of the per-plane sliced counts.
pub fn fitness_psi(
    planes: &PlaneSet,
    weights: &WeightMap,
    grid: &ReducedGrid,
    mode: FitnessMode,
    variance_penalty: bool,
) -> Result<f64> {
    if weights.len() != grid.edge_count() {
        return Err(Error::InvalidInput(format!(
            "weight map covers {} edges, grid has {}",
            weights.len(),
            grid.edge_count()
        )));
    }
    let sliced = crate::reduced::sliced_reduced_edges(planes, grid)?;
    let mut sum = 0u128;
    for e in 0..grid.edge_count() {
        if sliced.union_contains(e) {
            let w = weights.get(e) as u128;
            sum += match mode {
                FitnessMode::PlainReduced => w,
                FitnessMode::MultiplicityWeighted => w * grid.multiplicity(e) as u128,
            };
        }
    }
    let k = planes.len();
    if k == 0 {
        return Ok(0.0);
    }
    let variance = if variance_penalty {
        let counts = sliced.per_plane_counts();
        let mean = counts.iter().sum::<usize>() as f64 / k as f64;
        counts
            .iter()
            .map(|&c| {
                let d = c as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / k as f64
    } else {
        0.0
    };
    Ok(sum as f64 - variance)
}

/// Uniform proposal of 1-or-2 coordinate nudges within `[-C, C]`.
pub(crate) struct NeighborSampler {
    free: Vec<usize>,
    bound: i64,
    delta: i64,
}

/// Up to two `(coordinate, delta)` changes.
pub(crate) type Changes = ([(usize, i64); 2], usize);

impl NeighborSampler {
    pub fn new(config: &SearchConfig) -> Result<Self> {
        let free = config.free_coords();
        if free.is_empty() {
            return Err(Error::DegenerateConfig(
                "no perturbable coordinates".into(),
            ));
        }
        if config.coeff_bound < 1 {
            return Err(Error::DegenerateConfig(
                "coefficient bound 0 leaves no moves".into(),
            ));
        }
        Ok(NeighborSampler {
            free,
            bound: config.coeff_bound,
            delta: config.neighbor_delta,
        })
    }

    /// Picks the changed coordinates and deltas for one plane row. The row is
    /// not modified.
    pub fn propose(&self, row: &[i64], rng: &mut Rng) -> Changes {
        let count = if self.free.len() >= 2 {
            1 + rng.below(2) as usize
        } else {
            1
        };
        let mut coords = [0usize; 2];
        let first = rng.index(self.free.len());
        coords[0] = self.free[first];
        if count == 2 {
            let mut second = rng.index(self.free.len() - 1);
            if second >= first {
                second += 1;
            }
            coords[1] = self.free[second];
        }
        let mut changes = [(0usize, 0i64); 2];
        for slot in 0..count {
            let coord = coords[slot];
            let current = row[coord];
            // uniform nonzero delta in [-d, d], rejected until the result
            // stays inside [-C, C]; sampled directly over the valid set
            let mut valid = [0i64; 16];
            let mut valid_len = 0;
            for delta in -self.delta..=self.delta {
                if delta != 0 && (current + delta).abs() <= self.bound {
                    if valid_len < valid.len() {
                        valid[valid_len] = delta;
                        valid_len += 1;
                    }
                }
            }
            let delta = if valid_len > 0 {
                valid[rng.index(valid_len)]
            } else {
                // unreachable for C >= 1; keep the draw count stable anyway
                let _ = rng.next_u64();
                0
            };
            changes[slot] = (coord, delta);
        }
        (changes, count)
    }
}

/// A fresh random valid plane set: the frozen block (when configured) pinned,
/// every other reduced coefficient uniform in `[-C, C]`, all biases `+0.5`.
pub fn random_valid_planeset(config: &SearchConfig, rng: &mut Rng) -> Result<PlaneSet> {
    let ell = config.composition.len();
    if config.composition.total() != config.n {
        return Err(Error::InvalidComposition(format!(
            "composition sums to {}, expected {}",
            config.composition.total(),
            config.n
        )));
    }
    if let Some(frozen) = config.freeze_block {
        if frozen.abs() > config.coeff_bound {
            return Err(Error::InvalidInput(format!(
                "frozen coefficient {frozen} outside [-{c}, {c}]",
                c = config.coeff_bound
            )));
        }
    }
    let mut planes = Vec::with_capacity(config.k);
    for _ in 0..config.k {
        let mut row = Vec::with_capacity(ell);
        for j in 0..ell {
            if j == 0 {
                if let Some(frozen) = config.freeze_block {
                    row.push(frozen);
                    continue;
                }
            }
            row.push(rng.range_i64(-config.coeff_bound, config.coeff_bound));
        }
        let rplane = ReducedHyperplane::new(row, Bias::HALF);
        planes.push(lift_plane(&rplane, &config.composition)?);
    }
    PlaneSet::new(config.n, planes)?.with_composition(config.composition.clone())
}

/// A copy of the set where one uniformly chosen plane differs in one or two
/// reduced coordinates, each nudged by a nonzero delta of magnitude at most
/// `d`; biases and the frozen block are never touched.
pub fn random_neighbor(planes: &PlaneSet, config: &SearchConfig, rng: &mut Rng) -> Result<PlaneSet> {
    if planes.is_empty() {
        return Err(Error::DegenerateConfig(
            "cannot perturb an empty plane set".into(),
        ));
    }
    let sampler = NeighborSampler::new(config)?;
    let target = rng.index(planes.len());
    let mut new_planes = planes.planes().to_vec();
    let rplane = reduce_plane(&new_planes[target], &config.composition)?;
    let mut row = rplane.coeffs().to_vec();
    let (changes, count) = sampler.propose(&row, rng);
    for &(coord, delta) in &changes[..count] {
        row[coord] += delta;
    }
    new_planes[target] = lift_plane(
        &ReducedHyperplane::new(row, rplane.bias()),
        &config.composition,
    )?;
    PlaneSet::new(planes.dimension(), new_planes)?
        .with_composition(config.composition.clone())
}

/// An acceptance during hill climbing, reported to observers.
#[derive(Debug, Clone, Copy)]
pub struct AcceptEvent {
    pub iteration: u64,
    /// Fitness scaled by `k^2`, before and after, under the weights in
    /// effect at the moment of acceptance.
    pub psi_before_scaled: i128,
    pub psi_after_scaled: i128,
    pub covered: usize,
    pub improved_coverage: bool,
}

/// Read-only view of the engine for observers.
pub struct EngineView<'a> {
    grid: &'a ReducedGrid,
    rows: &'a [i64],
    weights: &'a [u32],
    weight_limit: u32,
    k: usize,
}

impl EngineView<'_> {
    pub fn weights(&self) -> &[u32] {
        self.weights
    }

    pub fn weight_limit(&self) -> u32 {
        self.weight_limit
    }

    pub fn weight_map(&self) -> WeightMap {
        WeightMap {
            weights: self.weights.to_vec(),
            limit: self.weight_limit,
        }
    }

    /// The current plane set, lifted back to the full space.
    pub fn current_planes(&self) -> PlaneSet {
        rows_to_planeset(self.rows, self.k, self.grid)
    }

    /// `k^2`, the scale of the integer fitness values.
    pub fn psi_scale(&self) -> i128 {
        (self.k as i128) * (self.k as i128)
    }
}

/// Hooks into a single-worker run; default methods ignore everything.
pub trait SearchObserver {
    fn on_restart(&mut self, _restart_index: u64) {}
    fn on_accept(&mut self, _event: &AcceptEvent, _view: &EngineView<'_>) {}
    fn on_weight_bump(&mut self, _view: &EngineView<'_>) {}
}

struct NoopObserver;

impl SearchObserver for NoopObserver {}

/// Result of a search run.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Best plane set found, in the full space with its composition attached.
    pub best: PlaneSet,
    /// Reduced edges sliced by the best set.
    pub reduced_sliced: usize,
    pub reduced_total: usize,
    /// Multiplicity-weighted count: hypercube edges sliced by the best set.
    pub full_sliced: u64,
    pub full_total: u64,
    pub iterations: u64,
    pub restarts: u64,
    pub wall: Duration,
    pub seed: u64,
    /// Digest of the acceptance trace; stable for a fixed (config, seed) on
    /// one worker when the run ends deterministically.
    pub trace_digest: u64,
}

fn rows_to_planeset(rows: &[i64], k: usize, grid: &ReducedGrid) -> PlaneSet {
    let ell = grid.block_count();
    let planes: Vec<Hyperplane> = (0..k)
        .map(|p| {
            lift_plane(
                &ReducedHyperplane::new(rows[p * ell..(p + 1) * ell].to_vec(), Bias::HALF),
                grid.composition(),
            )
            .expect("row coefficients lift within bounds")
        })
        .collect();
    PlaneSet::new(grid.dimension(), planes)
        .expect("dimensions agree")
        .with_composition(grid.composition().clone())
        .expect("rows satisfy the composition by construction")
}

#[derive(Clone)]
struct BestSoFar {
    covered: usize,
    full_covered: u128,
    rows: Vec<i64>,
}

impl BestSoFar {
    fn empty() -> Self {
        BestSoFar {
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

struct WorkerShared<'a> {
    deadline: Instant,
    stop: &'a AtomicBool,
    restarts_done: &'a AtomicU64,
    max_restarts: Option<u64>,
}

struct WorkerResult {
    best: BestSoFar,
    iterations: u64,
    restarts: u64,
    digest: u64,
}

/// One worker: restart loop with its own RNG, sharing only the stop flag and
/// the global restart budget.
fn run_worker(
    config: &SearchConfig,
    grid: &ReducedGrid,
    seed: u64,
    shared: &WorkerShared<'_>,
    observer: &mut dyn SearchObserver,
) -> WorkerResult {
    let mut rng = Rng::seed_from_u64(seed);
    let sampler = NeighborSampler::new(config).expect("validated config");
    let ell = grid.block_count();
    let vcount = grid.vertex_count() as usize;
    let ecount = grid.edge_count();
    let words = bitset_words(ecount);
    let mults = grid.edge_mults();

    let mut state = GridState::new(grid, config.k, Bias::HALF.twice());
    let mut weights: Vec<u32> = vec![1; ecount];
    // weighted sums over covered edges, by fitness mode plus reporting
    let mut weight_sum: u64;
    let mut weight_mult_sum: u128;

    let mut scratch_dots = vec![0i64; vcount];
    let mut scratch_bits = vec![0u64; words];
    let mut changed: Vec<u32> = Vec::with_capacity(ecount);

    let mut best = BestSoFar::empty();
    let mut digest = FNV64_SEED;
    let mut iterations: u64 = 0;
    let mut restarts: u64 = 0;
    let mut poll_counter: u64 = 0;

    let target_met = |best: &BestSoFar| -> bool {
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

        // fresh random solution, fresh unit weights
        for p in 0..config.k {
            for j in 0..ell {
                state.rows[p * ell + j] = if j == 0 && config.freeze_block.is_some() {
                    config.freeze_block.unwrap()
                } else {
                    rng.range_i64(-config.coeff_bound, config.coeff_bound)
                };
            }
        }
        state.rebuild(grid);
        weights.fill(1);
        weight_sum = state.covered as u64;
        weight_mult_sum = state.full_covered;
        let mut counts_sum: i128 = state.plane_counts.iter().map(|&c| c as i128).sum();
        let mut counts_sq_sum: i128 = state
            .plane_counts
            .iter()
            .map(|&c| (c as i128) * (c as i128))
            .sum();

        if best.consider(state.covered, state.full_covered, &state.rows) && target_met(&best) {
            shared.stop.store(true, Ordering::Relaxed);
            break 'outer;
        }

        let mode_sum = |ws: u64, wms: u128| -> u128 {
            match config.fitness_mode {
                FitnessMode::PlainReduced => ws as u128,
                FitnessMode::MultiplicityWeighted => wms,
            }
        };
        let mut cur_psi = psi_scaled(
            mode_sum(weight_sum, weight_mult_sum),
            counts_sum,
            counts_sq_sum,
            config.k,
            config.variance_penalty,
        );

        let mut t: u64 = 0;
        let mut t_w: u64 = 0;
        while t < config.max_iterations {
            poll_counter += 1;
            if poll_counter & POLL_MASK == 0
                && (shared.stop.load(Ordering::Relaxed) || Instant::now() >= shared.deadline)
            {
                break 'outer;
            }
            iterations += 1;

            // propose: one plane, <= 2 coordinates nudged
            let plane = rng.index(config.k);
            let row = &state.rows[plane * ell..(plane + 1) * ell];
            let (changes, change_count) = sampler.propose(row, &mut rng);

            scratch_dots.copy_from_slice(&state.dots[plane * vcount..(plane + 1) * vcount]);
            for &(coord, delta) in &changes[..change_count] {
                add_coord_multiple(grid, &mut scratch_dots, coord, delta);
            }
            let new_plane_count =
                build_bits(grid, &scratch_dots, state.bias_twice, &mut scratch_bits);

            // diff the plane's bitset against the proposal
            changed.clear();
            let old_bits = &state.bits[plane * words..(plane + 1) * words];
            let mut d_covered: i64 = 0;
            let mut d_wsum: i64 = 0;
            let mut d_wmsum: i128 = 0;
            let mut d_full: i128 = 0;
            for w in 0..words {
                let mut x = old_bits[w] ^ scratch_bits[w];
                while x != 0 {
                    let e = (w << 6) + x.trailing_zeros() as usize;
                    x &= x - 1;
                    changed.push(e as u32);
                    let now_set = scratch_bits[w] >> (e & 63) & 1 == 1;
                    if now_set {
                        if state.cover[e] == 0 {
                            d_covered += 1;
                            d_wsum += weights[e] as i64;
                            d_wmsum += weights[e] as i128 * mults[e] as i128;
                            d_full += mults[e] as i128;
                        }
                    } else if state.cover[e] == 1 {
                        d_covered -= 1;
                        d_wsum -= weights[e] as i64;
                        d_wmsum -= weights[e] as i128 * mults[e] as i128;
                        d_full -= mults[e] as i128;
                    }
                }
            }

            let old_count = state.plane_counts[plane] as i128;
            let new_counts_sum = counts_sum - old_count + new_plane_count as i128;
            let new_counts_sq_sum = counts_sq_sum - old_count * old_count
                + (new_plane_count as i128) * (new_plane_count as i128);
            let new_weight_sum = (weight_sum as i64 + d_wsum) as u64;
            let new_weight_mult_sum = (weight_mult_sum as i128 + d_wmsum) as u128;
            let new_covered = (state.covered as i64 + d_covered) as usize;
            let new_psi = psi_scaled(
                mode_sum(new_weight_sum, new_weight_mult_sum),
                new_counts_sum,
                new_counts_sq_sum,
                config.k,
                config.variance_penalty,
            );

            if new_psi >= cur_psi {
                let improved_psi = new_psi > cur_psi;
                let improved_coverage = new_covered > state.covered;

                // commit: patch cover and sums, swap in the scratch caches
                for &e in &changed {
                    let e = e as usize;
                    let now_set = scratch_bits[e >> 6] >> (e & 63) & 1 == 1;
                    if now_set {
                        state.cover[e] += 1;
                    } else {
                        state.cover[e] -= 1;
                    }
                }
                state.dots[plane * vcount..(plane + 1) * vcount]
                    .copy_from_slice(&scratch_dots);
                state.bits[plane * words..(plane + 1) * words].copy_from_slice(&scratch_bits);
                state.plane_counts[plane] = new_plane_count;
                for &(coord, delta) in &changes[..change_count] {
                    state.rows[plane * ell + coord] += delta;
                }
                let new_full = (state.full_covered as i128 + d_full) as u128;
                let event = AcceptEvent {
                    iteration: iterations,
                    psi_before_scaled: cur_psi,
                    psi_after_scaled: new_psi,
                    covered: new_covered,
                    improved_coverage,
                };
                weight_sum = new_weight_sum;
                weight_mult_sum = new_weight_mult_sum;
                state.covered = new_covered;
                state.full_covered = new_full;
                counts_sum = new_counts_sum;
                counts_sq_sum = new_counts_sq_sum;
                cur_psi = new_psi;

                if improved_psi {
                    t_w = 0;
                }
                if improved_coverage {
                    t = 0;
                }

                digest = fnv64(digest, iterations);
                digest = fnv64(digest, new_psi as u64);
                digest = fnv64(digest, (new_psi >> 64) as u64);
                digest = fnv64(digest, new_covered as u64);
                observer.on_accept(
                    &event,
                    &EngineView {
                        grid,
                        rows: &state.rows,
                        weights: &weights,
                        weight_limit: config.weight_limit,
                        k: config.k,
                    },
                );

                if best.consider(state.covered, state.full_covered, &state.rows)
                    && target_met(&best)
                {
                    shared.stop.store(true, Ordering::Relaxed);
                    break 'outer;
                }
            }

            if t_w > config.weight_period {
                // raise the weight of every unsliced edge, capped
                for e in 0..ecount {
                    if state.cover[e] == 0 && weights[e] < config.weight_limit {
                        weights[e] += 1;
                    }
                }
                t_w = 0;
                digest = fnv64(digest, 0xBEEF ^ iterations);
                observer.on_weight_bump(&EngineView {
                    grid,
                    rows: &state.rows,
                    weights: &weights,
                    weight_limit: config.weight_limit,
                    k: config.k,
                });
            }

            t_w += 1;
            t += 1;
        }
    }

    WorkerResult {
        best,
        iterations,
        restarts,
        digest,
    }
}

/// Runs the adaptive edge-weighted search, restarting until the time limit
/// (or restart budget) and returning the best set seen, ranked by reduced
/// slice count with multiplicity-weighted count as the tie-break.
pub fn run_search(config: &SearchConfig, grid: &ReducedGrid) -> Result<SearchOutcome> {
    config.validate(grid)?;
    if config.k == 0 {
        return Ok(empty_outcome(config, grid));
    }
    if config.workers == 1 {
        return run_search_observed(config, grid, &mut NoopObserver);
    }

    let started = Instant::now();
    let stop = AtomicBool::new(false);
    let restarts_done = AtomicU64::new(0);
    let shared = WorkerShared {
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
            scope.spawn(move || {
                let seed = config.seed ^ worker_id as u64;
                let result = run_worker(config, grid, seed, shared, &mut NoopObserver);
                totals.0.fetch_add(result.iterations, Ordering::Relaxed);
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

/// Single-worker run with observer hooks; used by the instrumented tests.
pub fn run_search_observed(
    config: &SearchConfig,
    grid: &ReducedGrid,
    observer: &mut dyn SearchObserver,
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
    let started = Instant::now();
    let stop = AtomicBool::new(false);
    let restarts_done = AtomicU64::new(0);
    let shared = WorkerShared {
        deadline: started + config.time_limit,
        stop: &stop,
        restarts_done: &restarts_done,
        max_restarts: config.max_restarts,
    };
    let result = run_worker(config, grid, config.seed, &shared, observer);
    Ok(outcome_from(
        config,
        grid,
        result.best,
        result.iterations,
        result.restarts,
        result.digest,
        started.elapsed(),
    ))
}

fn empty_outcome(config: &SearchConfig, grid: &ReducedGrid) -> SearchOutcome {
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
    config: &SearchConfig,
    grid: &ReducedGrid,
    best: BestSoFar,
    iterations: u64,
    restarts: u64,
    digest: u64,
    wall: Duration,
) -> SearchOutcome {
    let best_set = if best.rows.is_empty() {
        rows_to_planeset(&vec![0; config.k * grid.block_count()], config.k, grid)
    } else {
        rows_to_planeset(&best.rows, config.k, grid)
    };
    SearchOutcome {
        best: best_set,
        reduced_sliced: best.covered,
        reduced_total: grid.edge_count(),
        full_sliced: best.full_covered as u64,
        full_total: grid.full_edge_total(),
        iterations,
        restarts,
        wall,
        seed: config.seed,
        trace_digest: digest,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube;
    use crate::reduced::{build_grid, sliced_reduced_edges, Composition};

    fn grid_and_config(blocks: &[u32], k: usize) -> (ReducedGrid, SearchConfig) {
        let composition = Composition::new(blocks.to_vec()).unwrap();
        let grid = build_grid(&composition).unwrap();
        let config = SearchConfig::for_grid(&grid, k);
        (grid, config)
    }

    #[test]
    fn psi_full_coverage_equal_counts() {
        // all 320 edges sliced, per-plane counts all equal: zero variance
        let fixture = crate::fixtures::Q10_MAIN;
        let set = fixture.plane_set();
        let grid = build_grid(set.composition().unwrap()).unwrap();
        let weights = WeightMap::unit(grid.edge_count(), 32);
        let sliced = sliced_reduced_edges(&set, &grid).unwrap();
        let counts = sliced.per_plane_counts();
        assert!(counts.iter().all(|&c| c == counts[0]));
        let psi = fitness_psi(&set, &weights, &grid, FitnessMode::PlainReduced, true).unwrap();
        assert_eq!(psi, 320.0);
    }

    #[test]
    fn psi_empty_set_is_zero() {
        let (grid, _) = grid_and_config(&[3, 1, 1, 1], 0);
        let set = PlaneSet::empty(6).unwrap();
        let weights = WeightMap::unit(grid.edge_count(), 32);
        let psi = fitness_psi(&set, &weights, &grid, FitnessMode::PlainReduced, true).unwrap();
        assert_eq!(psi, 0.0);
    }

    #[test]
    fn psi_hand_derived_pair_on_q3() {
        // independently enumerated on the identity grid of Q3: the axis
        // plane slices 4 edges, (2,1,1) slices 5, union 6, variance of
        // {4,5} is 0.25
        let composition = Composition::identity(3).unwrap();
        let grid = build_grid(&composition).unwrap();
        let planes = vec![
            Hyperplane::new(vec![1, 0, 0], Bias::HALF).unwrap(),
            Hyperplane::new(vec![2, 1, 1], Bias::HALF).unwrap(),
        ];
        let set = PlaneSet::new(3, planes)
            .unwrap()
            .with_composition(composition)
            .unwrap();
        let sliced = sliced_reduced_edges(&set, &grid).unwrap();
        assert_eq!(sliced.per_plane_counts(), vec![4, 5]);
        assert_eq!(sliced.union_len(), 6);
        let weights = WeightMap::unit(grid.edge_count(), 32);
        let psi = fitness_psi(&set, &weights, &grid, FitnessMode::PlainReduced, true).unwrap();
        assert_eq!(psi, 6.0 - 0.25);
        let no_var =
            fitness_psi(&set, &weights, &grid, FitnessMode::PlainReduced, false).unwrap();
        assert_eq!(no_var, 6.0);
        // multiplicity-weighted on the identity grid equals the plain sum
        let mult =
            fitness_psi(&set, &weights, &grid, FitnessMode::MultiplicityWeighted, true).unwrap();
        assert_eq!(mult, psi);
    }

    #[test]
    fn random_valid_planeset_respects_freeze_and_bias() {
        let (_, mut config) = grid_and_config(&[6, 1, 1, 1, 1], 8);
        config.freeze_block = Some(-9);
        let mut rng = Rng::seed_from_u64(5);
        for _ in 0..20 {
            let set = random_valid_planeset(&config, &mut rng).unwrap();
            for plane in set.planes() {
                assert!(plane.coeffs()[..6].iter().all(|&c| c == -9));
                assert_eq!(plane.bias(), Bias::HALF);
                assert!(plane.coeffs().iter().all(|&c| c.abs() <= 40));
            }
        }
    }

    #[test]
    fn random_valid_planeset_with_zero_bound_is_all_zero() {
        let (_, mut config) = grid_and_config(&[2, 1], 3);
        config.coeff_bound = 0;
        let mut rng = Rng::seed_from_u64(5);
        let set = random_valid_planeset(&config, &mut rng).unwrap();
        for plane in set.planes() {
            assert!(plane.coeffs().iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn free_coefficients_are_uniform() {
        // chi-square over the 2C+1 values at 1e5 samples, fixed seed
        let (_, mut config) = grid_and_config(&[2, 1], 1);
        config.coeff_bound = 3;
        let mut rng = Rng::seed_from_u64(1234);
        let bins = 2 * config.coeff_bound + 1;
        let mut histogram = vec![0u64; bins as usize];
        let samples = 100_000;
        for _ in 0..samples {
            let set = random_valid_planeset(&config, &mut rng).unwrap();
            let c = set.planes()[0].coeffs()[0];
            histogram[(c + config.coeff_bound) as usize] += 1;
        }
        let expected = samples as f64 / bins as f64;
        let chi2: f64 = histogram
            .iter()
            .map(|&h| {
                let d = h as f64 - expected;
                d * d / expected
            })
            .sum();
        // df = 6; anything beyond 35 would be a broken sampler
        assert!(chi2 < 35.0, "chi2 = {chi2}, histogram {histogram:?}");
    }

    #[test]
    fn neighbor_changes_one_plane_within_bounds() {
        let (_, mut config) = grid_and_config(&[3, 1, 1, 1], 5);
        config.neighbor_delta = 2;
        let mut rng = Rng::seed_from_u64(77);
        let set = random_valid_planeset(&config, &mut rng).unwrap();
        for _ in 0..200 {
            let neighbor = random_neighbor(&set, &config, &mut rng).unwrap();
            let differing: Vec<usize> = (0..set.len())
                .filter(|&p| set.planes()[p] != neighbor.planes()[p])
                .collect();
            assert_eq!(differing.len(), 1);
            let p = differing[0];
            let before = reduce_plane(&set.planes()[p], &config.composition).unwrap();
            let after = reduce_plane(&neighbor.planes()[p], &config.composition).unwrap();
            let changed: Vec<(i64, i64)> = before
                .coeffs()
                .iter()
                .zip(after.coeffs())
                .filter(|(a, b)| a != b)
                .map(|(&a, &b)| (a, b))
                .collect();
            assert!(!changed.is_empty() && changed.len() <= 2);
            for (a, b) in changed {
                assert!((a - b).abs() <= config.neighbor_delta);
                assert!(b.abs() <= config.coeff_bound);
            }
        }
    }

    #[test]
    fn neighbor_single_free_coordinate_moves_by_delta() {
        let (_, mut config) = grid_and_config(&[5, 1], 1);
        config.neighbor_delta = 1;
        config.freeze_block = Some(2);
        let mut rng = Rng::seed_from_u64(3);
        let set = random_valid_planeset(&config, &mut rng).unwrap();
        let base = reduce_plane(&set.planes()[0], &config.composition).unwrap();
        for _ in 0..50 {
            let neighbor = random_neighbor(&set, &config, &mut rng).unwrap();
            let r = reduce_plane(&neighbor.planes()[0], &config.composition).unwrap();
            assert_eq!(r.coeffs()[0], 2, "frozen block must not move");
            let diff = (r.coeffs()[1] - base.coeffs()[1]).abs();
            assert_eq!(diff, 1);
        }
    }

    #[test]
    fn neighbor_coordinate_count_is_uniform() {
        // with two or more free coordinates the 1-vs-2 split is uniform;
        // 1e4 samples, fixed seed, 5 sigma band around 5000
        let (_, config) = grid_and_config(&[3, 1, 1, 1], 1);
        let sampler = NeighborSampler::new(&config).unwrap();
        let mut rng = Rng::seed_from_u64(2024);
        let row = vec![0i64; 4];
        let mut singles = 0u64;
        let samples = 10_000;
        for _ in 0..samples {
            let (_, count) = sampler.propose(&row, &mut rng);
            if count == 1 {
                singles += 1;
            }
        }
        let sigma = (samples as f64 * 0.25).sqrt();
        let deviation = (singles as f64 - samples as f64 / 2.0).abs();
        assert!(
            deviation < 5.0 * sigma,
            "singles = {singles} of {samples}"
        );
    }

    #[test]
    fn zero_coeff_bound_with_planes_is_degenerate() {
        let (grid, mut config) = grid_and_config(&[2, 1], 2);
        config.coeff_bound = 0;
        assert!(matches!(
            run_search(&config, &grid),
            Err(Error::DegenerateConfig(_))
        ));
    }

    #[test]
    fn zero_time_limit_is_invalid() {
        let (grid, mut config) = grid_and_config(&[2, 1], 2);
        config.time_limit = Duration::ZERO;
        assert!(matches!(
            run_search(&config, &grid),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn k_zero_returns_empty_best() {
        let (grid, config) = grid_and_config(&[3, 1, 1, 1], 0);
        let outcome = run_search(&config, &grid).unwrap();
        assert!(outcome.best.is_empty());
        assert_eq!(outcome.reduced_sliced, 0);
        assert_eq!(outcome.full_sliced, 0);
    }

    #[test]
    fn search_solves_q6_with_5_planes() {
        let (grid, mut config) = grid_and_config(&[3, 1, 1, 1], 5);
        config.seed = 11;
        config.time_limit = Duration::from_secs(60);
        let outcome = run_search(&config, &grid).unwrap();
        assert_eq!(outcome.reduced_sliced, grid.edge_count());
        assert_eq!(outcome.full_sliced, 192);
        // cross-module oracle: the reported count is the brute-force count
        assert_eq!(cube::count_sliced(&outcome.best).unwrap(), 192);
        let verification = cube::verify_full(&outcome.best).unwrap();
        assert!(verification.is_fully_sliced());
    }

    #[test]
    fn search_is_deterministic_for_fixed_seed() {
        let (grid, mut config) = grid_and_config(&[3, 1], 2);
        config.seed = 42;
        config.max_restarts = Some(3);
        config.max_iterations = 2000;
        config.time_limit = Duration::from_secs(600);
        let a = run_search(&config, &grid).unwrap();
        let b = run_search(&config, &grid).unwrap();
        assert_eq!(a.trace_digest, b.trace_digest);
        assert_eq!(a.reduced_sliced, b.reduced_sliced);
        assert_eq!(a.best, b.best);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn observer_sees_monotone_psi_and_bounded_weights() {
        struct Auditor {
            accepts: u64,
            bumps: u64,
        }
        impl SearchObserver for Auditor {
            fn on_accept(&mut self, event: &AcceptEvent, view: &EngineView<'_>) {
                assert!(event.psi_after_scaled >= event.psi_before_scaled);
                self.accepts += 1;
                // recompute psi from scratch through the simple path
                let planes = view.current_planes();
                let weights = view.weight_map();
                let grid_psi = fitness_psi(
                    &planes,
                    &weights,
                    view_grid(view),
                    FitnessMode::PlainReduced,
                    true,
                )
                .unwrap();
                let scaled = (grid_psi * view.psi_scale() as f64).round() as i128;
                assert_eq!(scaled, event.psi_after_scaled);
            }
            fn on_weight_bump(&mut self, view: &EngineView<'_>) {
                self.bumps += 1;
                assert!(view
                    .weights()
                    .iter()
                    .all(|&w| w >= 1 && w <= view.weight_limit()));
            }
        }
        fn view_grid<'a>(view: &EngineView<'a>) -> &'a ReducedGrid {
            view.grid
        }
        let (grid, mut config) = grid_and_config(&[2, 1, 1], 3);
        config.seed = 7;
        config.max_restarts = Some(2);
        config.max_iterations = 1500;
        config.weight_period = 40;
        config.time_limit = Duration::from_secs(600);
        let mut auditor = Auditor {
            accepts: 0,
            bumps: 0,
        };
        let outcome = run_search_observed(&config, &grid, &mut auditor).unwrap();
        assert!(auditor.accepts > 0);
        assert!(outcome.iterations > 0);
    }

    #[test]
    fn reported_counts_match_brute_force_oracle() {
        let (grid, mut config) = grid_and_config(&[4, 1, 1], 3);
        config.seed = 99;
        config.max_restarts = Some(2);
        config.time_limit = Duration::from_secs(600);
        let outcome = run_search(&config, &grid).unwrap();
        assert_eq!(
            cube::count_sliced(&outcome.best).unwrap(),
            outcome.full_sliced
        );
        let sliced = sliced_reduced_edges(&outcome.best, &grid).unwrap();
        assert_eq!(sliced.union_len(), outcome.reduced_sliced);
        for plane in outcome.best.planes() {
            assert!(plane
                .coeffs()
                .iter()
                .all(|&c| c.abs() <= config.coeff_bound));
        }
    }
}
