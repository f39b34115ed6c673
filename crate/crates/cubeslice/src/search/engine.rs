//! Incremental grid evaluation shared by the hill-climbing and tabu
//! searches.
//!
//! Each plane caches its dot product at every grid vertex and a bitset of
//! the reduced edges it slices. A single-coordinate perturbation shifts the
//! dots by `delta * coord_j(rank)` and rebuilds one plane's bitset; global
//! cover counts and weight sums are then patched from the bit diff, so a
//! proposal never costs more than O(|V| + |E|).

use crate::reduced::ReducedGrid;

/// `dots[rank] += factor * coord_j(rank)` for every vertex rank.
pub(crate) fn add_coord_multiple(grid: &ReducedGrid, dots: &mut [i64], j: usize, factor: i64) {
    if factor == 0 {
        return;
    }
    let stride = grid.strides()[j] as usize;
    let radix = grid.radices()[j] as usize;
    let block = grid.composition().blocks()[j] as i64;
    let chunk = stride * radix;
    let mut base = 0;
    while base < dots.len() {
        let mut coord = -block;
        for digit in 0..radix {
            let start = base + digit * stride;
            let add = factor * coord;
            for slot in &mut dots[start..start + stride] {
                *slot += add;
            }
            coord += 2;
        }
        base += chunk;
    }
}

pub(crate) fn build_dots(grid: &ReducedGrid, coeffs: &[i64], dots: &mut [i64]) {
    dots.fill(0);
    for (j, &c) in coeffs.iter().enumerate() {
        add_coord_multiple(grid, dots, j, c);
    }
}

/// Rebuilds a plane's sliced-edge bitset from its dots; returns the number
/// of sliced edges.
pub(crate) fn build_bits(
    grid: &ReducedGrid,
    dots: &[i64],
    bias_twice: i64,
    bits: &mut [u64],
) -> u32 {
    bits.fill(0);
    let lowers = grid.edge_lowers();
    let uppers = grid.edge_uppers();
    let mut count = 0u32;
    for e in 0..lowers.len() {
        let a = 2 * dots[lowers[e] as usize] - bias_twice;
        let b = 2 * dots[uppers[e] as usize] - bias_twice;
        if (a > 0 && b < 0) || (a < 0 && b > 0) {
            bits[e >> 6] |= 1u64 << (e & 63);
            count += 1;
        }
    }
    count
}

pub(crate) fn bitset_words(edge_count: usize) -> usize {
    edge_count.div_ceil(64)
}

/// 64-bit FNV-1a fold, used for trace digests.
pub(crate) fn fnv64(hash: u64, value: u64) -> u64 {
    let mut h = hash;
    for byte in value.to_le_bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

pub(crate) const FNV64_SEED: u64 = 0xCBF2_9CE4_8422_2325;

/// Exact fitness scaled by `k^2` so the variance term stays integral:
/// `psi * k^2 = S*k^2 - (k * sum(c^2) - (sum c)^2)`.
pub(crate) fn psi_scaled(
    weighted_sum: u128,
    counts_sum: i128,
    counts_sq_sum: i128,
    k: usize,
    variance_penalty: bool,
) -> i128 {
    if k == 0 {
        return 0;
    }
    let k = k as i128;
    let base = (weighted_sum as i128) * k * k;
    if variance_penalty {
        base - (k * counts_sq_sum - counts_sum * counts_sum)
    } else {
        base
    }
}

/// Per-plane caches plus global cover state for one candidate solution.
pub(crate) struct GridState {
    pub k: usize,
    pub words: usize,
    pub bias_twice: i64,
    /// k rows of `ell` reduced coefficients.
    pub rows: Vec<i64>,
    /// k rows of `|V|` dot products.
    pub dots: Vec<i64>,
    /// k rows of `words` bitset words.
    pub bits: Vec<u64>,
    /// Edges sliced by each plane.
    pub plane_counts: Vec<u32>,
    /// How many planes slice each edge.
    pub cover: Vec<u16>,
    /// Edges sliced by at least one plane.
    pub covered: usize,
    /// Sum of multiplicities over covered edges.
    pub full_covered: u128,
}

impl GridState {
    pub fn new(grid: &ReducedGrid, k: usize, bias_twice: i64) -> Self {
        let vcount = grid.vertex_count() as usize;
        let ecount = grid.edge_count();
        let words = bitset_words(ecount);
        GridState {
            k,
            words,
            bias_twice,
            rows: vec![0; k * grid.block_count()],
            dots: vec![0; k * vcount],
            bits: vec![0; k * words],
            plane_counts: vec![0; k],
            cover: vec![0; ecount],
            covered: 0,
            full_covered: 0,
        }
    }

    /// Rebuilds every cache from `rows`.
    pub fn rebuild(&mut self, grid: &ReducedGrid) {
        let ell = grid.block_count();
        let vcount = grid.vertex_count() as usize;
        for p in 0..self.k {
            let row = &self.rows[p * ell..(p + 1) * ell];
            let dots = &mut self.dots[p * vcount..(p + 1) * vcount];
            build_dots(grid, row, dots);
            let bits = &mut self.bits[p * self.words..(p + 1) * self.words];
            self.plane_counts[p] = build_bits(grid, dots, self.bias_twice, bits);
        }
        self.cover.fill(0);
        for p in 0..self.k {
            for w in 0..self.words {
                let mut x = self.bits[p * self.words + w];
                while x != 0 {
                    let e = (w << 6) + x.trailing_zeros() as usize;
                    x &= x - 1;
                    self.cover[e] += 1;
                }
            }
        }
        self.covered = 0;
        self.full_covered = 0;
        let mults = grid.edge_mults();
        for e in 0..self.cover.len() {
            if self.cover[e] > 0 {
                self.covered += 1;
                self.full_covered += mults[e] as u128;
            }
        }
    }
}
