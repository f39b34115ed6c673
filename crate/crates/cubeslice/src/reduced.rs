//! Compositions and the reduced hypercube.
//!
//! A composition `[b_1,..,b_l]` of `n` groups coordinates into blocks of
//! identical coefficients. Summing vertex coordinates within each block
//! projects `Q_n` onto a small integer grid whose edges carry multiplicities;
//! slicing a reduced edge with the reduced plane is equivalent to slicing all
//! of its preimage edges, so fitness evaluation can run entirely on the grid.

use std::fmt;
use std::str::FromStr;

use crate::cube::{edge_total, Bias, Hyperplane, PlaneSet, Vertex, MAX_DIMENSION};
use crate::error::{Error, Result};

/// Vertex-count guard for grid construction: `prod(b_i + 1) <= 2^24`.
pub const MAX_GRID_VERTICES: u64 = 1 << 24;

/// Edge-count guard, keeping dense per-edge arrays desk-sized.
pub const MAX_GRID_EDGES: u64 = 1 << 26;

/// An ordered list of positive block sizes summing to `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Composition {
    blocks: Vec<u32>,
}

impl Composition {
    pub fn new(blocks: Vec<u32>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidComposition("no blocks".into()));
        }
        if blocks.iter().any(|&b| b == 0) {
            return Err(Error::InvalidComposition("zero-sized block".into()));
        }
        let total: u64 = blocks.iter().map(|&b| b as u64).sum();
        if total > MAX_DIMENSION as u64 {
            return Err(Error::InvalidComposition(format!(
                "blocks sum to {total}, above the {MAX_DIMENSION} dimension cap"
            )));
        }
        Ok(Composition { blocks })
    }

    /// The identity composition `[1,1,...,1]` of `n`.
    pub fn identity(n: usize) -> Result<Self> {
        Composition::new(vec![1; n])
    }

    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ambient dimension `n = sum(b_i)`.
    pub fn total(&self) -> usize {
        self.blocks.iter().map(|&b| b as usize).sum()
    }

    /// Start offset of each block within the full coordinate vector.
    pub fn block_starts(&self) -> Vec<usize> {
        let mut starts = Vec::with_capacity(self.blocks.len());
        let mut at = 0usize;
        for &b in &self.blocks {
            starts.push(at);
            at += b as usize;
        }
        starts
    }

    /// Errors with the offending block if the coefficients are not constant
    /// within every block.
    pub fn check_satisfied(&self, coeffs: &[i64]) -> Result<()> {
        if coeffs.len() != self.total() {
            return Err(Error::DimensionMismatch {
                expected: self.total(),
                got: coeffs.len(),
            });
        }
        let mut at = 0usize;
        for (block, &b) in self.blocks.iter().enumerate() {
            let first = coeffs[at];
            if coeffs[at..at + b as usize].iter().any(|&c| c != first) {
                return Err(Error::CompositionViolation { block });
            }
            at += b as usize;
        }
        Ok(())
    }

    /// Expands one coefficient per block into a full coefficient vector.
    pub fn expand(&self, reduced: &[i64]) -> Result<Vec<i64>> {
        if reduced.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks.len(),
                got: reduced.len(),
            });
        }
        let mut coeffs = Vec::with_capacity(self.total());
        for (&c, &b) in reduced.iter().zip(&self.blocks) {
            coeffs.extend(std::iter::repeat(c).take(b as usize));
        }
        Ok(coeffs)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Composition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let blocks = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidComposition(format!("bad block {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Composition::new(blocks)
    }
}

/// All `2^(n-1)` compositions of `n`, in lexicographic order of block lists.
pub fn compositions_of(n: usize) -> Vec<Composition> {
    fn rec(remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Composition>) {
        if remaining == 0 {
            out.push(Composition {
                blocks: prefix.clone(),
            });
            return;
        }
        for first in 1..=remaining {
            prefix.push(first);
            rec(remaining - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n as u32, &mut Vec::new(), &mut out);
    out
}

/// A projected vertex: coordinate `j` is the sum of the block's `+-1`
/// entries, one of `{-b_j, -b_j+2, ..., b_j}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedVertex {
    coords: Vec<i32>,
}

impl ReducedVertex {
    pub fn coords(&self) -> &[i32] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> i32 {
        self.coords[j]
    }

    /// Negative-coordinate counts per block: `(b_j - v_j) / 2`.
    pub fn negative_counts(&self, composition: &Composition) -> Vec<u32> {
        self.coords
            .iter()
            .zip(composition.blocks())
            .map(|(&v, &b)| ((b as i32 - v) / 2) as u32)
            .collect()
    }
}

impl fmt::Display for ReducedVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, c) in self.coords.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A grid edge: endpoints differ by exactly 2 in one coordinate; carries the
/// number of hypercube edges projecting onto it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedEdge {
    pub lower: ReducedVertex,
    pub dim: usize,
    pub multiplicity: u64,
}

/// One coefficient per block plus the shared bias.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedHyperplane {
    coeffs: Vec<i64>,
    bias: Bias,
}

impl ReducedHyperplane {
    pub fn new(coeffs: Vec<i64>, bias: Bias) -> Self {
        ReducedHyperplane { coeffs, bias }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn bias(&self) -> Bias {
        self.bias
    }
}

/// The reduced hypercube `Q^beta`: enumerated vertices and edges with
/// multiplicities, indexed densely for the search inner loops.
///
/// Vertices are ranked in mixed radix over the digits `(v_j + b_j)/2`, most
/// significant digit first, which is lexicographic order on coordinate
/// tuples. Edges are sorted by (lower endpoint rank, dimension).
#[derive(Debug, Clone)]
pub struct ReducedGrid {
    composition: Composition,
    radices: Vec<u64>,
    strides: Vec<u64>,
    vertex_count: u64,
    edge_lower: Vec<u32>,
    edge_upper: Vec<u32>,
    edge_dim: Vec<u16>,
    edge_mult: Vec<u64>,
}

/// Binomial coefficients up to the dimension cap; fits u64 for n <= 60.
fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Builds the grid for a composition, enumerating vertices and edges with
/// their multiplicities.
pub fn build_grid(composition: &Composition) -> Result<ReducedGrid> {
    let blocks = composition.blocks();
    let ell = blocks.len();
    let mut vertex_count: u64 = 1;
    for &b in blocks {
        vertex_count = vertex_count
            .checked_mul(b as u64 + 1)
            .filter(|&v| v <= MAX_GRID_VERTICES)
            .ok_or_else(|| {
                Error::GridTooLarge(format!(
                    "vertex count exceeds {MAX_GRID_VERTICES} for composition {composition}"
                ))
            })?;
    }
    let radices: Vec<u64> = blocks.iter().map(|&b| b as u64 + 1).collect();
    let mut strides = vec![1u64; ell];
    for j in (0..ell.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * radices[j + 1];
    }
    let mut edge_count: u64 = 0;
    for i in 0..ell {
        edge_count += blocks[i] as u64 * (vertex_count / radices[i]);
    }
    if edge_count > MAX_GRID_EDGES {
        return Err(Error::GridTooLarge(format!(
            "edge count {edge_count} exceeds {MAX_GRID_EDGES} for composition {composition}"
        )));
    }

    let mut edge_lower = Vec::with_capacity(edge_count as usize);
    let mut edge_upper = Vec::with_capacity(edge_count as usize);
    let mut edge_dim = Vec::with_capacity(edge_count as usize);
    let mut edge_mult = Vec::with_capacity(edge_count as usize);

    // preimage vertex counts prod_j C(b_j, neg_j), maintained incrementally
    // would obscure the loop; grids are small enough to recompute per vertex.
    let mut digits = vec![0u64; ell];
    for rank in 0..vertex_count {
        {
            let mut r = rank;
            for j in (0..ell).rev() {
                digits[j] = r % radices[j];
                r /= radices[j];
            }
        }
        let mut preimages: u64 = 1;
        for j in 0..ell {
            // digit = (v_j + b_j)/2, so negatives per block = b_j - digit
            preimages = preimages
                .checked_mul(binomial(blocks[j], blocks[j] - digits[j] as u32))
                .ok_or_else(|| {
                    Error::GridTooLarge(format!(
                        "preimage multiplicity overflows u64 for composition {composition}"
                    ))
                })?;
        }
        for j in 0..ell {
            if digits[j] < blocks[j] as u64 {
                // raise coordinate j by 2: one negative in block j flips
                let negatives = blocks[j] as u64 - digits[j];
                let mult = preimages.checked_mul(negatives).ok_or_else(|| {
                    Error::GridTooLarge(format!(
                        "edge multiplicity overflows u64 for composition {composition}"
                    ))
                })?;
                edge_lower.push(rank as u32);
                edge_upper.push((rank + strides[j]) as u32);
                edge_dim.push(j as u16);
                edge_mult.push(mult);
            }
        }
    }
    debug_assert_eq!(edge_lower.len() as u64, edge_count);

    Ok(ReducedGrid {
        composition: composition.clone(),
        radices,
        strides,
        vertex_count,
        edge_lower,
        edge_upper,
        edge_dim,
        edge_mult,
    })
}

impl ReducedGrid {
    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    pub fn dimension(&self) -> usize {
        self.composition.total()
    }

    pub fn block_count(&self) -> usize {
        self.composition.len()
    }

    pub fn vertex_count(&self) -> u64 {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_lower.len()
    }

    /// `n * 2^(n-1)`, the edge total of the unreduced hypercube.
    pub fn full_edge_total(&self) -> u64 {
        edge_total(self.dimension())
    }

    pub fn vertex(&self, rank: u64) -> ReducedVertex {
        let ell = self.block_count();
        let mut coords = vec![0i32; ell];
        let mut r = rank;
        for j in (0..ell).rev() {
            let digit = (r % self.radices[j]) as i32;
            r /= self.radices[j];
            coords[j] = 2 * digit - self.composition.blocks()[j] as i32;
        }
        ReducedVertex { coords }
    }

    pub fn rank_of(&self, vertex: &ReducedVertex) -> u64 {
        let mut rank = 0u64;
        for j in 0..self.block_count() {
            let digit = ((vertex.coord(j) + self.composition.blocks()[j] as i32) / 2) as u64;
            rank = rank * self.radices[j] + digit;
        }
        rank
    }

    pub fn vertices(&self) -> impl Iterator<Item = ReducedVertex> + '_ {
        (0..self.vertex_count).map(|r| self.vertex(r))
    }

    pub fn edge(&self, index: usize) -> ReducedEdge {
        ReducedEdge {
            lower: self.vertex(self.edge_lower[index] as u64),
            dim: self.edge_dim[index] as usize,
            multiplicity: self.edge_mult[index],
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = ReducedEdge> + '_ {
        (0..self.edge_count()).map(|i| self.edge(i))
    }

    pub fn multiplicity(&self, index: usize) -> u64 {
        self.edge_mult[index]
    }

    /// Endpoint ranks `(lower, upper)` of an edge.
    pub fn endpoint_ranks(&self, index: usize) -> (u32, u32) {
        (self.edge_lower[index], self.edge_upper[index])
    }

    pub fn edge_dimension(&self, index: usize) -> usize {
        self.edge_dim[index] as usize
    }

    /// Coordinate `j` of the vertex with the given rank, without
    /// materializing the vertex.
    pub fn coord_of_rank(&self, rank: u64, j: usize) -> i64 {
        let digit = (rank / self.strides[j]) % self.radices[j];
        2 * digit as i64 - self.composition.blocks()[j] as i64
    }

    pub(crate) fn strides(&self) -> &[u64] {
        &self.strides
    }

    pub(crate) fn radices(&self) -> &[u64] {
        &self.radices
    }

    pub(crate) fn edge_lowers(&self) -> &[u32] {
        &self.edge_lower
    }

    pub(crate) fn edge_uppers(&self) -> &[u32] {
        &self.edge_upper
    }

    pub(crate) fn edge_mults(&self) -> &[u64] {
        &self.edge_mult
    }

    /// Histogram of edge multiplicities as sorted (multiplicity, count) pairs.
    pub fn multiplicity_histogram(&self) -> Vec<(u64, u64)> {
        let mut hist = std::collections::BTreeMap::new();
        for &m in &self.edge_mult {
            *hist.entry(m).or_insert(0u64) += 1;
        }
        hist.into_iter().collect()
    }
}

/// Projects a plane satisfying the composition to one coefficient per block.
pub fn reduce_plane(plane: &Hyperplane, composition: &Composition) -> Result<ReducedHyperplane> {
    composition.check_satisfied(plane.coeffs())?;
    let starts = composition.block_starts();
    let coeffs = starts.iter().map(|&s| plane.coeffs()[s]).collect();
    Ok(ReducedHyperplane::new(coeffs, plane.bias()))
}

/// Lifts reduced coefficients back to a full-space plane.
pub fn lift_plane(rplane: &ReducedHyperplane, composition: &Composition) -> Result<Hyperplane> {
    let coeffs = composition.expand(rplane.coeffs())?;
    Hyperplane::new(coeffs, rplane.bias())
}

/// `<a^beta, v^beta>`, equal to the full-space dot product of any preimage.
pub fn reduced_dot(rplane: &ReducedHyperplane, rvertex: &ReducedVertex) -> Result<i64> {
    if rplane.coeffs().len() != rvertex.coords().len() {
        return Err(Error::DimensionMismatch {
            expected: rplane.coeffs().len(),
            got: rvertex.coords().len(),
        });
    }
    Ok(rplane
        .coeffs()
        .iter()
        .zip(rvertex.coords())
        .map(|(&a, &v)| a * v as i64)
        .sum())
}

/// Projects the vertex of `Q_n` onto the grid by summing block coordinates.
pub fn reduce_vertex(vertex: &Vertex, composition: &Composition) -> Result<ReducedVertex> {
    if vertex.dimension() != composition.total() {
        return Err(Error::DimensionMismatch {
            expected: composition.total(),
            got: vertex.dimension(),
        });
    }
    let mut coords = Vec::with_capacity(composition.len());
    let mut at = 0usize;
    for &b in composition.blocks() {
        let sum: i32 = vertex.coords()[at..at + b as usize]
            .iter()
            .map(|&c| c as i32)
            .sum();
        coords.push(sum);
        at += b as usize;
    }
    Ok(ReducedVertex { coords })
}

/// Sliced reduced edges of a plane set: the union and the per-plane sets.
#[derive(Debug, Clone)]
pub struct SlicedEdges {
    union: Vec<bool>,
    per_plane: Vec<Vec<bool>>,
}

impl SlicedEdges {
    pub fn union_contains(&self, edge_index: usize) -> bool {
        self.union[edge_index]
    }

    pub fn union_indices(&self) -> Vec<usize> {
        self.union
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn union_len(&self) -> usize {
        self.union.iter().filter(|&&s| s).count()
    }

    /// Number of reduced edges sliced by each plane individually.
    pub fn per_plane_counts(&self) -> Vec<usize> {
        self.per_plane
            .iter()
            .map(|p| p.iter().filter(|&&s| s).count())
            .collect()
    }

    pub fn plane_slices(&self, plane: usize, edge_index: usize) -> bool {
        self.per_plane[plane][edge_index]
    }
}

/// Margin signs of a reduced plane at every grid vertex, by rank.
pub(crate) fn reduced_margin_signs(
    rplane: &ReducedHyperplane,
    grid: &ReducedGrid,
) -> Vec<i8> {
    let ell = grid.block_count();
    let bias_twice = rplane.bias().twice();
    (0..grid.vertex_count())
        .map(|rank| {
            let mut dot = 0i64;
            for j in 0..ell {
                dot += rplane.coeffs()[j] * grid.coord_of_rank(rank, j);
            }
            (2 * dot - bias_twice).signum() as i8
        })
        .collect()
}

/// The function phi: which reduced edges are sliced by at least one plane,
/// with per-plane sets retained for the variance penalty.
pub fn sliced_reduced_edges(planes: &PlaneSet, grid: &ReducedGrid) -> Result<SlicedEdges> {
    if planes.dimension() != grid.dimension() {
        return Err(Error::DimensionMismatch {
            expected: grid.dimension(),
            got: planes.dimension(),
        });
    }
    let edge_count = grid.edge_count();
    let mut union = vec![false; edge_count];
    let mut per_plane = Vec::with_capacity(planes.len());
    for plane in planes.planes() {
        let rplane = reduce_plane(plane, grid.composition())?;
        let signs = reduced_margin_signs(&rplane, grid);
        let mut cut = vec![false; edge_count];
        for e in 0..edge_count {
            let (lo, hi) = grid.endpoint_ranks(e);
            if (signs[lo as usize] as i32) * (signs[hi as usize] as i32) < 0 {
                cut[e] = true;
                union[e] = true;
            }
        }
        per_plane.push(cut);
    }
    Ok(SlicedEdges { union, per_plane })
}

/// Multiplicity-weighted size of phi; equals the brute-force sliced count on
/// the full hypercube.
pub fn weighted_sliced_count(planes: &PlaneSet, grid: &ReducedGrid) -> Result<u64> {
    let sliced = sliced_reduced_edges(planes, grid)?;
    let mut total = 0u64;
    for e in 0..grid.edge_count() {
        if sliced.union_contains(e) {
            total += grid.multiplicity(e);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube;
    use crate::rng::Rng;

    fn comp(blocks: &[u32]) -> Composition {
        Composition::new(blocks.to_vec()).unwrap()
    }

    #[test]
    fn grid_3_2_1_sizes() {
        let grid = build_grid(&comp(&[3, 2, 1])).unwrap();
        assert_eq!(grid.vertex_count(), 24);
        assert_eq!(grid.edge_count(), 46);
    }

    #[test]
    fn grid_6_1x4_sizes() {
        let grid = build_grid(&comp(&[6, 1, 1, 1, 1])).unwrap();
        assert_eq!(grid.vertex_count(), 112);
        assert_eq!(grid.edge_count(), 320);
    }

    #[test]
    fn identity_composition_is_the_hypercube() {
        for n in 1..=8 {
            let grid = build_grid(&Composition::identity(n).unwrap()).unwrap();
            assert_eq!(grid.vertex_count(), 1 << n);
            assert_eq!(grid.edge_count() as u64, edge_total(n));
            assert!((0..grid.edge_count()).all(|e| grid.multiplicity(e) == 1));
        }
    }

    #[test]
    fn counting_identities_small() {
        for n in 1..=9 {
            for composition in compositions_of(n) {
                let grid = build_grid(&composition).unwrap();
                let expect_v: u64 = composition
                    .blocks()
                    .iter()
                    .map(|&b| b as u64 + 1)
                    .product();
                assert_eq!(grid.vertex_count(), expect_v, "{composition}");
                let mut expect_e = 0u64;
                for i in 0..composition.len() {
                    let mut prod = 1u64;
                    for j in 0..composition.len() {
                        if j != i {
                            prod *= composition.blocks()[j] as u64 + 1;
                        }
                    }
                    expect_e += composition.blocks()[i] as u64 * prod;
                }
                assert_eq!(grid.edge_count() as u64, expect_e, "{composition}");
                let mult_sum: u64 = (0..grid.edge_count()).map(|e| grid.multiplicity(e)).sum();
                assert_eq!(mult_sum, edge_total(n), "{composition}");
                let preimage_sum: u64 = grid
                    .vertices()
                    .map(|v| {
                        v.negative_counts(&composition)
                            .iter()
                            .zip(composition.blocks())
                            .map(|(&neg, &b)| binomial(b, neg))
                            .product::<u64>()
                    })
                    .sum();
                assert_eq!(preimage_sum, 1 << n, "{composition}");
            }
        }
    }

    #[test]
    fn vertex_rank_round_trip() {
        let grid = build_grid(&comp(&[3, 2, 1])).unwrap();
        for rank in 0..grid.vertex_count() {
            let v = grid.vertex(rank);
            assert_eq!(grid.rank_of(&v), rank);
            for (j, &c) in v.coords().iter().enumerate() {
                assert_eq!(grid.coord_of_rank(rank, j), c as i64);
                let b = grid.composition().blocks()[j] as i32;
                assert!(c.abs() <= b && (c - b) % 2 == 0);
            }
        }
    }

    #[test]
    fn edges_differ_by_two_in_one_dim() {
        let grid = build_grid(&comp(&[2, 3])).unwrap();
        for e in grid.edges() {
            let lower = e.lower.clone();
            let upper = grid.vertex(grid.rank_of(&lower) + grid.strides()[e.dim]);
            for j in 0..grid.block_count() {
                if j == e.dim {
                    assert_eq!(upper.coord(j) - lower.coord(j), 2);
                } else {
                    assert_eq!(upper.coord(j), lower.coord(j));
                }
            }
        }
    }

    #[test]
    fn reduce_plane_projects_blocks() {
        let composition = comp(&[6, 1, 1, 1, 1]);
        let coeffs = vec![-2, -2, -2, -2, -2, -2, 1, 3, -8, -1];
        let plane = Hyperplane::new(coeffs, Bias::HALF).unwrap();
        let rplane = reduce_plane(&plane, &composition).unwrap();
        assert_eq!(rplane.coeffs(), &[-2, 1, 3, -8, -1]);
        assert_eq!(rplane.bias(), Bias::HALF);
    }

    #[test]
    fn reduce_plane_reports_offending_block() {
        let composition = comp(&[3, 2]);
        let plane = Hyperplane::new(vec![1, 1, 1, 2, 3], Bias::ZERO).unwrap();
        assert!(matches!(
            reduce_plane(&plane, &composition),
            Err(Error::CompositionViolation { block: 1 })
        ));
    }

    #[test]
    fn all_equal_plane_reduces_to_single_block() {
        let composition = comp(&[4]);
        let plane = Hyperplane::new(vec![7, 7, 7, 7], Bias::HALF).unwrap();
        let rplane = reduce_plane(&plane, &composition).unwrap();
        assert_eq!(rplane.coeffs(), &[7]);
    }

    #[test]
    fn identity_reduction_is_the_plane_itself() {
        let composition = Composition::identity(4).unwrap();
        let plane = Hyperplane::new(vec![3, -1, 0, 5], Bias::HALF).unwrap();
        let rplane = reduce_plane(&plane, &composition).unwrap();
        assert_eq!(rplane.coeffs(), plane.coeffs());
    }

    #[test]
    fn reduced_dot_matches_example() {
        let rplane = ReducedHyperplane::new(vec![-2, 1, 3, -8, -1], Bias::HALF);
        let rvertex = ReducedVertex {
            coords: vec![6, 1, 1, 1, 1],
        };
        assert_eq!(reduced_dot(&rplane, &rvertex).unwrap(), -17);
    }

    #[test]
    fn zero_plane_dots_to_zero_everywhere() {
        let grid = build_grid(&comp(&[3, 2])).unwrap();
        let rplane = ReducedHyperplane::new(vec![0, 0], Bias::ZERO);
        for v in grid.vertices() {
            assert_eq!(reduced_dot(&rplane, &v).unwrap(), 0);
        }
    }

    #[test]
    fn reduced_dot_equals_full_dot_on_random_pairs() {
        let mut rng = Rng::seed_from_u64(12345);
        for _ in 0..100 {
            let n = 1 + rng.index(8);
            let compositions = compositions_of(n);
            let composition = &compositions[rng.index(compositions.len())];
            let reduced_coeffs: Vec<i64> =
                (0..composition.len()).map(|_| rng.range_i64(-9, 9)).collect();
            let plane = Hyperplane::new(
                composition.expand(&reduced_coeffs).unwrap(),
                Bias::HALF,
            )
            .unwrap();
            let vertex = Vertex::from_lex_index(n, rng.below(1 << n));
            let rplane = reduce_plane(&plane, composition).unwrap();
            let rvertex = reduce_vertex(&vertex, composition).unwrap();
            assert_eq!(
                reduced_dot(&rplane, &rvertex).unwrap(),
                plane.dot(&vertex).unwrap()
            );
        }
    }

    #[test]
    fn empty_plane_set_slices_nothing() {
        let grid = build_grid(&comp(&[3, 2, 1])).unwrap();
        let set = PlaneSet::empty(6).unwrap();
        let sliced = sliced_reduced_edges(&set, &grid).unwrap();
        assert_eq!(sliced.union_len(), 0);
        assert_eq!(weighted_sliced_count(&set, &grid).unwrap(), 0);
    }

    #[test]
    fn weighted_count_matches_brute_force_on_random_sets() {
        let mut rng = Rng::seed_from_u64(777);
        for _ in 0..60 {
            let n = 2 + rng.index(7);
            let compositions = compositions_of(n);
            let composition = compositions[rng.index(compositions.len())].clone();
            let grid = build_grid(&composition).unwrap();
            let k = 1 + rng.index(3);
            let planes: Vec<Hyperplane> = (0..k)
                .map(|_| {
                    let reduced: Vec<i64> =
                        (0..composition.len()).map(|_| rng.range_i64(-5, 5)).collect();
                    Hyperplane::new(composition.expand(&reduced).unwrap(), Bias::HALF).unwrap()
                })
                .collect();
            let set = PlaneSet::new(n, planes)
                .unwrap()
                .with_composition(composition.clone())
                .unwrap();
            let weighted = weighted_sliced_count(&set, &grid).unwrap();
            let brute = cube::count_sliced(&set).unwrap();
            assert_eq!(weighted, brute, "composition {composition}");
            let sliced = sliced_reduced_edges(&set, &grid).unwrap();
            let full_cover = sliced.union_len() == grid.edge_count();
            let verified = cube::verify_full(&set).unwrap().is_fully_sliced();
            assert_eq!(full_cover, verified, "composition {composition}");
        }
    }

    #[test]
    fn composition_parsing() {
        let c: Composition = "6,1,1,1,1".parse().unwrap();
        assert_eq!(c.blocks(), &[6, 1, 1, 1, 1]);
        assert_eq!(c.to_string(), "6,1,1,1,1");
        assert!("0,2".parse::<Composition>().is_err());
        assert!("".parse::<Composition>().is_err());
        assert!("x".parse::<Composition>().is_err());
    }

    #[test]
    fn compositions_of_counts() {
        for n in 1..=10 {
            assert_eq!(compositions_of(n).len(), 1 << (n - 1));
        }
    }

    #[test]
    fn grid_guard_trips_on_huge_vertex_count() {
        let composition = comp(&[30, 30]);
        // 31 * 31 vertices is fine; push beyond via many blocks instead
        assert!(build_grid(&composition).is_ok());
        let big = Composition::new(vec![1; 30]).unwrap();
        assert!(matches!(
            build_grid(&big),
            Err(Error::GridTooLarge(_))
        ));
    }
}
