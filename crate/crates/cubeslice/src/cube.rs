//! Exact model of the hypercube `Q_n` and the slicing predicate.
//!
//! Vertices live in `{-1,1}^n`; a hyperplane `<a,x> = b` slices an edge when
//! the affine form takes strictly opposite signs at the two endpoints. All
//! sign tests are exact: coefficients are integers and the bias is a
//! half-integer, so every comparison reduces to integer arithmetic on
//! `2(<a,v> - b)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::reduced::Composition;

/// Hard cap on the ambient dimension so vertex indices fit in a `u64`.
pub const MAX_DIMENSION: usize = 60;

/// Default guard for brute-force enumeration over all `n * 2^(n-1)` edges.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Keeps `4*sum|a_i| + |2b|` well inside `i64`.
const MAX_ABS_COEFF_SUM: i64 = 1 << 60;

/// A plane offset stored as twice its value, so the half-integer offsets used
/// throughout stay exactly representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bias(i64);

impl Bias {
    pub const ZERO: Bias = Bias(0);
    /// The `+0.5` offset that keeps integer-coefficient planes off every vertex.
    pub const HALF: Bias = Bias(1);

    pub fn from_twice(twice: i64) -> Self {
        Bias(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Parses a decimal literal whose value is a half-integer (`0`, `0.5`, `-3.5`, `2.0`).
    pub fn parse_decimal(token: &str) -> Option<Bias> {
        let (negative, rest) = match token.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, token.strip_prefix('+').unwrap_or(token)),
        };
        let (int_part, frac_part) = match rest.split_once('.') {
            Some((i, f)) => (i, f),
            None => (rest, ""),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let magnitude: i64 = int_part.parse().ok()?;
        let half = if frac_part.is_empty() || frac_part.bytes().all(|b| b == b'0') {
            0
        } else if frac_part.starts_with('5') && frac_part[1..].bytes().all(|b| b == b'0') {
            1
        } else {
            return None;
        };
        let twice = magnitude.checked_mul(2)?.checked_add(half)?;
        Some(Bias(if negative { -twice } else { twice }))
    }
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            let sign = if self.0 < 0 { "-" } else { "" };
            write!(f, "{}{}.5", sign, self.0.abs() / 2)
        }
    }
}

/// A hyperplane `<a,x> = b` with integer coefficients and half-integer bias.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hyperplane {
    coeffs: Vec<i64>,
    bias: Bias,
}

impl Hyperplane {
    pub fn new(coeffs: Vec<i64>, bias: Bias) -> Result<Self> {
        let mut sum: i64 = 0;
        for &c in &coeffs {
            let mag = c.checked_abs().ok_or(Error::CoefficientOverflow)?;
            sum = sum.checked_add(mag).ok_or(Error::CoefficientOverflow)?;
        }
        if sum > MAX_ABS_COEFF_SUM {
            return Err(Error::CoefficientOverflow);
        }
        Ok(Hyperplane { coeffs, bias })
    }

    pub fn dimension(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn bias(&self) -> Bias {
        self.bias
    }

    /// `<a,v>` for a vertex of matching dimension.
    pub fn dot(&self, vertex: &Vertex) -> Result<i64> {
        if vertex.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: vertex.dimension(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(vertex.coords())
            .map(|(&a, &v)| a * v as i64)
            .sum())
    }

    /// Twice the affine form, `2(<a,v> - b)`; its sign decides slicing.
    pub fn margin_twice(&self, vertex: &Vertex) -> Result<i64> {
        Ok(2 * self.dot(vertex)? - self.bias.twice())
    }
}

/// A vertex of `Q_n`, every coordinate `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    coords: Vec<i8>,
}

impl Vertex {
    pub fn new(coords: Vec<i8>) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIMENSION {
            return Err(Error::InvalidInput(format!(
                "vertex dimension must be in 1..={MAX_DIMENSION}"
            )));
        }
        if coords.iter().any(|&c| c != -1 && c != 1) {
            return Err(Error::InvalidInput(
                "vertex coordinates must be -1 or +1".into(),
            ));
        }
        Ok(Vertex { coords })
    }

    /// Vertex at the given position in lexicographic order over coordinate
    /// tuples (coordinate 0 most significant, `-1 < +1`).
    pub fn from_lex_index(n: usize, index: u64) -> Self {
        debug_assert!(n >= 1 && n <= MAX_DIMENSION);
        debug_assert!(index < 1u64 << n);
        let coords = (0..n)
            .map(|j| if index >> (n - 1 - j) & 1 == 1 { 1 } else { -1 })
            .collect();
        Vertex { coords }
    }

    pub fn lex_index(&self) -> u64 {
        let n = self.coords.len();
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .fold(0u64, |acc, (j, _)| acc | 1 << (n - 1 - j))
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i8] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> i8 {
        self.coords[j]
    }

    pub fn flipped(&self, j: usize) -> Vertex {
        let mut coords = self.coords.clone();
        coords[j] = -coords[j];
        Vertex { coords }
    }
}

impl fmt::Display for Vertex {
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

/// An edge of `Q_n`, canonically anchored at the endpoint whose flipped
/// coordinate is `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    base: Vertex,
    flip_index: usize,
}

impl Edge {
    pub fn new(base: Vertex, flip_index: usize) -> Result<Self> {
        if flip_index >= base.dimension() {
            return Err(Error::InvalidInput(format!(
                "flip index {flip_index} out of range for dimension {}",
                base.dimension()
            )));
        }
        let base = if base.coord(flip_index) == 1 {
            base.flipped(flip_index)
        } else {
            base
        };
        Ok(Edge { base, flip_index })
    }

    pub fn base(&self) -> &Vertex {
        &self.base
    }

    pub fn flip_index(&self) -> usize {
        self.flip_index
    }

    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.base.clone(), self.base.flipped(self.flip_index))
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.endpoints();
        write!(f, "{a} -> {b}")
    }
}

/// A candidate solution: `k` hyperplanes in a common dimension, optionally
/// all satisfying one composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneSet {
    planes: Vec<Hyperplane>,
    dimension: usize,
    composition: Option<Composition>,
}

impl PlaneSet {
    pub fn new(dimension: usize, planes: Vec<Hyperplane>) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(Error::InvalidInput(format!(
                "dimension must be in 1..={MAX_DIMENSION}"
            )));
        }
        for plane in &planes {
            if plane.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: plane.dimension(),
                });
            }
        }
        Ok(PlaneSet {
            planes,
            dimension,
            composition: None,
        })
    }

    pub fn empty(dimension: usize) -> Result<Self> {
        PlaneSet::new(dimension, Vec::new())
    }

    /// Records the composition all planes satisfy, validating block constancy.
    pub fn with_composition(mut self, composition: Composition) -> Result<Self> {
        if composition.total() != self.dimension {
            return Err(Error::InvalidComposition(format!(
                "composition sums to {}, planes have dimension {}",
                composition.total(),
                self.dimension
            )));
        }
        for plane in &self.planes {
            composition.check_satisfied(plane.coeffs())?;
        }
        self.composition = Some(composition);
        Ok(self)
    }

    pub fn planes(&self) -> &[Hyperplane] {
        &self.planes
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn composition(&self) -> Option<&Composition> {
        self.composition.as_ref()
    }
}

/// Total number of edges of `Q_n`: `n * 2^(n-1)`.
pub fn edge_total(n: usize) -> u64 {
    (n as u64) << (n - 1)
}

/// Does the plane slice the edge? Exact strict-sign test on both endpoints.
pub fn slices(plane: &Hyperplane, edge: &Edge) -> Result<bool> {
    let (v1, v2) = edge.endpoints();
    let m1 = plane.margin_twice(&v1)?;
    let m2 = plane.margin_twice(&v2)?;
    Ok((m1 > 0 && m2 < 0) || (m1 < 0 && m2 > 0))
}

/// Margin signs of one plane at every vertex of `Q_n`, in lexicographic
/// vertex order. Uses a subset-sum pass, O(2^n) per plane.
fn margin_signs(plane: &Hyperplane, n: usize) -> Vec<i8> {
    let size = 1usize << n;
    // remap so bit p of the index carries coordinate n-1-p
    let by_bit: Vec<i64> = (0..n).map(|p| plane.coeffs()[n - 1 - p]).collect();
    let total: i64 = by_bit.iter().sum();
    let bias_twice = plane.bias().twice();
    let mut subset = vec![0i64; size];
    let mut signs = vec![0i8; size];
    signs[0] = (-2 * total - bias_twice).signum() as i8;
    for idx in 1..size {
        let low = idx.trailing_zeros() as usize;
        let sum = subset[idx & (idx - 1)] + by_bit[low];
        subset[idx] = sum;
        // 2(<a,v> - b) = 2(2*sum - total) - 2b
        signs[idx] = (4 * sum - 2 * total - bias_twice).signum() as i8;
    }
    signs
}

fn guard_brute_force(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::DimensionTooLarge { n, limit });
    }
    Ok(())
}

/// Number of edges of `Q_n` sliced by at least one plane of the set.
pub fn count_sliced(set: &PlaneSet) -> Result<u64> {
    count_sliced_limited(set, BRUTE_FORCE_LIMIT)
}

pub fn count_sliced_limited(set: &PlaneSet, limit: usize) -> Result<u64> {
    let n = set.dimension();
    guard_brute_force(n, limit)?;
    let signs: Vec<Vec<i8>> = set.planes().iter().map(|p| margin_signs(p, n)).collect();
    let size = 1usize << n;
    let mut count = 0u64;
    for idx in 0..size {
        for p in 0..n {
            let bit = 1usize << p;
            if idx & bit == 0 {
                let partner = idx | bit;
                if signs
                    .iter()
                    .any(|s| (s[idx] as i32) * (s[partner] as i32) < 0)
                {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Outcome of a full verification pass.
#[derive(Debug, Clone)]
pub struct Verification {
    total: u64,
    unsliced: Vec<Edge>,
}

impl Verification {
    pub fn is_fully_sliced(&self) -> bool {
        self.unsliced.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn sliced(&self) -> u64 {
        self.total - self.unsliced.len() as u64
    }

    /// Unsliced edges in canonical form, ordered by flip dimension then by
    /// lexicographic base vertex.
    pub fn unsliced(&self) -> &[Edge] {
        &self.unsliced
    }
}

/// Checks every edge of `Q_n`; collects the unsliced ones. The scan runs
/// flip dimension outermost, then vertices with `-1` in that coordinate in
/// lexicographic order.
pub fn verify_full(set: &PlaneSet) -> Result<Verification> {
    verify_full_limited(set, BRUTE_FORCE_LIMIT)
}

pub fn verify_full_limited(set: &PlaneSet, limit: usize) -> Result<Verification> {
    let n = set.dimension();
    guard_brute_force(n, limit)?;
    let signs: Vec<Vec<i8>> = set.planes().iter().map(|p| margin_signs(p, n)).collect();
    let size = 1u64 << n;
    let mut unsliced = Vec::new();
    for dim in 0..n {
        let bit = 1u64 << (n - 1 - dim);
        for idx in 0..size {
            if idx & bit != 0 {
                continue;
            }
            let partner = (idx | bit) as usize;
            let i = idx as usize;
            let cut = signs
                .iter()
                .any(|s| (s[i] as i32) * (s[partner] as i32) < 0);
            if !cut {
                unsliced.push(
                    Edge::new(Vertex::from_lex_index(n, idx), dim)
                        .expect("flip index in range"),
                );
            }
        }
    }
    Ok(Verification {
        total: edge_total(n),
        unsliced,
    })
}
