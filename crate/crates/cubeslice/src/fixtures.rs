//! Golden constructions embedded as source-level constants.
//!
//! Each fixture records the construction text in the canonical file format,
//! the dimension, the block pattern its planes satisfy, and the exact number
//! of edges it slices. The texts are byte-identical to what
//! [`crate::io::format_construction`] emits for the parsed set.

use crate::cube::PlaneSet;
use crate::io;
use crate::reduced::Composition;

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub dimension: usize,
    pub plane_count: usize,
    /// Construction in the canonical text format.
    pub text: &'static str,
    /// Exact number of hypercube edges the set slices.
    pub expected_sliced: u64,
    /// Block pattern the planes satisfy.
    pub composition: &'static [u32],
    pub description: &'static str,
}

impl Fixture {
    pub fn plane_set(&self) -> PlaneSet {
        let set = io::parse_construction(self.text, Some(self.dimension))
            .expect("fixture text is well-formed");
        let composition = Composition::new(self.composition.to_vec())
            .expect("fixture composition is valid");
        set.with_composition(composition)
            .expect("fixture planes satisfy their composition")
    }

    pub fn total_edges(&self) -> u64 {
        crate::cube::edge_total(self.dimension)
    }

    pub fn is_full_slicing(&self) -> bool {
        self.expected_sliced == self.total_edges()
    }
}

/// The 8 planes slicing all 5120 edges of `Q_10`, the witness behind
/// `S(10) <= 8`.
pub const Q10_MAIN: Fixture = Fixture {
    name: "q10-main",
    dimension: 10,
    plane_count: 8,
    text: "\
-2 -2 -2 -2 -2 -2 1 3 -8 -1 0.5
-2 -2 -2 -2 -2 -2 -1 -3 8 1 0.5
-2 -2 -2 -2 -2 -2 -1 8 3 -1 0.5
-2 -2 -2 -2 -2 -2 1 -8 -3 1 0.5
-2 -2 -2 -2 -2 -2 4 -1 1 -7 0.5
-2 -2 -2 -2 -2 -2 -4 1 -1 7 0.5
-2 -2 -2 -2 -2 -2 -7 -1 -1 -4 0.5
-2 -2 -2 -2 -2 -2 7 1 1 4 0.5
",
    expected_sliced: 5120,
    composition: &[6, 1, 1, 1, 1],
    description: "8 planes slicing all 5120 edges of Q10; witnesses S(10) <= 8",
};

/// Paterson's 5 planes slicing all 192 edges of `Q_6`.
pub const Q6_PATERSON: Fixture = Fixture {
    name: "q6-paterson",
    dimension: 6,
    plane_count: 5,
    text: "\
1 1 1 3 3 -4 0
-2 -2 -2 3 3 -1 0
3 3 3 1 1 -4 0
-1 -1 -1 3 3 6 0
3 3 3 1 1 8 0
",
    expected_sliced: 192,
    composition: &[3, 2, 1],
    description: "Paterson's 5-plane slicing of Q6; witnesses S(6) <= 5",
};

/// The first full 8-plane solution found for `Q_10` (repeated -9 block).
pub const Q10_FIRST: Fixture = Fixture {
    name: "q10-first",
    dimension: 10,
    plane_count: 8,
    text: "\
-9 -9 -9 -9 -9 -9 7 -16 5 35 0.5
-9 -9 -9 -9 -9 -9 -32 -4 -17 8 0.5
-9 -9 -9 -9 -9 -9 32 5 19 -4 0.5
-9 -9 -9 -9 -9 -9 -3 15 -3 -38 0.5
-9 -9 -9 -9 -9 -9 15 3 -36 4 0.5
-9 -9 -9 -9 -9 -9 8 -35 -2 -12 0.5
-9 -9 -9 -9 -9 -9 -4 33 7 16 0.5
-9 -9 -9 -9 -9 -9 -18 -4 34 -5 0.5
",
    expected_sliced: 5120,
    composition: &[6, 1, 1, 1, 1],
    description: "first discovered full 8-plane slicing of Q10",
};

/// A highly structured full `Q_10` solution with few coefficient magnitudes.
pub const Q10_STRUCTURED: Fixture = Fixture {
    name: "q10-structured",
    dimension: 10,
    plane_count: 8,
    text: "\
-9 -9 -9 -9 -9 -9 30 4 3 -20 0.5
-9 -9 -9 -9 -9 -9 20 -3 4 30 0.5
-9 -9 -9 -9 -9 -9 -30 -3 -4 20 0.5
-9 -9 -9 -9 -9 -9 -20 3 -3 -30 0.5
-9 -9 -9 -9 -9 -9 -3 -38 11 -3 0.5
-9 -9 -9 -9 -9 -9 4 -11 -38 -4 0.5
-9 -9 -9 -9 -9 -9 3 38 -11 3 0.5
-9 -9 -9 -9 -9 -9 -4 11 38 3 0.5
",
    expected_sliced: 5120,
    composition: &[6, 1, 1, 1, 1],
    description: "full 8-plane slicing of Q10 with restricted coefficient magnitudes",
};

/// 12 planes slicing 245628 of the 245760 edges of `Q_15`.
pub const Q15_PARTIAL: Fixture = Fixture {
    name: "q15-partial",
    dimension: 15,
    plane_count: 12,
    text: "\
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -2 -2 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -2 0 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 2 -2 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 2 0 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -6 -2 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -6 10 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -6 0 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 6 0 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 8 16 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 8 0 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -10 0 0.5
-1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 10 0 0.5
",
    expected_sliced: 245628,
    composition: &[13, 1, 1],
    description: "12 planes slicing 245628 of the 245760 edges of Q15",
};

pub fn all() -> &'static [Fixture] {
    &[
        Q10_MAIN,
        Q6_PATERSON,
        Q10_FIRST,
        Q10_STRUCTURED,
        Q15_PARTIAL,
    ]
}

pub fn by_name(name: &str) -> Option<&'static Fixture> {
    all().iter().find(|f| f.name == name)
}
