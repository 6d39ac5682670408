//! Dyadic cubes of `[0,1]^d` for `d ∈ {1, 2}`: indexing, genealogy and
//! same-generation neighborhoods.
//!
//! A cube `I_w` of generation `j` is stored by its integer coordinates
//! `k_i ∈ [0, 2^j)`. The word `w` (one base-`2^d` digit per generation) is
//! recovered from the coordinate bits: digit `l` has bit `i` equal to bit
//! `j - l` of `k_i`. Sorting cubes by [`DyadicIndex::key`] is the
//! lexicographic order of their words.

use std::fmt;

use crate::error::{invalid, Result};

/// Largest `d · j` that fits the 64-bit word key with a spare bit.
pub const MAX_KEY_BITS: u32 = 62;

/// A dyadic cube `I_w`: generation `j` plus `d` coordinates in `[0, 2^j)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicIndex {
    dim: u8,
    generation: u32,
    coords: [u64; 2],
}

impl fmt::Debug for DyadicIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I(j={}, k={:?})", self.generation, self.coords())
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        invalid(format!("dimension must be 1 or 2, got {dim}"))
    }
}

pub(crate) fn check_depth(dim: usize, generation: u32) -> Result<()> {
    if dim as u32 * generation > MAX_KEY_BITS {
        invalid(format!(
            "generation {generation} too deep for d={dim} (d·j must be ≤ {MAX_KEY_BITS})"
        ))
    } else {
        Ok(())
    }
}

impl DyadicIndex {
    pub fn new(generation: u32, coords: &[u64]) -> Result<Self> {
        check_dim(coords.len())?;
        check_depth(coords.len(), generation)?;
        let side = 1u64 << generation;
        if let Some(c) = coords.iter().find(|&&c| c >= side) {
            return invalid(format!("coordinate {c} out of range [0, 2^{generation})"));
        }
        let mut c = [0u64; 2];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            dim: coords.len() as u8,
            generation,
            coords: c,
        })
    }

    /// The unit cube `[0,1]^d`.
    pub fn root(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim: dim as u8,
            generation: 0,
            coords: [0; 2],
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn generation(&self) -> u32 {
        self.generation
    }

    #[inline]
    pub fn coords(&self) -> &[u64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn side(&self) -> u64 {
        1u64 << self.generation
    }

    /// The generation-`m` cube containing `self`.
    pub fn ancestor(&self, m: u32) -> Result<Self> {
        if m > self.generation {
            return invalid(format!(
                "ancestor generation {m} exceeds cube generation {}",
                self.generation
            ));
        }
        Ok(self.ancestor_unchecked(m))
    }

    #[inline]
    pub(crate) fn ancestor_unchecked(&self, m: u32) -> Self {
        let shift = self.generation - m;
        Self {
            dim: self.dim,
            generation: m,
            coords: [self.coords[0] >> shift, self.coords[1] >> shift],
        }
    }

    /// Whether `other` is contained in `self` (both closed cubes, `other`
    /// at least as deep).
    pub fn contains(&self, other: &DyadicIndex) -> bool {
        other.dim == self.dim
            && other.generation >= self.generation
            && other.ancestor_unchecked(self.generation) == *self
    }

    /// The base-`2^d` digit at depth `level ∈ 1..=j` of the word `w`.
    #[inline]
    pub fn digit(&self, level: u32) -> usize {
        debug_assert!(level >= 1 && level <= self.generation);
        let shift = self.generation - level;
        let mut s = 0usize;
        for i in 0..self.dim as usize {
            s |= (((self.coords[i] >> shift) & 1) as usize) << i;
        }
        s
    }

    /// Position of the word `w` in the lexicographic order of `Σ_j`.
    #[inline]
    pub fn key(&self) -> u64 {
        match self.dim {
            1 => self.coords[0],
            _ => interleave(self.coords[0]) | (interleave(self.coords[1]) << 1),
        }
    }

    /// Inverse of [`DyadicIndex::key`].
    pub fn from_key(dim: usize, generation: u32, key: u64) -> Result<Self> {
        check_dim(dim)?;
        check_depth(dim, generation)?;
        if generation < 64 && dim as u32 * generation < 64 && key >> (dim as u32 * generation) != 0 {
            return invalid(format!("key {key} out of range for generation {generation}"));
        }
        Ok(Self::from_key_unchecked(dim, generation, key))
    }

    #[inline]
    pub(crate) fn from_key_unchecked(dim: usize, generation: u32, key: u64) -> Self {
        let coords = match dim {
            1 => [key, 0],
            _ => [deinterleave(key), deinterleave(key >> 1)],
        };
        Self {
            dim: dim as u8,
            generation,
            coords,
        }
    }

    /// `N(I)`: the same-generation cubes whose closure meets the closure of
    /// `self`, clamped at the boundary of `[0,1]^d`.
    pub fn neighbors(&self) -> NeighborSet {
        let side = self.side() as i64;
        let mut members = Vec::with_capacity(9);
        let range = |c: u64| {
            let c = c as i64;
            (c - 1).max(0)..=(c + 1).min(side - 1)
        };
        match self.dim {
            1 => {
                for k in range(self.coords[0]) {
                    members.push(Self {
                        coords: [k as u64, 0],
                        ..*self
                    });
                }
            }
            _ => {
                for x in range(self.coords[0]) {
                    for y in range(self.coords[1]) {
                        members.push(Self {
                            coords: [x as u64, y as u64],
                            ..*self
                        });
                    }
                }
            }
        }
        NeighborSet {
            center: *self,
            members,
        }
    }

    /// `I_j(x)`: the generation-`j` cube containing `x`, with
    /// `k_i = min(floor(x_i 2^j), 2^j - 1)`.
    pub fn of_point(x: &[f64], j: u32) -> Result<Self> {
        check_dim(x.len())?;
        check_depth(x.len(), j)?;
        let side = 1u64 << j;
        let mut coords = [0u64; 2];
        for (i, &xi) in x.iter().enumerate() {
            if !(0.0..=1.0).contains(&xi) {
                return invalid(format!("point coordinate {xi} outside [0,1]"));
            }
            coords[i] = ((xi * side as f64).floor() as u64).min(side - 1);
        }
        Ok(Self {
            dim: x.len() as u8,
            generation: j,
            coords,
        })
    }
}

/// `N(I)` together with its center.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborSet {
    pub center: DyadicIndex,
    pub members: Vec<DyadicIndex>,
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, idx: &DyadicIndex) -> bool {
        self.members.contains(idx)
    }
}

/// Free-function form of [`DyadicIndex::ancestor`].
pub fn ancestor(idx: &DyadicIndex, m: u32) -> Result<DyadicIndex> {
    idx.ancestor(m)
}

/// Free-function form of [`DyadicIndex::neighbors`].
pub fn neighbors(idx: &DyadicIndex) -> NeighborSet {
    idx.neighbors()
}

/// Free-function form of [`DyadicIndex::of_point`].
pub fn index_of_point(x: &[f64], j: u32) -> Result<DyadicIndex> {
    DyadicIndex::of_point(x, j)
}

// Spread the low 32 bits of `v` to the even bit positions.
#[inline]
fn interleave(v: u64) -> u64 {
    let mut x = v & 0xFFFF_FFFF;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

#[inline]
fn deinterleave(v: u64) -> u64 {
    let mut x = v & 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x >> 4)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x >> 8)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x >> 16)) & 0x0000_0000_FFFF_FFFF;
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn idx(j: u32, c: &[u64]) -> DyadicIndex {
        DyadicIndex::new(j, c).unwrap()
    }

    #[test]
    fn ancestor_examples() {
        assert_eq!(idx(4, &[13]).ancestor(2).unwrap(), idx(2, &[3]));
        assert_eq!(idx(4, &[13]).ancestor(0).unwrap(), DyadicIndex::root(1).unwrap());
        assert_eq!(idx(5, &[21, 6]).ancestor(3).unwrap(), idx(3, &[5, 1]));
        assert_eq!(idx(4, &[13]).ancestor(4).unwrap(), idx(4, &[13]));
        assert!(idx(4, &[13]).ancestor(5).is_err());
    }

    #[test]
    fn neighbor_examples() {
        let ks = |n: NeighborSet| n.members.iter().map(|m| m.coords()[0]).collect::<Vec<_>>();
        assert_eq!(ks(idx(3, &[4]).neighbors()), vec![3, 4, 5]);
        assert_eq!(ks(idx(3, &[0]).neighbors()), vec![0, 1]);
        assert_eq!(ks(idx(3, &[7]).neighbors()), vec![6, 7]);
        let n2 = idx(2, &[1, 1]).neighbors();
        assert_eq!(n2.len(), 9);
        for x in 0..3 {
            for y in 0..3 {
                assert!(n2.contains(&idx(2, &[x, y])));
            }
        }
        assert_eq!(idx(2, &[0, 3]).neighbors().len(), 4);
        assert_eq!(DyadicIndex::root(2).unwrap().neighbors().len(), 1);
    }

    #[test]
    fn point_examples() {
        assert_eq!(index_of_point(&[0.5], 1).unwrap(), idx(1, &[1]));
        assert_eq!(index_of_point(&[1.0], 3).unwrap(), idx(3, &[7]));
        assert_eq!(index_of_point(&[0.26, 0.74], 2).unwrap(), idx(2, &[1, 2]));
        assert!(index_of_point(&[1.5], 2).is_err());
        assert!(index_of_point(&[-0.1, 0.2], 2).is_err());
        assert!(index_of_point(&[f64::NAN], 2).is_err());
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(DyadicIndex::new(2, &[4]).is_err());
        assert!(DyadicIndex::new(2, &[1, 2, 3]).is_err());
        assert!(DyadicIndex::new(40, &[0, 0]).is_err());
        assert!(DyadicIndex::new(62, &[0]).is_ok());
    }

    #[test]
    fn digits_follow_coordinate_bits() {
        // k = 0b011: word (0, 1, 1)
        let i = idx(3, &[3]);
        assert_eq!((i.digit(1), i.digit(2), i.digit(3)), (0, 1, 1));
        // x = 0b10, y = 0b01: digits (1 + 0, 0 + 2)
        let i = idx(2, &[2, 1]);
        assert_eq!((i.digit(1), i.digit(2)), (1, 2));
    }

    #[test]
    fn key_order_is_word_order() {
        let mut cubes: Vec<_> = (0..4)
            .flat_map(|x| (0..4).map(move |y| idx(2, &[x, y])))
            .collect();
        cubes.sort_by_key(|c| c.key());
        let words: Vec<_> = cubes.iter().map(|c| (c.digit(1), c.digit(2))).collect();
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
    }

    fn arb_cube(dim: usize) -> impl Strategy<Value = DyadicIndex> {
        (0u32..=20).prop_flat_map(move |j| {
            proptest::collection::vec(0..(1u64 << j), dim)
                .prop_map(move |c| DyadicIndex::new(j, &c).unwrap())
        })
    }

    proptest! {
        #[test]
        fn ancestor_is_transitive(c in prop_oneof![arb_cube(1), arb_cube(2)], a in 0u32..=20, b in 0u32..=20) {
            let j = c.generation();
            let (m, m2) = (a.min(j).max(b.min(j)), a.min(j).min(b.min(j)));
            prop_assert_eq!(c.ancestor(m).unwrap().ancestor(m2).unwrap(), c.ancestor(m2).unwrap());
            prop_assert!(c.ancestor(m2).unwrap().contains(&c));
        }

        #[test]
        fn neighbors_are_symmetric(c in prop_oneof![arb_cube(1), arb_cube(2)]) {
            let n = c.neighbors();
            prop_assert!(n.contains(&c));
            prop_assert!(n.len() <= 3usize.pow(c.dim() as u32));
            for m in &n.members {
                prop_assert!(m.neighbors().contains(&c));
            }
        }

        #[test]
        fn point_index_is_consistent_across_scales(x in 0.0f64..=1.0, y in 0.0f64..=1.0, j in 0u32..=12, extra in 0u32..=12) {
            let fine = index_of_point(&[x, y], j + extra).unwrap();
            prop_assert_eq!(index_of_point(&[x, y], j).unwrap(), fine.ancestor(j).unwrap());
        }

        #[test]
        fn key_roundtrip(c in prop_oneof![arb_cube(1), arb_cube(2)]) {
            prop_assert_eq!(DyadicIndex::from_key(c.dim(), c.generation(), c.key()).unwrap(), c);
            prop_assert_eq!(c.ancestor(c.generation() / 2).unwrap().key(), c.key() >> (c.dim() as u32 * (c.generation() - c.generation() / 2)));
        }
    }
}
