//! Bit-packed boolean 3D array.
//!
//! Occupancy is packed along the x axis, 64 voxels per word, LSB first.
//! The word stream for one (y, z) row is contiguous, which lets the packed
//! scoring engine AND whole mask rows against terrain rows. Linearization:
//!
//! ```text
//! word(x, y, z) = (z * dims.1 + y) * row_words + x / 64
//! bit  = x % 64
//! ```

/// Dimensions of a voxel grid, `(i, j, k)` along `(x, y, z)`.
pub type Dims = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitGrid3 {
    dims: Dims,
    row_words: usize,
    words: Vec<u64>,
}

impl BitGrid3 {
    /// An all-void grid. Every dimension must be positive.
    pub fn new(dims: Dims) -> Self {
        assert!(
            dims.0 > 0 && dims.1 > 0 && dims.2 > 0,
            "BitGrid3 dims must be positive, got {dims:?}"
        );
        let row_words = dims.0.div_ceil(64);
        BitGrid3 {
            dims,
            row_words,
            words: vec![0; row_words * dims.1 * dims.2],
        }
    }

    /// Rebuilds a grid from its packed words (the dump format body).
    /// Fails if the word count does not match the dims or stray bits are
    /// set beyond `dims.0` in any row.
    pub fn from_words(dims: Dims, words: Vec<u64>) -> crate::Result<Self> {
        let row_words = dims.0.div_ceil(64);
        if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
            return Err(crate::Error::InvalidParameter(format!(
                "voxel grid dims must be positive, got {dims:?}"
            )));
        }
        if words.len() != row_words * dims.1 * dims.2 {
            return Err(crate::Error::InvalidParameter(format!(
                "expected {} packed words for dims {dims:?}, got {}",
                row_words * dims.1 * dims.2,
                words.len()
            )));
        }
        let grid = BitGrid3 {
            dims,
            row_words,
            words,
        };
        let tail = grid.tail_mask();
        if tail != u64::MAX {
            for z in 0..dims.2 {
                for y in 0..dims.1 {
                    let row = grid.row(y, z);
                    if row[row_words - 1] & !tail != 0 {
                        return Err(crate::Error::InvalidParameter(format!(
                            "row (y={y}, z={z}) has bits set beyond x = {}",
                            dims.0
                        )));
                    }
                }
            }
        }
        Ok(grid)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Words per (y, z) row.
    pub fn row_words(&self) -> usize {
        self.row_words
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Mask of valid bits in the last word of each row.
    fn tail_mask(&self) -> u64 {
        let rem = self.dims.0 % 64;
        if rem == 0 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    }

    #[inline]
    fn row_start(&self, y: usize, z: usize) -> usize {
        (z * self.dims.1 + y) * self.row_words
    }

    /// The packed words of one (y, z) row.
    #[inline]
    pub fn row(&self, y: usize, z: usize) -> &[u64] {
        let s = self.row_start(y, z);
        &self.words[s..s + self.row_words]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        debug_assert!(x < self.dims.0 && y < self.dims.1 && z < self.dims.2);
        let w = self.row_start(y, z) + x / 64;
        self.words[w] & (1u64 << (x % 64)) != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        debug_assert!(x < self.dims.0 && y < self.dims.1 && z < self.dims.2);
        let w = self.row_start(y, z) + x / 64;
        let bit = 1u64 << (x % 64);
        if value {
            self.words[w] |= bit;
        } else {
            self.words[w] &= !bit;
        }
    }

    /// Total number of solid voxels.
    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Popcount of bits `[x0, x1)` in row (y, z), clipped to the row extent.
    pub fn range_count(&self, y: usize, z: usize, x0: i64, x1: i64) -> u64 {
        let lo = x0.max(0) as usize;
        let hi = (x1.max(0) as usize).min(self.dims.0);
        if lo >= hi {
            return 0;
        }
        let row = self.row(y, z);
        let (w0, b0) = (lo / 64, lo % 64);
        let (w1, b1) = (hi / 64, hi % 64);
        if w0 == w1 {
            let mask = ((1u128 << b1) - (1u128 << b0)) as u64;
            return (row[w0] & mask).count_ones() as u64;
        }
        let mut count = (row[w0] & !((1u64 << b0) - 1)).count_ones() as u64;
        for w in &row[w0 + 1..w1] {
            count += w.count_ones() as u64;
        }
        if b1 > 0 {
            count += (row[w1] & ((1u64 << b1) - 1)).count_ones() as u64;
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn set_get_roundtrip_exhaustive_small() {
        let dims = (70, 3, 2); // spans a word boundary
        for x in 0..dims.0 {
            for y in 0..dims.1 {
                for z in 0..dims.2 {
                    let mut g = BitGrid3::new(dims);
                    g.set(x, y, z, true);
                    assert!(g.get(x, y, z));
                    assert_eq!(g.count_ones(), 1);
                    g.set(x, y, z, false);
                    assert!(!g.get(x, y, z));
                    assert_eq!(g.count_ones(), 0);
                }
            }
        }
    }

    #[test]
    fn from_words_rejects_stray_tail_bits() {
        let dims = (10, 1, 1);
        let words = vec![1u64 << 10];
        assert!(BitGrid3::from_words(dims, words).is_err());
    }

    #[test]
    fn from_words_rejects_bad_length() {
        assert!(BitGrid3::from_words((10, 2, 2), vec![0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn range_count_matches_loop(
            nx in 1usize..200,
            fill in proptest::collection::vec(any::<u64>(), 1..8),
            bounds in any::<(i64, i64)>(),
        ) {
            let dims = (nx, 1, 1);
            let mut g = BitGrid3::new(dims);
            for x in 0..nx {
                if fill[x % fill.len()] & (1 << (x % 64)) != 0 {
                    g.set(x, 0, 0, true);
                }
            }
            let (a, b) = bounds;
            let x0 = a.rem_euclid(2 * nx as i64 + 8) - 4;
            let x1 = b.rem_euclid(2 * nx as i64 + 8) - 4;
            let naive = (x0.max(0)..x1.min(nx as i64))
                .filter(|&x| x >= 0 && g.get(x as usize, 0, 0))
                .count() as u64;
            prop_assert_eq!(g.range_count(0, 0, x0, x1), naive);
        }

        #[test]
        fn set_get_identity(bits in proptest::collection::vec((0usize..97, 0usize..5, 0usize..4), 0..64)) {
            let dims = (97, 5, 4);
            let mut g = BitGrid3::new(dims);
            for &(x, y, z) in &bits {
                g.set(x, y, z, true);
            }
            for x in 0..dims.0 {
                for y in 0..dims.1 {
                    for z in 0..dims.2 {
                        let expect = bits.contains(&(x, y, z));
                        prop_assert_eq!(g.get(x, y, z), expect);
                    }
                }
            }
        }
    }
}
