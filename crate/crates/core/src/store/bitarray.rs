use std::fmt;

use bitvec::vec::BitVec;

/// A bit mask over one BitMat dimension. Positions are 1-based.
#[derive(Clone, PartialEq, Eq)]
pub struct BitArray {
    bits: BitVec,
}

impl BitArray {
    pub fn zeros(width: u32) -> Self {
        BitArray { bits: BitVec::repeat(false, width as usize) }
    }

    pub fn ones(width: u32) -> Self {
        BitArray { bits: BitVec::repeat(true, width as usize) }
    }

    pub fn from_positions(width: u32, positions: impl IntoIterator<Item = u32>) -> Self {
        let mut a = Self::zeros(width);
        for p in positions {
            a.set(p, true);
        }
        a
    }

    pub fn width(&self) -> u32 {
        self.bits.len() as u32
    }

    pub fn get(&self, pos: u32) -> bool {
        pos >= 1 && (pos as usize) <= self.bits.len() && self.bits[pos as usize - 1]
    }

    pub fn set(&mut self, pos: u32, value: bool) {
        self.bits.set(pos as usize - 1, value);
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.not_any()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.iter_ones().map(|i| i as u32 + 1)
    }

    /// In-place AND with a mask of equal width.
    pub fn and_assign(&mut self, other: &BitArray) {
        assert_eq!(self.width(), other.width(), "mask width mismatch");
        self.bits &= other.bits.as_bitslice();
    }

    /// In-place AND with a mask over a different coordinate space that only
    /// shares the first `shared` positions.
    pub fn and_assign_prefix(&mut self, other: &BitArray, shared: u32) {
        for pos in 1..=self.width() {
            let keep = pos <= shared && other.get(pos);
            if !keep {
                self.bits.set(pos as usize - 1, false);
            }
        }
    }
}

impl fmt::Debug for BitArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits.iter().map(|b| if *b { '1' } else { '0' }).collect();
        write!(f, "BitArray({s})")
    }
}
