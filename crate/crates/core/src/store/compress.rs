//! Hybrid per-row compression: run-length or explicit set-bit positions.
//!
//! A run-length row `[b] n1 n2 ...` alternates runs starting with bit `b`.
//! When a row has fewer set bits than the run-length form needs integers, the
//! 1-based positions of the set bits are stored instead. An all-zero row is
//! therefore always the empty position list.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompressedRow {
    Runs { first: bool, runs: Vec<u32> },
    Positions(Vec<u32>),
}

impl Default for CompressedRow {
    fn default() -> Self {
        CompressedRow::Positions(Vec::new())
    }
}

impl CompressedRow {
    /// Compresses a plain bit sequence.
    pub fn encode(bits: &[bool]) -> Self {
        let positions: Vec<u32> = bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i as u32 + 1)
            .collect();
        Self::from_positions(positions, bits.len() as u32)
    }

    /// Builds the hybrid form from strictly increasing 1-based positions.
    pub fn from_positions(positions: Vec<u32>, width: u32) -> Self {
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(positions.last().is_none_or(|&p| p >= 1 && p <= width));
        let run_count = run_count(&positions, width);
        if positions.len() < run_count {
            CompressedRow::Positions(positions)
        } else {
            let (first, runs) = runs_of(&positions, width);
            CompressedRow::Runs { first, runs }
        }
    }

    pub fn decode(&self, width: u32) -> Vec<bool> {
        let mut bits = vec![false; width as usize];
        for p in self.positions() {
            bits[p as usize - 1] = true;
        }
        bits
    }

    /// Iterates the 1-based positions of set bits without materializing the row.
    pub fn positions(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        match self {
            CompressedRow::Positions(p) => Box::new(p.iter().copied()),
            CompressedRow::Runs { first, runs } => {
                let mut start = 1u32;
                let mut bit = *first;
                let mut out = Vec::new();
                for &len in runs {
                    if bit {
                        out.extend(start..start + len);
                    }
                    start += len;
                    bit = !bit;
                }
                Box::new(out.into_iter())
            }
        }
    }

    pub fn popcount(&self) -> u32 {
        match self {
            CompressedRow::Positions(p) => p.len() as u32,
            CompressedRow::Runs { first, runs } => runs
                .iter()
                .enumerate()
                .filter(|(i, _)| (i % 2 == 0) == *first)
                .map(|(_, n)| n)
                .sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.popcount() == 0
    }

    pub fn contains(&self, pos: u32) -> bool {
        match self {
            CompressedRow::Positions(p) => p.binary_search(&pos).is_ok(),
            CompressedRow::Runs { first, runs } => {
                let mut start = 1u32;
                let mut bit = *first;
                for &len in runs {
                    if pos < start + len {
                        return bit && pos >= start;
                    }
                    start += len;
                    bit = !bit;
                }
                false
            }
        }
    }

    /// Keeps only the positions accepted by `keep`, re-encoding the row.
    pub fn retain(&self, width: u32, mut keep: impl FnMut(u32) -> bool) -> Self {
        let kept: Vec<u32> = self.positions().filter(|&p| keep(p)).collect();
        Self::from_positions(kept, width)
    }

    /// Number of integers in the payload (excluding the run-length start flag).
    pub fn payload_len(&self) -> usize {
        match self {
            CompressedRow::Positions(p) => p.len(),
            CompressedRow::Runs { runs, .. } => runs.len(),
        }
    }
}

/// Integers needed by the run-length form of a row.
pub fn run_count(positions: &[u32], width: u32) -> usize {
    if width == 0 {
        return 0;
    }
    // One run plus a boundary on each side of every block of consecutive set bits.
    let mut runs = 1;
    let mut i = 0;
    while i < positions.len() {
        let block_start = positions[i];
        while i + 1 < positions.len() && positions[i + 1] == positions[i] + 1 {
            i += 1;
        }
        let block_end = positions[i];
        runs += (block_start > 1) as usize + (block_end < width) as usize;
        i += 1;
    }
    runs
}

fn runs_of(positions: &[u32], width: u32) -> (bool, Vec<u32>) {
    let first = positions.first() == Some(&1);
    let mut runs = Vec::new();
    let mut bit = first;
    let mut run_start = 1u32;
    let mut idx = 0;
    let mut pos = 1u32;
    while pos <= width {
        let b = idx < positions.len() && positions[idx] == pos;
        if b {
            idx += 1;
        }
        if b != bit {
            runs.push(pos - run_start);
            run_start = pos;
            bit = b;
        }
        pos += 1;
    }
    runs.push(width + 1 - run_start);
    (first, runs)
}

impl fmt::Display for CompressedRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (prefix, values) = match self {
            CompressedRow::Runs { first, runs } => (Some(*first as u8), runs),
            CompressedRow::Positions(p) => (None, p),
        };
        let mut parts: Vec<String> = Vec::with_capacity(values.len() + 1);
        if let Some(b) = prefix {
            parts.push(format!("[{b}]"));
        }
        parts.extend(values.iter().map(|v| v.to_string()));
        f.write_str(&parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn worked_examples() {
        let r = CompressedRow::encode(&bits("1110011110"));
        assert_eq!(r.to_string(), "[1] 3 2 4 1");
        let r = CompressedRow::encode(&bits("0010010000"));
        assert_eq!(r.to_string(), "3 6");
        assert_eq!(r.popcount(), 2);
    }

    #[test]
    fn all_zero_row_is_empty_positions() {
        let r = CompressedRow::encode(&[false; 5]);
        assert_eq!(r, CompressedRow::Positions(vec![]));
        assert!(r.is_empty());
    }

    #[test]
    fn dense_rows_stay_run_length() {
        let r = CompressedRow::encode(&[true; 7]);
        assert_eq!(r, CompressedRow::Runs { first: true, runs: vec![7] });
        assert!(r.contains(7));
        assert!(!r.contains(8));
    }

    proptest! {
        #[test]
        fn round_trip(row in proptest::collection::vec(any::<bool>(), 1..1024)) {
            let enc = CompressedRow::encode(&row);
            prop_assert_eq!(enc.decode(row.len() as u32), row.clone());
            let pop = row.iter().filter(|b| **b).count();
            let (_, runs) = runs_of(
                &enc.positions().collect::<Vec<_>>(),
                row.len() as u32,
            );
            prop_assert_eq!(run_count(&enc.positions().collect::<Vec<_>>(), row.len() as u32), runs.len());
            let is_positions = matches!(enc, CompressedRow::Positions(_));
            prop_assert_eq!(is_positions, pop < runs.len());
            for (i, b) in row.iter().enumerate() {
                prop_assert_eq!(enc.contains(i as u32 + 1), *b);
            }
        }
    }
}
