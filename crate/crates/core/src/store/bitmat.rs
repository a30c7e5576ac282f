//! 2D BitMats: slices of the conceptual S x P x O bitcube with compressed rows.

use std::fmt;

use super::bitarray::BitArray;
use super::compress::CompressedRow;
use crate::error::{Error, Result};

/// One dimension of the bitcube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dim {
    S,
    P,
    O,
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dim::S => "S",
            Dim::P => "P",
            Dim::O => "O",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitMatKind {
    /// Subject rows, object columns; sliced by predicate.
    SO,
    /// Transpose of `SO`.
    OS,
    /// Predicate rows, subject columns; sliced by object.
    PS,
    /// Predicate rows, object columns; sliced by subject.
    PO,
    /// Produced by a matrix product or another query-time transformation.
    Derived,
}

impl BitMatKind {
    pub fn dims(self) -> Option<(Dim, Dim)> {
        match self {
            BitMatKind::SO => Some((Dim::S, Dim::O)),
            BitMatKind::OS => Some((Dim::O, Dim::S)),
            BitMatKind::PS => Some((Dim::P, Dim::S)),
            BitMatKind::PO => Some((Dim::P, Dim::O)),
            BitMatKind::Derived => None,
        }
    }

    pub fn code(self) -> u32 {
        match self {
            BitMatKind::SO => 0,
            BitMatKind::OS => 1,
            BitMatKind::PS => 2,
            BitMatKind::PO => 3,
            BitMatKind::Derived => 4,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => BitMatKind::SO,
            1 => BitMatKind::OS,
            2 => BitMatKind::PS,
            3 => BitMatKind::PO,
            4 => BitMatKind::Derived,
            _ => return None,
        })
    }
}

impl fmt::Display for BitMatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BitMatKind::SO => "S-O",
            BitMatKind::OS => "O-S",
            BitMatKind::PS => "P-S",
            BitMatKind::PO => "P-O",
            BitMatKind::Derived => "derived",
        })
    }
}

/// Which dimension of a BitMat a fold or unfold keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retain {
    Row,
    Column,
}

#[derive(Clone, PartialEq, Eq)]
pub struct BitMat {
    pub kind: BitMatKind,
    pub slice: u32,
    pub row_dim: Dim,
    pub col_dim: Dim,
    nrows: u32,
    ncols: u32,
    rows: Vec<CompressedRow>,
    triples: u64,
    row_mask: BitArray,
    col_mask: BitArray,
}

impl BitMat {
    pub fn empty(kind: BitMatKind, slice: u32, row_dim: Dim, col_dim: Dim, nrows: u32, ncols: u32) -> Self {
        BitMat {
            kind,
            slice,
            row_dim,
            col_dim,
            nrows,
            ncols,
            rows: vec![CompressedRow::default(); nrows as usize],
            triples: 0,
            row_mask: BitArray::zeros(nrows),
            col_mask: BitArray::zeros(ncols),
        }
    }

    /// Builds a BitMat from 1-based (row, column) pairs. Duplicates collapse.
    pub fn from_pairs(
        kind: BitMatKind,
        slice: u32,
        (row_dim, col_dim): (Dim, Dim),
        (nrows, ncols): (u32, u32),
        pairs: impl IntoIterator<Item = (u32, u32)>,
    ) -> Self {
        let mut per_row: Vec<Vec<u32>> = vec![Vec::new(); nrows as usize];
        for (r, c) in pairs {
            assert!(r >= 1 && r <= nrows && c >= 1 && c <= ncols, "pair ({r},{c}) out of range");
            per_row[r as usize - 1].push(c);
        }
        let rows = per_row
            .into_iter()
            .map(|mut cols| {
                cols.sort_unstable();
                cols.dedup();
                CompressedRow::from_positions(cols, ncols)
            })
            .collect();
        Self::from_rows(kind, slice, (row_dim, col_dim), ncols, rows)
    }

    pub fn from_rows(
        kind: BitMatKind,
        slice: u32,
        (row_dim, col_dim): (Dim, Dim),
        ncols: u32,
        rows: Vec<CompressedRow>,
    ) -> Self {
        let nrows = rows.len() as u32;
        let mut bm = BitMat {
            kind,
            slice,
            row_dim,
            col_dim,
            nrows,
            ncols,
            rows,
            triples: 0,
            row_mask: BitArray::zeros(nrows),
            col_mask: BitArray::zeros(ncols),
        };
        bm.refresh_meta();
        bm
    }

    pub fn nrows(&self) -> u32 {
        self.nrows
    }

    pub fn ncols(&self) -> u32 {
        self.ncols
    }

    pub fn triple_count(&self) -> u64 {
        self.triples
    }

    pub fn is_empty(&self) -> bool {
        self.triples == 0
    }

    pub fn row(&self, r: u32) -> &CompressedRow {
        &self.rows[r as usize - 1]
    }

    pub fn rows(&self) -> &[CompressedRow] {
        &self.rows
    }

    pub fn non_empty_rows(&self) -> &BitArray {
        &self.row_mask
    }

    pub fn non_empty_cols(&self) -> &BitArray {
        &self.col_mask
    }

    pub fn contains(&self, r: u32, c: u32) -> bool {
        r >= 1 && r <= self.nrows && self.rows[r as usize - 1].contains(c)
    }

    /// All set (row, column) pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.row_mask
            .iter_ones()
            .flat_map(move |r| self.rows[r as usize - 1].positions().map(move |c| (r, c)))
    }

    /// Recomputes the triple count and the non-empty row/column masks.
    pub fn refresh_meta(&mut self) {
        let mut triples = 0u64;
        let mut row_mask = BitArray::zeros(self.nrows);
        let mut col_mask = BitArray::zeros(self.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            let mut any = false;
            for c in row.positions() {
                col_mask.set(c, true);
                triples += 1;
                any = true;
            }
            if any {
                row_mask.set(i as u32 + 1, true);
            }
        }
        self.triples = triples;
        self.row_mask = row_mask;
        self.col_mask = col_mask;
    }

    /// True when the stored metadata agrees with the rows.
    pub fn meta_consistent(&self) -> bool {
        let mut fresh = self.clone();
        fresh.refresh_meta();
        fresh.triples == self.triples
            && fresh.row_mask == self.row_mask
            && fresh.col_mask == self.col_mask
    }

    /// Keeps only the pairs accepted by `keep`.
    pub fn retain_pairs(&mut self, mut keep: impl FnMut(u32, u32) -> bool) {
        let ncols = self.ncols;
        for (i, row) in self.rows.iter_mut().enumerate() {
            if row.is_empty() {
                continue;
            }
            let r = i as u32 + 1;
            *row = row.retain(ncols, |c| keep(r, c));
        }
        self.refresh_meta();
    }

    /// Projection onto one dimension: OR over the other.
    pub fn fold(&self, retain: Retain) -> BitArray {
        match retain {
            Retain::Row => {
                let mut out = BitArray::zeros(self.nrows);
                for (i, row) in self.rows.iter().enumerate() {
                    if !row.is_empty() {
                        out.set(i as u32 + 1, true);
                    }
                }
                out
            }
            Retain::Column => {
                let mut out = BitArray::zeros(self.ncols);
                for row in &self.rows {
                    for c in row.positions() {
                        out.set(c, true);
                    }
                }
                out
            }
        }
    }

    /// Clears every triple whose coordinate on the retained dimension is 0 in `mask`.
    pub fn unfold(&mut self, mask: &BitArray, retain: Retain) -> Result<()> {
        let expected = match retain {
            Retain::Row => self.nrows,
            Retain::Column => self.ncols,
        };
        if mask.width() != expected {
            return Err(Error::Contract(format!(
                "unfold mask width {} does not match dimension extent {}",
                mask.width(),
                expected
            )));
        }
        let ncols = self.ncols;
        match retain {
            Retain::Row => {
                for (i, row) in self.rows.iter_mut().enumerate() {
                    if !mask.get(i as u32 + 1) {
                        *row = CompressedRow::default();
                    }
                }
            }
            Retain::Column => {
                for row in self.rows.iter_mut() {
                    if !row.is_empty() {
                        *row = row.retain(ncols, |c| mask.get(c));
                    }
                }
            }
        }
        self.refresh_meta();
        Ok(())
    }

    pub fn transpose(&self) -> BitMat {
        let kind = match self.kind {
            BitMatKind::SO => BitMatKind::OS,
            BitMatKind::OS => BitMatKind::SO,
            _ => BitMatKind::Derived,
        };
        BitMat::from_pairs(
            kind,
            self.slice,
            (self.col_dim, self.row_dim),
            (self.ncols, self.nrows),
            self.pairs().map(|(r, c)| (c, r)),
        )
    }

    /// Single-row view: a 1 x ncols BitMat holding row `r`.
    pub fn select_row(&self, r: u32) -> BitMat {
        let row = if r >= 1 && r <= self.nrows {
            self.rows[r as usize - 1].clone()
        } else {
            CompressedRow::default()
        };
        BitMat::from_rows(self.kind, self.slice, (self.row_dim, self.col_dim), self.ncols, vec![row])
    }
}

/// Boolean matrix product: bit (i, k) is set iff some j has left(i, j) and
/// right(j, k). The eliminated dimension is left's columns / right's rows.
///
/// When both sides index the eliminated dimension with the same kind of
/// coordinate the extents must agree. An S/O mismatch is allowed: subject and
/// object coordinates only denote the same node up to `shared`.
pub fn bmm(left: &BitMat, right: &BitMat, shared: u32) -> Result<BitMat> {
    let limit = if left.col_dim == right.row_dim {
        if left.ncols != right.nrows {
            return Err(Error::Contract(format!(
                "bmm inner extents differ: {} vs {}",
                left.ncols, right.nrows
            )));
        }
        left.ncols
    } else if matches!((left.col_dim, right.row_dim), (Dim::S, Dim::O) | (Dim::O, Dim::S)) {
        shared.min(left.ncols).min(right.nrows)
    } else {
        return Err(Error::Contract(format!(
            "bmm cannot eliminate {} against {}",
            left.col_dim, right.row_dim
        )));
    };
    let width = right.ncols;
    let mut rows = Vec::with_capacity(left.nrows as usize);
    let mut acc = BitArray::zeros(width);
    for lrow in &left.rows {
        let mut any = false;
        for j in lrow.positions() {
            if j > limit {
                break;
            }
            for k in right.rows[j as usize - 1].positions() {
                acc.set(k, true);
                any = true;
            }
        }
        if any {
            let positions: Vec<u32> = acc.iter_ones().collect();
            for &p in &positions {
                acc.set(p, false);
            }
            rows.push(CompressedRow::from_positions(positions, width));
        } else {
            rows.push(CompressedRow::default());
        }
    }
    Ok(BitMat::from_rows(
        BitMatKind::Derived,
        0,
        (left.row_dim, right.col_dim),
        width,
        rows,
    ))
}

impl fmt::Debug for BitMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "BitMat {} slice={} {}x{} ({}x{}) triples={}",
            self.kind, self.slice, self.row_dim, self.col_dim, self.nrows, self.ncols, self.triples
        )?;
        for (i, row) in self.rows.iter().enumerate() {
            if !row.is_empty() {
                writeln!(f, "  {}: {}", i + 1, row)?;
            }
        }
        Ok(())
    }
}
