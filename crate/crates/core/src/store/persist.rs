//! On-disk layout: `dict.tsv` plus one `so_<pid>.bm` file per predicate.
//!
//! A BitMat file is a sequence of little-endian u32 values: the header
//! (kind, slice, rows, cols, triple count), one encoded row per matrix row,
//! then the non-empty row mask and the non-empty column mask, each encoded as
//! a compressed row. An encoded row is (tag, length, payload...) where tag 0
//! means set positions and tag 1 means runs; a runs payload starts with the
//! first bit.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::bitarray::BitArray;
use super::bitmat::{BitMat, BitMatKind};
use super::compress::CompressedRow;
use super::dictionary::{Dictionary, TermClass};
use super::ntriples::parse_term;
use crate::error::{Error, Result};

pub const DICT_FILE: &str = "dict.tsv";

pub fn bitmat_file_name(kind: BitMatKind, slice: u32) -> String {
    let prefix = match kind {
        BitMatKind::SO => "so",
        BitMatKind::OS => "os",
        BitMatKind::PS => "ps",
        BitMatKind::PO => "po",
        BitMatKind::Derived => "derived",
    };
    format!("{prefix}_{slice}.bm")
}

pub fn write_dictionary(dir: &Path, dict: &Dictionary) -> Result<()> {
    let mut out = BufWriter::new(File::create(dir.join(DICT_FILE))?);
    for (id, class, term) in dict.entries() {
        writeln!(out, "{id}\t{}\t{term}", class.tag())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dictionary(dir: &Path) -> Result<Dictionary> {
    let reader = BufReader::new(File::open(dir.join(DICT_FILE))?);
    let mut entries = Vec::new();
    let mut expected = [0u32; 4];
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Format(format!("{DICT_FILE} line {}: {msg}", idx + 1));
        let mut parts = line.splitn(3, '\t');
        let id: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("invalid id"))?;
        let class = parts
            .next()
            .and_then(TermClass::from_tag)
            .ok_or_else(|| bad("invalid class"))?;
        let term = parse_term(parts.next().ok_or_else(|| bad("missing term"))?).map_err(|m| bad(&m))?;
        let slot = class as usize;
        expected[slot] += 1;
        let want = match class {
            TermClass::Shared | TermClass::Predicate => expected[slot],
            TermClass::SubjectOnly | TermClass::ObjectOnly => expected[0] + expected[slot],
        };
        if id != want {
            return Err(bad(&format!("expected id {want}, found {id}")));
        }
        entries.push((class, term));
    }
    Ok(Dictionary::from_entries(entries))
}

fn write_row(out: &mut impl Write, row: &CompressedRow) -> Result<()> {
    match row {
        CompressedRow::Positions(pos) => {
            out.write_u32::<LittleEndian>(0)?;
            out.write_u32::<LittleEndian>(pos.len() as u32)?;
            for &p in pos {
                out.write_u32::<LittleEndian>(p)?;
            }
        }
        CompressedRow::Runs { first, runs } => {
            out.write_u32::<LittleEndian>(1)?;
            out.write_u32::<LittleEndian>(runs.len() as u32 + 1)?;
            out.write_u32::<LittleEndian>(*first as u32)?;
            for &r in runs {
                out.write_u32::<LittleEndian>(r)?;
            }
        }
    }
    Ok(())
}

fn read_row(input: &mut impl Read, width: u32) -> Result<CompressedRow> {
    let tag = input.read_u32::<LittleEndian>()?;
    let len = input.read_u32::<LittleEndian>()? as usize;
    if len > width as usize + 1 {
        return Err(Error::Format(format!("row payload of {len} exceeds width {width}")));
    }
    let mut payload = vec![0u32; len];
    input.read_u32_into::<LittleEndian>(&mut payload)?;
    let row = match tag {
        0 => {
            if payload.windows(2).any(|w| w[0] >= w[1]) || payload.iter().any(|&p| p == 0 || p > width) {
                return Err(Error::Format("set positions out of order or range".into()));
            }
            CompressedRow::Positions(payload)
        }
        1 => {
            let (&first, runs) = payload
                .split_first()
                .ok_or_else(|| Error::Format("empty run-length payload".into()))?;
            if runs.iter().map(|&r| r as u64).sum::<u64>() != width as u64 {
                return Err(Error::Format("run lengths do not sum to row width".into()));
            }
            CompressedRow::Runs { first: first != 0, runs: runs.to_vec() }
        }
        t => return Err(Error::Format(format!("unknown row tag {t}"))),
    };
    Ok(row)
}

fn mask_row(mask: &BitArray) -> CompressedRow {
    CompressedRow::from_positions(mask.iter_ones().collect(), mask.width())
}

pub fn write_bitmat(path: &Path, bm: &BitMat) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for v in [bm.kind.code(), bm.slice, bm.nrows(), bm.ncols(), bm.triple_count() as u32] {
        out.write_u32::<LittleEndian>(v)?;
    }
    for row in bm.rows() {
        write_row(&mut out, row)?;
    }
    write_row(&mut out, &mask_row(bm.non_empty_rows()))?;
    write_row(&mut out, &mask_row(bm.non_empty_cols()))?;
    out.flush()?;
    Ok(())
}

pub fn read_bitmat(path: &Path) -> Result<BitMat> {
    let mut input = BufReader::new(File::open(path)?);
    let mut header = [0u32; 5];
    input.read_u32_into::<LittleEndian>(&mut header)?;
    let [kind, slice, nrows, ncols, count] = header;
    let kind = BitMatKind::from_code(kind).ok_or_else(|| Error::Format(format!("unknown BitMat kind {kind}")))?;
    let dims = kind
        .dims()
        .ok_or_else(|| Error::Format("derived BitMats are not persisted".into()))?;
    let rows = (0..nrows)
        .map(|_| read_row(&mut input, ncols))
        .collect::<Result<Vec<_>>>()?;
    let row_mask = read_row(&mut input, nrows)?;
    let col_mask = read_row(&mut input, ncols)?;
    let bm = BitMat::from_rows(kind, slice, dims, ncols, rows);
    let stored_rows = BitArray::from_positions(nrows, row_mask.positions());
    let stored_cols = BitArray::from_positions(ncols, col_mask.positions());
    if bm.triple_count() != count as u64 || &stored_rows != bm.non_empty_rows() || &stored_cols != bm.non_empty_cols() {
        return Err(Error::Format(format!("{}: metadata does not match rows", path.display())));
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::Format(format!("{}: trailing bytes", path.display())));
    }
    Ok(bm)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}
