//! A1-style cell coordinates and rectangular ranges.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest addressable row.
pub const MAX_ROW: u32 = 1_048_576;
/// Largest addressable column (`xfd`).
pub const MAX_COL: u32 = 16_384;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid cell address `{0}`")]
pub struct AddrError(pub String);

/// A cell coordinate, 1-based. Ordered row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellAddr {
    pub col: u32,
    pub row: u32,
}

impl CellAddr {
    pub fn new(col: u32, row: u32) -> Self {
        debug_assert!(col >= 1 && row >= 1);
        CellAddr { col, row }
    }

    pub fn is_valid(&self) -> bool {
        (1..=MAX_COL).contains(&self.col) && (1..=MAX_ROW).contains(&self.row)
    }
}

impl Ord for CellAddr {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.row, self.col).cmp(&(other.row, other.col))
    }
}

impl PartialOrd for CellAddr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Column number to lowercase letters: 1 -> `a`, 27 -> `aa`.
pub fn col_to_letters(mut col: u32) -> String {
    let mut out = Vec::new();
    while col > 0 {
        let rem = (col - 1) % 26;
        out.push(b'a' + rem as u8);
        col = (col - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Letters (either case) to a column number. `None` when out of range.
pub fn letters_to_col(letters: &str) -> Option<u32> {
    if letters.is_empty() || letters.len() > 3 {
        return None;
    }
    let mut col: u32 = 0;
    for b in letters.bytes() {
        if !b.is_ascii_alphabetic() {
            return None;
        }
        col = col * 26 + u32::from(b.to_ascii_lowercase() - b'a' + 1);
    }
    (col <= MAX_COL).then_some(col)
}

/// Splits `$a$1`-style text into (col, col_abs, row, row_abs). Returns
/// `None` when the text is not exactly one cell reference.
pub(crate) fn split_a1(text: &str) -> Option<(u32, bool, u32, bool)> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let col_abs = bytes.first() == Some(&b'$');
    if col_abs {
        i += 1;
    }
    let col_start = i;
    while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
        i += 1;
    }
    let col = letters_to_col(&text[col_start..i])?;
    let row_abs = bytes.get(i) == Some(&b'$');
    if row_abs {
        i += 1;
    }
    let row_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i != bytes.len() || row_start == i || bytes[row_start] == b'0' {
        return None;
    }
    let row: u32 = text[row_start..i].parse().ok()?;
    if row > MAX_ROW {
        return None;
    }
    Some((col, col_abs, row, row_abs))
}

impl FromStr for CellAddr {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match split_a1(s) {
            Some((col, false, row, false)) => Ok(CellAddr { col, row }),
            _ => Err(AddrError(s.to_string())),
        }
    }
}

impl fmt::Display for CellAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", col_to_letters(self.col), self.row)
    }
}

impl Serialize for CellAddr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CellAddr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive rectangle of cells; `start` is always the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Range {
    pub start: CellAddr,
    pub end: CellAddr,
}

impl Range {
    pub fn new(a: CellAddr, b: CellAddr) -> Self {
        Range {
            start: CellAddr::new(a.col.min(b.col), a.row.min(b.row)),
            end: CellAddr::new(a.col.max(b.col), a.row.max(b.row)),
        }
    }

    pub fn single(addr: CellAddr) -> Self {
        Range { start: addr, end: addr }
    }

    pub fn rows(&self) -> u32 {
        self.end.row - self.start.row + 1
    }

    pub fn cols(&self) -> u32 {
        self.end.col - self.start.col + 1
    }

    pub fn area(&self) -> u64 {
        u64::from(self.rows()) * u64::from(self.cols())
    }

    pub fn contains(&self, addr: CellAddr) -> bool {
        (self.start.col..=self.end.col).contains(&addr.col)
            && (self.start.row..=self.end.row).contains(&addr.row)
    }

    /// Cells in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = CellAddr> + '_ {
        (self.start.row..=self.end.row).flat_map(move |row| {
            (self.start.col..=self.end.col).map(move |col| CellAddr { col, row })
        })
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}", self.start, self.end)
        }
    }
}

impl FromStr for Range {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some((a, b)) => Ok(Range::new(a.parse()?, b.parse()?)),
            None => Ok(Range::single(s.parse()?)),
        }
    }
}
