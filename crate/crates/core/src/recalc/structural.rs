//! Row and column insertion and deletion: coordinate mapping and formula
//! rewriting.

use crate::addr::{CellAddr, MAX_COL, MAX_ROW};
use crate::formula::ast::{Expr, A1};
use crate::path::Path;
use crate::store::StructuralOp;
use crate::value::ErrorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Shift {
    pub rows: bool,
    pub delete: bool,
    pub at: u32,
    pub count: u32,
}

impl Shift {
    pub(crate) fn new(op: StructuralOp, at: u32, count: u32) -> Option<Shift> {
        let (rows, delete) = match op {
            StructuralOp::InsertRows => (true, false),
            StructuralOp::DeleteRows => (true, true),
            StructuralOp::InsertCols => (false, false),
            StructuralOp::DeleteCols => (false, true),
            StructuralOp::Instantiate => return None,
        };
        Some(Shift { rows, delete, at, count })
    }

    fn limit(&self) -> u32 {
        if self.rows {
            MAX_ROW
        } else {
            MAX_COL
        }
    }

    pub(crate) fn in_bounds(&self) -> bool {
        self.at >= 1 && self.at <= self.limit() && self.count <= self.limit()
    }

    /// New index of row/column `n`; `None` when deleted or pushed off the
    /// sheet.
    fn map(&self, n: u32) -> Option<u32> {
        if n < self.at {
            Some(n)
        } else if self.delete {
            (n >= self.at + self.count).then(|| n - self.count)
        } else {
            let m = n + self.count;
            (m <= self.limit()).then_some(m)
        }
    }

    /// New bounds of the span `lo..=hi`. Deletion shrinks a span and only
    /// removes it when every index goes.
    fn map_span(&self, lo: u32, hi: u32) -> Option<(u32, u32)> {
        if !self.delete {
            let hi = self.map(hi).unwrap_or(self.limit());
            return Some((self.map(lo)?, hi));
        }
        let end = self.at + self.count;
        if lo >= self.at && hi < end {
            return None;
        }
        let lo = if lo < self.at { lo } else if lo < end { self.at } else { lo - self.count };
        let hi = if hi < self.at { hi } else if hi < end { self.at - 1 } else { hi - self.count };
        Some((lo, hi))
    }

    pub(crate) fn map_addr(&self, a: CellAddr) -> Option<CellAddr> {
        if self.rows {
            Some(CellAddr::new(a.col, self.map(a.row)?))
        } else {
            Some(CellAddr::new(self.map(a.col)?, a.row))
        }
    }

    fn map_a1(&self, a: A1) -> Option<A1> {
        let m = self.map_addr(a.addr())?;
        Some(A1 { col: m.col, row: m.row, ..a })
    }

    fn map_range(&self, s: A1, e: A1) -> Option<(A1, A1)> {
        let (lo, hi) = if self.rows {
            let (lo, hi) = self.map_span(s.row, e.row)?;
            ((s.col, lo), (e.col, hi))
        } else {
            let (lo, hi) = self.map_span(s.col, e.col)?;
            ((lo, s.row), (hi, e.row))
        };
        Some((A1 { col: lo.0, row: lo.1, ..s }, A1 { col: hi.0, row: hi.1, ..e }))
    }
}

/// Rewrites references into `page` in a formula that lives on `base`.
/// Returns whether anything changed. Z-reference targets and predicates
/// are left alone: they address many pages at once.
pub(crate) fn rewrite(expr: &mut Expr, base: &Path, page: &Path, shift: &Shift) -> bool {
    match expr {
        Expr::Cell(c) if c.page.resolve(base).as_ref() == Some(page) => match shift.map_a1(c.cell) {
            Some(a) if a == c.cell => false,
            Some(a) => {
                c.cell = a;
                true
            }
            None => {
                *expr = Expr::Error(ErrorKind::Ref);
                true
            }
        },
        Expr::Range(r) if r.page.resolve(base).as_ref() == Some(page) => match shift.map_range(r.start, r.end) {
            Some((s, e)) if s == r.start && e == r.end => false,
            Some((s, e)) => {
                r.start = s;
                r.end = e;
                true
            }
            None => {
                *expr = Expr::Error(ErrorKind::Ref);
                true
            }
        },
        Expr::Call { args, .. } => args.iter_mut().fold(false, |acc, a| rewrite(a, base, page, shift) | acc),
        Expr::Binary { lhs, rhs, .. } => rewrite(lhs, base, page, shift) | rewrite(rhs, base, page, shift),
        Expr::Unary { expr, .. } | Expr::Percent(expr) => rewrite(expr, base, page, shift),
        _ => false,
    }
}
