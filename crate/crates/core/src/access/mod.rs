//! View-level permissions and the edits each view allows.
//!
//! A grant names a view, a page and a group. Pages without a record for a
//! view inherit the nearest ancestor's. Holding a view implies every lower
//! one in the order spreadsheet > table > wikipage > webpage; log stands
//! alone.

pub mod auth;
mod view;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::addr::{CellAddr, Range};
use crate::audit::{AuditIndex, HistoryEntry};
use crate::engine::EvalContext;
use crate::formula::parse;
use crate::path::Path;
use crate::recalc::{CellWrite, Command, CommitError, Outcome, Workbook};
use crate::stdlib::{ControlKind, RenderDirective};
use crate::store::{CellAttrs, CellData, CreatedPage, Page, Site, Source, StoreError, StructuralOp, ViewKind, WikiInput};
use crate::value::{parse_literal_input, Value};

pub use view::{render_view, Capability, InputControl, TableDoc, TableRow, ViewCell, ViewDocument};

#[derive(Debug, Error)]
pub enum AccessError {
    #[error("`{user}` may not use the {view} view of {path}")]
    Denied { user: String, path: Path, view: ViewKind },
    #[error("`{user}` is not an administrator")]
    AdminOnly { user: String },
    #[error("page not found: {0}")]
    NotFound(Path),
    #[error("{reason}: {}", list(.cells))]
    Rejected { reason: String, cells: Vec<CellAddr> },
    #[error("out of bounds: {0}")]
    Bounds(String),
    #[error(transparent)]
    Commit(CommitError),
}

fn list(cells: &[CellAddr]) -> String {
    cells.iter().map(CellAddr::to_string).collect::<Vec<_>>().join(", ")
}

impl From<CommitError> for AccessError {
    fn from(e: CommitError) -> Self {
        match e {
            CommitError::Store(StoreError::PageNotFound(p)) => AccessError::NotFound(p),
            e => AccessError::Commit(e),
        }
    }
}

fn rejected(reason: impl Into<String>, cells: Vec<CellAddr>) -> AccessError {
    AccessError::Rejected { reason: reason.into(), cells }
}

/// Position in the capability order; `None` for log.
fn rank(v: ViewKind) -> Option<u8> {
    match v {
        ViewKind::Spreadsheet => Some(0),
        ViewKind::Table => Some(1),
        ViewKind::Wikipage => Some(2),
        ViewKind::Webpage => Some(3),
        ViewKind::Log => None,
    }
}

/// Views whose grant allows `v`.
pub fn implying(v: ViewKind) -> Vec<ViewKind> {
    match rank(v) {
        None => vec![ViewKind::Log],
        Some(r) => ViewKind::ALL.into_iter().filter(|w| rank(*w).is_some_and(|q| q <= r)).collect(),
    }
}

/// Groups granted `view` at `path` itself or at the nearest ancestor page
/// holding a record for it.
pub fn effective_groups<'a>(site: &'a Site, path: &Path, view: ViewKind) -> Option<(Path, &'a BTreeSet<String>)> {
    path.self_and_ancestors()
        .find_map(|p| site.pages.get(&p).and_then(|page| page.perms.get(&view)).map(|g| (p, g)))
}

pub fn check(site: &Site, user: &str, path: &Path, view: ViewKind) -> bool {
    if !site.users.contains_key(user) {
        return false;
    }
    if site.is_admin(user) {
        return true;
    }
    implying(view).into_iter().any(|w| {
        effective_groups(site, path, w).is_some_and(|(_, groups)| groups.iter().any(|g| site.is_member(user, g)))
    })
}

/// Every view `user` may open at `path`, in the capability order.
pub fn permitted_views(site: &Site, user: &str, path: &Path) -> Vec<ViewKind> {
    ViewKind::ALL.into_iter().filter(|v| check(site, user, path, *v)).collect()
}

/// Spreadsheet when held; then the page's preferred view when held; then
/// the highest permitted one.
pub fn default_view(site: &Site, user: &str, path: &Path) -> Option<ViewKind> {
    let views = permitted_views(site, user, path);
    if views.contains(&ViewKind::Spreadsheet) {
        return Some(ViewKind::Spreadsheet);
    }
    let preferred = site.pages.get(path).and_then(|p| p.views.default);
    preferred.filter(|v| views.contains(v)).or_else(|| views.first().copied())
}

/// Permission first, then existence.
pub fn require(site: &Site, user: &str, path: &Path, view: ViewKind) -> Result<(), AccessError> {
    if !check(site, user, path, view) {
        return Err(AccessError::Denied { user: user.to_string(), path: path.clone(), view });
    }
    site.page(path).map_err(|_| AccessError::NotFound(path.clone()))?;
    Ok(())
}

pub fn require_admin(site: &Site, user: &str) -> Result<(), AccessError> {
    if site.users.contains_key(user) && site.is_admin(user) {
        Ok(())
    } else {
        Err(AccessError::AdminOnly { user: user.to_string() })
    }
}

/// Spreadsheet-view cell writes. Writes may carry wiki attributes.
pub fn commit_cells(wb: &mut Workbook, user: &str, path: &Path, writes: Vec<CellWrite>) -> Result<Outcome, AccessError> {
    require(wb.site(), user, path, ViewKind::Spreadsheet)?;
    for w in &writes {
        if w.path != *path {
            require(wb.site(), user, &w.path, ViewKind::Spreadsheet)?;
        }
    }
    Ok(wb.commit(user, Command::SetCells { path: path.clone(), writes })?)
}

/// Row or column insertion and deletion (spreadsheet view only).
pub fn structural(
    wb: &mut Workbook,
    user: &str,
    path: &Path,
    op: StructuralOp,
    at: u32,
    count: u32,
) -> Result<Outcome, AccessError> {
    require(wb.site(), user, path, ViewKind::Spreadsheet)?;
    if op == StructuralOp::Instantiate {
        return Err(AccessError::Bounds("instantiate is not a row or column edit".into()));
    }
    Ok(wb.commit(user, Command::Structural { path: path.clone(), op, at, count })?)
}

pub fn save_template(wb: &mut Workbook, user: &str, path: &Path, name: &str) -> Result<Outcome, AccessError> {
    require(wb.site(), user, path, ViewKind::Spreadsheet)?;
    Ok(wb.commit(user, Command::SaveTemplate { path: path.clone(), name: name.to_string() })?)
}

/// Creates `path` (and missing ancestors) for a user holding the
/// spreadsheet view there, usually by inheritance.
pub fn create_page(wb: &mut Workbook, user: &str, path: &Path, template: Option<&str>) -> Result<Outcome, AccessError> {
    if !check(wb.site(), user, path, ViewKind::Spreadsheet) {
        return Err(AccessError::Denied { user: user.to_string(), path: path.clone(), view: ViewKind::Spreadsheet });
    }
    let mut pages: Vec<_> = (1..path.depth())
        .map(|d| path.truncate(d))
        .filter(|p| !wb.site().pages.contains_key(p))
        .map(|p| CreatedPage { path: p, template: None })
        .collect();
    pages.push(CreatedPage { path: path.clone(), template: template.map(str::to_string) });
    Ok(wb.commit(user, Command::CreatePages { path: path.clone(), pages })?)
}

pub fn delete_page(wb: &mut Workbook, user: &str, path: &Path) -> Result<Outcome, AccessError> {
    require(wb.site(), user, path, ViewKind::Spreadsheet)?;
    Ok(wb.commit(user, Command::DeletePage { path: path.clone() })?)
}

/// Grants, revocations and user administration.
pub fn admin(wb: &mut Workbook, user: &str, cmd: Command) -> Result<Outcome, AccessError> {
    require_admin(wb.site(), user)?;
    if !matches!(cmd, Command::Grant { .. } | Command::Revoke { .. } | Command::UserAdmin(_)) {
        return Err(AccessError::Bounds("not an administrative command".into()));
    }
    Ok(wb.commit(user, cmd)?)
}

/// Wiki attributes described by a `form.*` formula evaluated on `path`,
/// e.g. `=form.select("yes,no","t1")`. Empty text clears them.
pub fn wiki_attrs_from_form(site: &Site, path: &Path, cell: CellAddr, text: &str) -> Result<CellAttrs, AccessError> {
    if text.trim().is_empty() {
        return Ok(CellAttrs::default());
    }
    let bad = || rejected(format!("`{text}` is not a form control"), vec![cell]);
    let ast = parse(text).map_err(|_| bad())?;
    let mut reader = site;
    let v = EvalContext::new(&mut reader, path.clone(), cell, 0.0, 0).evaluate(&ast);
    let Value::Render(d) = v else { return Err(bad()) };
    let RenderDirective::FormControl { control, options, transaction } = *d else { return Err(bad()) };
    let wiki = match control {
        ControlKind::Text => WikiInput::Text,
        ControlKind::Select => WikiInput::Select(options),
        ControlKind::Radio => WikiInput::Radio(options),
    };
    Ok(CellAttrs { wiki, transaction: (!transaction.is_empty()).then_some(transaction) })
}

/// Replaces only the source. `raw` is read as a literal, so a leading `=`
/// is just text.
fn literal_write(page: &Page, addr: CellAddr, raw: &str) -> CellWrite {
    let old = page.data(addr);
    CellWrite {
        path: page.path.clone(),
        addr,
        data: CellData { source: Source::literal(parse_literal_input(raw)), ..old },
    }
}

/// Commits a wikipage form. Every input must target a non-formula cell
/// marked as a wiki input in `transaction`; select and radio values must be
/// among the options. Nothing is written unless everything passes.
pub fn wiki_submit(
    wb: &mut Workbook,
    user: &str,
    path: &Path,
    transaction: &str,
    inputs: &BTreeMap<CellAddr, String>,
) -> Result<Outcome, AccessError> {
    require(wb.site(), user, path, ViewKind::Wikipage)?;
    let page = wb.site().page(path).map_err(|_| AccessError::NotFound(path.clone()))?;
    let foreign: Vec<CellAddr> = inputs
        .keys()
        .filter(|a| {
            let d = page.data(**a);
            !a.is_valid()
                || d.attrs.wiki.is_none()
                || d.is_formula()
                || d.attrs.transaction.as_deref().unwrap_or("") != transaction
        })
        .copied()
        .collect();
    if !foreign.is_empty() {
        return Err(rejected(format!("not wiki inputs of transaction `{transaction}`"), foreign));
    }
    let invalid: Vec<CellAddr> = inputs
        .iter()
        .filter(|(a, raw)| !page.data(**a).attrs.wiki.accepts(&parse_literal_input(raw)))
        .map(|(a, _)| *a)
        .collect();
    if !invalid.is_empty() {
        return Err(rejected("value not among the options", invalid));
    }
    let writes = inputs.iter().map(|(a, raw)| literal_write(page, *a, raw)).collect();
    Ok(wb.commit(user, Command::WikiSubmit { path: path.clone(), transaction: transaction.to_string(), writes })?)
}

/// The table region: the first row of the used range is the header, data
/// rows follow until the first row with nothing stored in the header's
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header_row: u32,
    pub first_col: u32,
    pub last_col: u32,
    pub header: Vec<String>,
    /// Sheet row of each data row.
    pub rows: Vec<u32>,
}

impl Table {
    pub fn of(page: &Page) -> Option<Table> {
        let used = page.used_range()?;
        let (c0, c1) = (used.start.col, used.end.col);
        let header_row = used.start.row;
        let occupied =
            |r: u32| (c0..=c1).any(|c| page.cells.get(&CellAddr::new(c, r)).is_some_and(|x| x.data.source != Source::Blank));
        let rows = (header_row + 1..=used.end.row).take_while(|r| occupied(*r)).collect();
        let header = (c0..=c1).map(|c| page.value(CellAddr::new(c, header_row)).to_string()).collect();
        Some(Table { header_row, first_col: c0, last_col: c1, header, rows })
    }

    pub fn columns(&self) -> impl Iterator<Item = u32> {
        self.first_col..=self.last_col
    }

    /// Column named by header text (case-insensitive) or by letters.
    pub fn column(&self, key: &str) -> Option<u32> {
        let key = key.trim();
        self.header
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(key))
            .map(|i| self.first_col + i as u32)
            .or_else(|| crate::addr::letters_to_col(key).filter(|c| (self.first_col..=self.last_col).contains(c)))
    }

    /// Sheet row of 1-based data row `index`.
    pub fn row(&self, index: u32) -> Result<u32, AccessError> {
        match index.checked_sub(1).and_then(|i| self.rows.get(i as usize)) {
            Some(r) => Ok(*r),
            None => Err(AccessError::Bounds(format!("row {index} is outside data rows 1..={}", self.rows.len()))),
        }
    }

    pub fn range(&self) -> Range {
        let last = self.rows.last().copied().unwrap_or(self.header_row);
        Range::new(CellAddr::new(self.first_col, self.header_row), CellAddr::new(self.last_col, last))
    }
}

fn table_of(site: &Site, path: &Path) -> Result<Table, AccessError> {
    let page = site.page(path).map_err(|_| AccessError::NotFound(path.clone()))?;
    Table::of(page).ok_or_else(|| AccessError::Bounds(format!("{path} has no header row")))
}

fn row_writes(
    site: &Site,
    path: &Path,
    table: &Table,
    row: u32,
    values: &BTreeMap<String, String>,
) -> Result<Vec<CellWrite>, AccessError> {
    let page = site.page(path).map_err(|_| AccessError::NotFound(path.clone()))?;
    let mut writes = Vec::new();
    let mut formulas = Vec::new();
    for (key, raw) in values {
        let col = table.column(key).ok_or_else(|| rejected(format!("unknown column `{key}`"), Vec::new()))?;
        let addr = CellAddr::new(col, row);
        if page.data(addr).is_formula() {
            formulas.push(addr);
        }
        writes.push(literal_write(page, addr, raw));
    }
    if !formulas.is_empty() {
        return Err(rejected("formula cells cannot be edited from the table view", formulas));
    }
    Ok(writes)
}

/// Writes `values` (keyed by column header) into the first blank row after
/// the data rows.
pub fn table_append(
    wb: &mut Workbook,
    user: &str,
    path: &Path,
    values: &BTreeMap<String, String>,
) -> Result<Outcome, AccessError> {
    require(wb.site(), user, path, ViewKind::Table)?;
    let t = table_of(wb.site(), path)?;
    let row = t.rows.last().copied().unwrap_or(t.header_row) + 1;
    if !CellAddr::new(t.first_col, row).is_valid() {
        return Err(AccessError::Bounds(format!("row {row}")));
    }
    let writes = row_writes(wb.site(), path, &t, row, values)?;
    Ok(wb.commit(user, Command::SetCells { path: path.clone(), writes })?)
}

pub fn table_update(
    wb: &mut Workbook,
    user: &str,
    path: &Path,
    index: u32,
    values: &BTreeMap<String, String>,
) -> Result<Outcome, AccessError> {
    require(wb.site(), user, path, ViewKind::Table)?;
    let t = table_of(wb.site(), path)?;
    let row = t.row(index)?;
    let writes = row_writes(wb.site(), path, &t, row, values)?;
    Ok(wb.commit(user, Command::SetCells { path: path.clone(), writes })?)
}

/// Deletes the whole sheet row holding data row `index`.
pub fn table_delete(wb: &mut Workbook, user: &str, path: &Path, index: u32) -> Result<Outcome, AccessError> {
    require(wb.site(), user, path, ViewKind::Table)?;
    let row = table_of(wb.site(), path)?.row(index)?;
    Ok(wb.commit(user, Command::Structural { path: path.clone(), op: StructuralOp::DeleteRows, at: row, count: 1 })?)
}

/// Runs the `create.button` cached at `cell`; returns the page to go to.
pub fn activate_create_button(wb: &mut Workbook, user: &str, path: &Path, cell: CellAddr) -> Result<Path, AccessError> {
    require(wb.site(), user, path, ViewKind::Wikipage)?;
    let out = wb.commit(user, Command::Instantiate { path: path.clone(), cell })?;
    out.redirect.ok_or_else(|| AccessError::Bounds(format!("{path}{cell} produced no page")))
}

pub fn cell_history(
    wb: &Workbook,
    index: &AuditIndex,
    user: &str,
    path: &Path,
    cell: CellAddr,
) -> Result<Vec<HistoryEntry>, AccessError> {
    if !check(wb.site(), user, path, ViewKind::Log) {
        return Err(AccessError::Denied { user: user.to_string(), path: path.clone(), view: ViewKind::Log });
    }
    Ok(index.cell_history(wb.events(), path, cell))
}

pub fn user_trail(
    wb: &Workbook,
    index: &AuditIndex,
    requester: &str,
    user: &str,
    from: Option<DateTime<Utc>>,
    to: Option<DateTime<Utc>>,
) -> Result<Vec<HistoryEntry>, AccessError> {
    require_admin(wb.site(), requester)?;
    Ok(index.user_trail(wb.events(), user, from, to))
}

#[cfg(test)]
mod tests;
