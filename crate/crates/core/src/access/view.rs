//! What each view shows.

use serde::Serialize;

use super::{permitted_views, require, AccessError, Table};
use crate::addr::{CellAddr, Range};
use crate::audit::{page_log, HistoryEntry};
use crate::path::Path;
use crate::recalc::Workbook;
use crate::stdlib::ControlKind;
use crate::store::{Cell, ViewKind, WikiInput};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    ReadOnly,
    Editable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputControl {
    pub control: ControlKind,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub options: Vec<String>,
    pub transaction: String,
}

impl InputControl {
    fn of(cell: &Cell) -> Option<InputControl> {
        let (control, options) = match &cell.data.attrs.wiki {
            WikiInput::None => return None,
            WikiInput::Text => (ControlKind::Text, Vec::new()),
            WikiInput::Select(o) => (ControlKind::Select, o.clone()),
            WikiInput::Radio(o) => (ControlKind::Radio, o.clone()),
        };
        Some(InputControl { control, options, transaction: cell.data.attrs.transaction.clone().unwrap_or_default() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewCell {
    pub cell: CellAddr,
    pub value: Value,
    /// Typed source; spreadsheet view only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub capability: Capability,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputControl>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    /// 1-based data row index, as used by table edits.
    pub index: u32,
    /// Sheet row.
    pub row: u32,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableDoc {
    pub range: String,
    pub header: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewDocument {
    pub view: ViewKind,
    pub path: Path,
    /// Views the requesting user may open here.
    pub views: Vec<ViewKind>,
    /// Whether row and column edits are offered.
    pub structural: bool,
    /// Extent of the stored cells, for windowed fetches.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub used: Option<String>,
    pub cells: Vec<ViewCell>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<TableDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<HistoryEntry>,
}

impl ViewDocument {
    pub fn editable(&self) -> Vec<CellAddr> {
        self.cells.iter().filter(|c| c.capability == Capability::Editable).map(|c| c.cell).collect()
    }
}

/// Renders `path` as `view` for `user`, restricted to `window` when given.
pub fn render_view(
    wb: &Workbook,
    user: &str,
    path: &Path,
    view: ViewKind,
    window: Option<Range>,
) -> Result<ViewDocument, AccessError> {
    let site = wb.site();
    require(site, user, path, view)?;
    let page = site.page(path).map_err(|_| AccessError::NotFound(path.clone()))?;
    let mut doc = ViewDocument {
        view,
        path: path.clone(),
        views: permitted_views(site, user, path),
        structural: view == ViewKind::Spreadsheet,
        used: page.used_range().map(|r| r.to_string()),
        cells: Vec::new(),
        table: None,
        history: Vec::new(),
    };
    let cells = page.cells.iter().filter(|(a, _)| window.is_none_or(|w| w.contains(**a)));
    match view {
        ViewKind::Spreadsheet => {
            doc.cells = cells
                .map(|(a, c)| ViewCell {
                    cell: *a,
                    value: c.value.clone(),
                    source: Some(c.data.input_text()),
                    capability: Capability::Editable,
                    input: InputControl::of(c),
                    format: c.data.format.clone(),
                })
                .collect();
        }
        ViewKind::Wikipage | ViewKind::Webpage => {
            let wiki = view == ViewKind::Wikipage;
            doc.cells = cells
                .map(|(a, c)| {
                    let input = InputControl::of(c).filter(|_| wiki && !c.data.is_formula());
                    ViewCell {
                        cell: *a,
                        value: c.value.clone(),
                        source: None,
                        capability: if input.is_some() { Capability::Editable } else { Capability::ReadOnly },
                        input,
                        format: c.data.format.clone(),
                    }
                })
                .collect();
        }
        ViewKind::Table => {
            doc.table = Table::of(page).map(|t| TableDoc {
                range: t.range().to_string(),
                header: t.header.clone(),
                rows: t
                    .rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| TableRow {
                        index: i as u32 + 1,
                        row: *r,
                        values: t.columns().map(|c| page.value(CellAddr::new(c, *r))).collect(),
                    })
                    .collect(),
            });
        }
        ViewKind::Log => doc.history = page_log(wb.events(), path),
    }
    Ok(doc)
}
