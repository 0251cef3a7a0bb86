//! History queries over the journal: per-cell value history and per-user
//! trails. The journal is the only source; [`AuditIndex`] just remembers
//! where to look.

use std::collections::HashMap;

use chrono::{DateTime, Utc};
use serde::Serialize;

use crate::addr::CellAddr;
use crate::path::Path;
use crate::recalc::parse_ts;
use crate::store::{Action, CellData, Event, Payload, StructuralOp};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub seq: u64,
    pub ts: String,
    pub user: String,
    pub action: String,
    pub path: Path,
    pub summary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellAddr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<CellData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub new: Option<CellData>,
    /// The cell's value once the event committed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
}

/// One line describing an event.
pub fn summarize(e: &Event) -> String {
    let n = e.payload.changes().len();
    let cells = |n: usize| if n == 1 { "1 cell".to_string() } else { format!("{n} cells") };
    match &e.payload {
        Payload::SetCells { .. } => format!("set {} on {}", cells(n), e.path),
        Payload::CreatePage { pages, .. } => {
            let list: Vec<String> = pages.iter().map(|p| p.path.to_string()).collect();
            format!("created {}", list.join(", "))
        }
        Payload::DeletePage { .. } => format!("deleted {}", e.path),
        Payload::SaveTemplate { name } => format!("saved {} as template {name}", e.path),
        Payload::WikiSubmit { transaction, .. } => {
            format!("submitted {} on {} (transaction `{transaction}`)", cells(n), e.path)
        }
        Payload::StructuralEdit(s) => match s.op {
            StructuralOp::Instantiate => {
                let to = s.redirect.as_ref().map_or(String::new(), |r| format!(" -> {r}"));
                format!("activated {}{}{to} ({} new pages)", e.path, s.cell.map_or(String::new(), |c| c.to_string()), s.pages.len())
            }
            op => format!(
                "{} {} at {} on {}",
                serde_json::to_value(op).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
                s.count.unwrap_or(0),
                s.at.unwrap_or(0),
                e.path
            ),
        },
        Payload::Grant(g) => format!("granted {} on {} to {}", g.view, e.path, g.group),
        Payload::Revoke(g) => format!("revoked {} on {} from {}", g.view, e.path, g.group),
        Payload::UserAdmin(op) => {
            let v = serde_json::to_value(op).unwrap_or_default();
            format!("user admin: {}", v["op"].as_str().unwrap_or(""))
        }
    }
}

fn event_entry(e: &Event) -> HistoryEntry {
    HistoryEntry {
        seq: e.seq,
        ts: e.ts.clone(),
        user: e.user.clone(),
        action: e.action().to_string(),
        path: e.path.clone(),
        summary: summarize(e),
        cell: None,
        prior: None,
        new: None,
        value: None,
    }
}

/// Index from cells and users to journal positions.
#[derive(Debug, Clone, Default)]
pub struct AuditIndex {
    indexed: usize,
    cells: HashMap<(Path, CellAddr), Vec<(usize, usize)>>,
    users: HashMap<String, Vec<usize>>,
}

impl AuditIndex {
    pub fn build(events: &[Event]) -> AuditIndex {
        let mut ix = AuditIndex::default();
        ix.sync(events);
        ix
    }

    /// Indexes events appended since the last call.
    pub fn sync(&mut self, events: &[Event]) {
        for (i, e) in events.iter().enumerate().skip(self.indexed) {
            for (j, c) in e.payload.changes().iter().enumerate() {
                self.cells.entry((c.path.clone(), c.cell)).or_default().push((i, j));
            }
            self.users.entry(e.user.clone()).or_default().push(i);
        }
        self.indexed = events.len();
    }

    /// Every change to `addr` on `path`, oldest first.
    pub fn cell_history(&self, events: &[Event], path: &Path, addr: CellAddr) -> Vec<HistoryEntry> {
        let Some(hits) = self.cells.get(&(path.clone(), addr)) else { return Vec::new() };
        hits.iter()
            .map(|&(i, j)| {
                let e = &events[i];
                let c = &e.payload.changes()[j];
                HistoryEntry {
                    cell: Some(addr),
                    prior: Some(c.prior.clone()),
                    new: Some(c.new.clone()),
                    value: Some(c.value.clone()),
                    ..event_entry(e)
                }
            })
            .collect()
    }

    /// Events attributed to `user` with `from <= ts <= to`, in seq order.
    pub fn user_trail(
        &self,
        events: &[Event],
        user: &str,
        from: Option<DateTime<Utc>>,
        to: Option<DateTime<Utc>>,
    ) -> Vec<HistoryEntry> {
        let Some(hits) = self.users.get(user) else { return Vec::new() };
        hits.iter().map(|&i| &events[i]).filter(|e| in_window(e, from, to)).map(event_entry).collect()
    }
}

/// Entries touching any cell of `path`, plus other events addressed to it.
pub fn page_log(events: &[Event], path: &Path) -> Vec<HistoryEntry> {
    let mut out = Vec::new();
    for e in events {
        let mut any = false;
        for c in e.payload.changes().iter().filter(|c| &c.path == path) {
            any = true;
            out.push(HistoryEntry {
                cell: Some(c.cell),
                prior: Some(c.prior.clone()),
                new: Some(c.new.clone()),
                value: Some(c.value.clone()),
                ..event_entry(e)
            });
        }
        if !any && &e.path == path && e.action() != Action::UserAdmin {
            out.push(event_entry(e));
        }
    }
    out
}

fn in_window(e: &Event, from: Option<DateTime<Utc>>, to: Option<DateTime<Utc>>) -> bool {
    let Some(ts) = parse_ts(&e.ts) else { return false };
    from.is_none_or(|f| ts >= f) && to.is_none_or(|t| ts <= t)
}
