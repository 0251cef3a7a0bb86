//! The commit pipeline.
//!
//! Every mutation is a [`Command`] passed to [`Workbook::commit`], which
//! applies it, updates the dependency graph, evaluates the dirty closure
//! and records exactly one journal [`Event`]. Replaying a journal runs the
//! same commands again at the journaled timestamps and checks that each
//! reproduces its event byte for byte.

mod graph;
mod pass;
mod structural;

use std::collections::BTreeMap;
use std::io;
use std::path::Path as FsPath;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use thiserror::Error;

pub use graph::{CellKey, DepGraph};
pub use pass::full_recompute;

use crate::addr::CellAddr;
use crate::formula::{parse, print, ParseError};
use crate::path::{valid_segment, Path};
use crate::stdlib::{datetime_serial, RenderDirective};
use crate::store::{
    expand_path_spec, read_journal, CellChange, CellData, CreatedPage, Event, GrantChange, JournalError,
    JournalWriter, Payload, PathSpec, Site, Snapshot, Source, SpecError, StoreError, StructuralOp,
    StructuralPayload, UserOp, User, ADMIN_GROUP, BLANK_TEMPLATE,
};
use crate::value::Value;
use structural::{rewrite, Shift};

#[derive(Debug, Clone, PartialEq)]
pub struct CellWrite {
    pub path: Path,
    pub addr: CellAddr,
    pub data: CellData,
}

impl CellWrite {
    /// A write of typed input (`=` starts a formula).
    pub fn input(path: &Path, addr: CellAddr, raw: &str) -> Result<CellWrite, CommitError> {
        let data = CellData::from_input(raw)
            .map_err(|error| CommitError::Parse { path: path.clone(), addr, error })?;
        Ok(CellWrite { path: path.clone(), addr, data })
    }
}

/// A mutation request. `path` is the page the action is attributed to.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    SetCells { path: Path, writes: Vec<CellWrite> },
    /// Existing pages requested without a template (or with `blank`) are
    /// skipped.
    CreatePages { path: Path, pages: Vec<CreatedPage> },
    DeletePage { path: Path },
    SaveTemplate { path: Path, name: String },
    /// Pre-validated by the access layer.
    WikiSubmit { path: Path, transaction: String, writes: Vec<CellWrite> },
    Structural { path: Path, op: StructuralOp, at: u32, count: u32 },
    /// Activates the `create.button` cached at `cell`.
    Instantiate { path: Path, cell: CellAddr },
    Grant { path: Path, change: GrantChange },
    Revoke { path: Path, change: GrantChange },
    UserAdmin(UserOp),
}

impl Command {
    /// Typed inputs for one page.
    pub fn set(path: &Path, inputs: &[(&str, &str)]) -> Result<Command, CommitError> {
        let writes = inputs
            .iter()
            .map(|(a, raw)| {
                let addr = a.parse().map_err(|_| CommitError::Invalid(format!("bad cell address `{a}`")))?;
                CellWrite::input(path, addr, raw)
            })
            .collect::<Result<_, _>>()?;
        Ok(Command::SetCells { path: path.clone(), writes })
    }

    pub fn create(path: &Path, template: Option<&str>) -> Command {
        Command::CreatePages {
            path: path.clone(),
            pages: vec![CreatedPage { path: path.clone(), template: template.map(str::to_string) }],
        }
    }

    /// The command that produced `e`.
    pub fn from_event(e: &Event) -> Result<Command, CommitError> {
        let path = e.path.clone();
        let writes = |changes: &[CellChange]| {
            changes.iter().map(|c| CellWrite { path: c.path.clone(), addr: c.cell, data: c.new.clone() }).collect()
        };
        Ok(match &e.payload {
            Payload::SetCells { changes } => Command::SetCells { path, writes: writes(changes) },
            Payload::CreatePage { pages, .. } => Command::CreatePages { path, pages: pages.clone() },
            Payload::DeletePage { .. } => Command::DeletePage { path },
            Payload::SaveTemplate { name } => Command::SaveTemplate { path, name: name.clone() },
            Payload::WikiSubmit { transaction, changes } => {
                Command::WikiSubmit { path, transaction: transaction.clone(), writes: writes(changes) }
            }
            Payload::StructuralEdit(s) => match s.op {
                StructuralOp::Instantiate => Command::Instantiate {
                    path,
                    cell: s.cell.ok_or_else(|| CommitError::Invalid("instantiate without a cell".into()))?,
                },
                op => Command::Structural {
                    path,
                    op,
                    at: s.at.ok_or_else(|| CommitError::Invalid("structural edit without `at`".into()))?,
                    count: s.count.unwrap_or(1),
                },
            },
            Payload::Grant(g) => Command::Grant { path, change: g.clone() },
            Payload::Revoke(g) => Command::Revoke { path, change: g.clone() },
            Payload::UserAdmin(op) => Command::UserAdmin(op.clone()),
        })
    }
}

#[derive(Debug, Error)]
pub enum CommitError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}{addr}: {error}")]
    Parse { path: Path, addr: CellAddr, error: ParseError },
    #[error("out of bounds: {0}")]
    Bounds(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Invalid(String),
    #[error("journal write failed: {0}")]
    Io(#[from] io::Error),
    #[error("workbook is read-only after a failed journal write")]
    Poisoned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangedCell {
    pub path: Path,
    pub cell: CellAddr,
    pub value: Value,
}

/// What a commit did.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Outcome {
    /// `None` when the command was a no-op and nothing was journaled.
    pub seq: Option<u64>,
    /// Written cells and recomputed cells whose value changed.
    pub changed: Vec<ChangedCell>,
    /// The subset of `changed` holding errors.
    pub errors: Vec<ChangedCell>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub redirect: Option<Path>,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("snapshot: {0}")]
    Io(#[from] io::Error),
    #[error("snapshot at seq {snapshot} is ahead of the journal (last seq {journal})")]
    SnapshotAhead { snapshot: u64, journal: u64 },
    #[error("event {seq}: expected seq {expected}")]
    OutOfOrder { seq: u64, expected: u64 },
    #[error("event {seq}: bad timestamp `{ts}`")]
    Timestamp { seq: u64, ts: String },
    #[error("event {seq}: {error}")]
    Rejected { seq: u64, error: CommitError },
    #[error("event {seq}: replay produced a different event")]
    Mismatch { seq: u64, expected: Box<Event>, found: Option<Box<Event>> },
}

impl ReplayError {
    pub fn seq(&self) -> Option<u64> {
        match self {
            ReplayError::Journal(e) => e.position(),
            ReplayError::OutOfOrder { seq, .. }
            | ReplayError::Timestamp { seq, .. }
            | ReplayError::Rejected { seq, .. }
            | ReplayError::Mismatch { seq, .. } => Some(*seq),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    System,
    Fixed(DateTime<Utc>),
}

impl Clock {
    /// Current time at journal (millisecond) precision.
    pub fn now(&self) -> DateTime<Utc> {
        let t = match self {
            Clock::System => Utc::now(),
            Clock::Fixed(t) => *t,
        };
        parse_ts(&format_ts(t)).expect("formatted timestamps parse")
    }
}

pub fn format_ts(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn parse_ts(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s).ok().map(|t| t.with_timezone(&Utc))
}

/// Serial date-time used as `now` for the pass of an event at `ts`.
pub fn serial_now(ts: DateTime<Utc>) -> f64 {
    datetime_serial(ts.naive_utc())
}

#[derive(Default)]
struct Txn {
    written: Vec<CellKey>,
    pages: Vec<Path>,
    changes: Vec<CellChange>,
}

/// A site plus its dependency graph, journal and event history.
pub struct Workbook {
    site: Site,
    graph: DepGraph,
    clock: Clock,
    journal: Option<JournalWriter>,
    events: Vec<Event>,
    poisoned: bool,
}

impl Default for Workbook {
    fn default() -> Self {
        Workbook::new()
    }
}

impl Workbook {
    pub fn new() -> Workbook {
        Workbook::from_site(Site::new())
    }

    /// Wraps a site whose cached values are trusted as they are.
    pub fn from_site(site: Site) -> Workbook {
        let graph = DepGraph::build(&site);
        Workbook { site, graph, clock: Clock::System, journal: None, events: Vec::new(), poisoned: false }
    }

    /// Loads `dir`: the snapshot if present, then the journal suffix.
    /// Later commits append to the journal.
    pub fn open(dir: &FsPath) -> Result<Workbook, ReplayError> {
        let events = read_journal(dir)?;
        let last = events.last().map_or(0, |e| e.seq);
        let mut wb = match Snapshot::read(dir)? {
            Some(s) if s.seq > last => return Err(ReplayError::SnapshotAhead { snapshot: s.seq, journal: last }),
            Some(s) => Workbook::from_site(s.into_site()),
            None => Workbook::new(),
        };
        let start = wb.site.seq as usize;
        for e in &events[start..] {
            wb.apply_event(e)?;
        }
        wb.events = events;
        wb.journal = Some(JournalWriter::open(dir)?);
        Ok(wb)
    }

    /// Replays `events` from an empty site.
    pub fn replay(events: &[Event]) -> Result<Workbook, ReplayError> {
        let mut wb = Workbook::new();
        for e in events {
            wb.apply_event(e)?;
        }
        Ok(wb)
    }

    pub fn site(&self) -> &Site {
        &self.site
    }

    pub fn graph(&self) -> &DepGraph {
        &self.graph
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn clock(&self) -> Clock {
        self.clock
    }

    pub fn set_clock(&mut self, clock: Clock) {
        self.clock = clock;
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::from_site(&self.site)
    }

    /// Writes `snapshot.json` into `dir`.
    pub fn checkpoint(&self, dir: &FsPath) -> io::Result<()> {
        self.snapshot().write_atomic(dir)
    }

    /// `now` and seed of the most recent pass.
    pub fn pass_params(&self) -> (f64, u64) {
        let now = self.site.ts.as_deref().and_then(parse_ts).map_or(0.0, serial_now);
        (now, self.site.seq)
    }

    /// Cells whose cached value differs from a from-scratch evaluation.
    pub fn inconsistencies(&self) -> Vec<(CellKey, Value, Value)> {
        let (now, seed) = self.pass_params();
        full_recompute(&self.site, now, seed)
            .into_iter()
            .filter_map(|(k, v)| {
                let cached = self.site.pages[&k.0].value(k.1);
                (!cached.identical(&v)).then_some((k, cached, v))
            })
            .collect()
    }

    pub fn commit(&mut self, user: &str, cmd: Command) -> Result<Outcome, CommitError> {
        if self.poisoned {
            return Err(CommitError::Poisoned);
        }
        let ts = self.clock.now();
        let (outcome, event) = self.run(user, cmd, ts)?;
        if let Some(e) = event {
            if let Some(j) = self.journal.as_mut() {
                if let Err(err) = j.append(&e) {
                    self.poisoned = true;
                    return Err(err.into());
                }
            }
            self.events.push(e);
        }
        Ok(outcome)
    }

    /// Re-runs the command behind `e` and checks it reproduces `e`.
    pub fn apply_event(&mut self, e: &Event) -> Result<(), ReplayError> {
        let expected = self.site.seq + 1;
        if e.seq != expected {
            return Err(ReplayError::OutOfOrder { seq: e.seq, expected });
        }
        let ts = parse_ts(&e.ts).ok_or_else(|| ReplayError::Timestamp { seq: e.seq, ts: e.ts.clone() })?;
        let rejected = |error| ReplayError::Rejected { seq: e.seq, error };
        let cmd = Command::from_event(e).map_err(rejected)?;
        let (_, found) = self.run(&e.user, cmd, ts).map_err(rejected)?;
        match found {
            Some(f) if f.to_line() == e.to_line() => {
                self.events.push(f);
                Ok(())
            }
            found => Err(ReplayError::Mismatch { seq: e.seq, expected: Box::new(e.clone()), found: found.map(Box::new) }),
        }
    }

    fn run(&mut self, user: &str, cmd: Command, ts: DateTime<Utc>) -> Result<(Outcome, Option<Event>), CommitError> {
        let mut txn = Txn::default();
        let mut redirect = None;
        let (path, payload) = match cmd {
            Command::SetCells { path, writes } => {
                let writes = self.check_writes(writes)?;
                if writes.is_empty() {
                    return Ok((Outcome::default(), None));
                }
                writes.into_iter().for_each(|w| self.write(&mut txn, w));
                // rewriting what is already stored is a no-op
                if txn.changes.is_empty() {
                    return Ok((Outcome::default(), None));
                }
                (path, Payload::SetCells { changes: Vec::new() })
            }
            Command::WikiSubmit { path, transaction, writes } => {
                let writes = self.check_writes(writes)?;
                writes.into_iter().for_each(|w| self.write(&mut txn, w));
                (path, Payload::WikiSubmit { transaction, changes: Vec::new() })
            }
            Command::CreatePages { path, pages } => {
                let pages = self.check_creates(pages)?;
                if pages.is_empty() {
                    return Ok((Outcome::default(), None));
                }
                for p in &pages {
                    self.create(&mut txn, &p.path, p.template.as_deref());
                }
                (path, Payload::CreatePage { pages, changes: Vec::new() })
            }
            Command::DeletePage { path } => {
                let page = self.site.pages.remove(&path).ok_or_else(|| StoreError::PageNotFound(path.clone()))?;
                for (addr, cell) in page.cells {
                    let key = (path.clone(), addr);
                    self.graph.remove(&key);
                    txn.changes.push(change(&path, addr, cell.data, CellData::default()));
                    txn.written.push(key);
                }
                txn.pages.push(path.clone());
                (path, Payload::DeletePage { changes: Vec::new() })
            }
            Command::SaveTemplate { path, name } => {
                if !valid_segment(&name) || name == BLANK_TEMPLATE {
                    return Err(CommitError::Invalid(format!("illegal template name `{name}`")));
                }
                self.site.save_template(&path, &name)?;
                (path, Payload::SaveTemplate { name })
            }
            Command::Structural { path, op, at, count } => {
                let shift = Shift::new(op, at, count)
                    .ok_or_else(|| CommitError::Invalid("instantiate is not a shift".into()))?;
                self.site.page(&path)?;
                if !shift.in_bounds() {
                    return Err(CommitError::Bounds(format!("{op:?} at {at} count {count}")));
                }
                if count == 0 {
                    return Ok((Outcome::default(), None));
                }
                self.shift(&mut txn, &path, &shift)?;
                let payload = StructuralPayload {
                    op,
                    at: Some(at),
                    count: Some(count),
                    spec: None,
                    cell: None,
                    pages: Vec::new(),
                    counters: BTreeMap::new(),
                    redirect: None,
                    changes: Vec::new(),
                };
                (path, Payload::StructuralEdit(payload))
            }
            Command::Instantiate { path, cell } => {
                let spec_text = match self.site.get_value(&path, cell)? {
                    Value::Render(d) => match *d {
                        RenderDirective::CreateButton { path_spec, .. } => path_spec,
                        _ => return Err(CommitError::Invalid(format!("{path}{cell} is not a create button"))),
                    },
                    _ => return Err(CommitError::Invalid(format!("{path}{cell} is not a create button"))),
                };
                let spec = PathSpec::parse(&spec_text)?;
                let site = &self.site;
                let x = expand_path_spec(&spec, &path, ts.naive_utc(), &site.counters, &|p| site.pages.contains_key(p))?;
                for (_, t) in &x.create {
                    self.site.template(t)?;
                }
                let pages: Vec<CreatedPage> =
                    x.create.iter().map(|(p, t)| CreatedPage { path: p.clone(), template: Some(t.clone()) }).collect();
                for p in &pages {
                    self.create(&mut txn, &p.path, p.template.as_deref());
                }
                self.site.counters.extend(x.counters.iter().map(|(k, v)| (k.clone(), *v)));
                redirect = Some(x.redirect.clone());
                let payload = StructuralPayload {
                    op: StructuralOp::Instantiate,
                    at: None,
                    count: None,
                    spec: Some(spec_text),
                    cell: Some(cell),
                    pages,
                    counters: x.counters,
                    redirect: Some(x.redirect),
                    changes: Vec::new(),
                };
                (path, Payload::StructuralEdit(payload))
            }
            Command::Grant { path, change } => {
                if !self.site.groups.contains_key(&change.group) {
                    return Err(CommitError::Invalid(format!("unknown group `{}`", change.group)));
                }
                let page = self.site.page_mut(&path)?;
                page.perms.entry(change.view).or_default().insert(change.group.clone());
                if change.default {
                    page.views.default = Some(change.view);
                }
                (path, Payload::Grant(change))
            }
            Command::Revoke { path, change } => {
                let page = self.site.page_mut(&path)?;
                if let Some(groups) = page.perms.get_mut(&change.view) {
                    groups.remove(&change.group);
                    if groups.is_empty() {
                        page.perms.remove(&change.view);
                    }
                }
                if change.default && page.views.default == Some(change.view) {
                    page.views.default = None;
                }
                (path, Payload::Revoke(change))
            }
            Command::UserAdmin(op) => {
                self.user_admin(&op)?;
                (Path::root(), Payload::UserAdmin(op))
            }
        };
        let seq = self.site.seq + 1;
        let changed = self.recalc(&txn, serial_now(ts), seq);
        let mut payload = payload;
        if let Some(slot) = payload.changes_mut() {
            let mut changes = txn.changes;
            for c in &mut changes {
                c.value = self.site.pages.get(&c.path).map(|p| p.value(c.cell)).unwrap_or_default();
            }
            *slot = changes;
        }
        let ts = format_ts(ts);
        self.site.seq = seq;
        self.site.ts = Some(ts.clone());
        let event = Event { seq, ts, user: user.to_string(), path, payload };
        let errors = changed.iter().filter(|c| matches!(c.value, Value::Error(_))).cloned().collect();
        Ok((Outcome { seq: Some(seq), changed, errors, redirect }, Some(event)))
    }

    fn check_writes(&self, writes: Vec<CellWrite>) -> Result<Vec<CellWrite>, CommitError> {
        writes
            .into_iter()
            .map(|mut w| {
                self.site.page(&w.path)?;
                if !w.addr.is_valid() {
                    return Err(CommitError::Bounds(w.addr.to_string()));
                }
                if let Source::Formula(f) = &w.data.source {
                    let ast = parse(f).map_err(|error| CommitError::Parse { path: w.path.clone(), addr: w.addr, error })?;
                    w.data.source = Source::Formula(print(&ast));
                }
                if let Source::Literal(v) = &w.data.source {
                    w.data.source = Source::literal(v.clone());
                }
                Ok(w)
            })
            .collect()
    }

    fn check_creates(&self, pages: Vec<CreatedPage>) -> Result<Vec<CreatedPage>, CommitError> {
        let mut out: Vec<CreatedPage> = Vec::new();
        for p in pages {
            let blank = p.template.as_deref().is_none_or(|t| t == BLANK_TEMPLATE);
            if self.site.pages.contains_key(&p.path) || out.iter().any(|o| o.path == p.path) {
                if blank {
                    continue;
                }
                return Err(StoreError::PageExists(p.path).into());
            }
            if let Some(t) = &p.template {
                self.site.template(t)?;
            }
            out.push(p);
        }
        Ok(out)
    }

    fn write(&mut self, txn: &mut Txn, w: CellWrite) {
        let page = self.site.pages.get_mut(&w.path).expect("checked");
        let prior = page.put(w.addr, w.data.clone());
        if prior == w.data {
            return;
        }
        let key = (w.path.clone(), w.addr);
        match page.cells.get(&w.addr).and_then(|c| c.ast.clone()) {
            Some(ast) => self.graph.insert(key.clone(), &ast),
            None => self.graph.remove(&key),
        }
        txn.changes.push(change(&w.path, w.addr, prior, w.data));
        txn.written.push(key);
    }

    fn create(&mut self, txn: &mut Txn, path: &Path, template: Option<&str>) {
        self.site.create_page(path, template).expect("checked");
        let page = &self.site.pages[path];
        for (addr, cell) in &page.cells {
            let key = (path.clone(), *addr);
            if let Some(ast) = &cell.ast {
                self.graph.insert(key.clone(), ast);
            }
            txn.changes.push(change(path, *addr, CellData::default(), cell.data.clone()));
            txn.written.push(key);
        }
        txn.pages.push(path.clone());
    }

    fn shift(&mut self, txn: &mut Txn, path: &Path, shift: &Shift) -> Result<(), CommitError> {
        let page = self.site.page(path)?;
        if page.cells.keys().any(|a| !shift.delete && shift.map_addr(*a).is_none()) {
            return Err(CommitError::Bounds("insertion would push cells off the sheet".into()));
        }
        let before: BTreeMap<CellAddr, CellData> = page.cells.iter().map(|(a, c)| (*a, c.data.clone())).collect();

        let mut rewrites = Vec::new();
        for (p, a, cell) in self.site.formula_cells() {
            let mut ast = (**cell.ast.as_ref().expect("formula")).clone();
            if rewrite(&mut ast, p, path, shift) {
                let data = CellData { source: Source::Formula(print(&ast)), ..cell.data.clone() };
                rewrites.push((p.clone(), *a, cell.data.clone(), data));
            }
        }
        for (p, a, _, data) in &rewrites {
            self.site.pages.get_mut(p).expect("exists").put(*a, data.clone());
        }
        let page = self.site.pages.get_mut(path).expect("exists");
        let cells = std::mem::take(&mut page.cells);
        page.cells = cells.into_iter().filter_map(|(a, c)| Some((shift.map_addr(a)?, c))).collect();
        let after: BTreeMap<CellAddr, CellData> = page.cells.iter().map(|(a, c)| (*a, c.data.clone())).collect();

        let mut changes: BTreeMap<CellKey, (CellData, CellData)> = BTreeMap::new();
        for (p, a, prior, new) in rewrites.into_iter().filter(|r| &r.0 != path) {
            changes.insert((p, a), (prior, new));
        }
        for a in before.keys().chain(after.keys()) {
            let (b, n) = (before.get(a).cloned().unwrap_or_default(), after.get(a).cloned().unwrap_or_default());
            if b != n {
                changes.insert((path.clone(), *a), (b, n));
            }
        }
        for ((p, a), (prior, new)) in changes {
            txn.changes.push(change(&p, a, prior, new));
            txn.written.push((p, a));
        }
        txn.pages.push(path.clone());
        self.graph = DepGraph::build(&self.site);
        Ok(())
    }

    fn user_admin(&mut self, op: &UserOp) -> Result<(), CommitError> {
        let site = &mut self.site;
        let invalid = |m: String| Err(CommitError::Invalid(m));
        match op {
            UserOp::AddUser { id, salt, hash } => {
                if !valid_segment(id) {
                    return invalid(format!("illegal user id `{id}`"));
                }
                if site.users.contains_key(id) {
                    return invalid(format!("user `{id}` exists"));
                }
                site.users.insert(id.clone(), User { id: id.clone(), salt: salt.clone(), hash: hash.clone() });
            }
            UserOp::SetPassword { id, salt, hash } => match site.users.get_mut(id) {
                Some(u) => {
                    u.salt = salt.clone();
                    u.hash = hash.clone();
                }
                None => return invalid(format!("unknown user `{id}`")),
            },
            UserOp::RemoveUser { id } => {
                if site.users.remove(id).is_none() {
                    return invalid(format!("unknown user `{id}`"));
                }
                site.groups.values_mut().for_each(|m| {
                    m.remove(id);
                });
            }
            UserOp::AddGroup { name } => {
                if !valid_segment(name) {
                    return invalid(format!("illegal group name `{name}`"));
                }
                if site.groups.contains_key(name) {
                    return invalid(format!("group `{name}` exists"));
                }
                site.groups.insert(name.clone(), Default::default());
            }
            UserOp::RemoveGroup { name } => {
                if name == ADMIN_GROUP {
                    return invalid("the admin group cannot be removed".into());
                }
                if site.groups.remove(name).is_none() {
                    return invalid(format!("unknown group `{name}`"));
                }
            }
            UserOp::AddMember { group, user } | UserOp::RemoveMember { group, user } => {
                if !site.users.contains_key(user) {
                    return invalid(format!("unknown user `{user}`"));
                }
                let Some(members) = site.groups.get_mut(group) else {
                    return invalid(format!("unknown group `{group}`"));
                };
                if matches!(op, UserOp::AddMember { .. }) {
                    members.insert(user.clone());
                } else {
                    members.remove(user);
                }
            }
        }
        Ok(())
    }

    /// Evaluates the dirty closure and stores the results.
    fn recalc(&mut self, txn: &Txn, now: f64, seed: u64) -> Vec<ChangedCell> {
        let dirty = self.graph.dirty_closure(&txn.written, &txn.pages);
        let results = pass::Pass::new(&self.site, &self.graph, &dirty, now, seed).run();
        let mut changed: BTreeMap<CellKey, Value> = BTreeMap::new();
        for (key, value) in results {
            let cell = self.site.pages.get_mut(&key.0).and_then(|p| p.cells.get_mut(&key.1)).expect("dirty cell");
            if !cell.value.identical(&value) {
                cell.value = value.clone();
                changed.insert(key, value);
            }
        }
        for key in &txn.written {
            let v = self.site.pages.get(&key.0).map(|p| p.value(key.1)).unwrap_or_default();
            changed.insert(key.clone(), v);
        }
        changed.into_iter().map(|((path, cell), value)| ChangedCell { path, cell, value }).collect()
    }
}

fn change(path: &Path, cell: CellAddr, prior: CellData, new: CellData) -> CellChange {
    CellChange { path: path.clone(), cell, prior, new, value: Value::Blank }
}
