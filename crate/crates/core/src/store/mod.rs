//! The page tree and its persistence.
//!
//! Pages form a flat namespace keyed by canonical path; a "directory" is an
//! ordinary page. Mutation happens only through the commit pipeline in
//! [`crate::recalc`], which records every change as an [`Event`].

mod event;
mod pathspec;
mod persist;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::addr::{CellAddr, Range};
use crate::engine::SiteAccess;
use crate::formula::{parse, print, Expr, ParseError};
use crate::path::Path;
use crate::value::{parse_literal_input, Value};

pub use event::{
    Action, CellChange, CreatedPage, Event, GrantChange, Payload, StructuralOp, StructuralPayload, UserOp,
    EventError,
};
pub use pathspec::{expand_path_spec, DateToken, Expansion, PathSpec, SpecError, SpecSegment, SpecSource};
pub use persist::{read_journal, JournalError, JournalWriter, Snapshot, JOURNAL_FILE, SNAPSHOT_FILE};

/// The five ways a page can be presented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewKind {
    Spreadsheet,
    Table,
    Wikipage,
    Webpage,
    Log,
}

impl ViewKind {
    pub const ALL: [ViewKind; 5] =
        [ViewKind::Spreadsheet, ViewKind::Table, ViewKind::Wikipage, ViewKind::Webpage, ViewKind::Log];

    pub fn as_str(self) -> &'static str {
        match self {
            ViewKind::Spreadsheet => "spreadsheet",
            ViewKind::Table => "table",
            ViewKind::Wikipage => "wikipage",
            ViewKind::Webpage => "webpage",
            ViewKind::Log => "log",
        }
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ViewKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ViewKind::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown view `{s}`"))
    }
}

/// How a wiki-editable cell is presented in the wikipage view.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "input", content = "options")]
pub enum WikiInput {
    #[default]
    None,
    Text,
    Select(Vec<String>),
    Radio(Vec<String>),
}

impl WikiInput {
    pub fn is_none(&self) -> bool {
        matches!(self, WikiInput::None)
    }

    /// Whether `v` is an acceptable submission. Blank always is.
    pub fn accepts(&self, v: &Value) -> bool {
        match self {
            WikiInput::None => false,
            WikiInput::Text => true,
            WikiInput::Select(opts) | WikiInput::Radio(opts) => {
                v.is_blank() || opts.iter().any(|o| *o == v.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CellAttrs {
    #[serde(default, skip_serializing_if = "WikiInput::is_none")]
    pub wiki: WikiInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transaction: Option<String>,
}

impl CellAttrs {
    pub fn is_default(&self) -> bool {
        *self == CellAttrs::default()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Source {
    #[default]
    Blank,
    /// Never `Value::Blank` or `Value::Render`.
    Literal(Value),
    /// Canonical formula text, starting with `=`.
    Formula(String),
}

/// What a user puts in a cell: its source, attributes and format.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "CellDataRepr", into = "CellDataRepr")]
pub struct CellData {
    pub source: Source,
    pub attrs: CellAttrs,
    pub format: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct CellDataRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    literal: Option<Value>,
    /// `text`, `select` or `radio` for wiki-editable cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    options: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transaction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<String>,
}

impl TryFrom<CellDataRepr> for CellData {
    type Error = String;

    fn try_from(r: CellDataRepr) -> Result<Self, String> {
        let source = match (r.formula, r.literal) {
            (Some(_), Some(_)) => return Err("cell has both a formula and a literal".into()),
            (Some(f), None) => Source::Formula(f),
            (None, Some(v)) => Source::literal(v),
            (None, None) => Source::Blank,
        };
        let wiki = match r.input.as_deref() {
            None => WikiInput::None,
            Some("text") => WikiInput::Text,
            Some("select") => WikiInput::Select(r.options),
            Some("radio") => WikiInput::Radio(r.options),
            Some(other) => return Err(format!("unknown input kind `{other}`")),
        };
        Ok(CellData { source, attrs: CellAttrs { wiki, transaction: r.transaction }, format: r.format })
    }
}

impl From<CellData> for CellDataRepr {
    fn from(d: CellData) -> Self {
        let (formula, literal) = match d.source {
            Source::Blank => (None, None),
            Source::Literal(v) => (None, Some(v)),
            Source::Formula(f) => (Some(f), None),
        };
        let (input, options) = match d.attrs.wiki {
            WikiInput::None => (None, Vec::new()),
            WikiInput::Text => (Some("text".to_string()), Vec::new()),
            WikiInput::Select(o) => (Some("select".to_string()), o),
            WikiInput::Radio(o) => (Some("radio".to_string()), o),
        };
        CellDataRepr { formula, literal, input, options, transaction: d.attrs.transaction, format: d.format }
    }
}

impl CellData {
    /// Interprets typed input: `=` starts a formula (stored canonically),
    /// anything else is a literal.
    pub fn from_input(raw: &str) -> Result<CellData, ParseError> {
        Ok(CellData { source: Source::from_input(raw)?, ..Default::default() })
    }

    pub fn literal(v: impl Into<Value>) -> CellData {
        CellData { source: Source::literal(v.into()), ..Default::default() }
    }

    pub fn is_default(&self) -> bool {
        *self == CellData::default()
    }

    pub fn is_formula(&self) -> bool {
        matches!(self.source, Source::Formula(_))
    }

    /// Source text as a user would type it back in.
    pub fn input_text(&self) -> String {
        match &self.source {
            Source::Blank => String::new(),
            Source::Formula(f) => f.clone(),
            Source::Literal(Value::Text(s)) => {
                // quote text that would read back as a number, boolean or formula
                if parse_literal_input(s) != Value::Text(s.clone()) || s.starts_with('=') {
                    format!("'{s}")
                } else {
                    s.clone()
                }
            }
            Source::Literal(v) => v.to_string(),
        }
    }
}

impl Source {
    pub fn from_input(raw: &str) -> Result<Source, ParseError> {
        if raw.starts_with('=') {
            Ok(Source::Formula(print(&parse(raw)?)))
        } else {
            Ok(Source::literal(parse_literal_input(raw)))
        }
    }

    pub fn literal(v: Value) -> Source {
        match v {
            Value::Blank | Value::Render(_) => Source::Blank,
            v => Source::Literal(v),
        }
    }
}

/// A stored cell: its data, last computed value and parsed formula.
#[derive(Debug, Clone, Default)]
pub struct Cell {
    pub data: CellData,
    pub value: Value,
    pub ast: Option<Arc<Expr>>,
}

impl Cell {
    /// Builds a cell from data. Literal values are their own value; a
    /// formula starts Blank until evaluated. Stored formulas always parse.
    pub fn new(data: CellData) -> Cell {
        let (value, ast) = match &data.source {
            Source::Blank => (Value::Blank, None),
            Source::Literal(v) => (v.clone(), None),
            Source::Formula(f) => match parse(f) {
                Ok(ast) => (Value::Blank, Some(Arc::new(ast))),
                Err(_) => (Value::Error(crate::value::ErrorKind::Name), None),
            },
        };
        Cell { data, value, ast }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ViewSettings {
    /// Preferred view for users who hold it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<ViewKind>,
}

impl ViewSettings {
    pub fn is_default(&self) -> bool {
        self.default.is_none()
    }
}

pub type Perms = BTreeMap<ViewKind, BTreeSet<String>>;

#[derive(Debug, Clone, Default)]
pub struct Page {
    pub path: Path,
    pub cells: BTreeMap<CellAddr, Cell>,
    pub views: ViewSettings,
    /// Never holds an empty group set.
    pub perms: Perms,
    pub template_origin: Option<String>,
}

impl Page {
    pub fn new(path: Path) -> Page {
        Page { path, ..Default::default() }
    }

    /// Cell data at `addr` (default when never written).
    pub fn data(&self, addr: CellAddr) -> CellData {
        self.cells.get(&addr).map(|c| c.data.clone()).unwrap_or_default()
    }

    pub fn value(&self, addr: CellAddr) -> Value {
        self.cells.get(&addr).map(|c| c.value.clone()).unwrap_or_default()
    }

    /// Replaces a cell's data, dropping it when it becomes default.
    /// Returns the prior data.
    pub fn put(&mut self, addr: CellAddr, data: CellData) -> CellData {
        let prior = self.data(addr);
        if data.is_default() {
            self.cells.remove(&addr);
        } else if prior != data {
            self.cells.insert(addr, Cell::new(data));
        }
        prior
    }

    /// Smallest range covering every stored cell.
    pub fn used_range(&self) -> Option<Range> {
        let first = self.cells.keys().next()?;
        let (mut r0, mut r1, mut c0, mut c1) = (first.row, first.row, first.col, first.col);
        for a in self.cells.keys() {
            r0 = r0.min(a.row);
            r1 = r1.max(a.row);
            c0 = c0.min(a.col);
            c1 = c1.max(a.col);
        }
        Some(Range::new(CellAddr::new(c0, r0), CellAddr::new(c1, r1)))
    }

    /// Cells stored inside `range`, row-major.
    pub fn cells_in(&self, range: Range) -> impl Iterator<Item = (&CellAddr, &Cell)> {
        self.cells
            .range(range.start..=range.end)
            .filter(move |(a, _)| a.col >= range.start.col && a.col <= range.end.col)
    }

    fn to_template(&self, name: &str) -> Template {
        Template {
            name: name.to_string(),
            cells: self.cells.iter().map(|(a, c)| (*a, c.data.clone())).collect(),
            views: self.views.clone(),
            perms: self.perms.clone(),
        }
    }
}

/// A saved page used to instantiate new ones.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Template {
    pub name: String,
    pub cells: BTreeMap<CellAddr, CellData>,
    #[serde(default, skip_serializing_if = "ViewSettings::is_default")]
    pub views: ViewSettings,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub perms: Perms,
}

/// Name of the built-in empty template.
pub const BLANK_TEMPLATE: &str = "blank";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: String,
    /// Hex salt and PBKDF2-HMAC-SHA256 digest.
    pub salt: String,
    pub hash: String,
}

pub const ADMIN_GROUP: &str = "admin";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("page not found: {0}")]
    PageNotFound(Path),
    #[error("page already exists: {0}")]
    PageExists(Path),
    #[error("template not found: {0}")]
    TemplateNotFound(String),
}

/// The whole site: pages, templates, users and groups.
#[derive(Debug, Clone)]
pub struct Site {
    pub pages: BTreeMap<Path, Page>,
    pub templates: BTreeMap<String, Template>,
    /// Group name to member user ids. `admin` always exists.
    pub groups: BTreeMap<String, BTreeSet<String>>,
    pub users: BTreeMap<String, User>,
    /// `incr` counters per parent path.
    pub counters: BTreeMap<Path, u64>,
    /// Last applied event.
    pub seq: u64,
    pub ts: Option<String>,
}

impl Default for Site {
    fn default() -> Self {
        Site {
            pages: BTreeMap::new(),
            templates: BTreeMap::new(),
            groups: BTreeMap::from([(ADMIN_GROUP.to_string(), BTreeSet::new())]),
            users: BTreeMap::new(),
            counters: BTreeMap::new(),
            seq: 0,
            ts: None,
        }
    }
}

impl Site {
    pub fn new() -> Site {
        Site::default()
    }

    pub fn page(&self, path: &Path) -> Result<&Page, StoreError> {
        self.pages.get(path).ok_or_else(|| StoreError::PageNotFound(path.clone()))
    }

    pub fn page_mut(&mut self, path: &Path) -> Result<&mut Page, StoreError> {
        self.pages.get_mut(path).ok_or_else(|| StoreError::PageNotFound(path.clone()))
    }

    /// Cell data; a Blank default when never written.
    pub fn get_cell(&self, path: &Path, addr: CellAddr) -> Result<CellData, StoreError> {
        Ok(self.page(path)?.data(addr))
    }

    pub fn get_value(&self, path: &Path, addr: CellAddr) -> Result<Value, StoreError> {
        Ok(self.page(path)?.value(addr))
    }

    pub fn template(&self, name: &str) -> Result<Template, StoreError> {
        if let Some(t) = self.templates.get(name) {
            return Ok(t.clone());
        }
        if name == BLANK_TEMPLATE {
            return Ok(Template { name: BLANK_TEMPLATE.to_string(), ..Default::default() });
        }
        Err(StoreError::TemplateNotFound(name.to_string()))
    }

    /// Creates a page, populated from `template` when given. Cached values
    /// are left for the recalc pass.
    pub fn create_page(&mut self, path: &Path, template: Option<&str>) -> Result<(), StoreError> {
        if self.pages.contains_key(path) {
            return Err(StoreError::PageExists(path.clone()));
        }
        let mut page = Page::new(path.clone());
        if let Some(name) = template {
            let t = self.template(name)?;
            page.cells = t.cells.into_iter().map(|(a, d)| (a, Cell::new(d))).collect();
            page.views = t.views;
            page.perms = t.perms;
            page.template_origin = Some(name.to_string());
        }
        self.pages.insert(path.clone(), page);
        Ok(())
    }

    pub fn save_template(&mut self, path: &Path, name: &str) -> Result<Template, StoreError> {
        let t = self.page(path)?.to_template(name);
        self.templates.insert(name.to_string(), t.clone());
        Ok(t)
    }

    pub fn is_member(&self, user: &str, group: &str) -> bool {
        self.groups.get(group).is_some_and(|m| m.contains(user))
    }

    pub fn is_admin(&self, user: &str) -> bool {
        self.is_member(user, ADMIN_GROUP)
    }

    /// Formula cells in canonical (path, row, col) order.
    pub fn formula_cells(&self) -> impl Iterator<Item = (&Path, &CellAddr, &Cell)> {
        self.pages
            .iter()
            .flat_map(|(p, page)| page.cells.iter().filter(|(_, c)| c.ast.is_some()).map(move |(a, c)| (p, a, c)))
    }

    /// Existing pages with exactly `depth` segments under `prefix`.
    pub fn pages_at_depth(&self, prefix: &Path, depth: usize) -> Vec<Path> {
        self.pages
            .range(prefix.clone()..)
            .take_while(|(p, _)| prefix.is_prefix_of(p))
            .filter(|(p, _)| p.depth() == depth)
            .map(|(p, _)| p.clone())
            .collect()
    }
}

/// Reads cached values only; formulas are not re-evaluated.
impl SiteAccess for Site {
    fn page_exists(&self, page: &Path) -> bool {
        self.pages.contains_key(page)
    }

    fn read_cell(&mut self, page: &Path, addr: CellAddr) -> Value {
        self.pages.get(page).map(|p| p.value(addr)).unwrap_or_default()
    }

    fn pages_under(&self, prefix: &Path, depth: usize) -> Vec<Path> {
        self.pages_at_depth(prefix, depth)
    }
}

/// Same as `Site`, for callers holding only a shared borrow.
impl SiteAccess for &Site {
    fn page_exists(&self, page: &Path) -> bool {
        self.pages.contains_key(page)
    }

    fn read_cell(&mut self, page: &Path, addr: CellAddr) -> Value {
        self.pages.get(page).map(|p| p.value(addr)).unwrap_or_default()
    }

    fn pages_under(&self, prefix: &Path, depth: usize) -> Vec<Path> {
        self.pages_at_depth(prefix, depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Path {
        Path::parse(s).unwrap()
    }

    fn a(s: &str) -> CellAddr {
        s.parse().unwrap()
    }

    #[test]
    fn blank_reads_and_missing_pages() {
        let mut site = Site::new();
        site.create_page(&p("/p/"), None).unwrap();
        assert_eq!(site.get_cell(&p("/p/"), a("a1")).unwrap(), CellData::default());
        assert_eq!(site.get_cell(&p("/nope/"), a("a1")), Err(StoreError::PageNotFound(p("/nope/"))));
    }

    #[test]
    fn formulas_stored_canonically() {
        let d = CellData::from_input("=SUM( 1, 2 )").unwrap();
        assert_eq!(d.source, Source::Formula("=sum(1,2)".into()));
        assert!(CellData::from_input("=sum(").is_err());
        assert_eq!(CellData::from_input("'=x").unwrap().input_text(), "'=x");
        assert_eq!(CellData::from_input("'42").unwrap().input_text(), "'42");
        assert_eq!(CellData::from_input("hello").unwrap().input_text(), "hello");
    }

    #[test]
    fn create_from_templates() {
        let mut site = Site::new();
        site.create_page(&p("/t/"), None).unwrap();
        site.page_mut(&p("/t/")).unwrap().put(a("b2"), CellData::from_input("=a1*2").unwrap());
        site.save_template(&p("/t/"), "invoice").unwrap();
        let inv = p("/accounts/2011/invoices/inv00000001/");
        site.create_page(&inv, Some("invoice")).unwrap();
        assert!(site.page(&inv).unwrap().data(a("b2")).is_formula());
        assert_eq!(site.create_page(&inv, Some("invoice")), Err(StoreError::PageExists(inv.clone())));
        assert_eq!(
            site.create_page(&p("/x/"), Some("nosuch")),
            Err(StoreError::TemplateNotFound("nosuch".into()))
        );
        site.create_page(&p("/y/"), Some(BLANK_TEMPLATE)).unwrap();
    }

    #[test]
    fn template_round_trip() {
        let mut site = Site::new();
        site.create_page(&p("/t/"), None).unwrap();
        let page = site.page_mut(&p("/t/")).unwrap();
        page.put(a("a1"), CellData::literal(3.0));
        page.put(
            a("b1"),
            CellData {
                source: Source::Blank,
                attrs: CellAttrs { wiki: WikiInput::Select(vec!["yes".into()]), transaction: Some("t".into()) },
                format: Some("0.00".into()),
            },
        );
        page.perms.entry(ViewKind::Webpage).or_default().insert("staff".into());
        let t1 = site.save_template(&p("/t/"), "x").unwrap();
        site.create_page(&p("/u/"), Some("x")).unwrap();
        let t2 = site.save_template(&p("/u/"), "x").unwrap();
        assert_eq!(t1, t2);
        let json = serde_json::to_string(&t1).unwrap();
        assert_eq!(serde_json::from_str::<Template>(&json).unwrap(), t1);
    }

    #[test]
    fn cell_data_wire_form() {
        let d = CellData {
            source: Source::Literal(Value::Number(1.0)),
            attrs: CellAttrs { wiki: WikiInput::Text, transaction: Some("t1".into()) },
            format: None,
        };
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"literal":1.0,"input":"text","transaction":"t1"}"#);
        assert_eq!(serde_json::from_str::<CellData>(&s).unwrap(), d);
        assert_eq!(serde_json::to_string(&CellData::default()).unwrap(), "{}");
    }
}
