//! Random sites, formulas and edit scripts. Shared with the server's
//! acceptance target through `#[path]`.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zsheet::path::Path;
use zsheet::recalc::{CellWrite, Command, Workbook};
use zsheet::store::{CreatedPage, StructuralOp};

pub type Gen = ChaCha8Rng;

pub fn rng(seed: u64) -> Gen {
    ChaCha8Rng::seed_from_u64(seed)
}

const COLS: [&str; 4] = ["a", "b", "c", "d"];
const ROWS: u32 = 8;
const TOP: [&str; 5] = ["g0", "g1", "g2", "g3", "g4"];
const LEAF: [&str; 9] = ["n0", "n1", "n2", "n3", "n4", "n5", "n6", "n7", "n8"];

pub fn cell(g: &mut Gen) -> String {
    format!("{}{}", COLS.choose(g).unwrap(), g.random_range(1..=ROWS))
}

fn range(g: &mut Gen) -> String {
    let c1 = g.random_range(0..COLS.len());
    let c2 = g.random_range(c1..COLS.len());
    let r1 = g.random_range(1..=ROWS);
    let r2 = g.random_range(r1..=ROWS);
    format!("{}{r1}:{}{r2}", COLS[c1], COLS[c2])
}

/// Page names the generator draws from, including ones that are never
/// created.
pub fn universe() -> Vec<Path> {
    let mut v = Vec::new();
    for t in TOP {
        v.push(Path::parse(&format!("/{t}/")).unwrap());
        for l in LEAF {
            v.push(Path::parse(&format!("/{t}/{l}/")).unwrap());
        }
    }
    v
}

fn predicate(g: &mut Gen) -> String {
    match g.random_range(0..4) {
        0 => format!("a1 > {}", g.random_range(-2..6)),
        1 => format!("isnumber({})", cell(g)),
        2 => "true".into(),
        _ => format!("{} <> {}", cell(g), g.random_range(0..3)),
    }
}

pub fn zref(g: &mut Gen) -> String {
    let target = if g.random_bool(0.3) { range(g) } else { cell(g) };
    match g.random_range(0..4) {
        0 => format!("/{}/[{}]/{target}", TOP.choose(g).unwrap(), predicate(g)),
        1 => format!("/[{}]/{}/{target}", predicate(g), LEAF.choose(g).unwrap()),
        2 => format!("/[{}]/{target}", predicate(g)),
        _ => format!("../[{}]/{target}", predicate(g)),
    }
}

fn page_ref(g: &mut Gen) -> String {
    match g.random_range(0..4) {
        0 => format!("/{}/{}", TOP.choose(g).unwrap(), cell(g)),
        1 => format!("/{}/{}/{}", TOP.choose(g).unwrap(), LEAF.choose(g).unwrap(), cell(g)),
        2 => format!("../{}/{}", LEAF.choose(g).unwrap(), cell(g)),
        _ => format!("!{}!{}", TOP.choose(g).unwrap(), cell(g)),
    }
}

fn leaf(g: &mut Gen) -> String {
    match g.random_range(0..12) {
        0 | 1 => cell(g),
        2 | 3 => page_ref(g),
        4 | 5 => format!("{}", g.random_range(-3..10)),
        6 | 7 => format!("{:.2}", g.random_range(-5.0..5.0)),
        8 => "\"x\"".into(),
        9 => "true".into(),
        10 => "now()".into(),
        _ => format!("${}${}", COLS.choose(g).unwrap(), g.random_range(1..=ROWS)),
    }
}

pub fn expr(g: &mut Gen, depth: u32) -> String {
    if depth == 0 || g.random_bool(0.3) {
        return leaf(g);
    }
    let d = depth - 1;
    match g.random_range(0..12) {
        0 | 1 => {
            let op = ["+", "-", "*", "/", "&", ">", "=", "^"].choose(g).unwrap();
            format!("{} {op} {}", expr(g, d), expr(g, d))
        }
        2 => format!("sum({})", zref(g)),
        3 => format!("count({})", zref(g)),
        4 => format!("sum({}, {})", range(g), expr(g, d)),
        5 => format!("if({} > {}, {}, {})", expr(g, d), g.random_range(0..4), expr(g, d), expr(g, d)),
        6 => format!("iserror({})", expr(g, d)),
        7 => format!("max({}, {})", range(g), expr(g, d)),
        8 => ["now()", "rand()", "today()"].choose(g).unwrap().to_string(),
        9 => format!("-({})", expr(g, d)),
        10 => format!("average({})", range(g)),
        _ => format!("({})", expr(g, d)),
    }
}

pub fn input(g: &mut Gen) -> String {
    match g.random_range(0..10) {
        0..=3 => format!("={}", expr(g, 3)),
        4..=6 => format!("{}", g.random_range(-3..10)),
        7 => "x".into(),
        8 => "TRUE".into(),
        _ => String::new(),
    }
}

/// Creates `path`, and its parent first when missing.
pub fn create(wb: &Workbook, path: &Path, template: Option<String>) -> Command {
    let mut pages = Vec::new();
    if let Some(parent) = path.parent().filter(|p| !p.is_root() && !wb.site().pages.contains_key(p)) {
        pages.push(CreatedPage { path: parent, template: None });
    }
    pages.push(CreatedPage { path: path.clone(), template });
    Command::CreatePages { path: path.clone(), pages }
}

fn existing(wb: &Workbook, g: &mut Gen) -> Option<Path> {
    let pages: Vec<&Path> = wb.site().pages.keys().collect();
    pages.choose(g).map(|p| (*p).clone())
}

pub fn set_cells(g: &mut Gen, path: &Path, n: usize) -> Command {
    let writes = (0..n)
        .map(|_| CellWrite::input(path, cell(g).parse().unwrap(), &input(g)).expect("generated inputs parse"))
        .collect();
    Command::SetCells { path: path.clone(), writes }
}

/// One random edit against the current state of `wb`.
pub fn edit(g: &mut Gen, wb: &Workbook) -> Command {
    let Some(path) = existing(wb, g) else {
        return create(wb, universe().choose(g).unwrap(), None);
    };
    match g.random_range(0..100) {
        0..=64 => {
            let n = g.random_range(1..=4);
            set_cells(g, &path, n)
        }
        65..=74 => {
            let templates: Vec<String> = wb.site().templates.keys().cloned().collect();
            let template = if g.random_bool(0.5) { templates.choose(g).cloned() } else { None };
            create(wb, universe().choose(g).unwrap(), template)
        }
        75..=79 => Command::DeletePage { path },
        80..=84 => Command::SaveTemplate { path, name: format!("t{}", g.random_range(0..3)) },
        _ => {
            let op = [StructuralOp::InsertRows, StructuralOp::DeleteRows, StructuralOp::InsertCols, StructuralOp::DeleteCols]
                .choose(g)
                .copied()
                .unwrap();
            Command::Structural { path, op, at: g.random_range(1..=ROWS), count: g.random_range(1..=2) }
        }
    }
}

/// A site of up to `pages` pages holding about `formulas` formula cells,
/// spread evenly, one commit per page.
pub fn site(g: &mut Gen, pages: usize, formulas: usize) -> Workbook {
    let mut wb = Workbook::new();
    let all = universe();
    let chosen: Vec<&Path> = all.choose_multiple(g, pages.min(all.len())).collect();
    for p in &chosen {
        let cmd = create(&wb, p, None);
        let _ = wb.commit("gen", cmd);
    }
    let paths: Vec<Path> = wb.site().pages.keys().cloned().collect();
    let quota = formulas.div_ceil(paths.len());
    let capacity = COLS.len() * ROWS as usize;
    let mut left = formulas;
    for path in paths {
        let mut free: Vec<String> =
            COLS.iter().flat_map(|c| (1..=ROWS).map(move |r| format!("{c}{r}"))).collect();
        let n = quota.min(left).min(capacity);
        left -= n;
        let literals = (capacity - n).min(g.random_range(0..=n.max(4)));
        let mut writes = Vec::new();
        for i in 0..n + literals {
            let at = free.swap_remove(g.random_range(0..free.len()));
            let raw = if i < n { format!("={}", expr(g, 3)) } else { g.random_range(0..8).to_string() };
            writes.push(CellWrite::input(&path, at.parse().unwrap(), &raw).unwrap());
        }
        wb.commit("gen", Command::SetCells { path: path.clone(), writes }).unwrap();
    }
    wb
}

/// Runs `edits` random edits, calling `check` after every commit.
pub fn script(g: &mut Gen, wb: &mut Workbook, edits: usize, mut check: impl FnMut(&Workbook, usize) -> Result<(), String>) -> Result<(), String> {
    for i in 0..edits {
        let cmd = edit(g, wb);
        let user = ["ann", "bob", "cy"].choose(g).unwrap();
        let _ = wb.commit(user, cmd);
        check(wb, i)?;
    }
    Ok(())
}

/// Cached values equal a from-scratch evaluation.
pub fn consistent(wb: &Workbook) -> Result<(), String> {
    let bad = wb.inconsistencies();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(format!("{} cells differ, first {:?}", bad.len(), bad[0]))
    }
}

/// Cells of the form page used by the wiki fuzzers: b2 (text, t1), b3
/// (select, t1), b4 (radio, t2), b5 (a wiki-marked formula), plus plain
/// literals and formulas around them.
pub const FORM: [(&str, &str, &str); 4] = [
    ("b2", "=form.input(\"t1\")", ""),
    ("b3", "=form.select(\"yes,no\",\"t1\")", ""),
    ("b4", "=form.radio(\"red,green\",\"t2\")", ""),
    ("b5", "=form.input(\"t1\")", "=b2&\"!\""),
];
pub const FORM_PLAIN: [(&str, &str); 4] = [("a1", "label"), ("a3", "7"), ("c2", "=b2*2"), ("c3", "=sum(/[true]/a3)")];

const HOSTILE: [&str; 12] = [
    "=1/0",
    "=sum(/[true]/a3)",
    "=!reports!a1",
    "'=c2",
    "=form.input(\"t9\")",
    "=create.button(\"x\",\"/evil/\")",
    "yes",
    "no",
    "green",
    "",
    "   ",
    "<script>",
];

/// A random submission: transaction and cell to raw text. Cells are drawn
/// from the whole page, so most submissions touch something they may not.
pub fn wiki_submission(g: &mut Gen) -> (String, Vec<(String, String)>) {
    if g.random_bool(0.4) {
        return if g.random_bool(0.7) {
            let mut cells = vec![("b2".to_string(), HOSTILE.choose(g).unwrap().to_string())];
            if g.random_bool(0.5) {
                cells.push(("b3".into(), ["yes", "no", ""].choose(g).unwrap().to_string()));
            }
            ("t1".into(), cells)
        } else {
            ("t2".into(), vec![("b4".into(), ["red", "green"].choose(g).unwrap().to_string())])
        };
    }
    let tx = ["t1", "t2", "t3", ""].choose(g).unwrap().to_string();
    let n = g.random_range(1..=3);
    let cells = (0..n)
        .map(|_| {
            let c = if g.random_bool(0.5) { ["b2", "b3", "b4", "b5"].choose(g).unwrap().to_string() } else { cell(g) };
            let v = match g.random_range(0..3) {
                0 => HOSTILE.choose(g).unwrap().to_string(),
                1 => g.random_range(-100..100).to_string(),
                _ => input(g),
            };
            (c, v)
        })
        .collect();
    (tx, cells)
}

/// Everything except the data of wiki-marked literal cells.
pub fn frozen(site: &zsheet::store::Site, path: &Path) -> String {
    let mut s = site.clone();
    let Some(page) = s.pages.get_mut(path) else { return String::new() };
    for cell in page.cells.values_mut() {
        if !cell.data.attrs.wiki.is_none() && !cell.data.is_formula() {
            cell.data.source = Default::default();
            cell.value = Default::default();
        }
    }
    for page in s.pages.values_mut() {
        for cell in page.cells.values_mut() {
            cell.value = Default::default();
        }
    }
    s.seq = 0;
    s.ts = None;
    zsheet::store::Snapshot::from_site(&s).to_json()
}
