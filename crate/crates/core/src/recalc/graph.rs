//! Dependency bookkeeping for the commit pipeline.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::addr::{CellAddr, Range};
use crate::formula::ast::Expr;
use crate::formula::{collect_refs, StaticRef};
use crate::path::Path;
use crate::stdlib::is_volatile;
use crate::store::Site;

pub type CellKey = (Path, CellAddr);

#[derive(Debug, Clone, Default)]
struct Precedents {
    statics: Vec<StaticRef>,
    zprefixes: Vec<Path>,
}

/// Who reads what. Static references are indexed per page; z-references
/// are keyed by their literal prefix, so any change under the prefix
/// reaches them.
#[derive(Debug, Clone, Default)]
pub struct DepGraph {
    forward: HashMap<CellKey, Precedents>,
    by_page: HashMap<Path, Vec<(Range, CellKey)>>,
    z_registry: BTreeMap<Path, Vec<CellKey>>,
    volatile: BTreeSet<CellKey>,
}

fn volatile(ast: &Expr) -> bool {
    let mut found = false;
    ast.walk(&mut |e| {
        if let Expr::Call { name, .. } = e {
            found |= is_volatile(name);
        }
    });
    found
}

impl DepGraph {
    pub fn build(site: &Site) -> DepGraph {
        let mut g = DepGraph::default();
        for (path, addr, cell) in site.formula_cells() {
            g.insert((path.clone(), *addr), cell.ast.as_deref().expect("formula cells carry an ast"));
        }
        g
    }

    pub fn insert(&mut self, key: CellKey, ast: &Expr) {
        self.remove(&key);
        let refs = collect_refs(ast, &key.0);
        for s in &refs.cells {
            self.by_page.entry(s.page.clone()).or_default().push((s.range, key.clone()));
        }
        let zprefixes: Vec<Path> = refs.zrefs.iter().map(|(p, _)| p.literal_prefix()).collect();
        for p in &zprefixes {
            self.z_registry.entry(p.clone()).or_default().push(key.clone());
        }
        if volatile(ast) {
            self.volatile.insert(key.clone());
        }
        self.forward.insert(key, Precedents { statics: refs.cells, zprefixes });
    }

    pub fn remove(&mut self, key: &CellKey) {
        let Some(prev) = self.forward.remove(key) else { return };
        let pages: BTreeSet<&Path> = prev.statics.iter().map(|s| &s.page).collect();
        for page in pages {
            if let Some(v) = self.by_page.get_mut(page) {
                v.retain(|(_, k)| k != key);
                if v.is_empty() {
                    self.by_page.remove(page);
                }
            }
        }
        for p in &prev.zprefixes {
            if let Some(v) = self.z_registry.get_mut(p) {
                v.retain(|k| k != key);
                if v.is_empty() {
                    self.z_registry.remove(p);
                }
            }
        }
        self.volatile.remove(key);
    }

    pub fn contains(&self, key: &CellKey) -> bool {
        self.forward.contains_key(key)
    }

    pub fn statics(&self, key: &CellKey) -> &[StaticRef] {
        self.forward.get(key).map_or(&[], |p| &p.statics)
    }

    pub fn volatile_cells(&self) -> impl Iterator<Item = &CellKey> {
        self.volatile.iter()
    }

    /// Formula cells whose static references cover `addr` on `page`.
    pub fn cell_dependents<'g>(&'g self, page: &Path, addr: CellAddr) -> impl Iterator<Item = &'g CellKey> + 'g {
        self.by_page.get(page).into_iter().flatten().filter(move |(r, _)| r.contains(addr)).map(|(_, k)| k)
    }

    /// Formula cells with any static reference into `page`.
    pub fn page_dependents<'g>(&'g self, page: &Path) -> impl Iterator<Item = &'g CellKey> + 'g {
        self.by_page.get(page).into_iter().flatten().map(|(_, k)| k)
    }

    /// Formula cells whose z-prefix is `page` or one of its ancestors.
    pub fn z_dependents(&self, page: &Path) -> Vec<&CellKey> {
        if self.z_registry.is_empty() {
            return Vec::new();
        }
        page.self_and_ancestors().filter_map(|p| self.z_registry.get(&p)).flatten().collect()
    }

    /// Formula cells whose value may change after `written` cells changed
    /// and `pages` were created or removed, plus every volatile cell.
    pub fn dirty_closure(&self, written: &[CellKey], pages: &[Path]) -> BTreeMap<Path, BTreeSet<CellAddr>> {
        let mut dirty: BTreeMap<Path, BTreeSet<CellAddr>> = BTreeMap::new();
        let mut seen: HashSet<CellKey> = HashSet::new();
        let mut z_done: HashSet<Path> = HashSet::new();
        let mut work: Vec<CellKey> = written.to_vec();
        work.extend(self.volatile.iter().cloned());
        for p in pages {
            work.extend(self.page_dependents(p).cloned());
            work.extend(self.z_dependents(p).into_iter().cloned());
            z_done.insert(p.clone());
        }
        while let Some(key) = work.pop() {
            if !seen.insert(key.clone()) {
                continue;
            }
            if self.contains(&key) {
                dirty.entry(key.0.clone()).or_default().insert(key.1);
            }
            work.extend(self.cell_dependents(&key.0, key.1).filter(|k| !seen.contains(*k)).cloned());
            if z_done.insert(key.0.clone()) {
                work.extend(self.z_dependents(&key.0).into_iter().cloned());
            }
        }
        dirty
    }

    /// Flattened edges, for comparing against a fresh build.
    pub fn edges(&self) -> (BTreeSet<(CellKey, StaticRef)>, BTreeSet<(Path, CellKey)>, BTreeSet<CellKey>) {
        let mut statics = BTreeSet::new();
        for (page, v) in &self.by_page {
            for (r, k) in v {
                statics.insert((k.clone(), StaticRef { page: page.clone(), range: *r }));
            }
        }
        let z = self.z_registry.iter().flat_map(|(p, v)| v.iter().map(move |k| (p.clone(), k.clone()))).collect();
        (statics, z, self.volatile.clone())
    }
}
