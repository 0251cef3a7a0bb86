//! One evaluation pass over the dirty cells.
//!
//! Cells are evaluated on demand: a read of a dirty cell evaluates it
//! first. Tarjan's algorithm runs over the reads as they happen, so a
//! strongly connected component is known the moment its root finishes;
//! every member of a cyclic component gets `#CIRC!`. Static precedents are
//! visited before a cell is evaluated, which makes cycles through
//! untaken `if` branches count as cycles too.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::graph::{CellKey, DepGraph};
use crate::addr::CellAddr;
use crate::engine::{EvalContext, SiteAccess};
use crate::path::Path;
use crate::store::Site;
use crate::value::{ErrorKind, Value};

struct Node {
    index: usize,
    low: usize,
    on_stack: bool,
    self_loop: bool,
    value: Value,
}

pub(crate) struct Pass<'a> {
    site: &'a Site,
    graph: &'a DepGraph,
    dirty: &'a BTreeMap<Path, BTreeSet<CellAddr>>,
    nodes: HashMap<CellKey, Node>,
    stack: Vec<CellKey>,
    chain: Vec<CellKey>,
    now: f64,
    seed: u64,
}

const CIRC: Value = Value::Error(ErrorKind::Circ);

impl<'a> Pass<'a> {
    pub(crate) fn new(
        site: &'a Site,
        graph: &'a DepGraph,
        dirty: &'a BTreeMap<Path, BTreeSet<CellAddr>>,
        now: f64,
        seed: u64,
    ) -> Self {
        Pass { site, graph, dirty, nodes: HashMap::new(), stack: Vec::new(), chain: Vec::new(), now, seed }
    }

    /// Evaluates every dirty cell, in (path, row, col) order.
    pub(crate) fn run(mut self) -> Vec<(CellKey, Value)> {
        for (path, addrs) in self.dirty {
            for addr in addrs {
                let key = (path.clone(), *addr);
                if !self.nodes.contains_key(&key) {
                    self.visit(key);
                }
            }
        }
        let mut out: Vec<(CellKey, Value)> = self.nodes.into_iter().map(|(k, n)| (k, n.value)).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    fn is_dirty(&self, page: &Path, addr: CellAddr) -> bool {
        self.dirty.get(page).is_some_and(|s| s.contains(&addr))
    }

    /// The value of dirty cell `key` as seen by the cell being evaluated.
    fn demand(&mut self, key: CellKey) -> Value {
        let current = self.chain.last().cloned();
        let (index, value) = match self.nodes.get(&key) {
            Some(n) if n.on_stack => (n.index, CIRC),
            Some(n) => return n.value.clone(),
            None => {
                self.visit(key.clone());
                let n = &self.nodes[&key];
                if !n.on_stack {
                    return n.value.clone();
                }
                (n.low, CIRC)
            }
        };
        if let Some(cur) = current {
            let n = self.nodes.get_mut(&cur).expect("current cell is visited");
            n.low = n.low.min(index);
            if cur == key {
                n.self_loop = true;
            }
        }
        value
    }

    fn visit(&mut self, key: CellKey) {
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.visit_inner(key));
    }

    fn visit_inner(&mut self, key: CellKey) {
        let index = self.nodes.len();
        self.nodes.insert(key.clone(), Node { index, low: index, on_stack: true, self_loop: false, value: Value::Blank });
        self.stack.push(key.clone());
        self.chain.push(key.clone());

        let graph = self.graph;
        for s in graph.statics(&key) {
            let Some(addrs) = self.dirty.get(&s.page) else { continue };
            let hits: Vec<CellAddr> = addrs
                .range(s.range.start..=s.range.end)
                .filter(|a| s.range.contains(**a))
                .copied()
                .collect();
            for a in hits {
                self.demand((s.page.clone(), a));
            }
        }

        let ast = self.site.pages[&key.0].cells[&key.1].ast.clone().expect("dirty cells are formulas");
        let (now, seed) = (self.now, self.seed);
        let value = EvalContext::new(self, key.0.clone(), key.1, now, seed).evaluate(&ast);
        self.chain.pop();

        let node = self.nodes.get_mut(&key).expect("visited");
        node.value = value;
        if node.low == index {
            let cyclic = node.self_loop || self.stack.last() != Some(&key);
            loop {
                let k = self.stack.pop().expect("component root is on the stack");
                let n = self.nodes.get_mut(&k).expect("visited");
                n.on_stack = false;
                if cyclic {
                    n.value = CIRC;
                }
                if k == key {
                    break;
                }
            }
        }
    }
}

impl SiteAccess for Pass<'_> {
    fn page_exists(&self, page: &Path) -> bool {
        self.site.pages.contains_key(page)
    }

    fn read_cell(&mut self, page: &Path, addr: CellAddr) -> Value {
        if self.is_dirty(page, addr) {
            return self.demand((page.clone(), addr));
        }
        self.site.pages.get(page).map(|p| p.value(addr)).unwrap_or_default()
    }

    fn pages_under(&self, prefix: &Path, depth: usize) -> Vec<Path> {
        self.site.pages_at_depth(prefix, depth)
    }
}

/// Evaluates every formula cell from scratch. The result covers all
/// formula cells; the correctness oracle for incremental commits.
pub fn full_recompute(site: &Site, now: f64, seed: u64) -> BTreeMap<CellKey, Value> {
    let graph = DepGraph::build(site);
    let mut dirty: BTreeMap<Path, BTreeSet<CellAddr>> = BTreeMap::new();
    for (p, a, _) in site.formula_cells() {
        dirty.entry(p.clone()).or_default().insert(*a);
    }
    Pass::new(site, &graph, &dirty, now, seed).run().into_iter().collect()
}
