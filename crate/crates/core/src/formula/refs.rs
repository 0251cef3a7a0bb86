use std::collections::BTreeSet;

use super::ast::{Expr, ZRef};
use crate::addr::Range;
use crate::path::Path;
use crate::zquery::ZPattern;

/// A statically known precedent: a range on a resolved page.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StaticRef {
    pub page: Path,
    pub range: Range,
}

#[derive(Debug, Clone)]
pub struct Refs<'a> {
    /// Deduplicated, sorted.
    pub cells: Vec<StaticRef>,
    /// Z-references with their anchors resolved; matching is deferred.
    pub zrefs: Vec<(ZPattern<'a>, &'a ZRef)>,
}

/// Collects the references a formula reads when evaluated on `base`.
///
/// Bang and slash references become root-absolute, `./` and `../` resolve
/// against `base`. A reference climbing above the root is dropped; it
/// evaluates to `#REF!`. Predicates inside z-references are not included:
/// their cells depend on which pages match.
pub fn collect_refs<'a>(ast: &'a Expr, base: &Path) -> Refs<'a> {
    let mut cells = BTreeSet::new();
    let mut zrefs = Vec::new();
    visit(ast, base, &mut cells, &mut zrefs);
    Refs { cells: cells.into_iter().collect(), zrefs }
}

fn visit<'a>(e: &'a Expr, base: &Path, cells: &mut BTreeSet<StaticRef>, zrefs: &mut Vec<(ZPattern<'a>, &'a ZRef)>) {
    match e {
        Expr::Cell(c) => {
            if let Some(page) = c.page.resolve(base) {
                cells.insert(StaticRef { page, range: Range::single(c.cell.addr()) });
            }
        }
        Expr::Range(r) => {
            if let Some(page) = r.page.resolve(base) {
                cells.insert(StaticRef { page, range: r.range() });
            }
        }
        Expr::ZRef(z) => {
            if let Some(p) = ZPattern::resolve(z, base) {
                zrefs.push((p, z));
            }
        }
        Expr::Call { args, .. } => args.iter().for_each(|a| visit(a, base, cells, zrefs)),
        Expr::Binary { lhs, rhs, .. } => {
            visit(lhs, base, cells, zrefs);
            visit(rhs, base, cells, zrefs);
        }
        Expr::Unary { expr, .. } | Expr::Percent(expr) => visit(expr, base, cells, zrefs),
        Expr::Number(_) | Expr::Text(_) | Expr::Bool(_) | Expr::Error(_) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn p(s: &str) -> Path {
        Path::parse(s).unwrap()
    }

    fn r(s: &str) -> Range {
        s.parse().unwrap()
    }

    #[test]
    fn local_refs() {
        let ast = parse("=a1+b2").unwrap();
        let refs = collect_refs(&ast, &p("/p/"));
        assert_eq!(
            refs.cells,
            vec![StaticRef { page: p("/p/"), range: r("a1") }, StaticRef { page: p("/p/"), range: r("b2") }]
        );
        assert!(refs.zrefs.is_empty());
    }

    #[test]
    fn bang_normalizes_to_root_absolute() {
        let ast = parse("=sum(!page!a4)").unwrap();
        let refs = collect_refs(&ast, &p("/x/"));
        assert_eq!(refs.cells, vec![StaticRef { page: p("/page/"), range: r("a4") }]);
    }

    #[test]
    fn z_pattern_keeps_literal_prefix() {
        let ast = parse("=sum(/some/page/[a1>44]/b7)").unwrap();
        let refs = collect_refs(&ast, &p("/x/"));
        assert!(refs.cells.is_empty());
        assert_eq!(refs.zrefs.len(), 1);
        assert_eq!(refs.zrefs[0].0.literal_prefix(), p("/some/page/"));
        assert_eq!(refs.zrefs[0].0.to_string(), "/some/page/[a1>44]/");
    }

    #[test]
    fn relative_and_escaping_refs() {
        let ast = parse("=../sib/a1+../../../a1+./b1:b3").unwrap();
        let refs = collect_refs(&ast, &p("/a/b/"));
        assert_eq!(
            refs.cells,
            vec![StaticRef { page: p("/a/b/"), range: r("b1:b3") }, StaticRef { page: p("/a/sib/"), range: r("a1") }]
        );
        let ast = parse("=../[true]/a1").unwrap();
        assert_eq!(collect_refs(&ast, &p("/a/b/")).zrefs[0].0.literal_prefix(), p("/a/"));
        assert!(collect_refs(&ast, &Path::root()).zrefs.is_empty());
    }
}
