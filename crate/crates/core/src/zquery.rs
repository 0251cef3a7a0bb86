//! Z-query resolution: matching page paths segment by segment against a
//! pattern whose bracketed segments are predicates evaluated on each
//! candidate page.

use std::collections::HashMap;
use std::fmt;

use crate::addr::{CellAddr, Range};
use crate::engine::{evaluate_predicate, SiteAccess};
use crate::formula::ast::{Expr, ZAnchor, ZRef, ZSegment};
use crate::formula::print_expr;
use crate::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum PatternSegment<'a> {
    Literal(String),
    Predicate(&'a Expr),
}

/// A z-reference's page pattern, anchored at the root.
#[derive(Debug, Clone, PartialEq)]
pub struct ZPattern<'a> {
    segments: Vec<PatternSegment<'a>>,
}

impl<'a> ZPattern<'a> {
    pub fn new(segments: Vec<PatternSegment<'a>>) -> Self {
        ZPattern { segments }
    }

    /// Anchors a parsed z-reference at `base`. `None` when a relative
    /// anchor climbs above the root.
    pub fn resolve(zref: &'a ZRef, base: &Path) -> Option<Self> {
        let anchor = match zref.anchor {
            ZAnchor::Root => Path::root(),
            ZAnchor::Relative { up } => base.ancestor(up)?,
        };
        let mut segments: Vec<PatternSegment<'a>> =
            anchor.segments().iter().cloned().map(PatternSegment::Literal).collect();
        for seg in &zref.segments {
            segments.push(match seg {
                ZSegment::Literal(s) => PatternSegment::Literal(s.clone()),
                ZSegment::Predicate(p) => PatternSegment::Predicate(p),
            });
        }
        Some(ZPattern { segments })
    }

    pub fn segments(&self) -> &[PatternSegment<'a>] {
        &self.segments
    }

    /// Depth of the pages this pattern can match.
    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    /// The leading run of literal segments.
    pub fn literal_prefix(&self) -> Path {
        Path::from_segments(
            self.segments
                .iter()
                .map_while(|s| match s {
                    PatternSegment::Literal(l) => Some(l.clone()),
                    PatternSegment::Predicate(_) => None,
                }),
        )
    }
}

impl fmt::Display for ZPattern<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("/")?;
        for s in &self.segments {
            match s {
                PatternSegment::Literal(l) => write!(f, "{l}/")?,
                PatternSegment::Predicate(p) => write!(f, "[{}]/", print_expr(p))?,
            }
        }
        Ok(())
    }
}

/// Pages matching `pattern`, in canonical path order.
///
/// A page matches when it has exactly the pattern's depth, every literal
/// segment is equal, and every predicate evaluates true on the page whose
/// path ends at that predicate's position.
pub fn match_pages(pattern: &ZPattern<'_>, site: &mut dyn SiteAccess, now: f64, seed: u64) -> Vec<Path> {
    let prefix = pattern.literal_prefix();
    let candidates = site.pages_under(&prefix, pattern.depth());
    // interior predicates are shared by every candidate below them
    let mut memo: HashMap<(usize, Path), bool> = HashMap::new();
    let mut out = Vec::new();
    'candidates: for page in candidates {
        for (i, seg) in pattern.segments.iter().enumerate().skip(prefix.depth()) {
            match seg {
                PatternSegment::Literal(l) => {
                    if &page.segments()[i] != l {
                        continue 'candidates;
                    }
                }
                PatternSegment::Predicate(p) => {
                    let at = page.truncate(i + 1);
                    let hit = match memo.get(&(i, at.clone())) {
                        Some(hit) => *hit,
                        None => {
                            let hit = evaluate_predicate(p, &at, site, now, seed);
                            memo.insert((i, at), hit);
                            hit
                        }
                    };
                    if !hit {
                        continue 'candidates;
                    }
                }
            }
        }
        out.push(page);
    }
    out
}

/// Every (page, cell) a z-reference reads, path-major then row-major.
pub fn resolve_zref(zref: &ZRef, base: &Path, site: &mut dyn SiteAccess, now: f64, seed: u64) -> Vec<(Path, CellAddr)> {
    let Some(pattern) = ZPattern::resolve(zref, base) else {
        return Vec::new();
    };
    let target: Range = zref.target.range();
    match_pages(&pattern, site, now, seed)
        .into_iter()
        .flat_map(|p| target.iter().map(move |a| (p.clone(), a)))
        .collect()
}
