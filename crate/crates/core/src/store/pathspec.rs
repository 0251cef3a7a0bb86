//! Templated path specs used by `create.button`:
//! `/some/page/[blank, date, yyyy]/[blank, date, mm]/[day_sheet, date, dddd]/`.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, NaiveDateTime};
use thiserror::Error;

use crate::path::{valid_segment, Path};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("path spec: {0}")]
pub struct SpecError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DateToken {
    /// Four-digit year.
    Yyyy,
    /// Lowercase three-letter month name.
    Mm,
    /// Day of month, no padding.
    Dddd,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecSource {
    Date(DateToken),
    /// Prefix followed by an 8-digit counter scoped to the parent path.
    Incr(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecSegment {
    Literal(String),
    Templated { template: String, source: SpecSource },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSpec {
    /// `None` for a root-absolute spec, otherwise levels up from the base.
    pub up: Option<usize>,
    pub segments: Vec<SpecSegment>,
}

const MONTHS: [&str; 12] = ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"];

impl PathSpec {
    pub fn parse(text: &str) -> Result<PathSpec, SpecError> {
        let mut rest = text.trim();
        let up = if let Some(r) = rest.strip_prefix('/') {
            rest = r;
            None
        } else {
            let mut up = 0;
            loop {
                if let Some(r) = rest.strip_prefix("../") {
                    up += 1;
                    rest = r;
                } else if let Some(r) = rest.strip_prefix("./") {
                    rest = r;
                } else {
                    break;
                }
            }
            Some(up)
        };
        let mut segments = Vec::new();
        while !rest.is_empty() {
            let (seg, tail) = if rest.starts_with('[') {
                let close = rest.find(']').ok_or_else(|| SpecError("unclosed `[`".into()))?;
                let tail = &rest[close + 1..];
                if !(tail.is_empty() || tail.starts_with('/')) {
                    return Err(SpecError("`]` must end a segment".into()));
                }
                (templated(&rest[1..close])?, tail)
            } else {
                let end = rest.find('/').unwrap_or(rest.len());
                let lit = rest[..end].to_ascii_lowercase();
                if !valid_segment(&lit) {
                    return Err(SpecError(format!("illegal segment `{}`", &rest[..end])));
                }
                (SpecSegment::Literal(lit), &rest[end..])
            };
            segments.push(seg);
            rest = tail.strip_prefix('/').unwrap_or(tail);
        }
        if segments.is_empty() {
            return Err(SpecError("empty spec".into()));
        }
        Ok(PathSpec { up, segments })
    }
}

fn templated(inner: &str) -> Result<SpecSegment, SpecError> {
    let parts: Vec<String> = inner.split(',').map(|p| p.trim().to_ascii_lowercase()).collect();
    let [template, source, fmt] = parts.as_slice() else {
        return Err(SpecError(format!("expected [template, source, format], got `[{inner}]`")));
    };
    if !valid_segment(template) {
        return Err(SpecError(format!("illegal template name `{template}`")));
    }
    let source = match source.as_str() {
        "date" => SpecSource::Date(match fmt.as_str() {
            "yyyy" => DateToken::Yyyy,
            "mm" => DateToken::Mm,
            "dddd" => DateToken::Dddd,
            other => return Err(SpecError(format!("unknown date token `{other}`"))),
        }),
        "incr" => {
            if !fmt.is_empty() && !valid_segment(fmt) {
                return Err(SpecError(format!("illegal counter prefix `{fmt}`")));
            }
            SpecSource::Incr(fmt.clone())
        }
        other => return Err(SpecError(format!("unknown source `{other}`"))),
    };
    Ok(SpecSegment::Templated { template: template.clone(), source })
}

impl fmt::Display for PathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.up {
            None => f.write_str("/")?,
            Some(0) => f.write_str("./")?,
            Some(n) => (0..n).try_for_each(|_| f.write_str("../"))?,
        }
        for s in &self.segments {
            match s {
                SpecSegment::Literal(l) => write!(f, "{l}/")?,
                SpecSegment::Templated { template, source } => {
                    let (src, fmt) = match source {
                        SpecSource::Date(DateToken::Yyyy) => ("date", "yyyy"),
                        SpecSource::Date(DateToken::Mm) => ("date", "mm"),
                        SpecSource::Date(DateToken::Dddd) => ("date", "dddd"),
                        SpecSource::Incr(p) => ("incr", p.as_str()),
                    };
                    write!(f, "[{template}, {src}, {fmt}]/")?
                }
            }
        }
        Ok(())
    }
}

/// Result of expanding a spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    /// Pages to create, outermost first, with their templates.
    pub create: Vec<(Path, String)>,
    /// The page the final segment names.
    pub redirect: Path,
    /// Counters advanced by `incr` segments (new values).
    pub counters: BTreeMap<Path, u64>,
}

/// Expands `spec` at `now`. Templated segments whose page already exists
/// are skipped; literal segments never create pages.
pub fn expand_path_spec(
    spec: &PathSpec,
    base: &Path,
    now: NaiveDateTime,
    counters: &BTreeMap<Path, u64>,
    exists: &dyn Fn(&Path) -> bool,
) -> Result<Expansion, SpecError> {
    let mut path = match spec.up {
        None => Path::root(),
        Some(up) => base.ancestor(up).ok_or_else(|| SpecError("spec climbs above the root".into()))?,
    };
    let mut create = Vec::new();
    let mut advanced = BTreeMap::new();
    for seg in &spec.segments {
        let (name, template) = match seg {
            SpecSegment::Literal(l) => (l.clone(), None),
            SpecSegment::Templated { template, source: SpecSource::Date(tok) } => {
                let name = match tok {
                    DateToken::Yyyy => format!("{:04}", now.year()),
                    DateToken::Mm => MONTHS[now.month0() as usize].to_string(),
                    DateToken::Dddd => now.day().to_string(),
                };
                (name, Some(template))
            }
            SpecSegment::Templated { template, source: SpecSource::Incr(prefix) } => {
                let mut n = advanced.get(&path).or_else(|| counters.get(&path)).copied().unwrap_or(0);
                let name = loop {
                    n += 1;
                    let name = format!("{prefix}{n:08}");
                    let candidate = path.child(&name).map_err(|e| SpecError(e.to_string()))?;
                    if !exists(&candidate) {
                        break name;
                    }
                };
                advanced.insert(path.clone(), n);
                (name, Some(template))
            }
        };
        path = path.child(&name).map_err(|e| SpecError(e.to_string()))?;
        if let Some(t) = template {
            if !exists(&path) {
                create.push((path.clone(), t.clone()));
            }
        }
    }
    Ok(Expansion { create, redirect: path, counters: advanced })
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;

    fn p(s: &str) -> Path {
        Path::parse(s).unwrap()
    }

    fn day(y: i32, m: u32, d: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(9, 30, 0).unwrap()
    }

    const NEW_DAY: &str = "/some/page/[blank, date, yyyy]/[blank, date, mm]/[day_sheet, date, dddd]/";

    #[test]
    fn prepare_new_day() {
        let spec = PathSpec::parse(NEW_DAY).unwrap();
        let x = expand_path_spec(&spec, &p("/x/"), day(2011, 4, 21), &BTreeMap::new(), &|_| false).unwrap();
        assert_eq!(
            x.create,
            vec![
                (p("/some/page/2011/"), "blank".to_string()),
                (p("/some/page/2011/apr/"), "blank".to_string()),
                (p("/some/page/2011/apr/21/"), "day_sheet".to_string()),
            ]
        );
        assert_eq!(x.redirect.to_string(), "/some/page/2011/apr/21/");
        let existing = [p("/some/page/2011/"), p("/some/page/2011/apr/")];
        let x = expand_path_spec(&spec, &p("/x/"), day(2011, 4, 22), &BTreeMap::new(), &|q| existing.contains(q))
            .unwrap();
        assert_eq!(x.create, vec![(p("/some/page/2011/apr/22/"), "day_sheet".to_string())]);
    }

    #[test]
    fn literal_only() {
        let spec = PathSpec::parse("/reports/").unwrap();
        let x = expand_path_spec(&spec, &p("/"), day(2011, 1, 1), &BTreeMap::new(), &|_| false).unwrap();
        assert!(x.create.is_empty());
        assert_eq!(x.redirect, p("/reports/"));
    }

    #[test]
    fn counters() {
        let spec = PathSpec::parse("/accounts/2011/invoices/[invoice, incr, inv]/").unwrap();
        let parent = p("/accounts/2011/invoices/");
        let x = expand_path_spec(&spec, &p("/"), day(2011, 1, 1), &BTreeMap::new(), &|_| false).unwrap();
        assert_eq!(x.redirect, p("/accounts/2011/invoices/inv00000001/"));
        assert_eq!(x.counters, BTreeMap::from([(parent.clone(), 1)]));
        let counters = BTreeMap::from([(parent.clone(), 1)]);
        let taken = p("/accounts/2011/invoices/inv00000002/");
        let x = expand_path_spec(&spec, &p("/"), day(2011, 1, 1), &counters, &|q| *q == taken).unwrap();
        assert_eq!(x.redirect, p("/accounts/2011/invoices/inv00000003/"));
    }

    #[test]
    fn relative_and_errors() {
        let spec = PathSpec::parse("./[blank, date, yyyy]").unwrap();
        let x = expand_path_spec(&spec, &p("/log/"), day(1999, 12, 31), &BTreeMap::new(), &|_| false).unwrap();
        assert_eq!(x.redirect, p("/log/1999/"));
        assert_eq!(spec.to_string(), "./[blank, date, yyyy]/");
        assert!(PathSpec::parse("/a/[blank, date, yy]/").is_err());
        assert!(PathSpec::parse("/a/[blank, when, yyyy]/").is_err());
        assert!(PathSpec::parse("/a/[blank, date]/").is_err());
        assert!(PathSpec::parse("/A B/").is_err());
        assert!(PathSpec::parse("").is_err());
        assert_eq!(PathSpec::parse(NEW_DAY).unwrap().to_string(), NEW_DAY);
    }
}
