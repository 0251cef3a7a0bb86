//! Hierarchical page paths.
//!
//! A page lives at a path such as `/accounts/2011/invoices/inv00000001/`.
//! The canonical text form always has a leading and trailing slash, is
//! lowercase, and uses only `[a-z0-9_-]` in its segments. The root page is
//! `/`. Paths order segment-wise, which keeps every subtree contiguous in a
//! sorted map.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("path `{0}` escapes above the root")]
    Escape(String),
    #[error("illegal path segment `{segment}` in `{raw}`")]
    IllegalSegment { raw: String, segment: String },
    #[error("empty path segment in `{0}`")]
    EmptySegment(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    segments: Vec<String>,
}

pub(crate) fn is_segment_char(c: char) -> bool {
    matches!(c, 'a'..='z' | '0'..='9' | '_' | '-')
}

pub(crate) fn valid_segment(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_segment_char)
}

impl Path {
    pub fn root() -> Self {
        Path::default()
    }

    /// Builds a path from already-canonical segments.
    ///
    /// Panics if a segment is not canonical; use [`canonicalize_path`] for
    /// untrusted input.
    pub fn from_segments<I, S>(segments: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        assert!(segments.iter().all(|s| valid_segment(s)), "non-canonical segment in {segments:?}");
        Path { segments }
    }

    /// Parses an absolute path (leading `/` optional, `.`/`..` resolved).
    pub fn parse(raw: &str) -> Result<Self, PathError> {
        canonicalize_path(raw, &Path::root())
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    pub fn is_root(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn parent(&self) -> Option<Path> {
        if self.is_root() {
            None
        } else {
            Some(Path { segments: self.segments[..self.segments.len() - 1].to_vec() })
        }
    }

    /// The first `depth` segments of this path.
    pub fn truncate(&self, depth: usize) -> Path {
        Path { segments: self.segments[..depth.min(self.depth())].to_vec() }
    }

    pub fn child(&self, segment: &str) -> Result<Path, PathError> {
        let seg = segment.to_ascii_lowercase();
        if !valid_segment(&seg) {
            return Err(PathError::IllegalSegment { raw: segment.to_string(), segment: seg });
        }
        let mut segments = self.segments.clone();
        segments.push(seg);
        Ok(Path { segments })
    }

    /// Walks `up` levels towards the root.
    pub fn ancestor(&self, up: usize) -> Option<Path> {
        (up <= self.depth()).then(|| self.truncate(self.depth() - up))
    }

    /// True when `self` equals `other` or is one of its ancestors.
    pub fn is_prefix_of(&self, other: &Path) -> bool {
        other.segments.starts_with(&self.segments)
    }

    /// This path and every ancestor, nearest first, ending with the root.
    pub fn self_and_ancestors(&self) -> impl Iterator<Item = Path> + '_ {
        (0..=self.depth()).rev().map(move |d| self.truncate(d))
    }
}

/// Resolves a path expression against `base`.
///
/// A leading `/` starts at the root; anything else (including `./` and
/// `../`) starts at `base`. The result is lowercase.
pub fn canonicalize_path(raw: &str, base: &Path) -> Result<Path, PathError> {
    let (mut segments, rest) = match raw.strip_prefix('/') {
        Some(rest) => (Vec::new(), rest),
        None => (base.segments.clone(), raw),
    };
    if rest.is_empty() {
        return Ok(Path { segments });
    }
    let pieces: Vec<&str> = rest.split('/').collect();
    let last = pieces.len() - 1;
    for (i, piece) in pieces.into_iter().enumerate() {
        match piece {
            "" if i == last => {}
            "" => return Err(PathError::EmptySegment(raw.to_string())),
            "." => {}
            ".." => {
                if segments.pop().is_none() {
                    return Err(PathError::Escape(raw.to_string()));
                }
            }
            other => {
                let seg = other.to_ascii_lowercase();
                if !valid_segment(&seg) {
                    return Err(PathError::IllegalSegment {
                        raw: raw.to_string(),
                        segment: other.to_string(),
                    });
                }
                segments.push(seg);
            }
        }
    }
    Ok(Path { segments })
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("/")?;
        for s in &self.segments {
            f.write_str(s)?;
            f.write_str("/")?;
        }
        Ok(())
    }
}

impl FromStr for Path {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Path::parse(s)
    }
}

impl Serialize for Path {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Path {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Path::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Path {
        Path::parse(s).unwrap()
    }

    #[test]
    fn lowercase_fold() {
        let got = canonicalize_path("/Accounts/2011/Invoices/", &p("/x/")).unwrap();
        assert_eq!(got.to_string(), "/accounts/2011/invoices/");
    }

    #[test]
    fn parent_resolution() {
        let got = canonicalize_path("../a4-page/", &p("/some/page/")).unwrap();
        assert_eq!(got.to_string(), "/some/a4-page/");
    }

    #[test]
    fn current_from_root() {
        assert_eq!(canonicalize_path("./x/", &Path::root()).unwrap().to_string(), "/x/");
    }

    #[test]
    fn escape_and_illegal() {
        assert!(matches!(canonicalize_path("../", &Path::root()), Err(PathError::Escape(_))));
        assert!(matches!(canonicalize_path("/a b/", &Path::root()), Err(PathError::IllegalSegment { .. })));
        assert!(matches!(canonicalize_path("/caf\u{e9}/", &Path::root()), Err(PathError::IllegalSegment { .. })));
        assert!(matches!(canonicalize_path("/a//b/", &Path::root()), Err(PathError::EmptySegment(_))));
    }

    #[test]
    fn root_forms() {
        assert_eq!(p("/").to_string(), "/");
        assert!(p("/").is_root());
        assert_eq!(p("/a").to_string(), "/a/");
    }

    #[test]
    fn segment_order_keeps_subtrees_contiguous() {
        let mut v = vec![p("/a-b/"), p("/a/b/"), p("/a/"), p("/b/")];
        v.sort();
        assert_eq!(v, vec![p("/a/"), p("/a/b/"), p("/a-b/"), p("/b/")]);
    }

    #[test]
    fn ancestors_nearest_first() {
        let got: Vec<String> = p("/a/b/").self_and_ancestors().map(|x| x.to_string()).collect();
        assert_eq!(got, vec!["/a/b/", "/a/", "/"]);
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(segs in prop::collection::vec("[a-zA-Z0-9_-]{1,6}", 0..6)) {
            let raw = if segs.is_empty() { "/".to_string() } else { format!("/{}/", segs.join("/")) };
            let once = canonicalize_path(&raw, &Path::root()).unwrap();
            let twice = canonicalize_path(&once.to_string(), &Path::root()).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(once.depth(), segs.len());
            prop_assert_eq!(once.to_string(), raw.to_ascii_lowercase());
        }
    }
}
