//! Journal and snapshot files.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Cell, CellData, Event, Page, Perms, Site, Template, User, ViewSettings};
use crate::addr::CellAddr;
use crate::path::Path;
use crate::value::Value;

pub const JOURNAL_FILE: &str = "journal.log";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

const HEADER: &str = r#"{"journal":"zsheet","version":1}"#;

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("journal io: {0}")]
    Io(#[from] io::Error),
    #[error("journal line {line}: bad header")]
    Header { line: usize },
    #[error("journal line {line} (after seq {after}): {message}")]
    Corrupt { line: usize, after: u64, message: String },
    #[error("journal line {line}: expected seq {expected}, found {found}")]
    Gap { line: usize, expected: u64, found: u64 },
}

impl JournalError {
    /// Last good seq before the failure, when known.
    pub fn position(&self) -> Option<u64> {
        match self {
            JournalError::Corrupt { after, .. } => Some(*after),
            JournalError::Gap { expected, .. } => Some(expected - 1),
            _ => None,
        }
    }
}

/// Appends events, one line each, synced before returning.
#[derive(Debug)]
pub struct JournalWriter {
    file: File,
    path: PathBuf,
}

impl JournalWriter {
    /// Opens or creates the journal in `dir`, writing the header to a new file.
    pub fn open(dir: &FsPath) -> io::Result<JournalWriter> {
        let path = dir.join(JOURNAL_FILE);
        let fresh = fs::metadata(&path).map(|m| m.len() == 0).unwrap_or(true);
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        if fresh {
            writeln!(file, "{HEADER}")?;
            file.sync_data()?;
        }
        Ok(JournalWriter { file, path })
    }

    pub fn append(&mut self, e: &Event) -> io::Result<()> {
        let mut line = e.to_line();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()
    }

    pub fn path(&self) -> &FsPath {
        &self.path
    }
}

/// Reads every event in `dir`'s journal. A missing file is an empty journal.
pub fn read_journal(dir: &FsPath) -> Result<Vec<Event>, JournalError> {
    let path = dir.join(JOURNAL_FILE);
    let file = match File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut events = Vec::new();
    let mut reader = BufReader::new(file);
    let mut buf = String::new();
    let mut line = 0;
    loop {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            break;
        }
        line += 1;
        let after = events.last().map_or(0, |e: &Event| e.seq);
        if !buf.ends_with('\n') {
            return Err(JournalError::Corrupt { line, after, message: "truncated line".into() });
        }
        let text = buf.trim_end_matches(['\n', '\r']);
        if line == 1 {
            if text != HEADER {
                return Err(JournalError::Header { line });
            }
            continue;
        }
        let e = Event::from_line(text).map_err(|e| JournalError::Corrupt { line, after, message: e.0 })?;
        if e.seq != after + 1 {
            return Err(JournalError::Gap { line, expected: after + 1, found: e.seq });
        }
        events.push(e);
    }
    Ok(events)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotCell {
    pub data: CellData,
    #[serde(default)]
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotPage {
    pub path: Path,
    pub cells: BTreeMap<CellAddr, SnapshotCell>,
    #[serde(default, skip_serializing_if = "ViewSettings::is_default")]
    pub views: ViewSettings,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub perms: Perms,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_origin: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotGroup {
    pub name: String,
    pub members: Vec<String>,
}

/// The whole site at one seq.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<String>,
    pub pages: Vec<SnapshotPage>,
    pub templates: Vec<Template>,
    pub groups: Vec<SnapshotGroup>,
    pub counters: BTreeMap<Path, u64>,
    #[serde(default)]
    pub users: Vec<User>,
}

impl Snapshot {
    pub fn from_site(site: &Site) -> Snapshot {
        Snapshot {
            version: 1,
            seq: site.seq,
            ts: site.ts.clone(),
            pages: site
                .pages
                .values()
                .map(|p| SnapshotPage {
                    path: p.path.clone(),
                    cells: p
                        .cells
                        .iter()
                        .map(|(a, c)| (*a, SnapshotCell { data: c.data.clone(), value: c.value.clone() }))
                        .collect(),
                    views: p.views.clone(),
                    perms: p.perms.clone(),
                    template_origin: p.template_origin.clone(),
                })
                .collect(),
            templates: site.templates.values().cloned().collect(),
            groups: site
                .groups
                .iter()
                .map(|(name, m)| SnapshotGroup { name: name.clone(), members: m.iter().cloned().collect() })
                .collect(),
            counters: site.counters.clone(),
            users: site.users.values().cloned().collect(),
        }
    }

    /// Rebuilds the site with cached values as stored.
    pub fn into_site(self) -> Site {
        let mut site = Site::new();
        site.seq = self.seq;
        site.ts = self.ts;
        for sp in self.pages {
            let mut page = Page::new(sp.path.clone());
            page.views = sp.views;
            page.perms = sp.perms;
            page.template_origin = sp.template_origin;
            for (a, sc) in sp.cells {
                let mut cell = Cell::new(sc.data);
                cell.value = sc.value;
                page.cells.insert(a, cell);
            }
            site.pages.insert(sp.path, page);
        }
        site.templates = self.templates.into_iter().map(|t| (t.name.clone(), t)).collect();
        for g in self.groups {
            site.groups.insert(g.name, g.members.into_iter().collect());
        }
        site.counters = self.counters;
        site.users = self.users.into_iter().map(|u| (u.id.clone(), u)).collect();
        site
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshots always serialize")
    }

    /// Writes `snapshot.json` in `dir` via a temporary file and rename.
    pub fn write_atomic(&self, dir: &FsPath) -> io::Result<()> {
        let tmp = dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            f.write_all(self.to_json().as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, dir.join(SNAPSHOT_FILE))
    }

    /// Reads `snapshot.json` from `dir`, `None` if absent.
    pub fn read(dir: &FsPath) -> io::Result<Option<Snapshot>> {
        let text = match fs::read_to_string(dir.join(SNAPSHOT_FILE)) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        let snap: Snapshot =
            serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        if snap.version != 1 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, format!("snapshot version {}", snap.version)));
        }
        Ok(Some(snap))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Payload;

    fn event(seq: u64) -> Event {
        Event {
            seq,
            ts: "2011-04-21T00:00:00.000Z".into(),
            user: "u".into(),
            path: Path::root(),
            payload: Payload::SaveTemplate { name: format!("t{seq}") },
        }
    }

    #[test]
    fn journal_round_trip_and_damage() {
        let dir = tempfile::tempdir().unwrap();
        assert!(read_journal(dir.path()).unwrap().is_empty());
        let mut w = JournalWriter::open(dir.path()).unwrap();
        for s in 1..=3 {
            w.append(&event(s)).unwrap();
        }
        drop(w);
        let mut w = JournalWriter::open(dir.path()).unwrap();
        w.append(&event(4)).unwrap();
        assert_eq!(read_journal(dir.path()).unwrap(), (1..=4).map(event).collect::<Vec<_>>());

        let path = dir.path().join(JOURNAL_FILE);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() - 5]).unwrap();
        let err = read_journal(dir.path()).unwrap_err();
        assert_eq!(err.position(), Some(3));
        assert!(err.to_string().contains("line 5"), "{err}");

        let lines: Vec<&str> = text.lines().collect();
        fs::write(&path, format!("{}\n{}\n{}\n", lines[0], lines[1], lines[3])).unwrap();
        assert!(matches!(read_journal(dir.path()), Err(JournalError::Gap { expected: 2, found: 3, .. })));
    }

    #[test]
    fn snapshot_round_trip() {
        let mut site = Site::new();
        let p = Path::parse("/a/").unwrap();
        site.create_page(&p, None).unwrap();
        let page = site.page_mut(&p).unwrap();
        page.put("a1".parse().unwrap(), CellData::literal(2.0));
        page.put("a2".parse().unwrap(), CellData::from_input("=a1*2").unwrap());
        page.cells.get_mut(&"a2".parse().unwrap()).unwrap().value = Value::Number(4.0);
        site.groups.insert("staff".into(), ["bob".to_string()].into());
        site.counters.insert(p.clone(), 7);
        site.seq = 9;
        let snap = Snapshot::from_site(&site);
        let json = snap.to_json();
        assert!(json.starts_with(r#"{"version":1,"seq":9,"pages":["#), "{json}");
        let dir = tempfile::tempdir().unwrap();
        snap.write_atomic(dir.path()).unwrap();
        let back = Snapshot::read(dir.path()).unwrap().unwrap();
        assert_eq!(back, snap);
        assert_eq!(Snapshot::from_site(&back.into_site()), snap);
    }
}
