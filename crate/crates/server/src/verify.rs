//! Offline integrity check of a data directory.

use std::path::Path as FsPath;

use zsheet::recalc::Workbook;
use zsheet::store::{read_journal, Snapshot};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    /// Unreadable or damaged files.
    #[error("{0}")]
    Data(String),
    /// Files that read fine but disagree with a replay.
    #[error("mismatch{}: {message}", .seq.map(|s| format!(" at seq {s}")).unwrap_or_default())]
    Mismatch { seq: Option<u64>, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub events: usize,
    pub snapshot_seq: Option<u64>,
    pub pages: usize,
}

/// Replays the journal from empty, checking every event re-derives
/// byte-identically, that the snapshot equals the replayed state at its
/// seq, and that every cached value equals a full recompute.
pub fn verify_dir(dir: &FsPath) -> Result<Report, VerifyError> {
    let events = read_journal(dir).map_err(|e| {
        let at = e.position().map(|s| format!(" (last good seq {s})")).unwrap_or_default();
        VerifyError::Data(format!("{e}{at}"))
    })?;
    let snap = Snapshot::read(dir).map_err(|e| VerifyError::Data(format!("snapshot: {e}")))?;
    let last = events.last().map_or(0, |e| e.seq);
    if let Some(s) = &snap {
        if s.seq > last {
            return Err(VerifyError::Mismatch {
                seq: Some(s.seq),
                message: format!("snapshot is at seq {} but the journal ends at {last}", s.seq),
            });
        }
    }
    let check_snapshot = |wb: &Workbook| match &snap {
        Some(s) if s.seq == wb.site().seq && wb.snapshot().to_json() != s.to_json() => Err(VerifyError::Mismatch {
            seq: Some(s.seq),
            message: "snapshot differs from the replayed state".into(),
        }),
        _ => Ok(()),
    };
    let mut wb = Workbook::new();
    check_snapshot(&wb)?;
    for e in &events {
        wb.apply_event(e).map_err(|err| VerifyError::Mismatch { seq: err.seq().or(Some(e.seq)), message: err.to_string() })?;
        check_snapshot(&wb)?;
    }
    if let Some(((p, a), cached, fresh)) = wb.inconsistencies().into_iter().next() {
        return Err(VerifyError::Mismatch {
            seq: Some(last),
            message: format!("{p}{a} caches {cached:?} but recomputes to {fresh:?}"),
        });
    }
    Ok(Report { events: events.len(), snapshot_seq: snap.map(|s| s.seq), pages: wb.site().pages.len() })
}
