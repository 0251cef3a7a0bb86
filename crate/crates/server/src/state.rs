//! Shared server state: the workbook behind one lock, its audit index and
//! the data directory.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path as FsPath, PathBuf};
use std::sync::{RwLock, RwLockReadGuard, RwLockWriteGuard};

use chrono::Duration;
use zsheet::audit::AuditIndex;
use zsheet::recalc::{ReplayError, Workbook};

use crate::session::Sessions;

pub const LOCK_FILE: &str = "lock";

/// Exclusive hold on a data directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &FsPath) -> io::Result<DirLock> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                let holder = fs::read_to_string(&path).unwrap_or_default();
                Err(io::Error::new(
                    io::ErrorKind::WouldBlock,
                    format!(
                        "{} is locked by process {}; remove {} if that process is gone",
                        dir.display(),
                        holder.trim(),
                        path.display()
                    ),
                ))
            }
            Err(e) => Err(e),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub struct Book {
    pub wb: Workbook,
    pub audit: AuditIndex,
}

pub struct AppState {
    book: RwLock<Book>,
    pub sessions: Sessions,
    dir: Option<PathBuf>,
    /// Snapshot after every this many events.
    pub checkpoint_every: u64,
}

impl AppState {
    /// In-memory state with nothing on disk.
    pub fn ephemeral(wb: Workbook, secret: &[u8]) -> AppState {
        AppState {
            book: RwLock::new(Book { audit: AuditIndex::build(wb.events()), wb }),
            sessions: Sessions::new(secret, Duration::hours(12)),
            dir: None,
            checkpoint_every: 0,
        }
    }

    pub fn open(dir: &FsPath, secret: &[u8]) -> Result<AppState, ReplayError> {
        let wb = Workbook::open(dir)?;
        Ok(AppState { dir: Some(dir.to_path_buf()), checkpoint_every: 1000, ..AppState::ephemeral(wb, secret) })
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Book> {
        self.book.read().unwrap_or_else(|e| e.into_inner())
    }

    /// Runs `f` as the single writer, then indexes new events and
    /// checkpoints when due.
    pub fn write<T>(&self, f: impl FnOnce(&mut Workbook) -> T) -> T {
        let mut guard: RwLockWriteGuard<'_, Book> = self.book.write().unwrap_or_else(|e| e.into_inner());
        let book = &mut *guard;
        let before = book.wb.site().seq;
        let out = f(&mut book.wb);
        let after = book.wb.site().seq;
        if after != before {
            book.audit.sync(book.wb.events());
            if let Some(dir) = &self.dir {
                if self.checkpoint_every > 0 && after / self.checkpoint_every != before / self.checkpoint_every {
                    if let Err(e) = book.wb.checkpoint(dir) {
                        tracing::warn!("checkpoint failed: {e}");
                    }
                }
            }
        }
        out
    }

    /// Writes a snapshot of the current state, if backed by a directory.
    pub fn checkpoint(&self) -> io::Result<()> {
        match &self.dir {
            Some(dir) => self.read().wb.checkpoint(dir),
            None => Ok(()),
        }
    }
}
