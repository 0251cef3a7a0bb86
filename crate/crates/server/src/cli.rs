//! The `zsheet` operator command.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead};
use std::net::SocketAddr;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::RngCore;
use zsheet::access::auth;
use zsheet::path::{canonicalize_path, Path};
use zsheet::recalc::{Command, CommitError, Workbook};
use zsheet::store::{GrantChange, UserOp, ViewKind};

use crate::state::{AppState, DirLock};
use crate::{csvio, routes, verify};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

/// Events from this command are attributed to this user id.
pub const CLI_USER: &str = "cli";

#[derive(Parser, Debug)]
#[command(name = "zsheet", version, about = "Hierarchical spreadsheet server and operator tool")]
pub struct Cli {
    /// Data directory holding the journal and snapshot.
    #[arg(long, env = "HN_DATA_DIR", default_value = "data", global = true)]
    pub data_dir: PathBuf,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Run the HTTP server.
    Serve {
        #[arg(long, env = "HN_PORT", default_value_t = 8642)]
        port: u16,
        #[arg(long, env = "HN_BIND", default_value = "127.0.0.1")]
        bind: String,
    },
    /// Add a user. The password comes from --password, HN_PASSWORD or the
    /// first line of stdin.
    Useradd {
        id: String,
        #[arg(long, env = "HN_PASSWORD", hide_env_values = true)]
        password: Option<String>,
    },
    Groupadd {
        name: String,
    },
    /// Add a user to a group.
    Member {
        group: String,
        user: String,
    },
    /// Grant a view of a page (and its subtree) to a group.
    Grant {
        view: String,
        path: String,
        group: String,
        /// Also make this the page's preferred view.
        #[arg(long)]
        default: bool,
    },
    /// Load a CSV file into a page in one commit.
    Import {
        path: String,
        file: PathBuf,
    },
    /// Write a page's cached values as CSV.
    Export {
        path: String,
        file: PathBuf,
    },
    /// Replay the journal and compare with the snapshot.
    Verify,
}

#[derive(Debug)]
struct Fail(i32, String);

fn usage(m: impl ToString) -> Fail {
    Fail(EXIT_USAGE, m.to_string())
}

fn data(m: impl ToString) -> Fail {
    Fail(EXIT_DATA, m.to_string())
}

fn page_arg(raw: &str) -> Result<Path, Fail> {
    canonicalize_path(raw, &Path::root()).map_err(|e| usage(format!("bad path `{raw}`: {e}")))
}

/// Opens the data directory for a one-shot change.
fn open(dir: &FsPath) -> Result<(DirLock, Workbook), Fail> {
    let lock = DirLock::acquire(dir).map_err(data)?;
    let wb = Workbook::open(dir).map_err(|e| data(format!("cannot open {}: {e}", dir.display())))?;
    Ok((lock, wb))
}

fn commit(dir: &FsPath, cmd: Command) -> Result<(), Fail> {
    let (_lock, mut wb) = open(dir)?;
    wb.commit(CLI_USER, cmd).map_err(|e: CommitError| data(e))?;
    Ok(())
}

fn read_password() -> Result<String, Fail> {
    let mut line = String::new();
    io::stdin().lock().read_line(&mut line).map_err(data)?;
    let pw = line.trim_end_matches(['\n', '\r']).to_string();
    if pw.is_empty() {
        return Err(usage("no password given (use --password, HN_PASSWORD or stdin)"));
    }
    Ok(pw)
}

fn secret() -> Vec<u8> {
    match std::env::var("HN_SECRET") {
        Ok(s) if !s.is_empty() => s.into_bytes(),
        _ => {
            tracing::warn!("HN_SECRET is not set; sessions will not survive a restart");
            let mut k = vec![0u8; 32];
            rand::rng().fill_bytes(&mut k);
            k
        }
    }
}

fn serve(dir: &FsPath, bind: &str, port: u16) -> Result<(), Fail> {
    let _lock = DirLock::acquire(dir).map_err(data)?;
    let state = Arc::new(AppState::open(dir, &secret()).map_err(|e| data(format!("cannot open {}: {e}", dir.display())))?);
    let addr: SocketAddr = format!("{bind}:{port}").parse().map_err(|e| usage(format!("bad address: {e}")))?;
    let rt = tokio::runtime::Runtime::new().map_err(data)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(data)?;
        tracing::info!("serving {} on http://{addr}", dir.display());
        axum::serve(listener, routes::router(state.clone()))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(data)
    })?;
    state.checkpoint().map_err(data)?;
    tracing::info!("stopped");
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Fail> {
    let dir = cli.data_dir.as_path();
    match cli.cmd {
        Cmd::Serve { port, bind } => serve(dir, &bind, port),
        Cmd::Useradd { id, password } => {
            let pw = match password {
                Some(p) => p,
                None => read_password()?,
            };
            commit(dir, Command::UserAdmin(auth::add_user_op(&id, &pw)))
        }
        Cmd::Groupadd { name } => commit(dir, Command::UserAdmin(UserOp::AddGroup { name })),
        Cmd::Member { group, user } => commit(dir, Command::UserAdmin(UserOp::AddMember { group, user })),
        Cmd::Grant { view, path, group, default } => {
            let view: ViewKind = view.parse().map_err(usage)?;
            let path = page_arg(&path)?;
            commit(dir, Command::Grant { path, change: GrantChange { view, group, default } })
        }
        Cmd::Import { path, file } => {
            let path = page_arg(&path)?;
            let f = File::open(&file).map_err(|e| data(format!("{}: {e}", file.display())))?;
            let (_lock, mut wb) = open(dir)?;
            csvio::import(&mut wb, CLI_USER, &path, io::BufReader::new(f)).map_err(data)?;
            Ok(())
        }
        Cmd::Export { path, file } => {
            let path = page_arg(&path)?;
            let (_lock, wb) = open(dir)?;
            let f = File::create(&file).map_err(|e| data(format!("{}: {e}", file.display())))?;
            csvio::export(&wb, &path, f).map_err(data)
        }
        Cmd::Verify => {
            let _lock = DirLock::acquire(dir).map_err(data)?;
            match verify::verify_dir(dir) {
                Ok(r) => {
                    println!(
                        "ok: {} events, {} pages, snapshot {}",
                        r.events,
                        r.pages,
                        r.snapshot_seq.map_or("none".to_string(), |s| format!("at seq {s}"))
                    );
                    Ok(())
                }
                Err(e @ verify::VerifyError::Data(_)) => Err(data(e)),
                Err(e) => Err(Fail(EXIT_MISMATCH, e.to_string())),
            }
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(Fail(code, msg)) => {
            eprintln!("zsheet: {msg}");
            code
        }
    }
}
