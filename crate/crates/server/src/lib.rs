//! HTTP API and operator CLI over a zsheet data directory.
//!
//! Every request except login carries a session token
//! (`Authorization: Bearer <token>`). Mutations run one at a time under a
//! write lock and append to the journal before answering.

pub mod cli;
pub mod csvio;
pub mod error;
pub mod routes;
pub mod session;
pub mod state;
pub mod verify;

pub use routes::router;
pub use state::AppState;
