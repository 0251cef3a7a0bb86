//! A hierarchical spreadsheet engine.
//!
//! Pages live at paths like `/accounts/2011/invoices/inv00000001/`. Formulas
//! reach across the tree with path references (`/page/a4`, `!page!a4`,
//! `../sibling/b2`) and with z-references, whose bracketed segments are
//! predicates evaluated on each candidate page:
//!
//! ```text
//! =sum(1, 2, a3, /some/page/[a1 > 44]/b7)
//! ```
//!
//! Every mutation goes through [`recalc::Workbook::commit`], which updates
//! cached values incrementally and records one journal [`store::Event`].

pub mod access;
pub mod addr;
pub mod audit;
pub mod engine;
pub mod formula;
pub mod path;
pub mod recalc;
pub mod stdlib;
pub mod store;
pub mod value;
pub mod zquery;

pub use addr::{CellAddr, Range};
pub use path::{canonicalize_path, Path, PathError};
pub use value::{coerce_boolean, coerce_number, ErrorKind, Value};
