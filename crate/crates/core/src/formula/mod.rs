//! The formula language: desktop-spreadsheet expressions extended with
//! page references (`/page/a4`, `../x/a1`, `!page!a4`) and z-references
//! (`/some/page/[a1 > 44]/b7`).

pub mod ast;
mod parser;
mod print;
mod refs;

pub use ast::Expr;
pub use parser::{parse, parse_predicate, ParseError};
pub use print::{print, print_expr};
pub use refs::{collect_refs, Refs, StaticRef};
