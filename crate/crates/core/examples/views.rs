//! Who sees what: grants, inheritance down the tree, and the cells each
//! view exposes.

use zsheet::access::{check, permitted_views, render_view};
use zsheet::recalc::{Command, Workbook};
use zsheet::store::{GrantChange, UserOp, ViewKind};
use zsheet::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut wb = Workbook::new();
    for op in [
        UserOp::AddUser { id: "ana".into(), salt: String::new(), hash: String::new() },
        UserOp::AddUser { id: "ben".into(), salt: String::new(), hash: String::new() },
        UserOp::AddGroup { name: "makers".into() },
        UserOp::AddGroup { name: "readers".into() },
        UserOp::AddMember { group: "makers".into(), user: "ana".into() },
        UserOp::AddMember { group: "readers".into(), user: "ben".into() },
    ] {
        wb.commit("setup", Command::UserAdmin(op))?;
    }
    let top = Path::parse("/reports/")?;
    let child = Path::parse("/reports/2011/")?;
    wb.commit("setup", Command::create(&top, None))?;
    wb.commit("setup", Command::create(&child, None))?;
    wb.commit("setup", Command::set(&child, &[("a1", "Total"), ("b1", "=6*7")])?)?;
    for (view, group) in [(ViewKind::Spreadsheet, "makers"), (ViewKind::Webpage, "readers")] {
        let change = GrantChange { view, group: group.into(), default: false };
        wb.commit("setup", Command::Grant { path: top.clone(), change })?;
    }

    for user in ["ana", "ben", "nobody"] {
        println!("{user:<7} may open {:?} on {child}", permitted_views(wb.site(), user, &child));
    }
    println!("ben may use the table view: {}", check(wb.site(), "ben", &child, ViewKind::Table));

    let doc = render_view(&wb, "ben", &child, ViewKind::Webpage, None)?;
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}
