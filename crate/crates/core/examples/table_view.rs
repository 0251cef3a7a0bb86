//! The table view: the used range read as a header row plus records.

use std::collections::BTreeMap;

use zsheet::access::{render_view, table_append, table_delete, table_update};
use zsheet::recalc::{Command, Workbook};
use zsheet::store::{UserOp, ViewKind};
use zsheet::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut wb = Workbook::new();
    wb.commit("setup", Command::UserAdmin(UserOp::AddUser { id: "ops".into(), salt: String::new(), hash: String::new() }))?;
    wb.commit("setup", Command::UserAdmin(UserOp::AddMember { group: "admin".into(), user: "ops".into() }))?;
    let p = Path::parse("/stock/")?;
    wb.commit("ops", Command::create(&p, None))?;
    wb.commit("ops", Command::set(&p, &[("a1", "item"), ("b1", "qty"), ("a2", "bolts"), ("b2", "40")])?)?;

    let row = |pairs: &[(&str, &str)]| pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<BTreeMap<_, _>>();
    table_append(&mut wb, "ops", &p, &row(&[("item", "nuts"), ("qty", "25")]))?;
    table_append(&mut wb, "ops", &p, &row(&[("item", "washers"), ("b", "90")]))?;
    table_update(&mut wb, "ops", &p, 1, &row(&[("qty", "38")]))?;
    table_delete(&mut wb, "ops", &p, 2)?;

    let doc = render_view(&wb, "ops", &p, ViewKind::Table, None)?;
    let table = doc.table.expect("page has cells");
    println!("{} {:?}", table.range, table.header);
    for r in table.rows {
        let values: Vec<String> = r.values.iter().map(|v| v.to_string()).collect();
        println!("#{} (row {}) {}", r.index, r.row, values.join(" | "));
    }
    Ok(())
}
