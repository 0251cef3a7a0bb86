//! A wikipage form: marked input cells are the only thing a data
//! inputter can change.

use std::collections::BTreeMap;

use zsheet::access::{commit_cells, render_view, wiki_attrs_from_form, wiki_submit, Capability};
use zsheet::recalc::{CellWrite, Command, Workbook};
use zsheet::store::{CellData, GrantChange, UserOp, ViewKind};
use zsheet::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut wb = Workbook::new();
    for op in [
        UserOp::AddUser { id: "maker".into(), salt: String::new(), hash: String::new() },
        UserOp::AddMember { group: "admin".into(), user: "maker".into() },
        UserOp::AddUser { id: "clerk".into(), salt: String::new(), hash: String::new() },
        UserOp::AddGroup { name: "clerks".into() },
        UserOp::AddMember { group: "clerks".into(), user: "clerk".into() },
    ] {
        wb.commit("setup", Command::UserAdmin(op))?;
    }
    let form = Path::parse("/orders/")?;
    wb.commit("maker", Command::create(&form, None))?;
    let change = GrantChange { view: ViewKind::Wikipage, group: "clerks".into(), default: false };
    wb.commit("maker", Command::Grant { path: form.clone(), change })?;

    let input = |cell: &str, control: &str| -> Result<CellWrite, Box<dyn std::error::Error>> {
        let addr = cell.parse()?;
        let attrs = wiki_attrs_from_form(wb.site(), &form, addr, control)?;
        Ok(CellWrite { path: form.clone(), addr, data: CellData { attrs, ..Default::default() } })
    };
    let writes = vec![
        input("b1", "=form.input(\"order\")")?,
        input("b2", "=form.select(\"small,large\",\"order\")")?,
        CellWrite::input(&form, "a1".parse()?, "Quantity")?,
        CellWrite::input(&form, "c1".parse()?, "=b1*if(b2=\"large\",2,1)")?,
    ];
    commit_cells(&mut wb, "maker", &form, writes)?;

    let doc = render_view(&wb, "clerk", &form, ViewKind::Wikipage, None)?;
    for c in &doc.cells {
        let mark = if c.capability == Capability::Editable { "input" } else { "shown" };
        println!("{} {mark} {}", c.cell, c.value);
    }

    let submit = |pairs: &[(&str, &str)]| pairs.iter().map(|(c, v)| (c.parse().unwrap(), v.to_string())).collect::<BTreeMap<_, _>>();
    wiki_submit(&mut wb, "clerk", &form, "order", &submit(&[("b1", "12"), ("b2", "large")]))?;
    println!("c1 = {}", wb.site().pages[&form].value("c1".parse()?));

    let refused = wiki_submit(&mut wb, "clerk", &form, "order", &submit(&[("c1", "0")]));
    println!("writing c1: {}", refused.unwrap_err());
    Ok(())
}
