//! Inserting and deleting rows rewrites references across the site.

use zsheet::recalc::{Command, Workbook};
use zsheet::store::StructuralOp;
use zsheet::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut wb = Workbook::new();
    let p = Path::parse("/sheet/")?;
    let q = Path::parse("/report/")?;
    wb.commit("demo", Command::create(&p, None))?;
    wb.commit("demo", Command::create(&q, None))?;
    wb.commit("demo", Command::set(&p, &[("a1", "1"), ("a2", "2"), ("c3", "=a1+a2")])?)?;
    wb.commit("demo", Command::set(&q, &[("a1", "=/sheet/a2*10")])?)?;

    wb.commit("demo", Command::Structural { path: p.clone(), op: StructuralOp::InsertRows, at: 2, count: 1 })?;
    println!("c4 holds {}", wb.site().pages[&p].data("c4".parse()?).input_text());
    println!("report a1 holds {}", wb.site().pages[&q].data("a1".parse()?).input_text());

    wb.commit("demo", Command::Structural { path: p.clone(), op: StructuralOp::DeleteRows, at: 3, count: 1 })?;
    println!("after deleting row 3, c3 = {}", wb.site().pages[&p].value("c3".parse()?));
    Ok(())
}
