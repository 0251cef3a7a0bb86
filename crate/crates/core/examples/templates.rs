//! Saving a page as a template and stamping out copies.

use zsheet::recalc::{Command, Workbook};
use zsheet::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut wb = Workbook::new();
    let src = Path::parse("/invoice/")?;
    wb.commit("demo", Command::create(&src, None))?;
    wb.commit("demo", Command::set(&src, &[("a1", "Amount"), ("b1", "0"), ("b2", "=b1*1.2")])?)?;
    wb.commit("demo", Command::SaveTemplate { path: src, name: "invoice".into() })?;

    wb.commit("demo", Command::create(&Path::parse("/invoices/")?, None))?;
    for (n, amount) in [(1, "100"), (2, "250")] {
        let p = Path::parse(&format!("/invoices/inv{n:08}/"))?;
        wb.commit("demo", Command::create(&p, Some("invoice")))?;
        wb.commit("demo", Command::set(&p, &[("b1", amount)])?)?;
    }
    let total = Path::parse("/invoices/")?;
    wb.commit("demo", Command::set(&total, &[("a1", "=sum(/invoices/[true]/b2)")])?)?;
    println!("gross total {}", wb.site().pages[&total].value("a1".parse()?));
    Ok(())
}
