//! The z-query sum: cells on every page matching a predicate path are
//! summed, and the total follows edits on those pages.

use zsheet::recalc::{Command, Workbook};
use zsheet::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut wb = Workbook::new();
    for p in ["/some/page/bleh/", "/some/page/blah/", "/some/thing/blurg/", "/another/page/"] {
        wb.commit("demo", Command::create(&Path::parse(p)?, None))?;
    }
    let set = |wb: &mut Workbook, p: &str, cells: &[(&str, &str)]| -> Result<(), Box<dyn std::error::Error>> {
        wb.commit("demo", Command::set(&Path::parse(p)?, cells)?)?;
        Ok(())
    };
    set(&mut wb, "/some/page/bleh/", &[("a1", "50"), ("b7", "4")])?;
    set(&mut wb, "/some/page/blah/", &[("a1", "10")])?;
    set(&mut wb, "/another/page/", &[("a3", "3"), ("a4", "=sum(1, 2, a3, /some/page/[a1 > 44]/b7)")])?;

    let out = Path::parse("/another/page/")?;
    let show = |wb: &Workbook| wb.site().pages[&out].value("a4".parse().unwrap());
    println!("a4 = {}", show(&wb));

    // blah now passes the predicate too
    set(&mut wb, "/some/page/blah/", &[("a1", "99"), ("b7", "5")])?;
    println!("a4 = {}", show(&wb));
    Ok(())
}
