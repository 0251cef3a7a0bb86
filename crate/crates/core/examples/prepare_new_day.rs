//! A create.button instantiates dated pages from templates.

use chrono::{TimeZone, Utc};
use zsheet::recalc::{Clock, Command, Workbook};
use zsheet::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut wb = Workbook::new();
    wb.set_clock(Clock::Fixed(Utc.with_ymd_and_hms(2011, 4, 21, 8, 0, 0).unwrap()));

    let day = Path::parse("/templates/day/")?;
    wb.commit("demo", Command::create(&day, None))?;
    wb.commit("demo", Command::set(&day, &[("a1", "Sales"), ("b1", "0")])?)?;
    wb.commit("demo", Command::SaveTemplate { path: day, name: "day_sheet".into() })?;

    let home = Path::parse("/some/page/")?;
    wb.commit("demo", Command::create(&home, None))?;
    let spec = "/some/page/[blank, date, yyyy]/[blank, date, mm]/[day_sheet, date, dddd]/";
    let button = format!("=create.button(\"Prepare New Day\", \"{spec}\")");
    wb.commit("demo", Command::set(&home, &[("b2", &button)])?)?;

    let before: Vec<Path> = wb.site().pages.keys().cloned().collect();
    let out = wb.commit("demo", Command::Instantiate { path: home, cell: "b2".parse()? })?;
    for p in wb.site().pages.keys().filter(|p| !before.contains(p)) {
        println!("created {p}");
    }
    println!("redirect {}", out.redirect.expect("buttons redirect"));
    Ok(())
}
