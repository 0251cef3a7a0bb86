//! The journal is the store: reopen a data directory, replay it from
//! scratch, and resume from a checkpoint.

use zsheet::recalc::{Command, Workbook};
use zsheet::store::{read_journal, JOURNAL_FILE};
use zsheet::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("zsheet-journal-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let p = Path::parse("/notes/")?;
    {
        let mut wb = Workbook::open(&dir)?;
        wb.commit("ana", Command::create(&p, None))?;
        wb.commit("ana", Command::set(&p, &[("a1", "3"), ("a2", "=a1*rand()")])?)?;
        wb.checkpoint(&dir)?;
        wb.commit("ana", Command::set(&p, &[("a1", "4")])?)?;
    }
    for line in std::fs::read_to_string(dir.join(JOURNAL_FILE))?.lines() {
        println!("{line}");
    }

    let reopened = Workbook::open(&dir)?;
    let replayed = Workbook::replay(&read_journal(&dir)?)?;
    let a2 = "a2".parse()?;
    println!("reopened a2 = {}", reopened.site().pages[&p].value(a2));
    println!("replayed a2 = {}", replayed.site().pages[&p].value(a2));
    println!("identical snapshots: {}", reopened.snapshot().to_json() == replayed.snapshot().to_json());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
