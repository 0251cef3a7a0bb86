//! Cell histories and per-user trails, both read from the journal.

use zsheet::audit::AuditIndex;
use zsheet::recalc::{Command, Workbook};
use zsheet::store::StructuralOp;
use zsheet::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut wb = Workbook::new();
    let p = Path::parse("/ledger/")?;
    wb.commit("ana", Command::create(&p, None))?;
    wb.commit("ana", Command::set(&p, &[("a1", "1")])?)?;
    wb.commit("ben", Command::set(&p, &[("a1", "=2+2")])?)?;
    wb.commit("ana", Command::Structural { path: p.clone(), op: StructuralOp::InsertRows, at: 1, count: 1 })?;
    wb.commit("ben", Command::set(&p, &[("a2", "5")])?)?;

    let ix = AuditIndex::build(wb.events());
    for cell in ["a1", "a2"] {
        println!("history of {p}{cell}");
        for e in ix.cell_history(wb.events(), &p, cell.parse()?) {
            let show = |d: &Option<zsheet::store::CellData>| d.as_ref().map(|d| d.input_text()).unwrap_or_default();
            println!("  #{} {} {:?} -> {:?} ({})", e.seq, e.user, show(&e.prior), show(&e.new), e.summary);
        }
    }
    for user in ["ana", "ben"] {
        let seqs: Vec<u64> = ix.user_trail(wb.events(), user, None, None).iter().map(|e| e.seq).collect();
        println!("{user} made events {seqs:?}");
    }
    Ok(())
}
