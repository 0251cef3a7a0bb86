//! Parsing, printing and evaluating formulas, including cycles.

use zsheet::formula::{collect_refs, parse, print};
use zsheet::recalc::{Command, Workbook};
use zsheet::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Path::parse("/a/b/")?;
    for src in ["=SUM(1, 2, A3, !page!a4)", "=-(2^2)", "=../[a1 > 44]/b7:b8", "=if(a1>2,\"big\",\"small\")"] {
        let ast = parse(src)?;
        let refs = collect_refs(&ast, &base);
        let mut read: Vec<String> = refs.cells.iter().map(|r| format!("{}{}", r.page, r.range)).collect();
        read.extend(refs.zrefs.iter().map(|(pattern, _)| pattern.to_string()));
        println!("{src:<32} -> {:<28} reads {}", print(&ast), read.join(" "));
    }
    match parse("=sum(1,") {
        Err(e) => println!("error at {}: {}", e.position, e.message),
        Ok(_) => unreachable!(),
    }

    let mut wb = Workbook::new();
    let p = Path::parse("/calc/")?;
    wb.commit("demo", Command::create(&p, None))?;
    wb.commit("demo", Command::set(&p, &[("a1", "=b1"), ("b1", "=a1"), ("c1", "=a1+1"), ("d1", "=stdev(2,4,4,4,5,5,7,9)")])?)?;
    for c in ["a1", "b1", "c1", "d1"] {
        println!("{c} = {}", wb.site().pages[&p].value(c.parse()?));
    }
    Ok(())
}
