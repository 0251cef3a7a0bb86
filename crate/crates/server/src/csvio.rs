//! CSV import and export of one page.

use std::io::{Read, Write};

use zsheet::addr::CellAddr;
use zsheet::path::Path;
use zsheet::recalc::{CellWrite, Command, CommitError, Outcome, Workbook};
use zsheet::store::{CellData, CreatedPage};
use zsheet::value::{parse_literal_input, Value};

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Commit(#[from] CommitError),
    #[error("page not found: {0}")]
    NotFound(Path),
}

/// Reads CSV into `path`, creating the page (and missing ancestors) first.
/// Fields starting with `=` are formulas and a leading `'` forces text.
/// Every field is parsed before anything is written.
pub fn import(wb: &mut Workbook, user: &str, path: &Path, input: impl Read) -> Result<Vec<Outcome>, CsvError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut writes = Vec::new();
    for (r, record) in reader.records().enumerate() {
        for (c, field) in record?.iter().enumerate() {
            let addr = CellAddr::new(c as u32 + 1, r as u32 + 1);
            if !addr.is_valid() {
                return Err(CommitError::Bounds(format!("row {} column {}", r + 1, c + 1)).into());
            }
            let data =
                CellData::from_input(field).map_err(|error| CommitError::Parse { path: path.clone(), addr, error })?;
            writes.push(CellWrite { path: path.clone(), addr, data });
        }
    }
    let mut outcomes = Vec::new();
    let first = if path.is_root() { 0 } else { 1 };
    let missing: Vec<CreatedPage> = (first..=path.depth())
        .map(|d| path.truncate(d))
        .filter(|p| !wb.site().pages.contains_key(p))
        .map(|p| CreatedPage { path: p, template: None })
        .collect();
    if !missing.is_empty() {
        outcomes.push(wb.commit(user, Command::CreatePages { path: path.clone(), pages: missing })?);
    }
    outcomes.push(wb.commit(user, Command::SetCells { path: path.clone(), writes })?);
    Ok(outcomes)
}

/// A cached value as CSV text that imports back to the same value.
pub fn export_text(v: &Value) -> String {
    match v {
        Value::Blank => String::new(),
        Value::Text(s) if s.starts_with('=') || parse_literal_input(s) != Value::Text(s.clone()) => format!("'{s}"),
        other => other.to_string(),
    }
}

/// Writes cached values of `path` from a1 to the bottom-right used cell.
pub fn export(wb: &Workbook, path: &Path, out: impl Write) -> Result<(), CsvError> {
    let page = wb.site().page(path).map_err(|_| CsvError::NotFound(path.clone()))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if let Some(used) = page.used_range() {
        for r in 1..=used.end.row {
            let row: Vec<String> = (1..=used.end.col).map(|c| export_text(&page.value(CellAddr::new(c, r)))).collect();
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut wb = Workbook::new();
        let p = Path::parse("/data/sheet/").unwrap();
        let text = "name,qty\n\"a, b\",3\n'007,=b2*2\n";
        import(&mut wb, "u", &p, text.as_bytes()).unwrap();
        assert_eq!(wb.site().get_value(&p, "a3".parse().unwrap()).unwrap(), Value::text("007"));
        assert_eq!(wb.site().get_value(&p, "b3".parse().unwrap()).unwrap(), Value::Number(6.0));
        let mut out = Vec::new();
        export(&wb, &p, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "name,qty\n\"a, b\",3\n'007,6\n");

        let bad = import(&mut wb, "u", &Path::parse("/data/other/").unwrap(), "=sum(\n".as_bytes());
        assert!(matches!(bad, Err(CsvError::Commit(CommitError::Parse { .. }))));
        assert!(!wb.site().pages.contains_key(&Path::parse("/data/other/").unwrap()));
    }
}
