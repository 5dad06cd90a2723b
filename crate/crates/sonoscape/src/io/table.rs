use std::path::Path;

use crate::{Error, Result};

/// Numeric rows of a comma, semicolon, tab or whitespace separated file.
/// `#` comments and a non-numeric header row are skipped.
pub fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = super::read_text(path)?;
    let delimiter = [b',', b';', b'\t']
        .into_iter()
        .find(|d| text.as_bytes().contains(d))
        .unwrap_or(b' ');
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        let fields: Vec<&str> = rec.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed {
            Some(row) => rows.push(row),
            None if rows.is_empty() => continue,
            None => return Err(Error::parse(path, line, "non-numeric field")),
        }
    }
    Ok(rows)
}

/// The first `n` columns of a table; every row must have them.
pub fn read_columns(path: &Path, n: usize) -> Result<Vec<Vec<f64>>> {
    let rows = read_table(path)?;
    let mut cols = vec![Vec::with_capacity(rows.len()); n];
    for (i, row) in rows.iter().enumerate() {
        if row.len() < n {
            return Err(Error::Invalid(format!(
                "{}: row {} has {} columns, need {n}",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(row[c]);
        }
    }
    Ok(cols)
}
