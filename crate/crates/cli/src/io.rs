//! CSV artifacts. Values are written in Rust's shortest round-trip form, so
//! `read_csv` recovers every number bit for bit.

use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn write_csv(path: &Path, table: &Table) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> csv::Result<Table> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| {
                    csv::Error::from(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("{f:?}: {e}"),
                    ))
                })
            })
            .collect::<csv::Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}
