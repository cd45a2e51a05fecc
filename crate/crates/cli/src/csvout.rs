//! CSV emission: comma-separated, LF line endings, one header row per table, tables
//! separated by a blank line, numbers with 12 significant digits.

use csv::{Terminator, WriterBuilder};

/// `x` in scientific notation with 12 significant digits; `-0` prints as `0`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Renders tables in order, separated by blank lines.
pub fn render(tables: &[Table]) -> String {
    let mut out = Vec::new();
    for (k, table) in tables.iter().enumerate() {
        if k > 0 {
            out.push(b'\n');
        }
        let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&table.header).expect("writing to memory");
        for row in &table.rows {
            w.write_record(row).expect("writing to memory");
        }
        out.extend(w.into_inner().expect("flushing to memory"));
    }
    String::from_utf8(out).expect("records are UTF-8")
}

/// Splits rendered output back into tables of string records, header first.
pub fn parse_tables(text: &str) -> Result<Vec<Vec<Vec<String>>>, csv::Error> {
    text.split("\n\n")
        .map(|block| {
            csv::ReaderBuilder::new()
                .has_headers(false)
                .from_reader(block.as_bytes())
                .records()
                .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
                .collect()
        })
        .collect()
}
