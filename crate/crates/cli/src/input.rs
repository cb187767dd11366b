// SPDX-License-Identifier: MIT OR Apache-2.0

//! Delimited text input: comma- or whitespace-separated, optional header row,
//! `#` comments and blank lines ignored.

use std::path::Path;

use crate::CliError;

/// Column chosen by header name or by 1-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Err("column selector is empty".into());
        }
        match s.parse::<usize>() {
            Ok(0) => Err("column positions start at 1".into()),
            Ok(i) => Ok(Self::Index(i)),
            Err(_) => Ok(Self::Name(s.to_string())),
        }
    }
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Name(name) => write!(f, "{name}"),
            Self::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    line: u64,
    fields: Vec<String>,
}

/// One numeric column with its source line numbers and optional dates.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    pub lines: Vec<u64>,
    pub dates: Option<Vec<String>>,
}

pub fn read_source(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        return std::io::read_to_string(std::io::stdin())
            .map_err(|e| CliError::Data(format!("cannot read standard input: {e}")));
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn split_rows(text: &str) -> Result<Vec<Row>, CliError> {
    let comma = text.lines().find(|l| !is_skipped(l)).is_some_and(|l| l.contains(','));
    if !comma {
        return Ok(text
            .lines()
            .enumerate()
            .filter(|(_, l)| !is_skipped(l))
            .map(|(i, l)| Row {
                line: i as u64 + 1,
                fields: l.split_whitespace().map(str::to_string).collect(),
            })
            .collect());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("malformed delimited text: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(Row {
            line: record.position().map_or(0, |p| p.line()),
            fields: record.iter().map(str::to_string).collect(),
        });
    }
    Ok(rows)
}

fn parse_value(field: &str) -> Option<f64> {
    field.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn resolve(selector: &Selector, header: Option<&[String]>, width: usize) -> Result<usize, CliError> {
    match selector {
        Selector::Index(i) if *i <= width => Ok(i - 1),
        Selector::Index(i) => Err(CliError::Usage(format!(
            "column {i} does not exist; the data has {width} column(s)"
        ))),
        Selector::Name(name) => {
            let header = header.ok_or_else(|| {
                CliError::Usage(format!("column `{name}` requested by name but the file has no header row"))
            })?;
            header
                .iter()
                .position(|h| h == name)
                .or_else(|| header.iter().position(|h| h.eq_ignore_ascii_case(name)))
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "no column named `{name}`; available: {}",
                        header.join(", ")
                    ))
                })
        }
    }
}

/// Extracts one numeric column. Rows whose value does not parse are reported
/// by line number; none are skipped.
pub fn load_column(text: &str, column: Option<&Selector>, date_column: Option<&Selector>) -> Result<Column, CliError> {
    let mut rows = split_rows(text)?;
    if rows.is_empty() {
        return Err(CliError::Data("input contains no data rows".into()));
    }
    let header = if rows[0].fields.iter().all(|f| parse_value(f).is_none()) {
        Some(rows.remove(0).fields)
    } else {
        None
    };
    let width = header
        .as_ref()
        .map_or(0, Vec::len)
        .max(rows.iter().map(|r| r.fields.len()).max().unwrap_or(0));

    let date_index = date_column
        .map(|s| resolve(s, header.as_deref(), width))
        .transpose()?;
    let value_index = match column {
        Some(s) => resolve(s, header.as_deref(), width)?,
        None => {
            let candidates: Vec<usize> = (0..width).filter(|&i| Some(i) != date_index).collect();
            match candidates.as_slice() {
                [only] => *only,
                _ => {
                    return Err(CliError::Usage(format!(
                        "the data has {width} columns; choose one with --column"
                    )))
                }
            }
        }
    };
    let name = header
        .as_ref()
        .and_then(|h| h.get(value_index).cloned())
        .unwrap_or_else(|| format!("#{}", value_index + 1));

    let mut values = Vec::with_capacity(rows.len());
    let mut lines = Vec::with_capacity(rows.len());
    let mut dates = date_index.map(|_| Vec::with_capacity(rows.len()));
    let mut bad = Vec::new();
    for row in &rows {
        match row.fields.get(value_index).and_then(|f| parse_value(f)) {
            Some(v) => {
                values.push(v);
                lines.push(row.line);
                if let (Some(d), Some(i)) = (dates.as_mut(), date_index) {
                    d.push(row.fields.get(i).cloned().unwrap_or_default());
                }
            }
            None => bad.push(row.line),
        }
    }
    if !bad.is_empty() {
        let shown: Vec<String> = bad.iter().take(10).map(u64::to_string).collect();
        let more = if bad.len() > 10 {
            format!(" and {} more", bad.len() - 10)
        } else {
            String::new()
        };
        return Err(CliError::Data(format!(
            "column `{name}` has missing or non-numeric values at line(s) {}{more}",
            shown.join(", ")
        )));
    }
    if values.is_empty() {
        return Err(CliError::Data("input contains no data rows".into()));
    }
    Ok(Column {
        name,
        values,
        lines,
        dates,
    })
}
