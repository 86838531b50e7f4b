//! CSV files with a header of variable names and `NA` for missing cells,
//! plus JSON sidecars.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{Dataset, Schema};
use crate::error::{Error, Result};

pub const MISSING_TOKEN: &str = "NA";

/// Serialise a dataset to CSV bytes.
pub fn to_csv_string(dataset: &Dataset) -> String {
    let mut out = String::new();
    let header: Vec<&str> = dataset.schema.variables.iter().map(|v| v.name.as_str()).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &dataset.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| c.map_or_else(|| MISSING_TOKEN.to_string(), |v| v.to_string()))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    write_bytes(path, to_csv_string(dataset).as_bytes())
}

/// Parse CSV text whose header must list exactly the schema's variables in order.
pub fn parse_csv(text: &str, schema: &Schema, origin: &str) -> Result<Dataset> {
    let malformed = |line: u64, message: String| Error::Malformed {
        path: origin.to_string(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    let expected: Vec<&str> = schema.variables.iter().map(|v| v.name.as_str()).collect();
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(malformed(
            1,
            format!("header {got:?} does not match schema {expected:?}"),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != schema.len() {
            return Err(malformed(
                line,
                format!("expected {} fields, found {}", schema.len(), record.len()),
            ));
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                if cell == MISSING_TOKEN {
                    Ok(None)
                } else {
                    cell.parse::<i64>().map(Some).map_err(|_| {
                        malformed(
                            line,
                            format!("`{cell}` in column {} is not an integer", expected[i]),
                        )
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Dataset::new(schema.clone(), rows)
}

pub fn read_csv(path: &Path, schema: &Schema) -> Result<Dataset> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema, &path.display().to_string())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_missing_cells() {
        let mut row = [3, 25, 10, 2, 1, 30, 0, 0, 1].map(Some).to_vec();
        row[2] = None;
        let d = Dataset::new(Schema::survey(), vec![row]).unwrap();
        let text = to_csv_string(&d);
        assert!(text.starts_with("Province,Age,Edu,Gra,Par,FathAge,HIV,RPR,Race\n"));
        assert!(text.contains(",NA,"));
        assert_eq!(parse_csv(&text, &Schema::survey(), "mem").unwrap(), d);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let header = "Province,Age,Edu,Gra,Par,FathAge,HIV,RPR,Race\n";
        let short = format!("{header}1,2,3,4,5,6,7,8,9\n1,2,3\n");
        match parse_csv(&short, &Schema::survey(), "f.csv") {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let word = format!("{header}1,2,x,4,5,6,7,8,9\n");
        match parse_csv(&word, &Schema::survey(), "f.csv") {
            Err(Error::Malformed { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("Edu"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_csv("a,b\n", &Schema::survey(), "f.csv").is_err());
    }
}
