//! Binary datasets as CSV: header `x1,...,xp,y`, one row per observation,
//! labels `-1` or `1`.

use std::io::{Read, Write};
use std::path::Path;

use maxscore_core::model::BinaryDataset;

use crate::emit::format_float;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("header: {0}")]
    Header(String),
    #[error(transparent)]
    Model(#[from] maxscore_core::Error),
}

pub fn read_dataset<R: Read>(reader: R) -> Result<BinaryDataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let p = header.len().checked_sub(1).filter(|&p| p >= 1).ok_or_else(|| DatasetError::Header("need at least one covariate column and y".into()))?;
    for (j, name) in header.iter().enumerate() {
        let expected = if j == p { "y".to_owned() } else { format!("x{}", j + 1) };
        if name != expected {
            return Err(DatasetError::Header(format!("column {} is `{name}`, expected `{expected}`", j + 1)));
        }
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |pos| pos.line());
        let row_err = |reason: String| DatasetError::Row { line, reason };
        for field in record.iter().take(p) {
            x.push(field.parse::<f64>().map_err(|e| row_err(format!("`{field}`: {e}")))?);
        }
        let label = &record[p];
        y.push(match label {
            "1" | "+1" => 1,
            "-1" => -1,
            _ => return Err(row_err(format!("label `{label}` is not -1 or 1"))),
        });
    }
    Ok(BinaryDataset::new(p, x, y)?)
}

pub fn load_dataset(path: &Path) -> Result<BinaryDataset, DatasetError> {
    read_dataset(std::fs::File::open(path)?)
}

pub fn write_dataset<W: Write>(data: &BinaryDataset, writer: W) -> Result<(), DatasetError> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let mut header: Vec<String> = (1..=data.p()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    wtr.write_record(&header)?;
    for (x, y) in data.rows() {
        let mut rec: Vec<String> = x.iter().map(|&v| format_float(v)).collect();
        rec.push(y.to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let text = "x1,x2,y\n1,0,1\n0,1,-1\n1,1,1\n";
        let d = read_dataset(text.as_bytes()).unwrap();
        assert_eq!((d.n(), d.p()), (3, 2));
        assert_eq!(d.y(), &[1, -1, 1]);
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).unwrap();
        assert_eq!(read_dataset(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(read_dataset("a,y\n1,1\n".as_bytes()), Err(DatasetError::Header(_))));
        assert!(matches!(read_dataset("x1,y\n1,0\n".as_bytes()), Err(DatasetError::Row { line: 2, .. })));
        assert!(matches!(read_dataset("x1,y\nfoo,1\n".as_bytes()), Err(DatasetError::Row { .. })));
        assert!(read_dataset("x1,y\n1\n".as_bytes()).is_err());
    }
}
