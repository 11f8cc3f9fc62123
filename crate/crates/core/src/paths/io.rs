//! CSV path files: header `t,x`, one sample per line.
//!
//! Numbers are written with the shortest decimal form that parses back to
//! the same `f64`, so a write/read cycle reproduces the path exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{PathError, PricePath, Result};

pub fn write_path_to<W: Write>(path: &PricePath, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| PathError::Io(e.into());
    w.write_record(["t", "x"]).map_err(map)?;
    for (t, x) in path.times().iter().zip(path.values()) {
        w.write_record([t.to_string(), x.to_string()]).map_err(map)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_path(path: &PricePath, destination: impl AsRef<Path>) -> Result<()> {
    let file = File::create(destination)?;
    write_path_to(path, BufWriter::new(file))
}

pub fn read_path_from<R: Read>(reader: R) -> Result<PricePath> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = r.headers().map_err(|e| parse_error(1, e))?;
    if header.len() != 2 || &header[0] != "t" || &header[1] != "x" {
        return Err(PathError::Parse {
            line: 1,
            message: format!("expected header `t,x`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let mut times = Vec::new();
    let mut values = Vec::new();
    for (row, record) in r.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| parse_error(line, e))?;
        if record.len() != 2 {
            return Err(PathError::Parse { line, message: format!("expected 2 fields, got {}", record.len()) });
        }
        let field = |i: usize| {
            record[i].parse::<f64>().map_err(|e| PathError::Parse { line, message: format!("`{}`: {e}", &record[i]) })
        };
        times.push(field(0)?);
        values.push(field(1)?);
    }
    if times.len() < 2 {
        return Err(PathError::Parse {
            line: times.len() + 2,
            message: format!("a path needs at least two samples, found {}", times.len()),
        });
    }
    let horizon = times[times.len() - 1];
    PricePath::new(times, values, horizon)
}

pub fn read_path(source: impl AsRef<Path>) -> Result<PricePath> {
    let file = File::open(source)?;
    read_path_from(BufReader::new(file))
}

fn parse_error(line: usize, e: csv::Error) -> PathError {
    PathError::Parse { line, message: e.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{generate, GeneratorKind, GeneratorSpec};

    #[test]
    fn round_trip_generated() {
        let spec = GeneratorSpec::new(GeneratorKind::ExpFractional { hurst: 0.3, sigma: 1.3, start: 0.7 }, 333, 5)
            .with_horizon(2.5);
        let p = generate(&spec).unwrap();
        let mut buf = Vec::new();
        write_path_to(&p, &mut buf).unwrap();
        let q = read_path_from(buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn round_trip_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.csv");
        let p = PricePath::uniform(vec![1.0, 0.1, 1e-300, 3.25e7], 1.0 / 3.0).unwrap();
        write_path(&p, &file).unwrap();
        assert_eq!(read_path(&file).unwrap(), p);
    }

    #[test]
    fn header_only_is_parse_error() {
        let err = read_path_from("t,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PathError::Parse { .. }));
    }

    #[test]
    fn negative_price_rejected() {
        let err = read_path_from("t,x\n0,1\n0.5,-2\n1,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, PathError::NonPositiveValue { index: 1, .. }));
    }

    #[test]
    fn wrong_header_and_garbage() {
        assert!(matches!(read_path_from("time,price\n0,1\n1,1\n".as_bytes()), Err(PathError::Parse { line: 1, .. })));
        assert!(matches!(read_path_from("t,x\n0,1\n1,abc\n".as_bytes()), Err(PathError::Parse { line: 3, .. })));
    }

    #[test]
    fn written_format() {
        let p = PricePath::uniform(vec![1.0, 2.5], 1.0).unwrap();
        let mut buf = Vec::new();
        write_path_to(&p, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,x\n0,1\n1,2.5\n");
    }
}
