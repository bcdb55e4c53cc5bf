//! CSV reading and writing. One matrix row per line; the token `NaN`
//! (any case) marks a missing entry.

use std::io::{Read, Write};

use super::{BinaryMatrix, NonNegMatrix};
use crate::error::{Error, Result};

fn parse_records<R: Read>(reader: R, has_header: bool) -> Result<(usize, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push(rec.iter().map(str::to_owned).collect::<Vec<_>>());
    }
    let width = rows.first().map_or(0, Vec::len);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(Error::Parse {
                line: i + 1 + usize::from(has_header),
                column: r.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", r.len()),
            });
        }
    }
    Ok((width, rows))
}

/// Reads a mask-aware nonnegative matrix from CSV.
pub fn read_csv<R: Read>(reader: R, has_header: bool) -> Result<NonNegMatrix> {
    let (width, rows) = parse_records(reader, has_header)?;
    let mut entries = Vec::with_capacity(rows.len() * width);
    for (i, r) in rows.iter().enumerate() {
        for (j, tok) in r.iter().enumerate() {
            let line = i + 1 + usize::from(has_header);
            if tok.eq_ignore_ascii_case("nan") {
                entries.push(None);
                continue;
            }
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line,
                column: j + 1,
                message: format!("not a number: {tok:?}"),
            })?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Parse {
                    line,
                    column: j + 1,
                    message: format!("value {v} is not finite and nonnegative"),
                });
            }
            entries.push(Some(v));
        }
    }
    NonNegMatrix::from_options(rows.len(), width, entries)
}

/// Writes a matrix as CSV. Missing entries are written as `NaN`; values use
/// the shortest representation that parses back to the identical `f64`.
pub fn write_csv<W: Write>(writer: W, a: &NonNegMatrix) -> Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if j > 0 {
                w.write_all(b",")?;
            }
            match a.get(i, j) {
                Some(v) => write!(w, "{v:?}")?,
                None => w.write_all(b"NaN")?,
            }
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a 0/1 mask (e.g. a holdout set) from CSV.
pub fn read_mask_csv<R: Read>(reader: R, has_header: bool) -> Result<BinaryMatrix> {
    let (width, rows) = parse_records(reader, has_header)?;
    let mut bits = Vec::with_capacity(rows.len() * width);
    for (i, r) in rows.iter().enumerate() {
        for (j, tok) in r.iter().enumerate() {
            bits.push(match tok.as_str() {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(Error::Parse {
                        line: i + 1 + usize::from(has_header),
                        column: j + 1,
                        message: format!("mask entries must be 0 or 1, found {tok:?}"),
                    })
                }
            });
        }
    }
    BinaryMatrix::new(rows.len(), width, bits)
}

pub fn write_mask_csv<W: Write>(writer: W, mask: &BinaryMatrix) -> Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    for i in 0..mask.rows() {
        let line: Vec<&str> = mask
            .row(i)
            .iter()
            .map(|&b| if b { "1" } else { "0" })
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_nan_as_missing() {
        let a = read_csv("1,NaN\nnan,2.5\n".as_bytes(), false).unwrap();
        assert_eq!(a.shape(), (2, 2));
        assert_eq!(a.get(0, 1), None);
        assert_eq!(a.get(1, 0), None);
        assert_eq!(a.get(1, 1), Some(2.5));
    }

    #[test]
    fn skips_header_when_asked() {
        let a = read_csv("x,y\n1,2\n".as_bytes(), true).unwrap();
        assert_eq!(a.shape(), (1, 2));
    }

    #[test]
    fn parse_error_names_position() {
        let err = read_csv("1,2\n3,abc\n".as_bytes(), false).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_csv("1,-2\n".as_bytes(), false),
            Err(Error::Parse {
                line: 1,
                column: 2,
                ..
            })
        ));
        assert!(read_csv("1,2\n3\n".as_bytes(), false).is_err());
    }

    #[test]
    fn mask_roundtrip() {
        let m = BinaryMatrix::from_rows(&[vec![1, 0, 0], vec![0, 1, 1]]).unwrap();
        let mut buf = Vec::new();
        write_mask_csv(&mut buf, &m).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "1,0,0\n0,1,1\n");
        assert_eq!(read_mask_csv(buf.as_slice(), false).unwrap(), m);
    }

    proptest! {
        #[test]
        fn csv_roundtrip_is_exact(
            vals in proptest::collection::vec(proptest::option::weighted(0.8, 0.0f64..1e6), 12)
        ) {
            let a = NonNegMatrix::from_options(3, 4, vals).unwrap();
            let mut buf = Vec::new();
            write_csv(&mut buf, &a).unwrap();
            let b = read_csv(buf.as_slice(), false).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
