//! CSV ingestion and the binary model container.
//!
//! # CSV
//!
//! UTF-8, comma separated, optionally one header row. Each row holds `d`
//! coordinates followed by one value; `d` is the column count minus one.
//! Numbers are parsed with Rust's locale-independent float parser.
//!
//! # Model file (version 1)
//!
//! All integers and reals little-endian; reals are raw IEEE-754 binary64.
//!
//! | offset        | size   | field                                  |
//! |---------------|--------|----------------------------------------|
//! | 0             | 8      | magic `VFNNMODL`                       |
//! | 8             | 4      | `format_version` (u32) = 1             |
//! | 12            | 4      | `dim` (u32)                            |
//! | 16            | 8      | `n` (u64)                              |
//! | 24            | 1      | tie mode: 0 = paper, 1 = lowest        |
//! | 25            | 8      | `epsilon` (f64)                        |
//! | 33            | 8·n·d  | points, row-major                      |
//! | 33 + 8·n·d    | 8·n    | values                                 |
//! | end − 4       | 4      | CRC-32 (IEEE) of every preceding byte  |
//!
//! Only the generators are stored. Loading rebuilds the network, which is
//! deterministic, so the weight table comes back bit-identical.

use std::fs;
use std::path::Path;

use crate::error::{Error, ModelError, Result};
use crate::network::{build_network, BuildOptions, NetworkParams, TieMode};
use crate::samples::SampleSet;

pub const MODEL_MAGIC: &[u8; 8] = b"VFNNMODL";
pub const MODEL_FORMAT_VERSION: u32 = 1;

fn read_table(path: &Path, has_header: bool) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, e))?;
    let mut rows = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| csv_error(path, row, e))?;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let width = *width.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                row,
                message: format!("expected {width} columns, found {}", record.len()),
            });
        }
        let parsed = record
            .iter()
            .enumerate()
            .map(|(col, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Csv {
                    path: path.to_path_buf(),
                    row,
                    message: format!("column {}: `{cell}` is not a finite number", col + 1),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(parsed);
    }
    Ok(rows)
}

fn csv_error(path: &Path, row: usize, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Csv {
            path: path.to_path_buf(),
            row,
            message: format!("{other:?}"),
        },
    }
}

/// Reads training data. Row numbers in errors are 1-based data rows.
pub fn load_samples_csv(path: impl AsRef<Path>, has_header: bool) -> Result<SampleSet> {
    let path = path.as_ref();
    let rows = read_table(path, has_header)?;
    if rows.len() < 2 {
        return Err(Error::TooFewSamples(rows.len()));
    }
    let width = rows[0].len();
    if width < 2 {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            row: 1,
            message: "need at least one coordinate column and one value column".into(),
        });
    }
    let dim = width - 1;
    let mut points = Vec::with_capacity(rows.len() * dim);
    let mut values = Vec::with_capacity(rows.len());
    for row in &rows {
        points.extend_from_slice(&row[..dim]);
        values.push(row[dim]);
    }
    SampleSet::new(dim, points, values).map_err(|e| match e {
        Error::DuplicatePoint { first, second } => Error::CsvDuplicate {
            path: path.to_path_buf(),
            first: first + 1,
            second: second + 1,
        },
        other => other,
    })
}

/// Reads query points: every column is a coordinate.
pub fn load_points_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Vec<Vec<f64>>> {
    read_table(path.as_ref(), has_header)
}

/// Writes training data in the format [`load_samples_csv`] reads.
pub fn write_samples_csv(samples: &SampleSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for (p, v) in samples.points().zip(samples.values()) {
        for c in p {
            out.push_str(&format!("{c},"));
        }
        out.push_str(&format!("{v}\n"));
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn encode_model(params: &NetworkParams) -> Vec<u8> {
    let samples = params.samples();
    let mut buf = Vec::with_capacity(37 + 8 * samples.flat_points().len() + 8 * samples.len());
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(samples.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(samples.len() as u64).to_le_bytes());
    buf.push(match params.tie_mode() {
        TieMode::PaperFaithful => 0,
        TieMode::LowestIndex => 1,
    });
    buf.extend_from_slice(&params.epsilon().to_le_bytes());
    for v in samples.flat_points().iter().chain(samples.values()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, needed: usize) -> Result<&'a [u8], ModelError> {
        let end = self
            .pos
            .checked_add(needed)
            .filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(ModelError::Truncated {
                offset: self.pos,
                needed,
                len: self.buf.len(),
            });
        };
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], ModelError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn reals(&mut self, count: usize) -> Result<Vec<f64>, ModelError> {
        let bytes = count.checked_mul(8).ok_or(ModelError::CorruptField {
            field: "n",
            offset: 16,
        })?;
        Ok(self
            .take(bytes)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }
}

/// Parses a model container and rebuilds the network.
///
/// Fields are decoded front to back, so a truncated file reports the offset
/// of the first field that does not fit; the checksum is verified last.
pub fn decode_model(bytes: &[u8]) -> Result<NetworkParams> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    if cur.take(8).map_err(|_| ModelError::BadMagic)? != MODEL_MAGIC {
        return Err(ModelError::BadMagic.into());
    }
    let version = u32::from_le_bytes(cur.array()?);
    if version != MODEL_FORMAT_VERSION {
        return Err(ModelError::UnsupportedVersion {
            found: version,
            supported: MODEL_FORMAT_VERSION,
        }
        .into());
    }
    let dim = u32::from_le_bytes(cur.array()?) as usize;
    let n = usize::try_from(u64::from_le_bytes(cur.array()?)).map_err(|_| {
        ModelError::CorruptField {
            field: "n",
            offset: 16,
        }
    })?;
    let tie_mode = match cur.array::<1>()?[0] {
        0 => TieMode::PaperFaithful,
        1 => TieMode::LowestIndex,
        _ => {
            return Err(ModelError::CorruptField {
                field: "tie_mode",
                offset: 24,
            }
            .into())
        }
    };
    let epsilon = f64::from_le_bytes(cur.array()?);
    let points = cur.reals(n.checked_mul(dim).ok_or(ModelError::CorruptField {
        field: "dim",
        offset: 12,
    })?)?;
    let values = cur.reals(n)?;
    let body_end = cur.pos;
    let stored = u32::from_le_bytes(cur.array()?);
    if cur.pos != bytes.len() {
        return Err(ModelError::TrailingBytes(bytes.len() - cur.pos).into());
    }
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(ModelError::ChecksumMismatch { stored, computed }.into());
    }
    let samples = SampleSet::new(dim, points, values)?;
    build_network(
        &samples,
        &BuildOptions::default()
            .with_tie_mode(tie_mode)
            .with_epsilon(epsilon),
    )
}

pub fn save_model(params: &NetworkParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(params)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<NetworkParams> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_model(&bytes)
}
