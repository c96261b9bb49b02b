//! Field files.
//!
//! ```text
//! ACF1 <dims> <M_1> [<M_2> <M_3>] <L_1> [<L_2> <L_3>]\n
//! <M_1 * ... * M_d little-endian f64 values, axis 0 slowest>
//! ```
//!
//! Lengths are written in shortest round-trip decimal form, so a save/load
//! cycle reproduces the grid and values bit for bit.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{Field, GridSpec};

const MAGIC: &str = "ACF1";
const MAX_HEADER: usize = 4096;

pub fn write_field(f: &Field, mut out: impl Write) -> std::io::Result<()> {
    let g = f.grid();
    let mut header = format!("{MAGIC} {}", g.dims());
    for m in g.cells() {
        header.push_str(&format!(" {m}"));
    }
    for l in g.lengths() {
        header.push_str(&format!(" {l:?}"));
    }
    header.push('\n');
    out.write_all(header.as_bytes())?;
    let mut bytes = Vec::with_capacity(8 * f.values().len());
    for v in f.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&bytes)
}

pub fn save_field(f: &Field, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_field(f, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse_header(line: &str) -> Result<GridSpec> {
    let bad = |msg: String| Error::MalformedHeader(msg);
    let mut tokens = line.split_ascii_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(bad(format!("missing {MAGIC} magic")));
    }
    let dims: usize = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("missing or invalid dimension count".into()))?;
    if !(1..=3).contains(&dims) {
        return Err(bad(format!("dimension count {dims} not in 1..=3")));
    }
    let rest: Vec<&str> = tokens.collect();
    if rest.len() != 2 * dims {
        return Err(bad(format!(
            "dims = {dims} needs {} axis entries, found {}",
            2 * dims,
            rest.len()
        )));
    }
    let cells = rest[..dims]
        .iter()
        .map(|t| t.parse::<usize>().map_err(|_| bad(format!("bad cell count `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let lengths = rest[dims..]
        .iter()
        .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad length `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    GridSpec::new(&cells, &lengths).map_err(|e| bad(e.to_string()))
}

/// Reads grid and values without checking finiteness.
pub fn read_field_raw(input: impl Read) -> Result<(GridSpec, Vec<f64>)> {
    let mut reader = BufReader::new(input);
    let mut header = Vec::new();
    reader
        .by_ref()
        .take(MAX_HEADER as u64)
        .read_until(b'\n', &mut header)
        .map_err(|e| Error::MalformedHeader(e.to_string()))?;
    if header.last() != Some(&b'\n') {
        return Err(Error::MalformedHeader("header line not terminated".into()));
    }
    let line = std::str::from_utf8(&header[..header.len() - 1])
        .map_err(|_| Error::MalformedHeader("header is not UTF-8".into()))?;
    let grid = parse_header(line)?;

    let mut body = Vec::new();
    reader
        .read_to_end(&mut body)
        .map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let expected = grid.total();
    if body.len() != 8 * expected {
        return Err(Error::SizeMismatch {
            expected,
            found: body.len() / 8,
        });
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((grid, values))
}

pub fn read_field(input: impl Read) -> Result<Field> {
    let (grid, values) = read_field_raw(input)?;
    Field::new(grid, values)
}

/// Loads a field, rejecting non-finite values. [`load_field_raw`] skips that
/// check.
pub fn load_field(path: impl AsRef<Path>) -> Result<Field> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_field(file)
}

pub fn load_field_raw(path: impl AsRef<Path>) -> Result<(GridSpec, Vec<f64>)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_field_raw(file)
}
