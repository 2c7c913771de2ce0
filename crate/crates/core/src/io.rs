//! Plain-text field files.
//!
//! ```text
//! FRACLAP v1
//! k 2
//! s 0.5
//! p 1
//! q 1
//! beta 1000
//! nx 5
//! ny 3
//! <x nodes>
//! <y nodes>
//! <ny rows of nx values for component 0>
//! <ny rows of nx values for component 1>
//! ```
//!
//! Numbers are written in shortest round-trip exponent form, so a save/load
//! cycle reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::params::ProblemParams;

pub const MAGIC: &str = "FRACLAP";
pub const SUPPORTED_VERSIONS: &[&str] = &["v1"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldHeader {
    pub k: usize,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Contents of a field file before it is bound to full problem constants.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredField {
    pub header: FieldHeader,
    pub grid: Arc<Grid>,
    pub values: Vec<Vec<f64>>,
}

impl StoredField {
    /// Attaches `params`, which must agree with the stored header.
    pub fn into_field(self, params: Arc<ProblemParams>) -> Result<Field> {
        let h = &self.header;
        if params.k != h.k || params.s != h.s || params.p != h.p || params.q != h.q || params.beta != h.beta {
            return Err(Error::Format(format!(
                "stored header {h:?} disagrees with the supplied parameters (k={}, s={}, p={}, q={}, beta={})",
                params.k, params.s, params.p, params.q, params.beta
            )));
        }
        Field::new(params, self.grid, self.values)
    }
}

pub fn write_field(field: &Field, mut out: impl Write) -> Result<()> {
    let prm = &*field.params;
    let g = &*field.grid;
    writeln!(out, "{MAGIC} {}", SUPPORTED_VERSIONS[SUPPORTED_VERSIONS.len() - 1])?;
    writeln!(out, "k {}", prm.k)?;
    writeln!(out, "s {:e}", prm.s)?;
    writeln!(out, "p {:e}", prm.p)?;
    writeln!(out, "q {:e}", prm.q)?;
    writeln!(out, "beta {:e}", prm.beta)?;
    writeln!(out, "nx {}", g.nx())?;
    writeln!(out, "ny {}", g.ny())?;
    write_row(&mut out, g.x_nodes.iter().copied())?;
    write_row(&mut out, g.y_nodes.iter().copied())?;
    for c in 0..prm.k {
        for j in 0..g.ny() {
            write_row(&mut out, (0..g.nx()).map(|i| field.at(c, i, j)))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_row(out: &mut impl Write, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            out.write_all(b" ")?;
        }
        write!(out, "{v:e}")?;
        first = false;
    }
    out.write_all(b"\n")?;
    Ok(())
}

pub fn save_field(field: &Field, path: &Path) -> Result<()> {
    write_field(field, BufWriter::new(File::create(path)?))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self, what: &str) -> Result<String> {
        self.number += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(Error::Format(format!(
                "truncated file: expected {what} on line {}",
                self.number
            ))),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<String> {
        let line = self.next(key)?;
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(v), None) if k == key => Ok(v.to_string()),
            _ => Err(Error::Format(format!(
                "line {}: expected `{key} <value>`, found `{line}`",
                self.number
            ))),
        }
    }

    fn numbers(&mut self, what: &str, expected: usize) -> Result<Vec<f64>> {
        let line = self.next(what)?;
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Format(format!("line {}: bad number `{t}`", self.number)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != expected {
            return Err(Error::Format(format!(
                "line {}: {what} has {} entries, expected {expected}",
                self.number,
                row.len()
            )));
        }
        Ok(row)
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Format(format!("header field {key}: cannot parse `{v}`")))
}

pub fn read_field(input: impl BufRead) -> Result<StoredField> {
    let mut lines = Lines {
        inner: input.lines(),
        number: 0,
    };
    let tag = lines.next("format tag")?;
    let mut parts = tag.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::Format(format!("not a {MAGIC} field file (first line `{tag}`)")));
    }
    let version = parts.next().unwrap_or("");
    if !SUPPORTED_VERSIONS.contains(&version) {
        return Err(Error::Format(format!(
            "unsupported format version `{version}`; supported versions: {}",
            SUPPORTED_VERSIONS.join(", ")
        )));
    }
    let header = FieldHeader {
        k: parse("k", &lines.keyed("k")?)?,
        s: parse("s", &lines.keyed("s")?)?,
        p: parse("p", &lines.keyed("p")?)?,
        q: parse("q", &lines.keyed("q")?)?,
        beta: parse("beta", &lines.keyed("beta")?)?,
        nx: parse("nx", &lines.keyed("nx")?)?,
        ny: parse("ny", &lines.keyed("ny")?)?,
    };
    if header.k == 0 {
        return Err(Error::Format("header declares k = 0".into()));
    }
    let x = lines.numbers("x nodes", header.nx)?;
    let y = lines.numbers("y nodes", header.ny)?;
    let grid = Arc::new(Grid::from_nodes(x, y, 1.0 - 2.0 * header.s)?);
    let mut values = Vec::with_capacity(header.k);
    for c in 0..header.k {
        let mut comp = vec![0.0; grid.len()];
        for j in 0..header.ny {
            let row = lines.numbers(&format!("row {j} of component {c}"), header.nx)?;
            for (i, v) in row.into_iter().enumerate() {
                comp[grid.idx(i, j)] = v;
            }
        }
        values.push(comp);
    }
    for rest in lines.inner {
        if !rest?.trim().is_empty() {
            return Err(Error::Format(format!(
                "data beyond the {} components declared in the header",
                header.k
            )));
        }
    }
    Ok(StoredField { header, grid, values })
}

pub fn load_field(path: &Path) -> Result<StoredField> {
    read_field(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Field {
        let p = Arc::new(ProblemParams::symmetric(2, 0.3, 1.0, 17.5).unwrap());
        let g = Arc::new(Grid::build(-1.0, 1.0, 1.0, 7, 5, 1.7, p.a()).unwrap());
        Field::from_fn(p, g, |c, x, y| (1.0 + c as f64) * (x + 1.0) / 3.0 + y.sqrt() * 1e-300).unwrap()
    }

    fn bytes(f: &Field) -> Vec<u8> {
        let mut buf = Vec::new();
        write_field(f, &mut buf).unwrap();
        buf
    }

    #[test]
    fn round_trip_is_bitwise() {
        let f = sample();
        let stored = read_field(&bytes(&f)[..]).unwrap();
        assert_eq!(stored.grid.x_nodes, f.grid.x_nodes);
        assert_eq!(stored.grid.y_nodes, f.grid.y_nodes);
        for (a, b) in stored.values.iter().flatten().zip(f.values.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let back = stored.into_field(f.params.clone()).unwrap();
        assert_eq!(bytes(&back), bytes(&f));
    }

    #[test]
    fn rejects_unknown_version() {
        let text = String::from_utf8(bytes(&sample())).unwrap().replacen("v1", "v9", 1);
        let err = read_field(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("v9") && err.contains("v1"), "{err}");
    }

    #[test]
    fn rejects_component_mismatch_and_truncation() {
        let text = String::from_utf8(bytes(&sample())).unwrap();
        let more = text.replacen("k 2", "k 3", 1);
        assert!(matches!(read_field(more.as_bytes()), Err(Error::Format(_))));
        let fewer = text.replacen("k 2", "k 1", 1);
        assert!(matches!(read_field(fewer.as_bytes()), Err(Error::Format(_))));
        let cut = &text[..text.len() / 2];
        assert!(matches!(read_field(cut.as_bytes()), Err(Error::Format(_))));
        let lines: Vec<&str> = text.lines().collect();
        let short = lines[..lines.len() - 1].join("\n");
        assert!(read_field(short.as_bytes()).unwrap_err().to_string().contains("truncated"));
    }

    #[test]
    fn rejects_mismatched_params() {
        let f = sample();
        let stored = read_field(&bytes(&f)[..]).unwrap();
        let other = Arc::new(ProblemParams::symmetric(2, 0.3, 1.0, 18.0).unwrap());
        assert!(stored.into_field(other).is_err());
    }
}
