//! Field serialization.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! magic   b"OCTF"
//! version u32 (= 1)
//! n, M, K u32 each
//! count   u64            number of stored (nonzero) coefficients
//! count × { m_1..m_n: i64 each, re: f64, im: f64 }
//! ```
//!
//! The CSV layout has a header row `m1[,m2[,m3]],re,im` preceded by a comment
//! line `# grid n=<n> M=<M> K=<K>`.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use super::{GridSpec, SpectralField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"OCTF";

pub fn write_binary<W: Write>(f: &SpectralField, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&1u32.to_le_bytes())?;
    for v in [f.grid.n, f.grid.m, f.grid.k] {
        w.write_all(&(v as u32).to_le_bytes())?;
    }
    let nonzero: Vec<(usize, Complex64)> = f
        .coeffs
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .collect();
    w.write_all(&(nonzero.len() as u64).to_le_bytes())?;
    for (idx, c) in nonzero {
        let m = f.grid.lattice(idx);
        for &coord in &m[..f.grid.n] {
            w.write_all(&coord.to_le_bytes())?;
        }
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SpectralField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config("not a field file (bad magic)".into()));
    }
    let version = read_u32(&mut r)?;
    if version != 1 {
        return Err(Error::Config(format!("unsupported field file version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    let m = read_u32(&mut r)? as usize;
    let k = read_u32(&mut r)? as usize;
    let grid = GridSpec::new(n, m, k)?;
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let count = u64::from_le_bytes(buf8);
    let mut field = SpectralField::zeros(grid);
    for _ in 0..count {
        let mut coords = vec![0i64; n];
        for c in coords.iter_mut() {
            r.read_exact(&mut buf8)?;
            *c = i64::from_le_bytes(buf8);
        }
        r.read_exact(&mut buf8)?;
        let re = f64::from_le_bytes(buf8);
        r.read_exact(&mut buf8)?;
        let im = f64::from_le_bytes(buf8);
        let idx = grid
            .index_of(&coords)
            .ok_or_else(|| Error::Range(format!("stored mode {coords:?} outside grid")))?;
        field.coeffs[idx] = Complex64::new(re, im);
    }
    Ok(field)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn write_csv<W: Write>(f: &SpectralField, mut w: W) -> Result<()> {
    writeln!(w, "# grid n={} M={} K={}", f.grid.n, f.grid.m, f.grid.k)?;
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=f.grid.n).map(|i| format!("m{i}")).collect();
    header.push("re".into());
    header.push("im".into());
    out.write_record(&header)?;
    for (idx, c) in f.coeffs.iter().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let m = f.grid.lattice(idx);
        let mut row: Vec<String> = m[..f.grid.n].iter().map(|v| v.to_string()).collect();
        row.push(format!("{:e}", c.re));
        row.push(format!("{:e}", c.im));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: BufRead>(mut r: R) -> Result<SpectralField> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    let grid = parse_grid_comment(first.trim())?;
    let mut field = SpectralField::zeros(grid);
    let mut rdr = csv::Reader::from_reader(r);
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<&str> {
            rec.get(i)
                .ok_or_else(|| Error::Config(format!("csv row {}: missing column {i}", line + 2)))
        };
        let mut coords = Vec::with_capacity(grid.n);
        for i in 0..grid.n {
            coords.push(parse(i)?.trim().parse::<i64>().map_err(|e| {
                Error::Config(format!("csv row {}: bad lattice index: {e}", line + 2))
            })?);
        }
        let re: f64 = parse(grid.n)?.trim().parse().map_err(|e| Error::Config(format!("csv row {}: {e}", line + 2)))?;
        let im: f64 = parse(grid.n + 1)?.trim().parse().map_err(|e| Error::Config(format!("csv row {}: {e}", line + 2)))?;
        let idx = grid
            .index_of(&coords)
            .ok_or_else(|| Error::Range(format!("csv row {}: mode {coords:?} outside grid", line + 2)))?;
        field.coeffs[idx] = Complex64::new(re, im);
    }
    Ok(field)
}

fn parse_grid_comment(line: &str) -> Result<GridSpec> {
    let body = line
        .strip_prefix("# grid")
        .ok_or_else(|| Error::Config("csv field: first line must be '# grid n=.. M=.. K=..'".into()))?;
    let mut vals = [None; 3];
    for tok in body.split_whitespace() {
        let (key, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("csv field: bad grid token '{tok}'")))?;
        let v: usize = v.parse().map_err(|_| Error::Config(format!("csv field: bad value in '{tok}'")))?;
        match key {
            "n" => vals[0] = Some(v),
            "M" => vals[1] = Some(v),
            "K" => vals[2] = Some(v),
            _ => return Err(Error::Config(format!("csv field: unknown grid key '{key}'"))),
        }
    }
    match vals {
        [Some(n), Some(m), Some(k)] => GridSpec::new(n, m, k),
        _ => Err(Error::Config("csv field: grid header needs n, M and K".into())),
    }
}
