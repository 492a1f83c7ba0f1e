//! Path serialization: a two-column CSV and the `FSEL` binary column format.
//!
//! Binary layout (all little-endian):
//!
//! ```text
//! magic   [u8; 4]  = b"FSEL"
//! version u32      = 1
//! n       u64      number of steps (n + 1 values follow)
//! dt      f64
//! t0      f64
//! values  [f64; n + 1]
//! ```

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::grid::{Path, TimeGrid};

pub const MAGIC: &[u8; 4] = b"FSEL";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_csv<W: Write>(path: &Path, mut out: W) -> Result<()> {
    writeln!(out, "t,value")?;
    for (t, v) in path.grid().times().zip(path.values()) {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

/// Reads a `t,value` CSV. The times must form a uniform grid.
pub fn read_csv<R: BufRead>(input: R) -> Result<Path> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if lineno == 0 {
            if line != "t,value" {
                return Err(Error::Format(format!("expected header `t,value`, got `{line}`")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("line {}: expected two columns", lineno + 1)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))
        };
        times.push(parse(t)?);
        values.push(parse(v)?);
    }
    if times.len() < 2 {
        return Err(Error::Format("a path needs at least two rows".into()));
    }
    let n = times.len() - 1;
    let grid = TimeGrid::spanning(times[0], times[n], n)?;
    for (k, &t) in times.iter().enumerate() {
        if (t - grid.time(k)).abs() > 1e-9 * (1.0 + t.abs()) {
            return Err(Error::Format(format!("row {k}: time {t} breaks the uniform grid")));
        }
    }
    Path::new(grid, values)
}

pub fn write_binary<W: Write>(path: &Path, mut out: W) -> Result<()> {
    let g = path.grid();
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&(g.n() as u64).to_le_bytes())?;
    out.write_all(&g.dt().to_le_bytes())?;
    out.write_all(&g.t0().to_le_bytes())?;
    for v in path.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Path> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    input.read_exact(&mut b8)?;
    let n = usize::try_from(u64::from_le_bytes(b8))
        .map_err(|_| Error::Format("step count overflows usize".into()))?;
    input.read_exact(&mut b8)?;
    let dt = f64::from_le_bytes(b8);
    input.read_exact(&mut b8)?;
    let t0 = f64::from_le_bytes(b8);
    let grid = TimeGrid::new(t0, dt, n)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        input.read_exact(&mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    Path::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_header_layout() {
        let g = TimeGrid::new(-1.0, 0.5, 2).unwrap();
        let p = Path::new(g, vec![1.0, 2.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_binary(&p, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 8 + 8 + 3 * 8);
        assert_eq!(&buf[..4], b"FSEL");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 0.5);
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), -1.0);
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), 1.0);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(read_binary(&b"FSEX\x01\0\0\0"[..]).is_err());
        let g = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let mut buf = Vec::new();
        write_binary(&Path::zeros(g), &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_binary(&buf[..]).is_err());
    }

    #[test]
    fn csv_rejects_non_uniform_times() {
        let text = "t,value\n0,1\n0.5,2\n1.2,3\n";
        assert!(read_csv(text.as_bytes()).is_err());
        assert!(read_csv("x,y\n0,1\n1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn binary_and_csv_round_trip(
            t0 in -100.0f64..100.0,
            dt in 1e-4f64..10.0,
            vals in prop::collection::vec(-1e6f64..1e6, 2..64),
        ) {
            let g = TimeGrid::new(t0, dt, vals.len() - 1).unwrap();
            let p = Path::new(g, vals).unwrap();
            let mut buf = Vec::new();
            write_binary(&p, &mut buf).unwrap();
            prop_assert_eq!(&read_binary(&buf[..]).unwrap(), &p);

            let mut text = Vec::new();
            write_csv(&p, &mut text).unwrap();
            let back = read_csv(&text[..]).unwrap();
            prop_assert_eq!(back.values(), p.values());
        }
    }
}
