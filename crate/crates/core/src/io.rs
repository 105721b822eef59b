//! Flat binary container and CSV export for fields.
//!
//! Binary layout, all little-endian 64-bit:
//!
//! | offset | content                 |
//! |--------|-------------------------|
//! | 0      | `d` (u64)               |
//! | 8      | `n` per dimension (u64) |
//! | 16     | box length `L` (f64)    |
//! | 24     | `n_time` (u64)          |
//! | 32     | `dt` (f64)              |
//! | 40     | payload: `re, im` (f64) per sample, row-major, time-major |
//!
//! A single [`Field`] is written with the `n_time`/`dt` of its grid but
//! carries exactly `n^d` samples; a [`SpaceTimeField`] carries
//! `n_time · n^d`. The time origin of a space-time field is not part of the
//! container and travels in the caller's sidecar manifest.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, SpaceTimeField};
use crate::grid::Grid;

pub const HEADER_LEN: usize = 40;

fn write_header<W: Write>(w: &mut W, grid: &Grid) -> Result<()> {
    w.write_all(&(grid.dim() as u64).to_le_bytes())?;
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    w.write_all(&grid.box_length().to_le_bytes())?;
    w.write_all(&(grid.n_time() as u64).to_le_bytes())?;
    w.write_all(&grid.dt().to_le_bytes())?;
    Ok(())
}

fn write_payload<W: Write>(w: &mut W, values: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 16);
    for z in values {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u64(bytes: &[u8]) -> u64 {
    u64::from_le_bytes(bytes.try_into().expect("8 bytes"))
}

fn read_f64(bytes: &[u8]) -> f64 {
    f64::from_le_bytes(bytes.try_into().expect("8 bytes"))
}

fn read_container<R: Read>(r: &mut R) -> Result<(Grid, Vec<Complex64>)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format {
            what: "field container",
            reason: format!("{} bytes is shorter than the {HEADER_LEN}-byte header", bytes.len()),
        });
    }
    let to_usize = |v: u64, name: &str| {
        usize::try_from(v).map_err(|_| Error::Format {
            what: "field container",
            reason: format!("{name} = {v} does not fit in memory"),
        })
    };
    let dim = to_usize(read_u64(&bytes[0..8]), "d")?;
    let n = to_usize(read_u64(&bytes[8..16]), "n")?;
    let box_length = read_f64(&bytes[16..24]);
    let n_time = to_usize(read_u64(&bytes[24..32]), "n_time")?;
    let dt = read_f64(&bytes[32..40]);
    let grid = Grid::new(dim, n, box_length, n_time, dt)?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() % 16 != 0 {
        return Err(Error::Format {
            what: "field container",
            reason: "payload is not a whole number of complex samples".into(),
        });
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| Complex64::new(read_f64(&c[..8]), read_f64(&c[8..])))
        .collect();
    Ok((grid, values))
}

pub fn write_field<W: Write>(w: &mut W, f: &Field) -> Result<()> {
    write_header(w, f.grid())?;
    write_payload(w, f.values())
}

pub fn read_field<R: Read>(r: &mut R) -> Result<Field> {
    let (grid, values) = read_container(r)?;
    if values.len() != grid.len() {
        return Err(Error::Format {
            what: "field container",
            reason: format!("expected {} samples, found {}", grid.len(), values.len()),
        });
    }
    Field::new(grid, values)
}

pub fn write_spacetime<W: Write>(w: &mut W, u: &SpaceTimeField) -> Result<()> {
    write_header(w, u.grid())?;
    write_payload(w, u.values())
}

pub fn read_spacetime<R: Read>(r: &mut R, t0: f64) -> Result<SpaceTimeField> {
    let (grid, values) = read_container(r)?;
    if values.len() != grid.len() * grid.n_time() {
        return Err(Error::Format {
            what: "space-time container",
            reason: format!("expected {} samples, found {}", grid.len() * grid.n_time(), values.len()),
        });
    }
    SpaceTimeField::new(grid, t0, values)
}

/// Grids above this many points are refused by the CSV writer.
pub const CSV_MAX_POINTS: usize = 1 << 16;

/// One row per sample: `x0..x{d-1}, re, im`.
pub fn write_field_csv<W: Write>(w: W, f: &Field) -> Result<()> {
    let grid = f.grid();
    if grid.len() > CSV_MAX_POINTS {
        return Err(Error::param(
            "grid",
            format!("{} points is too many for CSV export (max {CSV_MAX_POINTS})", grid.len()),
        ));
    }
    let d = grid.dim();
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    header.push("re".into());
    header.push("im".into());
    out.write_record(&header)?;
    for (j, z) in f.values().iter().enumerate() {
        let x = grid.position(j);
        let mut row: Vec<String> = x[..d].iter().map(|v| format!("{v:.17e}")).collect();
        row.push(format!("{:.17e}", z.re));
        row.push(format!("{:.17e}", z.im));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_little_endian_u64_f64() {
        let grid = Grid::new(2, 8, 3.5, 4, 0.25).unwrap();
        let f = Field::from_fn(grid, |x| Complex64::new(x[0], x[1])).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 64 * 16);
        assert_eq!(&buf[0..8], &2u64.to_le_bytes());
        assert_eq!(&buf[8..16], &8u64.to_le_bytes());
        assert_eq!(&buf[16..24], &3.5f64.to_le_bytes());
        assert_eq!(&buf[24..32], &4u64.to_le_bytes());
        assert_eq!(&buf[32..40], &0.25f64.to_le_bytes());
        let back = read_field(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let grid = Grid::spatial(1, 8, 1.0).unwrap();
        let f = Field::zeros(grid);
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        buf.truncate(buf.len() - 16);
        assert!(read_field(&mut buf.as_slice()).is_err());
        assert!(read_field(&mut &buf[..10]).is_err());
    }

    #[test]
    fn spacetime_round_trip() {
        let grid = Grid::new(1, 8, 2.0, 3, 0.5).unwrap();
        let u = SpaceTimeField::from_fn(grid, -0.5, |t, x| Complex64::new(t, x[0])).unwrap();
        let mut buf = Vec::new();
        write_spacetime(&mut buf, &u).unwrap();
        assert_eq!(read_spacetime(&mut buf.as_slice(), -0.5).unwrap(), u);
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let grid = Grid::spatial(2, 8, 1.0).unwrap();
        let f = Field::zeros(grid);
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(text.starts_with("x0,x1,re,im"));
    }
}
