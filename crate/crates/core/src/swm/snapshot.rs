//! Self-describing binary container for final fields.
//!
//! ```text
//! SWMSNAP1\n
//! field=u nx=201 ny=100 order=row-major dtype=f64le count=20100\n
//! <count little-endian binary64 values>
//! field=v ...
//! ```
//!
//! `nx`/`ny` are the array's own dimensions (x fastest).

use std::io::{self, BufRead, Write};

use super::fields::{Fields, Layout};

pub const MAGIC: &[u8] = b"SWMSNAP1\n";

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotField {
    pub name: String,
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
}

fn write_field(
    w: &mut impl Write,
    name: &str,
    nx: usize,
    ny: usize,
    data: &[f64],
) -> io::Result<()> {
    debug_assert_eq!(nx * ny, data.len());
    writeln!(
        w,
        "field={name} nx={nx} ny={ny} order=row-major dtype=f64le count={}",
        data.len()
    )?;
    for x in data {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_fields(w: &mut impl Write, f: &Fields<f64>) -> io::Result<()> {
    let Layout { nx, ny } = f.layout;
    w.write_all(MAGIC)?;
    write_field(w, "u", nx + 1, ny, f.u())?;
    write_field(w, "v", nx, ny + 1, f.v())?;
    write_field(w, "eta", nx, ny, f.eta())?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn read_snapshot(r: &mut impl BufRead) -> io::Result<Vec<SnapshotField>> {
    let mut magic = [0u8; MAGIC.len()];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(bad("not a snapshot file"));
    }
    let mut out = Vec::new();
    loop {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Ok(out);
        }
        let mut name = None;
        let (mut nx, mut ny, mut count) = (None, None, None);
        for kv in line.trim_end().split(' ') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed header `{kv}`")))?;
            let num = || {
                v.parse::<usize>()
                    .map_err(|_| bad(format!("bad number in `{kv}`")))
            };
            match k {
                "field" => name = Some(v.to_string()),
                "nx" => nx = Some(num()?),
                "ny" => ny = Some(num()?),
                "count" => count = Some(num()?),
                "order" if v == "row-major" => {}
                "dtype" if v == "f64le" => {}
                _ => return Err(bad(format!("unsupported header entry `{kv}`"))),
            }
        }
        let (Some(name), Some(nx), Some(ny), Some(count)) = (name, nx, ny, count) else {
            return Err(bad("incomplete field header"));
        };
        if nx * ny != count {
            return Err(bad(format!(
                "field {name}: {nx}x{ny} does not match count {count}"
            )));
        }
        let mut bytes = vec![0u8; count * 8];
        r.read_exact(&mut bytes)?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        out.push(SnapshotField { name, nx, ny, data });
    }
}
