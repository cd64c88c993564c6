//! Trajectory export: CSV for inspection, a column-oriented binary format
//! for long runs.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! "CPTJ" | version u8 = 1 | dim u32 | rows u64 | t0 f64 | dt f64
//! state column 0 (rows × f64) … state column dim−1 | output column
//! ```

use std::io::{Read, Write};

use super::integrate::Trajectory;
use crate::error::{Error, Result};

pub const TRAJ_MAGIC: [u8; 4] = *b"CPTJ";
pub const TRAJ_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 + 8 + 8 + 8;

/// Writes `t,x0,…,x{dim−1},output` rows.
pub fn write_csv<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend((0..traj.dim).map(|i| format!("x{i}")));
    header.push("output".into());
    wr.write_record(&header)?;
    let mut row = Vec::with_capacity(traj.dim + 2);
    for k in 0..traj.len() {
        row.clear();
        row.push(traj.time(k).to_string());
        row.extend(traj.state(k).iter().map(f64::to_string));
        row.push(traj.outputs[k].to_string());
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads the CSV written by [`write_csv`]; the grid is recovered from the
/// first two time stamps.
pub fn read_csv<R: Read>(r: R) -> Result<Trajectory> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    let cols = headers.len();
    if cols < 3 || &headers[0] != "t" || &headers[cols - 1] != "output" {
        return Err(Error::TrajectoryFormat("expected header t,x0,...,output".into()));
    }
    let dim = cols - 2;
    let (mut times, mut states, mut outputs) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].trim().parse().map_err(|_| Error::TrajectoryFormat(format!("bad number '{}'", &rec[i])))
        };
        times.push(parse(0)?);
        for i in 0..dim {
            states.push(parse(i + 1)?);
        }
        outputs.push(parse(cols - 1)?);
    }
    if times.is_empty() {
        return Err(Error::TrajectoryFormat("no rows".into()));
    }
    let dt = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
    Trajectory::new(times[0], dt, dim, states, outputs)
}

pub fn write_binary<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(&TRAJ_MAGIC);
    header.push(TRAJ_VERSION);
    header.extend_from_slice(&(traj.dim as u32).to_le_bytes());
    header.extend_from_slice(&(traj.len() as u64).to_le_bytes());
    header.extend_from_slice(&traj.t0.to_le_bytes());
    header.extend_from_slice(&traj.dt.to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(traj.len() * 8);
    for c in 0..traj.dim {
        buf.clear();
        for k in 0..traj.len() {
            buf.extend_from_slice(&traj.states[k * traj.dim + c].to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    buf.clear();
    for v in &traj.outputs {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Trajectory> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).map_err(|_| Error::TrajectoryFormat("truncated header".into()))?;
    if header[..4] != TRAJ_MAGIC {
        return Err(Error::TrajectoryFormat(format!("bad magic {:02x?}", &header[..4])));
    }
    if header[4] != TRAJ_VERSION {
        return Err(Error::TrajectoryFormat(format!("unsupported version {}", header[4])));
    }
    let dim = u32::from_le_bytes(header[5..9].try_into().unwrap()) as usize;
    let rows = u64::from_le_bytes(header[9..17].try_into().unwrap()) as usize;
    let t0 = f64::from_le_bytes(header[17..25].try_into().unwrap());
    let dt = f64::from_le_bytes(header[25..33].try_into().unwrap());
    let body_len = rows
        .checked_mul(dim + 1)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::TrajectoryFormat("row count overflows".into()))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != body_len {
        return Err(Error::TrajectoryFormat(format!("expected {body_len} data bytes, found {}", body.len())));
    }
    let col = |c: usize, k: usize| {
        let o = (c * rows + k) * 8;
        f64::from_le_bytes(body[o..o + 8].try_into().unwrap())
    };
    let mut states = Vec::with_capacity(rows * dim);
    for k in 0..rows {
        for c in 0..dim {
            states.push(col(c, k));
        }
    }
    let outputs = (0..rows).map(|k| col(dim, k)).collect();
    Trajectory::new(t0, dt, dim, states, outputs)
}

/// Loads a trajectory, choosing the format from the leading magic bytes.
pub fn read_path(path: &std::path::Path) -> Result<Trajectory> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(&TRAJ_MAGIC) {
        read_binary(&bytes[..])
    } else {
        read_csv(&bytes[..])
    }
}
